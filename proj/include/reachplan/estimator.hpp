#pragma once

#include <Eigen/Dense>
#include <vector>

#include "reachplan/gnss.hpp"
#include "reachplan/models.hpp"

namespace reachplan {

struct FilterState {
    VehicleState estimate;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

// Per-step linearization and filter matrices along a nominal trajectory.
// The entry consumed at the step-k update carries the step k-1 dynamics
// (A, B, K at x_nom_prev) together with the step-k filter matrices
// (C, L, R at x_nom).
struct ScheduleEntry {
    Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
    Eigen::Matrix<double, 3, 2> b = Eigen::Matrix<double, 3, 2>::Zero();
    Eigen::Matrix<double, 2, 3> feedback_k = Eigen::Matrix<double, 2, 3>::Zero();
    Eigen::MatrixXd c;        // (N_k+1) x 3
    Eigen::MatrixXd gain_l;   // 3 x (N_k+1)
    Eigen::VectorXd r_hat;    // filter (over-bounded) variances, diagonal
    Eigen::VectorXd r_true;   // actual sensing variances, diagonal
    Eigen::VectorXd bias_bound;  // per-channel bias bounds (heading = 0)
    std::vector<int> visible_sats;
    std::vector<SatPosition> sat_positions;  // flight-local
    VehicleState x_nom;       // nominal state at step k
    VehicleState x_nom_prev;  // nominal state at step k-1
    ControlInput u_nom_prev;  // nominal input applied from k-1 to k
    Eigen::Matrix3d p_post = Eigen::Matrix3d::Zero();  // filter covariance after the update

    int meas_dim() const { return static_cast<int>(r_hat.size()); }
};

// Inflated measurement standard deviation whose q_sigma tail covers the
// q_sigma tail of a distribution biased by up to bias_bound:
// sqrt(R_hat) = sqrt(R) + b / q_sigma, per channel.
Eigen::VectorXd overbound_measurement_cov(const Eigen::VectorXd& r_diag,
                                          const Eigen::VectorXd& bias_bound,
                                          double q_sigma = 3.0);

// EKF prediction. The covariance Jacobian is evaluated at lin_state so the
// offline schedule and the online filter can share identical matrices.
FilterState predict(const FilterState& f, const ControlInput& u,
                    const Eigen::Matrix3d& q, double dt,
                    const VehicleState& lin_state);
FilterState predict(const FilterState& f, const ControlInput& u,
                    const Eigen::Matrix3d& q, double dt);

// EKF correction with explicit matrices: gain from the innovation-covariance
// solve (LLT; failure signals degenerate geometry), covariance (I - LC) P.
// wrap_rows marks innovation components that are angles.
FilterState correct(const FilterState& f, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& z_pred, const Eigen::MatrixXd& c,
                    const Eigen::VectorXd& r_hat_diag,
                    const std::vector<int>& wrap_rows = {});

// Convenience overload: builds C and the predicted measurement from the
// satellite geometry at the filter estimate; wraps the heading innovation.
FilterState correct(const FilterState& f, const Eigen::VectorXd& z,
                    const std::vector<SatPosition>& sats,
                    const Eigen::VectorXd& r_hat_diag);

struct ScheduleConfig {
    double q_sigma = 3.0;  // over-bounding tail level
};

// Runs the covariance recursion offline along a nominal trajectory,
// producing per-step filter matrices. states has T+1 entries, inputs and
// gains have T; the result has one entry per transition (T entries).
// start_step indexes the absolute epoch for satellite geometry.
std::vector<ScheduleEntry> precompute_schedule(
    const std::vector<VehicleState>& states,
    const std::vector<ControlInput>& inputs,
    const std::vector<Eigen::Matrix<double, 2, 3>>& gains,
    const GnssEnvironment& env, int start_step,
    const Eigen::Matrix3d& p0, const NoiseConfig& noise,
    const ScheduleConfig& cfg = {});

}  // namespace reachplan
