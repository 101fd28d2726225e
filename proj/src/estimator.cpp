#include "reachplan/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace reachplan {

namespace {

Eigen::Matrix3d symmetrize(const Eigen::Matrix3d& m) {
    return 0.5 * (m + m.transpose());
}

}  // namespace

Eigen::VectorXd overbound_measurement_cov(const Eigen::VectorXd& r_diag,
                                          const Eigen::VectorXd& bias_bound,
                                          double q_sigma) {
    if (r_diag.size() != bias_bound.size()) {
        throw std::invalid_argument("overbound_measurement_cov: size mismatch");
    }
    if (r_diag.minCoeff() <= 0.0) {
        throw std::invalid_argument("overbound_measurement_cov: variances must be > 0");
    }
    if (bias_bound.minCoeff() < 0.0) {
        throw std::invalid_argument("overbound_measurement_cov: bias bounds must be >= 0");
    }
    if (q_sigma <= 0.0) {
        throw std::invalid_argument("overbound_measurement_cov: q_sigma must be > 0");
    }
    Eigen::VectorXd out(r_diag.size());
    for (int i = 0; i < r_diag.size(); ++i) {
        const double s = std::sqrt(r_diag(i)) + bias_bound(i) / q_sigma;
        out(i) = s * s;
    }
    return out;
}

FilterState predict(const FilterState& f, const ControlInput& u,
                    const Eigen::Matrix3d& q, double dt,
                    const VehicleState& lin_state) {
    Eigen::Matrix3d a;
    Eigen::Matrix<double, 3, 2> b;
    jacobians_dynamics(lin_state, u, dt, a, b);
    FilterState out;
    out.estimate = step_dynamics(f.estimate, u, dt);
    out.covariance = symmetrize(a * f.covariance * a.transpose() + q);
    return out;
}

FilterState predict(const FilterState& f, const ControlInput& u,
                    const Eigen::Matrix3d& q, double dt) {
    return predict(f, u, q, dt, f.estimate);
}

FilterState correct(const FilterState& f, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& z_pred, const Eigen::MatrixXd& c,
                    const Eigen::VectorXd& r_hat_diag,
                    const std::vector<int>& wrap_rows) {
    const int m = static_cast<int>(z.size());
    if (z_pred.size() != m || c.rows() != m || r_hat_diag.size() != m) {
        throw std::invalid_argument("correct: measurement dimension mismatch");
    }
    if (m > 0 && r_hat_diag.minCoeff() <= 0.0) {
        throw std::invalid_argument("correct: R_hat must have positive diagonal");
    }
    if (m == 0) {
        return f;
    }
    Eigen::MatrixXd s = c * f.covariance * c.transpose();
    s += Eigen::MatrixXd(r_hat_diag.asDiagonal());
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("correct: innovation covariance solve failed");
    }
    const Eigen::MatrixXd gain = llt.solve(c * f.covariance).transpose();  // 3 x m

    Eigen::VectorXd innov = z - z_pred;
    for (int row : wrap_rows) {
        innov(row) = wrap_angle(innov(row));
    }
    const Eigen::Vector3d dx = gain * innov;

    FilterState out;
    out.estimate = VehicleState(f.estimate.x1 + dx(0), f.estimate.x2 + dx(1),
                                f.estimate.theta + dx(2));
    out.covariance =
        symmetrize((Eigen::Matrix3d::Identity() - gain * c) * f.covariance);
    return out;
}

FilterState correct(const FilterState& f, const Eigen::VectorXd& z,
                    const std::vector<SatPosition>& sats,
                    const Eigen::VectorXd& r_hat_diag) {
    const Eigen::MatrixXd c = jacobian_measurement(f.estimate, sats);
    const Eigen::VectorXd z_pred = measurement(f.estimate, sats);
    return correct(f, z, z_pred, c, r_hat_diag,
                   {static_cast<int>(z.size()) - 1});
}

std::vector<ScheduleEntry> precompute_schedule(
    const std::vector<VehicleState>& states,
    const std::vector<ControlInput>& inputs,
    const std::vector<Eigen::Matrix<double, 2, 3>>& gains,
    const GnssEnvironment& env, int start_step,
    const Eigen::Matrix3d& p0, const NoiseConfig& noise,
    const ScheduleConfig& cfg) {
    if (states.empty()) {
        throw std::invalid_argument("precompute_schedule: empty nominal trajectory");
    }
    if (inputs.size() + 1 != states.size() || gains.size() != inputs.size()) {
        throw std::invalid_argument("precompute_schedule: sequence length mismatch");
    }
    noise.validate();

    std::vector<ScheduleEntry> schedule;
    schedule.reserve(inputs.size());
    Eigen::Matrix3d p = symmetrize(p0);

    for (size_t k = 0; k < inputs.size(); ++k) {
        ScheduleEntry e;
        e.x_nom_prev = states[k];
        e.u_nom_prev = inputs[k];
        e.x_nom = states[k + 1];
        e.feedback_k = gains[k];
        jacobians_dynamics(e.x_nom_prev, e.u_nom_prev, noise.dt, e.a, e.b);

        const int abs_step = start_step + static_cast<int>(k) + 1;
        const auto sats = env.snapshot(e.x_nom.position(), abs_step);
        const int n_sat = static_cast<int>(sats.size());
        const int m = n_sat + 1;

        e.r_true.resize(m);
        e.bias_bound.resize(m);
        e.sat_positions.reserve(static_cast<size_t>(n_sat));
        for (int i = 0; i < n_sat; ++i) {
            e.visible_sats.push_back(sats[static_cast<size_t>(i)].prn);
            e.sat_positions.push_back(sats[static_cast<size_t>(i)].pos_flight_local);
            e.r_true(i) = sats[static_cast<size_t>(i)].noise_var;
            e.bias_bound(i) = sats[static_cast<size_t>(i)].bias_bound;
        }
        e.r_true(n_sat) = env.heading_noise_var();
        e.bias_bound(n_sat) = 0.0;
        e.r_hat = overbound_measurement_cov(e.r_true, e.bias_bound, cfg.q_sigma);
        e.c = jacobian_measurement(e.x_nom, e.sat_positions);

        // Covariance recursion with Jacobians pinned to the nominal.
        Eigen::Matrix3d p_pred = symmetrize(e.a * p * e.a.transpose() + noise.q);
        Eigen::MatrixXd s = e.c * p_pred * e.c.transpose();
        s += Eigen::MatrixXd(e.r_hat.asDiagonal());
        Eigen::LLT<Eigen::MatrixXd> llt(s);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("precompute_schedule: innovation solve failed");
        }
        e.gain_l = llt.solve(e.c * p_pred).transpose();
        p = symmetrize((Eigen::Matrix3d::Identity() - e.gain_l * e.c) * p_pred);
        e.p_post = p;

        schedule.push_back(std::move(e));
    }
    return schedule;
}

}  // namespace reachplan
