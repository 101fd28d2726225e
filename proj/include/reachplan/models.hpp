#pragma once

#include <Eigen/Dense>
#include <vector>

namespace reachplan {

// Wraps an angle to (-pi, pi].
double wrap_angle(double theta);

// Planar Dubins state: position in meters, heading in radians.
struct VehicleState {
    double x1 = 0.0;
    double x2 = 0.0;
    double theta = 0.0;

    VehicleState() = default;
    VehicleState(double x1_, double x2_, double theta_)
        : x1(x1_), x2(x2_), theta(wrap_angle(theta_)) {}

    Eigen::Vector3d vec() const { return {x1, x2, theta}; }
    static VehicleState from_vec(const Eigen::Vector3d& v) {
        return {v(0), v(1), v(2)};
    }
    Eigen::Vector2d position() const { return {x1, x2}; }
};

struct ControlInput {
    double v = 0.0;      // forward speed, m/s, >= 0
    double omega = 0.0;  // turn rate, rad/s

    ControlInput() = default;
    ControlInput(double v_, double omega_);

    Eigen::Vector2d vec() const { return {v, omega}; }
};

struct NoiseConfig {
    Eigen::Matrix3d q = (Eigen::Vector3d(0.01, 0.01, 0.001)).asDiagonal();
    double sigma_rho = 5.0;      // zenith pseudorange variance, m^2
    double heading_var = 0.001;  // rad^2
    double dt = 0.2;             // s

    void validate() const;
};

// Zero-mean Gaussian stand-in for a bounded Lagrange remainder term.
struct RemainderGaussian {
    Eigen::MatrixXd covariance;
};

// Satellite position in the local frame whose origin sits at the flight
// altitude above the scene anchor (receiver z = 0 by construction).
using SatPosition = Eigen::Vector3d;

VehicleState step_dynamics(const VehicleState& x, const ControlInput& u, double dt);

// A = df/dx (3x3), B = df/du (3x2), evaluated at the given state/input.
void jacobians_dynamics(const VehicleState& x, const ControlInput& u, double dt,
                        Eigen::Matrix3d& a, Eigen::Matrix<double, 3, 2>& b);

// [ranges to each satellite; heading]. Zero clock bias.
Eigen::VectorXd measurement(const VehicleState& x,
                            const std::vector<SatPosition>& sats);

// dh/dx, (N+1) x 3. Requires every range > 1 m.
Eigen::MatrixXd jacobian_measurement(const VehicleState& x,
                                     const std::vector<SatPosition>& sats);

// Per-coordinate bound 0.5 * gamma^T |H_i| gamma on the dynamics
// linearization remainder over the deviation box, with gamma stacking the
// state and input half-widths and |H_i| an elementwise Hessian bound over
// the box. theta_nom centers the heading interval for the trig extrema.
Eigen::Vector3d remainder_bound_dynamics(const Eigen::Vector3d& state_radius,
                                         const Eigen::Vector2d& input_radius,
                                         const ControlInput& u_nom, double dt,
                                         double theta_nom);

// Same for the measurement model; the range Hessian is bounded by 2/r over
// the box, the heading row is linear and contributes zero.
Eigen::VectorXd remainder_bound_measurement(const Eigen::Vector2d& position_radius,
                                            const VehicleState& x_nom,
                                            const std::vector<SatPosition>& sats);

// Diagonal Gaussian with sigma_i = bound_i / divisor (three-sigma matching).
RemainderGaussian remainder_to_gaussian(const Eigen::VectorXd& bound,
                                        double divisor = 3.0);

}  // namespace reachplan
