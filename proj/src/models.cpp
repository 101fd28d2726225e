#include "reachplan/models.hpp"

#include <cmath>
#include <stdexcept>

namespace reachplan {

double wrap_angle(double theta) {
    double w = std::remainder(theta, 2.0 * M_PI);
    if (w <= -M_PI) {
        w += 2.0 * M_PI;
    }
    return w;
}

ControlInput::ControlInput(double v_, double omega_) : v(v_), omega(omega_) {
    if (v < 0.0) {
        throw std::invalid_argument("control input: forward speed must be >= 0");
    }
}

void NoiseConfig::validate() const {
    if (dt <= 0.0) {
        throw std::invalid_argument("noise config: dt must be positive");
    }
    if ((q - q.transpose()).norm() > 1e-9 * std::max(1.0, q.norm())) {
        throw std::invalid_argument("noise config: Q must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(q, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) {
        throw std::invalid_argument("noise config: Q must be PSD");
    }
    if (sigma_rho <= 0.0 || heading_var <= 0.0) {
        throw std::invalid_argument("noise config: variances must be positive");
    }
}

VehicleState step_dynamics(const VehicleState& x, const ControlInput& u, double dt) {
    if (dt <= 0.0) {
        throw std::invalid_argument("step_dynamics: dt must be positive");
    }
    return {x.x1 + u.v * std::cos(x.theta) * dt,
            x.x2 + u.v * std::sin(x.theta) * dt,
            x.theta + u.omega * dt};
}

void jacobians_dynamics(const VehicleState& x, const ControlInput& u, double dt,
                        Eigen::Matrix3d& a, Eigen::Matrix<double, 3, 2>& b) {
    const double c = std::cos(x.theta);
    const double s = std::sin(x.theta);
    a.setIdentity();
    a(0, 2) = -u.v * s * dt;
    a(1, 2) = u.v * c * dt;
    b.setZero();
    b(0, 0) = c * dt;
    b(1, 0) = s * dt;
    b(2, 1) = dt;
}

Eigen::VectorXd measurement(const VehicleState& x,
                            const std::vector<SatPosition>& sats) {
    const int n = static_cast<int>(sats.size());
    Eigen::VectorXd z(n + 1);
    const Eigen::Vector3d rx(x.x1, x.x2, 0.0);
    for (int i = 0; i < n; ++i) {
        z(i) = (sats[i] - rx).norm();
    }
    z(n) = x.theta;
    return z;
}

Eigen::MatrixXd jacobian_measurement(const VehicleState& x,
                                     const std::vector<SatPosition>& sats) {
    const int n = static_cast<int>(sats.size());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n + 1, 3);
    const Eigen::Vector3d rx(x.x1, x.x2, 0.0);
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d los = sats[i] - rx;
        const double r = los.norm();
        if (r <= 1.0) {
            throw std::invalid_argument("jacobian_measurement: degenerate range");
        }
        c(i, 0) = -los(0) / r;
        c(i, 1) = -los(1) / r;
    }
    c(n, 2) = 1.0;
    return c;
}

namespace {

// max |cos| over [theta - r, theta + r]
double max_abs_cos(double theta, double r) {
    if (r >= M_PI) {
        return 1.0;
    }
    // 1 is attained iff the interval contains a multiple of pi.
    const double lo = theta - r;
    const double hi = theta + r;
    if (std::floor(hi / M_PI) >= std::ceil(lo / M_PI)) {
        return 1.0;
    }
    return std::max(std::fabs(std::cos(lo)), std::fabs(std::cos(hi)));
}

double max_abs_sin(double theta, double r) {
    return max_abs_cos(theta - M_PI / 2.0, r);
}

}  // namespace

Eigen::Vector3d remainder_bound_dynamics(const Eigen::Vector3d& state_radius,
                                         const Eigen::Vector2d& input_radius,
                                         const ControlInput& u_nom, double dt,
                                         double theta_nom) {
    if (state_radius.minCoeff() < 0.0 || input_radius.minCoeff() < 0.0) {
        throw std::invalid_argument("remainder_bound_dynamics: radii must be >= 0");
    }
    const double r_theta = state_radius(2);
    const double r_v = input_radius(0);
    const double v_max = std::fabs(u_nom.v) + r_v;
    const double mc = max_abs_cos(theta_nom, r_theta);
    const double ms = max_abs_sin(theta_nom, r_theta);
    // Nonzero Hessian entries of f over s = [x1 x2 theta V omega]:
    //   f1: d2/dtheta2 = -V cos(theta) dt, d2/(dtheta dV) = -sin(theta) dt
    //   f2: d2/dtheta2 = -V sin(theta) dt, d2/(dtheta dV) =  cos(theta) dt
    //   f3: linear.
    Eigen::Vector3d bound;
    bound(0) = 0.5 * dt * (r_theta * r_theta * v_max * mc + 2.0 * r_theta * r_v * ms);
    bound(1) = 0.5 * dt * (r_theta * r_theta * v_max * ms + 2.0 * r_theta * r_v * mc);
    bound(2) = 0.0;
    return bound;
}

RemainderGaussian remainder_to_gaussian(const Eigen::VectorXd& bound, double divisor) {
    if (divisor <= 0.0) {
        throw std::invalid_argument("remainder_to_gaussian: divisor must be positive");
    }
    Eigen::VectorXd sigma = bound / divisor;
    RemainderGaussian out;
    out.covariance = sigma.array().square().matrix().asDiagonal();
    return out;
}

Eigen::VectorXd remainder_bound_measurement(const Eigen::Vector2d& position_radius,
                                            const VehicleState& x_nom,
                                            const std::vector<SatPosition>& sats) {
    if (position_radius.minCoeff() < 0.0) {
        throw std::invalid_argument("remainder_bound_measurement: radii must be >= 0");
    }
    const int n = static_cast<int>(sats.size());
    Eigen::VectorXd bound = Eigen::VectorXd::Zero(n + 1);
    const Eigen::Vector3d rx(x_nom.x1, x_nom.x2, 0.0);
    const double gamma_sq = position_radius.squaredNorm();
    for (int i = 0; i < n; ++i) {
        const double r = (sats[i] - rx).norm();
        if (r <= 1.0) {
            throw std::invalid_argument("remainder_bound_measurement: degenerate range");
        }
        // 0.5 * gamma^T (2/r I) gamma = |gamma|^2 / r; the factor 2/r covers
        // the Hessian of the range over the whole box provided r >> radius.
        bound(i) = gamma_sq / r;
    }
    return bound;
}

}  // namespace reachplan
