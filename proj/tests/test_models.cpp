#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "reachplan/models.hpp"

using namespace reachplan;

namespace {

// Central finite differences of step_dynamics.
void fd_jacobians(const VehicleState& x, const ControlInput& u, double dt,
                  Eigen::Matrix3d& a, Eigen::Matrix<double, 3, 2>& b) {
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
        Eigen::Vector3d xp = x.vec(), xm = x.vec();
        xp(j) += h;
        xm(j) -= h;
        const Eigen::Vector3d fp =
            step_dynamics(VehicleState::from_vec(xp), u, dt).vec();
        const Eigen::Vector3d fm =
            step_dynamics(VehicleState::from_vec(xm), u, dt).vec();
        a.col(j) = (fp - fm) / (2.0 * h);
    }
    for (int j = 0; j < 2; ++j) {
        Eigen::Vector2d up = u.vec(), um = u.vec();
        up(j) += h;
        um(j) -= h;
        const Eigen::Vector3d fp =
            step_dynamics(x, ControlInput(up(0), up(1)), dt).vec();
        const Eigen::Vector3d fm =
            step_dynamics(x, ControlInput(um(0), um(1)), dt).vec();
        b.col(j) = (fp - fm) / (2.0 * h);
    }
}

// Exact dynamics residual against the first-order model.
Eigen::Vector3d dynamics_residual(const VehicleState& x0, const ControlInput& u0,
                                  const Eigen::Vector3d& dx, const Eigen::Vector2d& du,
                                  double dt) {
    Eigen::Matrix3d a;
    Eigen::Matrix<double, 3, 2> b;
    jacobians_dynamics(x0, u0, dt, a, b);
    const VehicleState xs(x0.x1 + dx(0), x0.x2 + dx(1), x0.theta + dx(2));
    const ControlInput us(u0.v + du(0), u0.omega + du(1));
    // Bypass wrapping for the comparison: compose the raw update.
    Eigen::Vector3d f_exact;
    f_exact << xs.x1 + us.v * std::cos(xs.theta) * dt,
        xs.x2 + us.v * std::sin(xs.theta) * dt, xs.theta + us.omega * dt;
    Eigen::Vector3d f_nom;
    f_nom << x0.x1 + u0.v * std::cos(x0.theta) * dt,
        x0.x2 + u0.v * std::sin(x0.theta) * dt, x0.theta + u0.omega * dt;
    return f_exact - f_nom - a * dx - b * du;
}

}  // namespace

TEST_CASE("step dynamics closed-form cases") {
    const VehicleState a = step_dynamics({0, 0, 0}, ControlInput(10, 0), 0.2);
    CHECK(a.x1 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(a.x2 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.theta == doctest::Approx(0.0).epsilon(1e-12));

    const VehicleState b = step_dynamics({0, 0, M_PI / 2}, ControlInput(10, 0), 0.2);
    CHECK(b.x1 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b.x2 == doctest::Approx(2.0).epsilon(1e-12));

    const VehicleState c = step_dynamics({0, 0, 0}, ControlInput(0, 1), 0.2);
    CHECK(c.theta == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(c.x1 == 0.0);

    CHECK_THROWS(step_dynamics({0, 0, 0}, ControlInput(1, 0), 0.0));
}

TEST_CASE("straight motion is exact") {
    VehicleState x(3, -4, 0.7);
    const double v = 12.5, dt = 0.2;
    for (int k = 0; k < 500; ++k) {
        x = step_dynamics(x, ControlInput(v, 0), dt);
    }
    const double dist = std::hypot(x.x1 - 3, x.x2 + 4);
    CHECK(dist == doctest::Approx(v * dt * 500).epsilon(1e-12));
    CHECK(x.theta == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("angle normalization") {
    CHECK(wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(0.3) == doctest::Approx(0.3));
    const VehicleState x(0, 0, 5 * M_PI + 0.1);
    CHECK(x.theta == doctest::Approx(wrap_angle(0.1 + M_PI)));
}

TEST_CASE("dynamics jacobians: closed form and finite differences") {
    Eigen::Matrix3d a;
    Eigen::Matrix<double, 3, 2> b;
    jacobians_dynamics({0, 0, 0}, ControlInput(10, 0), 0.2, a, b);
    CHECK(a(1, 2) == doctest::Approx(2.0));
    CHECK(a(0, 2) == doctest::Approx(0.0));
    CHECK(b(0, 0) == doctest::Approx(0.2));
    CHECK(b(1, 0) == doctest::Approx(0.0));
    CHECK(b(2, 1) == doctest::Approx(0.2));

    jacobians_dynamics({1, 2, 0.4}, ControlInput(0, 0.3), 0.2, a, b);
    CHECK(a.isApprox(Eigen::Matrix3d::Identity()));  // V = 0

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const VehicleState x(10 * u(rng), 10 * u(rng), M_PI * u(rng) * 0.99);
        const ControlInput in(10 + 5 * u(rng), 0.5 * u(rng));
        Eigen::Matrix3d a_fd;
        Eigen::Matrix<double, 3, 2> b_fd;
        jacobians_dynamics(x, in, 0.2, a, b);
        fd_jacobians(x, in, 0.2, a_fd, b_fd);
        CHECK((a - a_fd).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((b - b_fd).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("measurement model") {
    std::vector<SatPosition> sats = {{1e6, 0, 0}};
    const Eigen::VectorXd z = measurement({0, 0, 0.3}, sats);
    REQUIRE(z.size() == 2);
    CHECK(z(0) == doctest::Approx(1e6));
    CHECK(z(1) == doctest::Approx(0.3));

    const Eigen::VectorXd z0 = measurement({1, 2, -0.5}, {});
    REQUIRE(z0.size() == 1);
    CHECK(z0(0) == doctest::Approx(-0.5));

    // Co-located satellite: the measurement itself is 0, the jacobian guards.
    std::vector<SatPosition> colocated = {{0, 0, 0}};
    CHECK(measurement({0, 0, 0}, colocated)(0) == doctest::Approx(0.0));
    CHECK_THROWS(jacobian_measurement({0, 0, 0}, colocated));
}

TEST_CASE("measurement jacobian: geometry and finite differences") {
    std::vector<SatPosition> sats = {{2e7, 0, 0}};
    const Eigen::MatrixXd c = jacobian_measurement({0, 0, 0}, sats);
    CHECK(c(0, 0) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(c(0, 1) == doctest::Approx(0.0));
    CHECK(c(0, 2) == doctest::Approx(0.0));
    CHECK(c(1, 0) == doctest::Approx(0.0));
    CHECK(c(1, 2) == doctest::Approx(1.0));

    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const VehicleState x(100 * u(rng), 100 * u(rng), M_PI * u(rng) * 0.99);
        std::vector<SatPosition> s = {
            {2e7 * u(rng) + 1e6, 2e7 * u(rng), 1.5e7 + 5e6 * u(rng)},
            {-1e7, 1.2e7, 1.8e7}};
        const Eigen::MatrixXd cj = jacobian_measurement(x, s);
        const double h = 1.0;  // meters; ranges are ~1e7 so fd is well scaled
        for (int j = 0; j < 2; ++j) {
            Eigen::Vector3d xp = x.vec(), xm = x.vec();
            xp(j) += h;
            xm(j) -= h;
            const Eigen::VectorXd zp = measurement(VehicleState::from_vec(xp), s);
            const Eigen::VectorXd zm = measurement(VehicleState::from_vec(xm), s);
            for (int i = 0; i < 2; ++i) {
                CHECK(cj(i, j) == doctest::Approx((zp(i) - zm(i)) / (2 * h)).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("dynamics remainder bound: trivial zeros") {
    const Eigen::Vector3d zero3 = Eigen::Vector3d::Zero();
    const Eigen::Vector2d zero2 = Eigen::Vector2d::Zero();
    CHECK(remainder_bound_dynamics(zero3, zero2, ControlInput(10, 0), 0.2, 0.0)
              .isZero(0));
    // No heading or speed deviation: position rows are exactly linear.
    const Eigen::Vector3d b = remainder_bound_dynamics(
        {1.0, 1.0, 0.0}, {0.0, 0.5}, ControlInput(10, 0), 0.2, 0.0);
    CHECK(b(0) == doctest::Approx(0.0));
    CHECK(b(1) == doctest::Approx(0.0));
    CHECK(b(2) == doctest::Approx(0.0));
}

TEST_CASE("dynamics remainder bound vs quadratic-form grid search") {
    const Eigen::Vector3d state_r(1.0, 1.0, 0.1);
    const Eigen::Vector2d input_r(1.0, 0.0);
    const ControlInput u_nom(10, 0);
    const double dt = 0.2;
    const Eigen::Vector3d bound =
        remainder_bound_dynamics(state_r, input_r, u_nom, dt, 0.0);

    // Mean-value quadratic form maximized over an independent grid of the
    // Hessian evaluation point and corner-aligned deviations.
    double grid_max_1 = 0.0, grid_max_2 = 0.0;
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
        const double th = -state_r(2) + 2.0 * state_r(2) * i / n;
        for (int j = 0; j <= 4; ++j) {
            const double vmag = std::fabs(u_nom.v) + input_r(0) * (-1.0 + 0.5 * j);
            const double j1_tt = std::fabs(vmag * std::cos(th) * dt);
            const double j1_tv = std::fabs(std::sin(th) * dt);
            const double j2_tt = std::fabs(vmag * std::sin(th) * dt);
            const double j2_tv = std::fabs(std::cos(th) * dt);
            grid_max_1 = std::max(grid_max_1,
                                  0.5 * (state_r(2) * state_r(2) * j1_tt +
                                         2 * state_r(2) * input_r(0) * j1_tv));
            grid_max_2 = std::max(grid_max_2,
                                  0.5 * (state_r(2) * state_r(2) * j2_tt +
                                         2 * state_r(2) * input_r(0) * j2_tv));
        }
    }
    CHECK(bound(0) >= grid_max_1);
    CHECK(bound(1) >= grid_max_2);
    CHECK(bound(0) <= grid_max_1 * 1.05);
    CHECK(bound(1) <= grid_max_2 * 1.05);
}

TEST_CASE("dynamics remainder bound is sound") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const VehicleState x0(5 * u(rng), 5 * u(rng), 2.0 * u(rng));
        const ControlInput u0(8 + 4 * u(rng), 0.4 * u(rng));
        const Eigen::Vector3d sr(1.0, 1.0, 0.2 * std::fabs(u(rng)) + 0.01);
        const Eigen::Vector2d ir(std::fabs(u(rng)) + 0.01, 0.1 * std::fabs(u(rng)));
        const Eigen::Vector3d bound =
            remainder_bound_dynamics(sr, ir, u0, 0.2, x0.theta);
        for (int s = 0; s < 500; ++s) {
            Eigen::Vector3d dx(sr(0) * u(rng), sr(1) * u(rng), sr(2) * u(rng));
            Eigen::Vector2d du(ir(0) * u(rng), ir(1) * u(rng));
            if (u0.v + du(0) < 0) du(0) = -u0.v;
            const Eigen::Vector3d res = dynamics_residual(x0, u0, dx, du, 0.2);
            for (int i = 0; i < 3; ++i) {
                CHECK(std::fabs(res(i)) <= bound(i) + 1e-12);
            }
        }
    }
}

TEST_CASE("dynamics remainder bound shrinks at least quadratically") {
    const Eigen::Vector3d sr(0.5, 0.5, 0.12);
    const Eigen::Vector2d ir(0.8, 0.05);
    const ControlInput u0(10, 0.1);
    const Eigen::Vector3d b1 = remainder_bound_dynamics(sr, ir, u0, 0.2, 0.4);
    const Eigen::Vector3d b2 =
        remainder_bound_dynamics(0.5 * sr, 0.5 * ir, u0, 0.2, 0.4);
    for (int i = 0; i < 2; ++i) {
        CHECK(b1(i) >= 4.0 * b2(i) - 1e-15);  // the Hessian box also shrinks
        CHECK(b1(i) <= 4.6 * b2(i) + 1e-15);
    }
}

TEST_CASE("measurement remainder bound") {
    const VehicleState x(0, 0, 0);
    std::vector<SatPosition> sats = {{2e7, 0, 0}};
    CHECK(remainder_bound_measurement({0, 0}, x, sats).isZero(0));

    const Eigen::VectorXd b = remainder_bound_measurement({10, 10}, x, sats);
    REQUIRE(b.size() == 2);
    CHECK(b(1) == doctest::Approx(0.0));  // heading row is linear
    CHECK(b(0) == doctest::Approx(2.0 * 200.0 / (2.0 * 2e7)).epsilon(1e-9));

    // Sound and exactly quadratic in the radius (range held at the nominal).
    const Eigen::VectorXd b_half = remainder_bound_measurement({5, 5}, x, sats);
    CHECK(b(0) == doctest::Approx(4.0 * b_half(0)).epsilon(1e-12));

    double grid_max = 0.0;
    Eigen::MatrixXd c = jacobian_measurement(x, sats);
    for (int i = -20; i <= 20; ++i) {
        for (int j = -20; j <= 20; ++j) {
            const Eigen::Vector2d dp(10.0 * i / 20, 10.0 * j / 20);
            const VehicleState xs(dp(0), dp(1), 0);
            const double res = measurement(xs, sats)(0) - measurement(x, sats)(0) -
                               c.row(0).head<2>().dot(dp);
            grid_max = std::max(grid_max, std::fabs(res));
        }
    }
    CHECK(b(0) >= grid_max);
}

TEST_CASE("remainder to gaussian") {
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    CHECK(remainder_to_gaussian(zero).covariance.isZero(0));

    Eigen::VectorXd b(3);
    b << 3, 0, 0;
    const auto g = remainder_to_gaussian(b);
    CHECK(g.covariance(0, 0) == doctest::Approx(1.0));
    CHECK(g.covariance(1, 1) == doctest::Approx(0.0));

    Eigen::VectorXd b2(3);
    b2 << 4, 1, 0.5;
    const auto g1 = remainder_to_gaussian(b);
    const auto g2 = remainder_to_gaussian(b2);
    for (int i = 0; i < 3; ++i) {
        CHECK(g2.covariance(i, i) >= g1.covariance(i, i));  // monotone per axis
    }
    CHECK(remainder_to_gaussian(b2, 2.0).covariance(0, 0) == doctest::Approx(4.0));
    CHECK_THROWS(remainder_to_gaussian(b, 0.0));
}
