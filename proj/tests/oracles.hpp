#pragma once

// Independent reference implementations used by the unit and acceptance
// suites. Everything here is deliberately written against the raw recursions
// rather than the library's code paths.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "reachplan/planner.hpp"
#include "reachplan/reach.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// Coherent early-late discriminator simulation: smallest nonnegative
// zero crossing of the composite discriminator for an in-phase reflection
// of relative amplitude `alpha` delayed by `delta` chips. Result in chips.
inline double discriminator_tracking_error(double delta_chips, double spacing,
                                           double alpha) {
    auto corr = [](double tau) { return std::max(0.0, 1.0 - std::fabs(tau)); };
    auto disc = [&](double eps) {
        const double direct = corr(eps + spacing / 2) - corr(eps - spacing / 2);
        const double mp = corr(eps + spacing / 2 - delta_chips) -
                          corr(eps - spacing / 2 - delta_chips);
        return direct + alpha * mp;
    };
    if (disc(0.0) <= 0.0) {
        return 0.0;
    }
    // Scan for the first sign change, then bisect.
    double lo = 0.0, hi = -1.0;
    const int n = 4000;
    for (int i = 1; i <= n; ++i) {
        const double e = 1.5 * i / n;
        if (disc(e) <= 0.0) {
            hi = e;
            lo = 1.5 * (i - 1) / n;
            break;
        }
    }
    if (hi < 0.0) {
        return 0.0;
    }
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (disc(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Direct simulation of the coupled error dynamics: state deviation and
// estimation error driven by per-step noises and remainder impulses.
struct ErrorSimInputs {
    // All indexed by the update step k = 1..K. Empty vectors mean zero.
    std::vector<Eigen::VectorXd> w;    // process noise at k
    std::vector<Eigen::VectorXd> nu;   // sensing noise at k
    std::vector<Eigen::VectorXd> lf1;  // dynamics remainder (true), evaluated at k-1
    std::vector<Eigen::VectorXd> lf2;  // dynamics remainder (estimate), at k-1
    std::vector<Eigen::VectorXd> lh1;  // range remainder (true), at k
    std::vector<Eigen::VectorXd> lh2;  // range remainder (predicted), at k
};

struct ErrorSimResult {
    std::vector<Eigen::VectorXd> dx;      // x_k - x_nom_k
    std::vector<Eigen::VectorXd> x_tilde; // estimation error
};

inline ErrorSimResult simulate_error_dynamics(
    const std::vector<reachplan::ReachStep>& steps,
    const Eigen::VectorXd& dx0, const Eigen::VectorXd& x_tilde0,
    const ErrorSimInputs& in) {
    const int n = static_cast<int>(dx0.size());
    ErrorSimResult out;
    Eigen::VectorXd dx = dx0;
    Eigen::VectorXd xt = x_tilde0;
    out.dx.push_back(dx);
    out.x_tilde.push_back(xt);
    auto get = [&](const std::vector<Eigen::VectorXd>& v, size_t k,
                   int dim) -> Eigen::VectorXd {
        if (k < v.size() && v[k].size() > 0) {
            return v[k];
        }
        return Eigen::VectorXd::Zero(dim);
    };
    for (size_t k = 0; k < steps.size(); ++k) {
        const auto& s = steps[k];
        const int m = static_cast<int>(s.c.rows());
        const Eigen::MatrixXd acl = s.a - s.b * s.feedback;
        const Eigen::MatrixXd bk = s.b * s.feedback;
        const Eigen::MatrixXd f = Eigen::MatrixXd::Identity(n, n) - s.gain_l * s.c;

        const Eigen::VectorXd w = get(in.w, k, n);
        const Eigen::VectorXd nu = get(in.nu, k, m);
        const Eigen::VectorXd lf1 = get(in.lf1, k, n);
        const Eigen::VectorXd lf2 = get(in.lf2, k, n);
        const Eigen::VectorXd lh1 = get(in.lh1, k, m);
        const Eigen::VectorXd lh2 = get(in.lh2, k, m);

        const Eigen::VectorXd dx_next = acl * dx - bk * xt + lf1 + w;
        const Eigen::VectorXd xt_next = f * s.a * xt + f * (lf2 - lf1) +
                                        s.gain_l * (lh1 - lh2) - f * w +
                                        s.gain_l * nu;
        dx = dx_next;
        xt = xt_next;
        out.dx.push_back(dx);
        out.x_tilde.push_back(xt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exact joint covariance of the stacked vector [x - x_nom; x_tilde] under
// Gaussian process/sensing noise. Returns the 2n x 2n covariance per step.
inline std::vector<Eigen::MatrixXd> joint_covariance(
    const std::vector<reachplan::ReachStep>& steps,
    const Eigen::MatrixXd& cov_dx0, const Eigen::MatrixXd& cov_xt0,
    const std::vector<Eigen::MatrixXd>& q_per_step,
    const std::vector<Eigen::MatrixXd>& r_per_step) {
    const int n = static_cast<int>(cov_dx0.rows());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    s.topLeftCorner(n, n) = cov_dx0;
    s.bottomRightCorner(n, n) = cov_xt0;
    std::vector<Eigen::MatrixXd> out;
    out.push_back(s);
    for (size_t k = 0; k < steps.size(); ++k) {
        const auto& st = steps[k];
        const int m = static_cast<int>(st.c.rows());
        const Eigen::MatrixXd acl = st.a - st.b * st.feedback;
        const Eigen::MatrixXd bk = st.b * st.feedback;
        const Eigen::MatrixXd f = Eigen::MatrixXd::Identity(n, n) - st.gain_l * st.c;

        Eigen::MatrixXd mk = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        mk.topLeftCorner(n, n) = acl;
        mk.topRightCorner(n, n) = -bk;
        mk.bottomRightCorner(n, n) = f * st.a;

        Eigen::MatrixXd nk = Eigen::MatrixXd::Zero(2 * n, n + m);
        nk.topLeftCorner(n, n).setIdentity();
        nk.bottomLeftCorner(n, n) = -f;
        nk.bottomRightCorner(n, m) = st.gain_l;

        Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(n + m, n + m);
        noise.topLeftCorner(n, n) = q_per_step[k];
        noise.bottomRightCorner(m, m) = r_per_step[k];

        s = mk * s * mk.transpose() + nk * noise * nk.transpose();
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random stable closed-loop LTI instances for the reach-module oracles.
struct LtiInstance {
    std::vector<reachplan::ReachStep> steps;  // identical entries
    Eigen::MatrixXd q;
    Eigen::MatrixXd r;
};

inline LtiInstance random_lti(int n, int m, int horizon, std::mt19937& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    auto randm = [&](int rows, int cols) {
        Eigen::MatrixXd x(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) x(i, j) = g(rng);
        return x;
    };
    auto scale_to_radius = [](Eigen::MatrixXd mat, double rho) {
        const double r = mat.eigenvalues().cwiseAbs().maxCoeff();
        if (r > 1e-12) {
            mat *= rho / r;
        }
        return mat;
    };

    reachplan::ReachStep s;
    const int nu = std::max(1, n / 2 + 1);
    s.b = 0.3 * randm(n, nu);
    s.feedback = 0.3 * randm(nu, n);
    s.c = randm(m, n);
    s.gain_l = 0.2 * randm(n, m);
    // Shape A so both the closed loop and the estimator loop are contractive.
    Eigen::MatrixXd a = randm(n, n);
    const Eigen::MatrixXd f =
        Eigen::MatrixXd::Identity(n, n) - s.gain_l * s.c;
    for (int it = 0; it < 60; ++it) {
        const double r1 = (a - s.b * s.feedback).eigenvalues().cwiseAbs().maxCoeff();
        const double r2 = (f * a).eigenvalues().cwiseAbs().maxCoeff();
        const double worst = std::max(r1, r2);
        if (worst < 0.95) {
            break;
        }
        a *= 0.9 / worst;
    }
    s.a = a;

    LtiInstance inst;
    inst.steps.assign(static_cast<size_t>(horizon), s);
    Eigen::MatrixXd qroot = randm(n, n);
    inst.q = qroot * qroot.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd rroot = randm(m, m);
    inst.r = rroot * rroot.transpose() + 0.1 * Eigen::MatrixXd::Identity(m, m);
    (void)scale_to_radius;
    return inst;
}

// ---------------------------------------------------------------------------
// Dijkstra over the planner graph's nominal edge lengths.
inline double dijkstra_length(const reachplan::PlannerGraph& graph, int start,
                              int goal) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(graph.nodes.size(), inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> open;
    dist[static_cast<size_t>(start)] = 0.0;
    open.push({0.0, start});
    while (!open.empty()) {
        const auto [d, u] = open.top();
        open.pop();
        if (d > dist[static_cast<size_t>(u)] + 1e-12) {
            continue;
        }
        if (u == goal) {
            return d;
        }
        for (int eid : graph.out_edges[static_cast<size_t>(u)]) {
            const auto& e = graph.edges[static_cast<size_t>(eid)];
            const double nd = d + e.length;
            if (nd < dist[static_cast<size_t>(e.to_node)] - 1e-12) {
                dist[static_cast<size_t>(e.to_node)] = nd;
                open.push({nd, e.to_node});
            }
        }
    }
    return dist[static_cast<size_t>(goal)];
}

}  // namespace oracles
