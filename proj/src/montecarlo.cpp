#include "reachplan/montecarlo.hpp"

#include <cmath>
#include <stdexcept>

#include "reachplan/parallel.hpp"

namespace reachplan {

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("covariance_sqrt: eigendecomposition failed");
    }
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * lam.asDiagonal();
}

Eigen::VectorXd sample_set(const ProbabilisticZonotope& set, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    Eigen::VectorXd x = set.center;
    for (int i = 0; i < set.num_generators(); ++i) {
        x += uniform(rng) * set.generators.col(i);
    }
    const Eigen::MatrixXd l = covariance_sqrt(set.covariance);
    Eigen::VectorXd n(set.dim());
    for (int i = 0; i < set.dim(); ++i) {
        n(i) = gauss(rng);
    }
    return x + l * n;
}

std::vector<SatObservation> entry_observations(const ScheduleEntry& e) {
    std::vector<SatObservation> sats;
    const int n = static_cast<int>(e.sat_positions.size());
    sats.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        SatObservation s;
        s.prn = e.visible_sats[static_cast<size_t>(i)];
        s.pos_flight_local = e.sat_positions[static_cast<size_t>(i)];
        s.bias_bound = e.bias_bound(i);
        s.noise_var = e.r_true(i);
        s.cls = s.bias_bound > 0.0 ? SignalClass::Multipath : SignalClass::Open;
        sats.push_back(std::move(s));
    }
    return sats;
}

}  // namespace

RunTrace run_closed_loop(const Plan& plan, const NoiseConfig& noise,
                         const McConfig& cfg, std::uint64_t run_seed) {
    if (plan.states.size() != plan.schedule.size() + 1) {
        throw std::invalid_argument("run_closed_loop: plan schedule misaligned");
    }
    noise.validate();
    std::mt19937_64 rng(run_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    RunTrace trace;
    trace.seed = run_seed;
    const int horizon = plan.horizon();
    trace.true_states.reserve(static_cast<size_t>(horizon) + 1);
    trace.estimates.reserve(static_cast<size_t>(horizon) + 1);
    trace.biases.resize(static_cast<size_t>(horizon));

    // Initial dispersion: truth from X0, estimation error from X0_tilde.
    const ProbabilisticZonotope x0 = ProbabilisticZonotope::gaussian(
        plan.states.front().vec(), cfg.init.x0_cov);
    const ProbabilisticZonotope x0t = ProbabilisticZonotope::gaussian(
        Eigen::Vector3d::Zero(), cfg.init.x0_tilde_cov);
    Eigen::Vector3d x_true_v = sample_set(x0, rng);
    Eigen::Vector3d x_tilde = sample_set(x0t, rng);
    VehicleState x_true = VehicleState::from_vec(x_true_v);
    VehicleState x_hat = VehicleState::from_vec(x_true_v + x_tilde);

    trace.true_states.push_back(x_true.vec());
    trace.estimates.push_back(x_hat.vec());

    const Eigen::MatrixXd q_sqrt = covariance_sqrt(noise.q);
    std::unordered_map<int, double> bias_signs;

    for (int k = 0; k < horizon; ++k) {
        const ScheduleEntry& e = plan.schedule[static_cast<size_t>(k)];
        const VehicleState& x_nom = plan.states[static_cast<size_t>(k)];
        const ControlInput& u_nom = plan.inputs[static_cast<size_t>(k)];

        // Total input: feedback on the estimate deviation (heading wrapped).
        Eigen::Vector3d dev = x_hat.vec() - x_nom.vec();
        dev(2) = wrap_angle(dev(2));
        Eigen::Vector2d u_vec = u_nom.vec();
        if (cfg.feedback_enabled) {
            u_vec -= plan.gains[static_cast<size_t>(k)] * dev;
        }
        const ControlInput u(std::max(0.0, u_vec(0)), u_vec(1));

        // Truth propagation with process noise.
        Eigen::Vector3d w;
        for (int i = 0; i < 3; ++i) {
            w(i) = gauss(rng);
        }
        w = q_sqrt * w;
        const VehicleState x_pred_true = step_dynamics(x_true, u, noise.dt);
        x_true = VehicleState(x_pred_true.x1 + w(0), x_pred_true.x2 + w(1),
                              x_pred_true.theta + w(2));

        // Measurements from the scheduled satellite set, sampled at truth.
        const auto sats = entry_observations(e);
        const double heading_var = e.r_true(e.meas_dim() - 1);
        const MeasurementSample sample = simulate_measurements(
            x_true, sats, heading_var, cfg.bias_policy, bias_signs, rng);
        trace.biases[static_cast<size_t>(k)] = sample.biases;

        // EKF with the schedule's nominal-pinned matrices.
        const VehicleState x_bar = step_dynamics(x_hat, u, noise.dt);
        Eigen::VectorXd innov = sample.z - measurement(x_bar, e.sat_positions);
        innov(innov.size() - 1) = wrap_angle(innov(innov.size() - 1));
        const Eigen::Vector3d dx = e.gain_l * innov;
        x_hat = VehicleState(x_bar.x1 + dx(0), x_bar.x2 + dx(1), x_bar.theta + dx(2));

        trace.true_states.push_back(x_true.vec());
        trace.estimates.push_back(x_hat.vec());
    }
    return trace;
}

std::vector<RunTrace> run_ensemble(const Plan& plan, const NoiseConfig& noise,
                                   const McConfig& cfg) {
    if (cfg.runs < 1) {
        throw std::invalid_argument("run_ensemble: runs must be >= 1");
    }
    std::vector<RunTrace> traces(static_cast<size_t>(cfg.runs));
    parallel_for(cfg.runs, [&](int i) {
        traces[static_cast<size_t>(i)] = run_closed_loop(
            plan, noise, cfg, split_seed(cfg.master_seed, static_cast<std::uint64_t>(i)));
    });
    return traces;
}

ContainmentReport containment_stats(const std::vector<RunTrace>& traces,
                                    const Plan& plan, double confidence) {
    const int horizon = plan.horizon();
    for (const auto& t : traces) {
        if (static_cast<int>(t.true_states.size()) != horizon + 1) {
            throw std::invalid_argument("containment_stats: trace/plan length mismatch");
        }
    }
    ContainmentReport report;
    report.runs = static_cast<int>(traces.size());
    report.fraction_2d.resize(static_cast<size_t>(horizon) + 1);
    report.fraction_3d.resize(static_cast<size_t>(horizon) + 1);
    report.worst_excursion.assign(traces.size(), 0.0);

    const ConfidenceConfig conf3(confidence, 3);
    for (int k = 0; k <= horizon; ++k) {
        const auto& set = plan.state_sets[static_cast<size_t>(k)];
        const Zonotope conf2d = position_confidence_zonotope(set, confidence);
        const Zonotope conf3d = confidence_zonotope(set, conf3);
        const ZonotopeHalfspaces hs2 = precompute_halfspaces(conf2d);
        const ZonotopeHalfspaces hs3 = precompute_halfspaces(conf3d);

        int in2 = 0, in3 = 0;
        for (size_t r = 0; r < traces.size(); ++r) {
            const Eigen::Vector3d xt = traces[r].true_states[static_cast<size_t>(k)];
            const Eigen::Vector2d pos = xt.head<2>();
            double viol = 0.0;
            if (hs2.point_only) {
                viol = (pos - Eigen::Vector2d(hs2.center)).norm();
            } else {
                const Eigen::VectorXd y = pos - hs2.center;
                for (int i = 0; i < hs2.directions.rows(); ++i) {
                    viol = std::max(viol, std::fabs(hs2.directions.row(i).dot(y)) -
                                              hs2.offsets(i));
                }
            }
            if (viol <= 1e-9 * (1.0 + pos.norm())) {
                ++in2;
            }
            report.worst_excursion[r] = std::max(report.worst_excursion[r], viol);

            // Full-state check with the heading unwrapped about the center.
            Eigen::Vector3d xt3 = xt;
            xt3(2) = conf3d.center(2) + wrap_angle(xt(2) - conf3d.center(2));
            if (hs3.contains(xt3)) {
                ++in3;
            }
        }
        const double n = std::max<size_t>(1, traces.size());
        report.fraction_2d[static_cast<size_t>(k)] = in2 / static_cast<double>(n);
        report.fraction_3d[static_cast<size_t>(k)] = in3 / static_cast<double>(n);
        report.min_fraction_2d =
            std::min(report.min_fraction_2d, report.fraction_2d[static_cast<size_t>(k)]);
        report.min_fraction_3d =
            std::min(report.min_fraction_3d, report.fraction_3d[static_cast<size_t>(k)]);
    }
    return report;
}

}  // namespace reachplan
