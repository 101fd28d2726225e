#include "reachplan/reach.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace reachplan {

namespace {

// Minkowski-sum accumulator that concatenates generator blocks once.
class SetAccumulator {
  public:
    explicit SetAccumulator(int dim)
        : center_(Eigen::VectorXd::Zero(dim)),
          cov_(Eigen::MatrixXd::Zero(dim, dim)),
          dim_(dim) {}

    void add(const ProbabilisticZonotope& p) {
        center_ += p.center;
        cov_ += p.covariance;
        if (p.num_generators() > 0) {
            blocks_.push_back(p.generators);
            cols_ += p.num_generators();
        }
    }

    void add_mapped(const Eigen::MatrixXd& t, const ProbabilisticZonotope& p) {
        center_ += t * p.center;
        cov_ += t * p.covariance * t.transpose();
        if (p.num_generators() > 0) {
            blocks_.push_back(t * p.generators);
            cols_ += static_cast<int>(blocks_.back().cols());
        }
    }

    void add_offset(const Eigen::VectorXd& v) { center_ += v; }

    ProbabilisticZonotope finish() const {
        Eigen::MatrixXd g(dim_, cols_);
        int at = 0;
        for (const auto& b : blocks_) {
            g.middleCols(at, static_cast<int>(b.cols())) = b;
            at += static_cast<int>(b.cols());
        }
        Eigen::MatrixXd sym = 0.5 * (cov_ + cov_.transpose());
        return ProbabilisticZonotope(center_, std::move(g), std::move(sym));
    }

  private:
    Eigen::VectorXd center_;
    Eigen::MatrixXd cov_;
    std::vector<Eigen::MatrixXd> blocks_;
    int cols_ = 0;
    int dim_;
};

const Eigen::MatrixXd* find_entry(const std::map<int, Eigen::MatrixXd>& m, int n) {
    auto it = m.find(n);
    return it == m.end() ? nullptr : &it->second;
}

void check_step_shapes(const ReachStep& s, int dim) {
    if (s.a.rows() != dim || s.a.cols() != dim || s.b.rows() != dim ||
        s.feedback.cols() != dim || s.feedback.rows() != s.b.cols() ||
        s.c.cols() != dim || s.gain_l.rows() != dim ||
        s.gain_l.cols() != s.c.rows()) {
        throw std::invalid_argument("reach step: matrix shape mismatch");
    }
}

}  // namespace

void ReachConfig::validate() const {
    for (double z : zeta) {
        if (z < 0.0) {
            throw std::invalid_argument("reach config: zeta must be >= 0");
        }
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::invalid_argument("reach config: confidence must be in (0,1)");
    }
}

ReachStep make_reach_step(const ScheduleEntry& entry) {
    ReachStep s;
    s.a = entry.a;
    s.b = entry.b;
    s.feedback = entry.feedback_k;
    s.c = entry.c;
    s.gain_l = entry.gain_l;
    return s;
}

CoefficientTable init_coefficients(int dimension) {
    if (dimension < 1) {
        throw std::invalid_argument("init_coefficients: dimension must be >= 1");
    }
    CoefficientTable t;
    t.step = 0;
    t.dim = dimension;
    t.phi1 = Eigen::MatrixXd::Identity(dimension, dimension);
    t.phi2 = Eigen::MatrixXd::Zero(dimension, dimension);
    t.phi2_tilde = Eigen::MatrixXd::Identity(dimension, dimension);
    return t;
}

CoefficientTable propagate_coefficients(const CoefficientTable& prev,
                                        const ReachStep& step) {
    check_step_shapes(step, prev.dim);
    const int n = prev.dim;
    const Eigen::MatrixXd acl = step.a - step.b * step.feedback;
    const Eigen::MatrixXd bk = step.b * step.feedback;
    const Eigen::MatrixXd f =
        Eigen::MatrixXd::Identity(n, n) - step.gain_l * step.c;
    const Eigen::MatrixXd e = f * step.a;

    CoefficientTable next;
    next.step = prev.step + 1;
    next.dim = n;
    next.phi1 = acl * prev.phi1;
    next.phi2 = acl * prev.phi2 - bk * prev.phi2_tilde;
    next.phi2_tilde = e * prev.phi2_tilde;

    for (int ch = 0; ch < kNumIndexedChannels; ++ch) {
        std::set<int> slots;
        for (const auto& [slot, _] : prev.phi[ch]) slots.insert(slot);
        for (const auto& [slot, _] : prev.phi_tilde[ch]) slots.insert(slot);
        for (int slot : slots) {
            const Eigen::MatrixXd* p = find_entry(prev.phi[ch], slot);
            const Eigen::MatrixXd* pt = find_entry(prev.phi_tilde[ch], slot);
            const int cols = static_cast<int>(p ? p->cols() : pt->cols());
            Eigen::MatrixXd phi_next = Eigen::MatrixXd::Zero(n, cols);
            if (p) phi_next += acl * (*p);
            if (pt) phi_next -= bk * (*pt);
            next.phi[ch].emplace(slot, std::move(phi_next));
            if (pt) {
                next.phi_tilde[ch].emplace(slot, e * (*pt));
            }
        }
    }

    // Fresh-term seeds at step k; zero seeds are left unstored.
    const int k = next.step;
    next.phi[0].emplace(k, Eigen::MatrixXd::Identity(n, n));   // w_k enters the state directly
    next.phi_tilde[0].emplace(k, -f);
    next.phi_tilde[1].emplace(k, step.gain_l);                 // v_k enters via the gain
    next.phi[2].emplace(k - 1, Eigen::MatrixXd::Identity(n, n));
    next.phi_tilde[2].emplace(k - 1, -f);
    next.phi_tilde[3].emplace(k - 1, f);
    next.phi_tilde[4].emplace(k - 1, step.gain_l);
    next.phi_tilde[5].emplace(k - 1, -step.gain_l);
    return next;
}

CoefficientTable truncate(const CoefficientTable& table, const ReachConfig& cfg) {
    cfg.validate();
    CoefficientTable out = table;
    for (int ch = 0; ch < kNumIndexedChannels; ++ch) {
        const double zeta = cfg.zeta[ch];
        if (zeta <= 0.0) {
            continue;
        }
        for (auto it = out.phi[ch].begin(); it != out.phi[ch].end();) {
            it = it->second.norm() < zeta ? out.phi[ch].erase(it) : std::next(it);
        }
        for (auto it = out.phi_tilde[ch].begin(); it != out.phi_tilde[ch].end();) {
            it = it->second.norm() < zeta ? out.phi_tilde[ch].erase(it) : std::next(it);
        }
    }
    return out;
}

const ProbabilisticZonotope& ReachInputs::lookup(int channel_index, int slot) const {
    const auto& m = channel[channel_index];
    auto it = m.find(slot);
    if (it == m.end()) {
        throw std::runtime_error("reach inputs: missing input for channel " +
                                 std::to_string(channel_index + kFirstIndexedChannel) +
                                 " slot " + std::to_string(slot));
    }
    return it->second;
}

void ReachInputs::insert(int channel_index, int slot, ProbabilisticZonotope set) {
    channel[channel_index].insert_or_assign(slot, std::move(set));
}

void ReachInputs::prune(const CoefficientTable& table) {
    for (int ch = 0; ch < kNumIndexedChannels; ++ch) {
        for (auto it = channel[ch].begin(); it != channel[ch].end();) {
            const bool alive = table.phi[ch].count(it->first) > 0 ||
                               table.phi_tilde[ch].count(it->first) > 0;
            it = alive ? std::next(it) : channel[ch].erase(it);
        }
    }
}

ProbabilisticZonotope assemble_state_set(const CoefficientTable& table,
                                         const Eigen::VectorXd& x_nom_k,
                                         const ReachInputs& inputs) {
    SetAccumulator acc(table.dim);
    acc.add_offset(x_nom_k);
    acc.add_mapped(table.phi1, translate(inputs.x0, -inputs.x_nom_0));
    acc.add_mapped(table.phi2, inputs.x0_tilde);
    for (int ch = 0; ch < kNumIndexedChannels; ++ch) {
        for (const auto& [slot, coeff] : table.phi[ch]) {
            acc.add_mapped(coeff, inputs.lookup(ch, slot));
        }
    }
    return acc.finish();
}

ProbabilisticZonotope assemble_estimation_error_set(const CoefficientTable& table,
                                                    const ReachInputs& inputs) {
    SetAccumulator acc(table.dim);
    acc.add_mapped(table.phi2_tilde, inputs.x0_tilde);
    for (int ch = 0; ch < kNumIndexedChannels; ++ch) {
        for (const auto& [slot, coeff] : table.phi_tilde[ch]) {
            acc.add_mapped(coeff, inputs.lookup(ch, slot));
        }
    }
    return acc.finish();
}

std::vector<ReachSets> legacy_recursive_sets(
    const std::vector<ReachStep>& steps,
    const std::vector<Eigen::VectorXd>& x_nominal,
    const std::vector<StepNoise>& noise,
    const ProbabilisticZonotope& x0,
    const ProbabilisticZonotope& x0_tilde,
    int max_generators) {
    if (x_nominal.size() != steps.size() + 1 || noise.size() != steps.size()) {
        throw std::invalid_argument("legacy_recursive_sets: length mismatch");
    }
    const int n = x0.dim();
    std::vector<ReachSets> out(steps.size() + 1);
    ProbabilisticZonotope x = x0;
    ProbabilisticZonotope xt = x0_tilde;
    out[0].state_set = x;
    out[0].estimation_error_set = xt;

    for (size_t k = 0; k < steps.size(); ++k) {
        const ReachStep& s = steps[k];
        check_step_shapes(s, n);
        const Eigen::MatrixXd acl = s.a - s.b * s.feedback;
        const Eigen::MatrixXd bk = s.b * s.feedback;
        const Eigen::MatrixXd f = Eigen::MatrixXd::Identity(n, n) - s.gain_l * s.c;
        const StepNoise& nz = noise[k];

        SetAccumulator xs(n);
        xs.add_offset(x_nominal[k + 1]);
        xs.add_mapped(acl, translate(x, -x_nominal[k]));
        xs.add_mapped(-bk, xt);
        xs.add(nz.lf1);
        xs.add(nz.w);

        SetAccumulator xts(n);
        xts.add_mapped(f * s.a, xt);
        xts.add_mapped(-f, nz.lf1);
        xts.add_mapped(f, nz.lf2);
        xts.add_mapped(s.gain_l, nz.lh1);
        xts.add_mapped(-s.gain_l, nz.lh2);
        xts.add_mapped(-f, nz.w);
        xts.add_mapped(s.gain_l, nz.v);

        x = xs.finish();
        xt = xts.finish();
        if (max_generators > 0) {
            x = reduce_order(x, max_generators);
            xt = reduce_order(xt, max_generators);
        }
        out[k + 1].state_set = x;
        out[k + 1].estimation_error_set = xt;
    }
    return out;
}

TrajectoryReachability::TrajectoryReachability(ProbabilisticZonotope x0,
                                               ProbabilisticZonotope x0_tilde,
                                               const Eigen::Vector3d& x_nom_0,
                                               NoiseConfig noise, ReachConfig cfg,
                                               double remainder_divisor)
    : noise_(noise), cfg_(cfg), remainder_divisor_(remainder_divisor) {
    noise_.validate();
    cfg_.validate();
    if (x0.dim() != 3 || x0_tilde.dim() != 3) {
        throw std::invalid_argument("trajectory reachability expects 3D sets");
    }
    table_ = init_coefficients(3);
    inputs_.x0 = std::move(x0);
    inputs_.x0_tilde = std::move(x0_tilde);
    inputs_.x_nom_0 = x_nom_0;
    current_.state_set = inputs_.x0;
    current_.estimation_error_set = inputs_.x0_tilde;
}

ReachSets TrajectoryReachability::advance(const ScheduleEntry& entry) {
    const int k = table_.step + 1;

    // Remainder inputs from the current confidence hulls. The same bound
    // serves both remainder variants per channel pair; see the module docs.
    const ConfidenceConfig conf3(cfg_.confidence, 3);
    const Zonotope state_conf = confidence_zonotope(
        translate(current_.state_set, -entry.x_nom_prev.vec()), conf3);
    const Zonotope est_conf = confidence_zonotope(current_.estimation_error_set, conf3);
    const Eigen::Vector3d state_hull = state_conf.interval_hull_radius();
    const Eigen::Vector3d est_hull = est_conf.interval_hull_radius();
    const Eigen::Vector3d estimate_dev_hull = state_hull + est_hull;

    const Eigen::Matrix<double, 2, 3> k_abs = entry.feedback_k.cwiseAbs();
    const Eigen::Vector2d input_radius = k_abs * estimate_dev_hull;

    const Eigen::Vector3d lf_bound = remainder_bound_dynamics(
        estimate_dev_hull, input_radius, entry.u_nom_prev, noise_.dt,
        entry.x_nom_prev.theta);
    const Eigen::VectorXd lh_bound = remainder_bound_measurement(
        estimate_dev_hull.head<2>(), entry.x_nom, entry.sat_positions);

    const auto lf_gauss = remainder_to_gaussian(lf_bound, remainder_divisor_);
    const auto lh_gauss = remainder_to_gaussian(lh_bound, remainder_divisor_);
    const Eigen::VectorXd zero3 = Eigen::VectorXd::Zero(3);
    const Eigen::VectorXd zerom = Eigen::VectorXd::Zero(entry.meas_dim());

    // Channel inputs for the fresh slots of step k.
    inputs_.insert(0, k, ProbabilisticZonotope::gaussian(zero3, noise_.q));
    Eigen::MatrixXd v_cov = entry.r_true.asDiagonal();
    ProbabilisticZonotope v_set(
        zerom, Zonotope::box(zerom, entry.bias_bound).generators, std::move(v_cov));
    inputs_.insert(1, k, std::move(v_set));
    inputs_.insert(2, k - 1, ProbabilisticZonotope::gaussian(zero3, lf_gauss.covariance));
    inputs_.insert(3, k - 1, ProbabilisticZonotope::gaussian(zero3, lf_gauss.covariance));
    inputs_.insert(4, k - 1, ProbabilisticZonotope::gaussian(zerom, lh_gauss.covariance));
    inputs_.insert(5, k - 1, ProbabilisticZonotope::gaussian(zerom, lh_gauss.covariance));

    table_ = truncate(propagate_coefficients(table_, make_reach_step(entry)), cfg_);
    inputs_.prune(table_);

    ReachSets sets;
    sets.state_set = assemble_state_set(table_, entry.x_nom.vec(), inputs_);
    sets.estimation_error_set = assemble_estimation_error_set(table_, inputs_);
    if (cfg_.max_generators > 0) {
        sets.state_set = reduce_order(sets.state_set, cfg_.max_generators);
        sets.estimation_error_set =
            reduce_order(sets.estimation_error_set, cfg_.max_generators);
    }
    for (int ch = 0; ch < kNumIndexedChannels; ++ch) {
        sets.kept_phi_counts[ch] = static_cast<int>(table_.phi[ch].size());
        sets.kept_phi_tilde_counts[ch] = static_cast<int>(table_.phi_tilde[ch].size());
    }
    current_ = sets;
    return sets;
}

}  // namespace reachplan
