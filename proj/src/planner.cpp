#include "reachplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <set>
#include <stdexcept>

#include "reachplan/parallel.hpp"

namespace reachplan {

namespace {

std::atomic<int> g_workers{0};

Eigen::Matrix<double, 2, 3> P_POS() {
    Eigen::Matrix<double, 2, 3> p;
    p << 1, 0, 0, 0, 1, 0;
    return p;
}

// Finite-horizon discrete LQR gains along a rolled-out edge.
std::vector<Eigen::Matrix<double, 2, 3>> lqr_gains(
    const std::vector<VehicleState>& states,
    const std::vector<ControlInput>& inputs, double dt,
    const PlannerConfig& cfg) {
    const Eigen::Matrix3d q = cfg.lqr_state_weights.asDiagonal();
    const Eigen::Matrix2d r = cfg.lqr_input_weights.asDiagonal();
    const int t = static_cast<int>(inputs.size());
    std::vector<Eigen::Matrix<double, 2, 3>> gains(static_cast<size_t>(t));
    Eigen::Matrix3d p = q;
    for (int k = t - 1; k >= 0; --k) {
        Eigen::Matrix3d a;
        Eigen::Matrix<double, 3, 2> b;
        jacobians_dynamics(states[static_cast<size_t>(k)],
                           inputs[static_cast<size_t>(k)], dt, a, b);
        const Eigen::Matrix2d s = r + b.transpose() * p * b;
        const Eigen::Matrix<double, 2, 3> kk = s.ldlt().solve(b.transpose() * p * a);
        const Eigen::Matrix3d acl = a - b * kk;
        p = q + kk.transpose() * r * kk + acl.transpose() * p * acl;
        p = 0.5 * (p + p.transpose()).eval();
        gains[static_cast<size_t>(k)] = kk;
    }
    return gains;
}

struct Profile {
    std::vector<ControlInput> inputs;
    double speed_deviation = 0.0;
};

void append_phase(std::vector<ControlInput>& inputs, int n, double v, double omega) {
    for (int i = 0; i < n; ++i) {
        inputs.emplace_back(v, omega);
    }
}

// Sum of unit steps along headings 0, phi, ..., (n-1) phi.
std::complex<double> arc_sum(double phi, int n) {
    std::complex<double> s = 0.0;
    for (int k = 0; k < n; ++k) {
        s += std::polar(1.0, phi * static_cast<double>(k));
    }
    return s;
}

std::optional<Profile> solve_straight(double dx, double dy, const PlannerConfig& cfg,
                                      double dt) {
    if (dx <= 0.0 || std::fabs(dy) > 1e-9 * std::max(1.0, dx)) {
        return std::nullopt;
    }
    const int n = std::max(1, static_cast<int>(std::lround(dx / (cfg.v_nominal * dt))));
    const double v = dx / (n * dt);
    if (v <= 0.0 || v > cfg.v_max) {
        return std::nullopt;
    }
    Profile p;
    append_phase(p.inputs, n, v, 0.0);
    p.speed_deviation = std::fabs(v - cfg.v_nominal);
    return p;
}

// Antisymmetric bang-bang turn for a lateral transfer with zero net heading
// change. The paired phases make the displacement direction exactly half the
// peak heading, so only the speed needs solving.
std::optional<Profile> solve_s_curve(double dx, double dy, const PlannerConfig& cfg,
                                     double dt) {
    const double dist = std::hypot(dx, dy);
    if (dist < 1e-12 || dx <= 0.0) {
        return std::nullopt;
    }
    const double peak = 2.0 * std::atan2(dy, dx);
    if (std::fabs(peak) < 1e-12 || std::fabs(peak) > 0.9 * M_PI) {
        return std::nullopt;
    }
    std::optional<Profile> best;
    const int n_min = std::max(1, static_cast<int>(std::ceil(std::fabs(peak) /
                                                             (cfg.omega_max * dt))));
    for (int n1 = n_min; n1 < n_min + 80; ++n1) {
        const double phi = peak / n1;
        const std::complex<double> sum_a = arc_sum(phi, n1);
        const std::complex<double> total =
            sum_a + std::polar(1.0, peak) * std::conj(sum_a);
        const double mag = std::abs(total);
        if (mag < 1e-9) {
            continue;
        }
        const double v = dist / (dt * mag);
        if (v <= 0.0 || v > cfg.v_max) {
            continue;
        }
        const double dev = std::fabs(v - cfg.v_nominal);
        if (!best || dev < best->speed_deviation) {
            Profile p;
            append_phase(p.inputs, n1, v, phi / dt);
            append_phase(p.inputs, n1, v, -phi / dt);
            p.speed_deviation = dev;
            best = std::move(p);
        }
    }
    return best;
}

std::optional<Profile> solve_turn(double dx, double dy, double dth,
                                  const PlannerConfig& cfg, double dt) {
    const double dist = std::hypot(dx, dy);
    if (dist < 1e-12) {
        return std::nullopt;
    }
    std::optional<Profile> best;
    std::vector<double> turn_options = {dth};
    if (std::fabs(std::fabs(dth) - M_PI) < 1e-9) {
        turn_options.push_back(-dth);
    }
    for (double turn : turn_options) {
        const int n1_min =
            std::max(1, static_cast<int>(std::ceil(std::fabs(turn) / (cfg.omega_max * dt))));
        const int n2_max = std::max(
            2, static_cast<int>(std::ceil(2.5 * dist / (cfg.v_nominal * dt))));
        for (int n1 = n1_min; n1 < n1_min + 60; ++n1) {
            const double phi = turn / n1;
            const std::complex<double> sum_a = arc_sum(phi, n1);
            const std::complex<double> exit_dir = std::polar(1.0, turn);
            for (int order = 0; order < 2; ++order) {
                // order 0: arc then straight; order 1: straight then arc.
                const std::complex<double> col_arc = sum_a;
                for (int n2 = 1; n2 <= n2_max; ++n2) {
                    const std::complex<double> col_str =
                        static_cast<double>(n2) * (order == 0 ? exit_dir : 1.0);
                    // [col_arc col_str] [va*dt; vs*dt] = target
                    const double det = col_arc.real() * col_str.imag() -
                                       col_arc.imag() * col_str.real();
                    if (std::fabs(det) < 1e-9) {
                        continue;
                    }
                    const double va_dt = (dx * col_str.imag() - dy * col_str.real()) / det;
                    const double vs_dt = (dy * col_arc.real() - dx * col_arc.imag()) / det;
                    const double va = va_dt / dt;
                    const double vs = vs_dt / dt;
                    if (va <= 1e-9 || vs <= 1e-9 || va > cfg.v_max || vs > cfg.v_max) {
                        continue;
                    }
                    const double dev =
                        std::fabs(va - cfg.v_nominal) * n1 + std::fabs(vs - cfg.v_nominal) * n2;
                    if (!best || dev < best->speed_deviation) {
                        Profile p;
                        if (order == 0) {
                            append_phase(p.inputs, n1, va, phi / dt);
                            append_phase(p.inputs, n2, vs, 0.0);
                        } else {
                            append_phase(p.inputs, n2, vs, 0.0);
                            append_phase(p.inputs, n1, va, phi / dt);
                        }
                        p.speed_deviation = dev;
                        best = std::move(p);
                    }
                }
            }
        }
    }
    return best;
}

}  // namespace

void set_worker_threads(int n) { g_workers.store(n); }

int worker_threads() {
    const int n = g_workers.load();
    if (n > 0) {
        return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void PlannerConfig::validate() const {
    if (!(delta > 0.0 && delta < 0.5)) {
        throw std::invalid_argument("planner config: delta must be in (0, 0.5)");
    }
    if (grid_spacing <= 0.0 || v_nominal <= 0.0 || v_max < v_nominal ||
        omega_max <= 0.0 || headings_per_node < 1) {
        throw std::invalid_argument("planner config: invalid kinematic parameters");
    }
}

std::optional<NominalEdge> connect(const VehicleState& xi, const VehicleState& xj,
                                   const PlannerConfig& cfg, double dt) {
    cfg.validate();
    NominalEdge edge;
    edge.end_state = xi;

    const Eigen::Vector2d dp = xj.position() - xi.position();
    const double dth = wrap_angle(xj.theta - xi.theta);
    if (dp.norm() < 1e-12 && std::fabs(dth) < 1e-12) {
        edge.end_state = xj;
        return edge;  // zero-length edge
    }

    // Work in the frame aligned with the departure heading.
    const double c = std::cos(xi.theta), s = std::sin(xi.theta);
    const double dx = c * dp.x() + s * dp.y();
    const double dy = -s * dp.x() + c * dp.y();

    std::optional<Profile> profile;
    if (std::fabs(dth) < 1e-12) {
        profile = solve_straight(dx, dy, cfg, dt);
        if (!profile) {
            profile = solve_s_curve(dx, dy, cfg, dt);
        }
    } else {
        profile = solve_turn(dx, dy, dth, cfg, dt);
    }
    if (!profile) {
        return std::nullopt;
    }

    // Roll out; the nominal states are the rollout by construction.
    VehicleState x = xi;
    edge.states.reserve(profile->inputs.size());
    for (const auto& u : profile->inputs) {
        edge.states.push_back(x);
        x = step_dynamics(x, u, dt);
        edge.length += u.v * dt;
    }
    edge.inputs = std::move(profile->inputs);
    edge.end_state = x;

    if ((x.position() - xj.position()).norm() > 1e-6 ||
        std::fabs(wrap_angle(x.theta - xj.theta)) > 1e-9) {
        return std::nullopt;  // profile solve failed to close the transfer
    }
    edge.gains = lqr_gains(edge.states, edge.inputs, dt, cfg);
    return edge;
}

int PlannerGraph::nearest_node(const VehicleState& x, double max_pos_dist) const {
    int best = -1;
    double best_score = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) {
        const double pos_dist = (nodes[i].pos - x.position()).norm();
        if (pos_dist > max_pos_dist) {
            continue;
        }
        const double score =
            pos_dist + 10.0 * std::fabs(wrap_angle(nodes[i].heading - x.theta));
        if (best < 0 || score < best_score - 1e-12) {
            best = static_cast<int>(i);
            best_score = score;
        }
    }
    return best;
}

namespace {

bool corridor_clear(const NominalEdge& edge, const UrbanScene& scene,
                    const PlannerConfig& cfg) {
    const auto tall = scene.tall_buildings();
    if (tall.empty()) {
        return true;
    }
    const Eigen::Vector2d hw(cfg.corridor_radius, cfg.corridor_radius);
    auto clear_at = [&](const Eigen::Vector2d& p) {
        const Zonotope box = Zonotope::box(p, hw);
        for (const auto* b : tall) {
            for (const auto& part : b->convex_parts) {
                if (intersects_2d(box, part)) {
                    return false;
                }
            }
        }
        return true;
    };
    for (const auto& st : edge.states) {
        if (!clear_at(st.position())) {
            return false;
        }
    }
    return clear_at(edge.end_state.position());
}

}  // namespace

PlannerGraph build_graph(const UrbanScene& scene, const PlannerConfig& cfg, double dt) {
    cfg.validate();
    PlannerGraph g;

    const int nx = static_cast<int>(std::floor(
                       (cfg.area_hi.x() - cfg.area_lo.x()) / cfg.grid_spacing + 1e-9)) + 1;
    const int ny = static_cast<int>(std::floor(
                       (cfg.area_hi.y() - cfg.area_lo.y()) / cfg.grid_spacing + 1e-9)) + 1;
    const int nh = cfg.headings_per_node;

    std::map<std::tuple<int, int, int>, int> index;
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            const Eigen::Vector2d pos =
                cfg.area_lo + cfg.grid_spacing * Eigen::Vector2d(ix, iy);
            if (scene.point_in_tall_building(pos)) {
                continue;
            }
            for (int ih = 0; ih < nh; ++ih) {
                GraphNode n;
                n.pos = pos;
                n.heading = wrap_angle(2.0 * M_PI * ih / nh);
                index[{ix, iy, ih}] = static_cast<int>(g.nodes.size());
                g.nodes.push_back(n);
            }
        }
    }

    // Candidate edges: 8-neighborhood, all heading pairs.
    std::vector<std::pair<int, int>> candidates;
    for (const auto& [key, u] : index) {
        const auto [ix, iy, ih] = key;
        (void)ih;
        for (int ox = -1; ox <= 1; ++ox) {
            for (int oy = -1; oy <= 1; ++oy) {
                if (ox == 0 && oy == 0) {
                    continue;
                }
                for (int ih2 = 0; ih2 < nh; ++ih2) {
                    auto it = index.find({ix + ox, iy + oy, ih2});
                    if (it != index.end()) {
                        candidates.emplace_back(u, it->second);
                    }
                }
            }
        }
    }

    std::vector<std::optional<NominalEdge>> results(candidates.size());
    parallel_for(static_cast<int>(candidates.size()), [&](int i) {
        const auto [u, v] = candidates[static_cast<size_t>(i)];
        auto edge = connect(g.nodes[static_cast<size_t>(u)].state(),
                            g.nodes[static_cast<size_t>(v)].state(), cfg, dt);
        if (edge && edge->steps() > 0 && corridor_clear(*edge, scene, cfg)) {
            edge->from_node = u;
            edge->to_node = v;
            results[static_cast<size_t>(i)] = std::move(edge);
        }
    });

    g.out_edges.assign(g.nodes.size(), {});
    for (auto& r : results) {
        if (r) {
            const int id = static_cast<int>(g.edges.size());
            g.out_edges[static_cast<size_t>(r->from_node)].push_back(id);
            g.edges.push_back(std::move(*r));
        }
    }
    return g;
}

Zonotope position_confidence_zonotope(const ProbabilisticZonotope& set,
                                      double confidence) {
    const ProbabilisticZonotope proj = linear_map(P_POS(), set);
    return confidence_zonotope(proj, ConfidenceConfig(confidence, 2));
}

bool chance_check(const ProbabilisticZonotope& predicted,
                  const std::vector<const std::vector<Eigen::Vector2d>*>& obstacles,
                  const std::vector<Zonotope>* dynamic_obstacles,
                  const PlannerConfig& cfg) {
    const Zonotope conf = position_confidence_zonotope(predicted, cfg.confidence());
    for (const auto* poly : obstacles) {
        if (intersects_2d(conf, *poly)) {
            return false;
        }
    }
    if (dynamic_obstacles != nullptr) {
        for (const auto& obs : *dynamic_obstacles) {
            if (zonotopes_intersect(conf, obs)) {
                return false;
            }
        }
    }
    return true;
}

namespace {

struct CandRecord {
    int node = -1;
    int arrival_step = 0;
    double length = 0.0;
    double metric = 0.0;
    std::shared_ptr<const TrajectoryReachability> reach;
    Eigen::Matrix3d p_filter = Eigen::Matrix3d::Zero();
    int parent = -1;
    int via_edge = -1;
    bool alive = true;
};

struct QueueItem {
    double length;
    int node;
    int arrival_step;
    int id;
    bool operator>(const QueueItem& o) const {
        if (length != o.length) return length > o.length;
        if (node != o.node) return node > o.node;
        if (arrival_step != o.arrival_step) return arrival_step > o.arrival_step;
        return id > o.id;
    }
};

std::vector<const std::vector<Eigen::Vector2d>*> static_obstacles(const UrbanScene& scene) {
    std::vector<const std::vector<Eigen::Vector2d>*> obs;
    for (const auto* b : scene.tall_buildings()) {
        for (const auto& part : b->convex_parts) {
            obs.push_back(&part);
        }
    }
    return obs;
}

double uncertainty_metric(const ProbabilisticZonotope& set, double confidence) {
    return covariation(confidence_zonotope(set, ConfidenceConfig(confidence, set.dim())));
}

}  // namespace

std::optional<Plan> explore(const PlannerGraph& graph, const VehicleState& x_init,
                            const VehicleState& x_goal, const UrbanScene& scene,
                            const PlannerConfig& cfg, const ExploreSetup& setup,
                            ExploreStats* stats_out) {
    cfg.validate();
    if (setup.env == nullptr) {
        throw std::invalid_argument("explore: setup.env must be provided");
    }
    ExploreStats stats;
    const int start_node = graph.nearest_node(x_init, 0.5 * cfg.grid_spacing + 1e-6);
    const int goal_node = graph.nearest_node(x_goal, 0.5 * cfg.grid_spacing + 1e-6);
    if (start_node < 0 || goal_node < 0) {
        if (stats_out) *stats_out = stats;
        return std::nullopt;
    }
    const VehicleState start_state = graph.nodes[static_cast<size_t>(start_node)].state();
    const auto obstacles = static_obstacles(scene);

    const ProbabilisticZonotope x0 =
        ProbabilisticZonotope::gaussian(start_state.vec(), setup.init.x0_cov);
    const ProbabilisticZonotope x0t = ProbabilisticZonotope::gaussian(
        Eigen::Vector3d::Zero(), setup.init.x0_tilde_cov);

    {
        const std::vector<Zonotope>* dyn0 =
            setup.dynamic ? setup.dynamic->at(setup.launch_step) : nullptr;
        if (!chance_check(x0, obstacles, dyn0, cfg)) {
            if (stats_out) *stats_out = stats;
            return std::nullopt;  // start set already in collision
        }
    }

    std::vector<CandRecord> records;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<QueueItem>> open;
    std::map<std::pair<int, int>, std::vector<int>> pareto;

    {
        CandRecord c0;
        c0.node = start_node;
        c0.arrival_step = 0;
        c0.length = 0.0;
        c0.reach = std::make_shared<TrajectoryReachability>(
            x0, x0t, start_state.vec(), setup.noise, setup.reach);
        c0.metric = uncertainty_metric(x0, cfg.confidence());
        c0.p_filter = setup.init.x0_tilde_cov;
        records.push_back(std::move(c0));
        open.push({0.0, start_node, 0, 0});
        pareto[{start_node, 0}].push_back(0);
    }

    auto dominates = [&cfg](double len_a, double met_a, double len_b, double met_b) {
        const double s = 1.0 + cfg.dominance_slack;
        return len_a <= len_b * s && met_a <= met_b * s;
    };

    while (!open.empty()) {
        const QueueItem item = open.top();
        open.pop();
        if (!records[static_cast<size_t>(item.id)].alive) {
            continue;
        }
        // Snapshot; expansion below appends to records and may reallocate.
        const CandRecord cand = records[static_cast<size_t>(item.id)];
        if (cand.node == goal_node) {
            // Rebuild the winning trajectory from scratch.
            std::vector<int> edge_chain;
            for (int id = item.id; records[static_cast<size_t>(id)].via_edge >= 0;
                 id = records[static_cast<size_t>(id)].parent) {
                edge_chain.push_back(records[static_cast<size_t>(id)].via_edge);
            }
            std::reverse(edge_chain.begin(), edge_chain.end());

            Plan plan;
            plan.launch_step = setup.launch_step;
            VehicleState x = start_state;
            plan.states.push_back(x);
            for (int eid : edge_chain) {
                const NominalEdge& e = graph.edges[static_cast<size_t>(eid)];
                for (int k = 0; k < e.steps(); ++k) {
                    plan.inputs.push_back(e.inputs[static_cast<size_t>(k)]);
                    plan.gains.push_back(e.gains[static_cast<size_t>(k)]);
                    x = step_dynamics(x, e.inputs[static_cast<size_t>(k)], setup.noise.dt);
                    plan.states.push_back(x);
                    plan.length += e.inputs[static_cast<size_t>(k)].v * setup.noise.dt;
                }
            }
            plan.schedule = precompute_schedule(plan.states, plan.inputs, plan.gains,
                                                *setup.env, setup.launch_step,
                                                setup.init.x0_tilde_cov, setup.noise,
                                                setup.schedule);
            TrajectoryReachability reach(x0, x0t, start_state.vec(), setup.noise,
                                         setup.reach);
            plan.state_sets.push_back(x0);
            plan.est_sets.push_back(x0t);
            for (const auto& entry : plan.schedule) {
                const ReachSets sets = reach.advance(entry);
                plan.state_sets.push_back(sets.state_set);
                plan.est_sets.push_back(sets.estimation_error_set);
            }
            if (stats_out) *stats_out = stats;
            return plan;
        }
        if (stats.expansions >= cfg.max_expansions) {
            break;
        }
        ++stats.expansions;

        for (int eid : graph.out_edges[static_cast<size_t>(cand.node)]) {
            const NominalEdge& e = graph.edges[static_cast<size_t>(eid)];
            std::vector<VehicleState> states = e.states;
            states.push_back(e.end_state);
            std::vector<ScheduleEntry> schedule;
            try {
                schedule = precompute_schedule(states, e.inputs, e.gains, *setup.env,
                                               setup.launch_step + cand.arrival_step,
                                               cand.p_filter, setup.noise,
                                               setup.schedule);
            } catch (const std::exception&) {
                continue;  // degenerate geometry along this edge
            }

            auto reach = std::make_shared<TrajectoryReachability>(*cand.reach);
            bool safe = true;
            for (size_t k = 0; k < schedule.size(); ++k) {
                const ReachSets sets = reach->advance(schedule[k]);
                const int abs_step =
                    setup.launch_step + cand.arrival_step + static_cast<int>(k) + 1;
                const std::vector<Zonotope>* dyn =
                    setup.dynamic ? setup.dynamic->at(abs_step) : nullptr;
                if (!chance_check(sets.state_set, obstacles, dyn, cfg)) {
                    safe = false;
                    if (dyn != nullptr &&
                        chance_check(sets.state_set, obstacles, nullptr, cfg)) {
                        ++stats.rejected_dynamic;
                    } else {
                        ++stats.rejected_static;
                    }
                    break;
                }
            }
            if (!safe) {
                continue;
            }

            CandRecord next;
            next.node = e.to_node;
            next.arrival_step = cand.arrival_step + e.steps();
            next.length = cand.length + e.length;
            next.metric =
                uncertainty_metric(reach->current().state_set, cfg.confidence());
            next.reach = std::move(reach);
            next.p_filter = schedule.empty() ? cand.p_filter
                                             : schedule.back().p_post;
            next.parent = item.id;
            next.via_edge = eid;

            auto& bucket = pareto[{next.node, next.arrival_step}];
            bool dominated = false;
            for (int id : bucket) {
                const auto& other = records[static_cast<size_t>(id)];
                if (other.alive &&
                    dominates(other.length, other.metric, next.length, next.metric)) {
                    dominated = true;
                    break;
                }
            }
            if (dominated) {
                ++stats.pruned_dominated;
                continue;
            }
            for (int id : bucket) {
                auto& other = records[static_cast<size_t>(id)];
                if (other.alive &&
                    dominates(next.length, next.metric, other.length, other.metric)) {
                    other.alive = false;
                    ++stats.pruned_dominated;
                }
            }
            const int new_id = static_cast<int>(records.size());
            bucket.push_back(new_id);
            open.push({next.length, next.node, next.arrival_step, new_id});
            records.push_back(std::move(next));
        }
    }
    if (stats_out) *stats_out = stats;
    return std::nullopt;
}

std::vector<AgentPlanResult> plan_sequential(const std::vector<AgentTask>& agents,
                                             const PlannerGraph& graph,
                                             const UrbanScene& scene,
                                             const PlannerConfig& cfg,
                                             const ExploreSetup& base_setup) {
    std::vector<AgentPlanResult> results;
    DynamicObstacles dyn;
    for (const auto& agent : agents) {
        ExploreSetup setup = base_setup;
        setup.launch_step = agent.launch_step;
        setup.dynamic = &dyn;

        AgentPlanResult res;
        auto plan = explore(graph, agent.start, agent.goal, scene, cfg, setup, &res.stats);
        if (plan) {
            res.success = true;
            res.plan = std::move(*plan);
            for (int k = 0; k <= res.plan.horizon(); ++k) {
                dyn.by_abs_step[agent.launch_step + k].push_back(
                    position_confidence_zonotope(res.plan.state_sets[static_cast<size_t>(k)],
                                                 cfg.confidence()));
            }
        } else {
            res.message = "no feasible trajectory found";
        }
        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace reachplan
