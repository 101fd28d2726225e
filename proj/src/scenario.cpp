#include "reachplan/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace reachplan {

namespace {

using nlohmann::json;

Eigen::Vector3d vec3_from(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw std::runtime_error("scenario: expected a 3-element array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::Vector2d vec2_from(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw std::runtime_error("scenario: expected a 2-element array");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) {
        a.push_back(v(i));
    }
    return a;
}

json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& j) {
    const int rows = static_cast<int>(j.size());
    if (rows == 0) {
        return Eigen::MatrixXd(0, 0);
    }
    const int cols = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int c = 0; c < cols; ++c) {
            m(i, c) = j[static_cast<size_t>(i)][static_cast<size_t>(c)].get<double>();
        }
    }
    return m;
}

Eigen::VectorXd vector_from(const json& j) {
    Eigen::VectorXd v(static_cast<int>(j.size()));
    for (int i = 0; i < v.size(); ++i) {
        v(i) = j[static_cast<size_t>(i)].get<double>();
    }
    return v;
}

json scenario_to_canonical_json(const ScenarioConfig& c) {
    json j;
    j["scene"] = c.scene_path;
    j["almanac"] = c.almanac_path;
    j["epoch"] = c.epoch;
    j["agents"] = json::array();
    for (const auto& a : c.agents) {
        j["agents"].push_back({{"start", {a.start.x1, a.start.x2, a.start.theta}},
                               {"goal", {a.goal.x1, a.goal.x2, a.goal.theta}},
                               {"launch_step", a.launch_step}});
    }
    j["planner"] = {{"delta", c.planner.delta},
                    {"grid_spacing", c.planner.grid_spacing},
                    {"headings_per_node", c.planner.headings_per_node},
                    {"v_nominal", c.planner.v_nominal},
                    {"v_max", c.planner.v_max},
                    {"omega_max", c.planner.omega_max},
                    {"dominance_slack", c.planner.dominance_slack},
                    {"corridor_radius", c.planner.corridor_radius},
                    {"lqr_state_weights", to_json(Eigen::VectorXd(c.planner.lqr_state_weights))},
                    {"lqr_input_weights", to_json(Eigen::VectorXd(c.planner.lqr_input_weights))},
                    {"area_lo", {c.planner.area_lo.x(), c.planner.area_lo.y()}},
                    {"area_hi", {c.planner.area_hi.x(), c.planner.area_hi.y()}}};
    json zeta = json::array();
    for (double z : c.reach.zeta) {
        zeta.push_back(z);
    }
    j["reach"] = {{"zeta", zeta},
                  {"max_generators", c.reach.max_generators},
                  {"confidence", c.reach.confidence}};
    j["noise"] = {{"q_diag", {c.noise.q(0, 0), c.noise.q(1, 1), c.noise.q(2, 2)}},
                  {"sigma_rho", c.noise.sigma_rho},
                  {"heading_var", c.noise.heading_var},
                  {"dt", c.noise.dt}};
    j["envelope"] = {{"correlator_spacing", c.envelope.correlator_spacing},
                     {"chip_length", c.envelope.chip_length},
                     {"amplitude_ratio", c.envelope.amplitude_ratio}};
    // Validation-only settings (runs, seed, bias policy) stay out of the
    // hash: plans and graphs do not depend on them. The initial dispersion
    // does shape the plans, so it stays in.
    j["init"] = {{"x0_cov_diag",
                  {c.mc.init.x0_cov(0, 0), c.mc.init.x0_cov(1, 1), c.mc.init.x0_cov(2, 2)}},
                 {"x0_tilde_cov_diag",
                  {c.mc.init.x0_tilde_cov(0, 0), c.mc.init.x0_tilde_cov(1, 1),
                   c.mc.init.x0_tilde_cov(2, 2)}}};
    j["q_sigma"] = c.q_sigma;
    return j;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) {
        return path;
    }
    return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

void ScenarioConfig::validate_paths(const std::string& base_dir) const {
    for (const auto& p : {scene_path, almanac_path}) {
        if (!std::filesystem::exists(resolve(base_dir, p))) {
            throw std::runtime_error("scenario: referenced file missing: " + p);
        }
    }
    if (mc.runs < 1) {
        throw std::runtime_error("scenario: mc.runs must be >= 1");
    }
    if (agents.empty()) {
        throw std::runtime_error("scenario: at least one agent required");
    }
}

ScenarioConfig parse_scenario_json(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("scenario: JSON parse error: ") + e.what());
    }
    ScenarioConfig c;
    try {
        c.scene_path = resolve(base_dir, j.at("scene").get<std::string>());
        c.almanac_path = resolve(base_dir, j.at("almanac").get<std::string>());
        c.epoch = j.value("epoch", c.epoch);
        for (const auto& aj : j.at("agents")) {
            AgentTask a;
            const Eigen::Vector3d s = vec3_from(aj.at("start"));
            const Eigen::Vector3d g = vec3_from(aj.at("goal"));
            a.start = VehicleState(s(0), s(1), s(2));
            a.goal = VehicleState(g(0), g(1), g(2));
            a.launch_step = aj.value("launch_step", 0);
            c.agents.push_back(a);
        }
        if (j.contains("planner")) {
            const auto& p = j["planner"];
            c.planner.delta = p.value("delta", c.planner.delta);
            c.planner.grid_spacing = p.value("grid_spacing", c.planner.grid_spacing);
            c.planner.headings_per_node =
                p.value("headings_per_node", c.planner.headings_per_node);
            c.planner.v_nominal = p.value("v_nominal", c.planner.v_nominal);
            c.planner.v_max = p.value("v_max", c.planner.v_max);
            c.planner.omega_max = p.value("omega_max", c.planner.omega_max);
            c.planner.dominance_slack =
                p.value("dominance_slack", c.planner.dominance_slack);
            c.planner.corridor_radius =
                p.value("corridor_radius", c.planner.corridor_radius);
            if (p.contains("lqr_state_weights")) {
                c.planner.lqr_state_weights = vec3_from(p["lqr_state_weights"]);
            }
            if (p.contains("lqr_input_weights")) {
                c.planner.lqr_input_weights = vec2_from(p["lqr_input_weights"]);
            }
            if (p.contains("area_lo")) {
                c.planner.area_lo = vec2_from(p["area_lo"]);
            }
            if (p.contains("area_hi")) {
                c.planner.area_hi = vec2_from(p["area_hi"]);
            }
        }
        if (j.contains("reach")) {
            const auto& r = j["reach"];
            if (r.contains("zeta")) {
                if (r["zeta"].is_number()) {
                    c.reach.zeta.fill(r["zeta"].get<double>());
                } else {
                    for (int i = 0; i < kNumIndexedChannels; ++i) {
                        c.reach.zeta[static_cast<size_t>(i)] =
                            r["zeta"][static_cast<size_t>(i)].get<double>();
                    }
                }
            }
            c.reach.max_generators = r.value("max_generators", c.reach.max_generators);
            c.reach.confidence = r.value("confidence", c.reach.confidence);
        }
        if (j.contains("noise")) {
            const auto& n = j["noise"];
            if (n.contains("q_diag")) {
                c.noise.q = Eigen::Matrix3d(vec3_from(n["q_diag"]).asDiagonal());
            }
            c.noise.sigma_rho = n.value("sigma_rho", c.noise.sigma_rho);
            c.noise.heading_var = n.value("heading_var", c.noise.heading_var);
            c.noise.dt = n.value("dt", c.noise.dt);
        }
        if (j.contains("envelope")) {
            const auto& e = j["envelope"];
            c.envelope.correlator_spacing =
                e.value("correlator_spacing", c.envelope.correlator_spacing);
            c.envelope.chip_length = e.value("chip_length", c.envelope.chip_length);
            c.envelope.amplitude_ratio =
                e.value("amplitude_ratio", c.envelope.amplitude_ratio);
        }
        if (j.contains("mc")) {
            const auto& m = j["mc"];
            c.mc.runs = m.value("runs", c.mc.runs);
            c.mc.master_seed = m.value("master_seed", c.mc.master_seed);
            const std::string policy = m.value("bias_policy", "worst-case-constant");
            if (policy == "worst-case-constant") {
                c.mc.bias_policy = BiasPolicy::WorstCaseConstant;
            } else if (policy == "uniform-per-epoch") {
                c.mc.bias_policy = BiasPolicy::UniformPerEpoch;
            } else {
                throw std::runtime_error("scenario: unknown bias policy " + policy);
            }
            if (m.contains("x0_cov_diag")) {
                c.mc.init.x0_cov = Eigen::Matrix3d(vec3_from(m["x0_cov_diag"]).asDiagonal());
            }
            if (m.contains("x0_tilde_cov_diag")) {
                c.mc.init.x0_tilde_cov =
                    Eigen::Matrix3d(vec3_from(m["x0_tilde_cov_diag"]).asDiagonal());
            }
        }
        c.q_sigma = j.value("q_sigma", c.q_sigma);
        c.output_dir = resolve(base_dir, j.value("output_dir", c.output_dir));
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("scenario: schema error: ") + e.what());
    }
    c.planner.validate();
    c.noise.validate();
    c.reach.validate();
    c.envelope.validate();
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    const std::string base = std::filesystem::path(path).parent_path().string();
    return parse_scenario_json(read_file(path), base);
}

std::string scenario_hash(const ScenarioConfig& cfg) {
    const std::string dump = scenario_to_canonical_json(cfg).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::unique_ptr<UrbanGnssEnvironment> make_environment(const ScenarioConfig& cfg,
                                                       const UrbanScene& scene) {
    const auto records = parse_yuma(read_file(cfg.almanac_path));
    return std::make_unique<UrbanGnssEnvironment>(scene, records, cfg.epoch,
                                                  cfg.noise.dt, cfg.envelope,
                                                  cfg.noise.sigma_rho,
                                                  cfg.noise.heading_var);
}

ExploreSetup make_explore_setup(const ScenarioConfig& cfg, const GnssEnvironment& env) {
    ExploreSetup setup;
    setup.env = &env;
    setup.noise = cfg.noise;
    setup.reach = cfg.reach;
    setup.schedule.q_sigma = cfg.q_sigma;
    setup.init = cfg.mc.init;
    return setup;
}

std::string graph_to_json(const PlannerGraph& graph, const ScenarioConfig& cfg) {
    json j;
    j["config_hash"] = scenario_hash(cfg);
    json nodes = json::array();
    for (const auto& n : graph.nodes) {
        nodes.push_back({n.pos.x(), n.pos.y(), n.heading});
    }
    j["nodes"] = std::move(nodes);
    json edges = json::array();
    for (const auto& e : graph.edges) {
        json vj = json::array();
        json wj = json::array();
        for (const auto& u : e.inputs) {
            vj.push_back(u.v);
            wj.push_back(u.omega);
        }
        edges.push_back({{"from", e.from_node},
                         {"to", e.to_node},
                         {"v", std::move(vj)},
                         {"omega", std::move(wj)}});
    }
    j["edges"] = std::move(edges);
    return j.dump();
}

PlannerGraph graph_from_json(const std::string& text, const ScenarioConfig& cfg) {
    json j = json::parse(text);
    if (j.value("config_hash", "") != scenario_hash(cfg)) {
        throw std::runtime_error("graph artifact was built from a different config");
    }
    PlannerGraph g;
    for (const auto& nj : j.at("nodes")) {
        GraphNode n;
        n.pos = {nj[0].get<double>(), nj[1].get<double>()};
        n.heading = nj[2].get<double>();
        g.nodes.push_back(n);
    }
    g.out_edges.assign(g.nodes.size(), {});
    for (const auto& ej : j.at("edges")) {
        NominalEdge e;
        e.from_node = ej.at("from").get<int>();
        e.to_node = ej.at("to").get<int>();
        const auto& vj = ej.at("v");
        const auto& wj = ej.at("omega");
        VehicleState x = g.nodes[static_cast<size_t>(e.from_node)].state();
        for (size_t k = 0; k < vj.size(); ++k) {
            const ControlInput u(vj[k].get<double>(), wj[k].get<double>());
            e.states.push_back(x);
            e.inputs.push_back(u);
            x = step_dynamics(x, u, cfg.noise.dt);
            e.length += u.v * cfg.noise.dt;
        }
        e.end_state = x;
        // Gains are a deterministic function of the rollout and config.
        {
            const Eigen::Matrix3d q = cfg.planner.lqr_state_weights.asDiagonal();
            const Eigen::Matrix2d r = cfg.planner.lqr_input_weights.asDiagonal();
            Eigen::Matrix3d p = q;
            e.gains.resize(e.inputs.size());
            for (int k = e.steps() - 1; k >= 0; --k) {
                Eigen::Matrix3d a;
                Eigen::Matrix<double, 3, 2> b;
                jacobians_dynamics(e.states[static_cast<size_t>(k)],
                                   e.inputs[static_cast<size_t>(k)], cfg.noise.dt, a, b);
                const Eigen::Matrix2d s = r + b.transpose() * p * b;
                const Eigen::Matrix<double, 2, 3> kk =
                    s.ldlt().solve(b.transpose() * p * a);
                const Eigen::Matrix3d acl = a - b * kk;
                p = q + kk.transpose() * r * kk + acl.transpose() * p * acl;
                p = 0.5 * (p + p.transpose()).eval();
                e.gains[static_cast<size_t>(k)] = kk;
            }
        }
        const int id = static_cast<int>(g.edges.size());
        g.out_edges[static_cast<size_t>(e.from_node)].push_back(id);
        g.edges.push_back(std::move(e));
    }
    return g;
}

namespace {

json pz_to_json(const ProbabilisticZonotope& p) {
    return {{"center", to_json(p.center)},
            {"generators", to_json(Eigen::MatrixXd(p.generators))},
            {"covariance", to_json(Eigen::MatrixXd(p.covariance))}};
}

ProbabilisticZonotope pz_from_json(const json& j) {
    Eigen::VectorXd c = vector_from(j.at("center"));
    Eigen::MatrixXd g = matrix_from(j.at("generators"));
    if (g.size() == 0) {
        g.resize(c.size(), 0);
    }
    return ProbabilisticZonotope(c, g, matrix_from(j.at("covariance")));
}

json schedule_entry_to_json(const ScheduleEntry& e) {
    json sats = json::array();
    for (size_t i = 0; i < e.sat_positions.size(); ++i) {
        sats.push_back({{"prn", e.visible_sats[i]},
                        {"pos", to_json(Eigen::VectorXd(e.sat_positions[i]))}});
    }
    return {{"a", to_json(Eigen::MatrixXd(e.a))},
            {"b", to_json(Eigen::MatrixXd(e.b))},
            {"k", to_json(Eigen::MatrixXd(e.feedback_k))},
            {"c", to_json(e.c)},
            {"l", to_json(e.gain_l)},
            {"r_hat", to_json(e.r_hat)},
            {"r_true", to_json(e.r_true)},
            {"bias_bound", to_json(e.bias_bound)},
            {"sats", std::move(sats)},
            {"x_nom", {e.x_nom.x1, e.x_nom.x2, e.x_nom.theta}},
            {"x_nom_prev", {e.x_nom_prev.x1, e.x_nom_prev.x2, e.x_nom_prev.theta}},
            {"u_nom_prev", {e.u_nom_prev.v, e.u_nom_prev.omega}},
            {"p_post", to_json(Eigen::MatrixXd(e.p_post))}};
}

ScheduleEntry schedule_entry_from_json(const json& j) {
    ScheduleEntry e;
    e.a = matrix_from(j.at("a"));
    e.b = matrix_from(j.at("b"));
    e.feedback_k = matrix_from(j.at("k"));
    e.c = matrix_from(j.at("c"));
    e.gain_l = matrix_from(j.at("l"));
    e.r_hat = vector_from(j.at("r_hat"));
    e.r_true = vector_from(j.at("r_true"));
    e.bias_bound = vector_from(j.at("bias_bound"));
    for (const auto& sj : j.at("sats")) {
        e.visible_sats.push_back(sj.at("prn").get<int>());
        e.sat_positions.push_back(vec3_from(sj.at("pos")));
    }
    const Eigen::Vector3d xn = vec3_from(j.at("x_nom"));
    const Eigen::Vector3d xp = vec3_from(j.at("x_nom_prev"));
    e.x_nom = VehicleState(xn(0), xn(1), xn(2));
    e.x_nom_prev = VehicleState(xp(0), xp(1), xp(2));
    e.u_nom_prev = ControlInput(j.at("u_nom_prev")[0].get<double>(),
                                j.at("u_nom_prev")[1].get<double>());
    e.p_post = matrix_from(j.at("p_post"));
    return e;
}

}  // namespace

std::string plan_to_json(const Plan& plan, const ScenarioConfig& cfg, int agent_id) {
    json j;
    j["config_hash"] = scenario_hash(cfg);
    j["agent"] = agent_id;
    j["launch_step"] = plan.launch_step;
    j["length"] = plan.length;
    json states = json::array();
    for (const auto& s : plan.states) {
        states.push_back({s.x1, s.x2, s.theta});
    }
    j["states"] = std::move(states);
    json inputs = json::array();
    for (const auto& u : plan.inputs) {
        inputs.push_back({u.v, u.omega});
    }
    j["inputs"] = std::move(inputs);
    json gains = json::array();
    for (const auto& g : plan.gains) {
        gains.push_back(to_json(Eigen::MatrixXd(g)));
    }
    j["gains"] = std::move(gains);
    json sched = json::array();
    for (const auto& e : plan.schedule) {
        sched.push_back(schedule_entry_to_json(e));
    }
    j["schedule"] = std::move(sched);
    json sets = json::array();
    for (const auto& s : plan.state_sets) {
        sets.push_back(pz_to_json(s));
    }
    j["state_sets"] = std::move(sets);
    json est = json::array();
    for (const auto& s : plan.est_sets) {
        est.push_back(pz_to_json(s));
    }
    j["est_sets"] = std::move(est);
    return j.dump();
}

Plan plan_from_json(const std::string& text, const ScenarioConfig& cfg) {
    json j = json::parse(text);
    if (j.value("config_hash", "") != scenario_hash(cfg)) {
        throw std::runtime_error("plan artifact was built from a different config");
    }
    Plan plan;
    plan.launch_step = j.value("launch_step", 0);
    plan.length = j.value("length", 0.0);
    for (const auto& sj : j.at("states")) {
        plan.states.emplace_back(sj[0].get<double>(), sj[1].get<double>(),
                                 sj[2].get<double>());
    }
    for (const auto& uj : j.at("inputs")) {
        plan.inputs.emplace_back(uj[0].get<double>(), uj[1].get<double>());
    }
    for (const auto& gj : j.at("gains")) {
        plan.gains.emplace_back(matrix_from(gj));
    }
    for (const auto& ej : j.at("schedule")) {
        plan.schedule.push_back(schedule_entry_from_json(ej));
    }
    for (const auto& sj : j.at("state_sets")) {
        plan.state_sets.push_back(pz_from_json(sj));
    }
    for (const auto& sj : j.at("est_sets")) {
        plan.est_sets.push_back(pz_from_json(sj));
    }
    return plan;
}

std::string report_to_json(const std::vector<ContainmentReport>& reports,
                           const ScenarioConfig& cfg) {
    json j;
    j["config_hash"] = scenario_hash(cfg);
    json agents = json::array();
    for (const auto& r : reports) {
        json per_step_2d = json::array();
        json per_step_3d = json::array();
        for (size_t k = 0; k < r.fraction_2d.size(); ++k) {
            per_step_2d.push_back(r.fraction_2d[k]);
            per_step_3d.push_back(r.fraction_3d[k]);
        }
        agents.push_back({{"runs", r.runs},
                          {"min_fraction_2d", r.min_fraction_2d},
                          {"min_fraction_3d", r.min_fraction_3d},
                          {"fraction_2d", std::move(per_step_2d)},
                          {"fraction_3d", std::move(per_step_3d)}});
    }
    j["agents"] = std::move(agents);
    return j.dump(2);
}

std::string nominal_path_csv(const Plan& plan) {
    std::ostringstream out;
    out << "step,x1,x2,theta,v,omega\n";
    char buf[160];
    for (size_t k = 0; k < plan.states.size(); ++k) {
        const auto& s = plan.states[k];
        const double v = k < plan.inputs.size() ? plan.inputs[k].v : 0.0;
        const double w = k < plan.inputs.size() ? plan.inputs[k].omega : 0.0;
        std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g\n", k, s.x1, s.x2,
                      s.theta, v, w);
        out << buf;
    }
    return out.str();
}

std::string confidence_sets_csv(const Plan& plan, double confidence, int stride) {
    std::ostringstream out;
    out << "step,vertex,x1,x2\n";
    char buf[120];
    for (size_t k = 0; k < plan.state_sets.size(); k += static_cast<size_t>(stride)) {
        const Zonotope conf = position_confidence_zonotope(plan.state_sets[k], confidence);
        const auto verts = zonogon_vertices(conf);
        for (size_t i = 0; i < verts.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%zu,%zu,%.9g,%.9g\n", k, i, verts[i].x(),
                          verts[i].y());
            out << buf;
        }
    }
    return out.str();
}

std::string traces_csv(const std::vector<RunTrace>& traces, int stride) {
    std::ostringstream out;
    out << "run,step,x1,x2,theta,est_x1,est_x2,est_theta\n";
    char buf[200];
    for (size_t r = 0; r < traces.size(); ++r) {
        const auto& t = traces[r];
        for (size_t k = 0; k < t.true_states.size(); k += static_cast<size_t>(stride)) {
            std::snprintf(buf, sizeof(buf), "%zu,%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r,
                          k, t.true_states[k](0), t.true_states[k](1), t.true_states[k](2),
                          t.estimates[k](0), t.estimates[k](1), t.estimates[k](2));
            out << buf;
        }
    }
    return out.str();
}

std::string buildings_csv(const UrbanScene& scene) {
    std::ostringstream out;
    out << "building,vertex,x1,x2,height\n";
    char buf[120];
    for (size_t b = 0; b < scene.buildings.size(); ++b) {
        for (size_t v = 0; v < scene.buildings[b].footprint.size(); ++v) {
            std::snprintf(buf, sizeof(buf), "%zu,%zu,%.9g,%.9g,%.9g\n", b, v,
                          scene.buildings[b].footprint[v].x(),
                          scene.buildings[b].footprint[v].y(), scene.buildings[b].height);
            out << buf;
        }
    }
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace reachplan
