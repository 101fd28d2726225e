#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reachplan/parallel.hpp"
#include "reachplan/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitValidationIo = 4;

using namespace reachplan;

void log_line(const ScenarioConfig& cfg, const std::string& msg) {
    // Timestamps stay out of the artifacts; they live here only.
    std::ofstream log(cfg.output_dir + "/run.log", std::ios::app);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof(buf), "%F %T", std::gmtime(&now));
    log << buf << " " << msg << "\n";
}

std::string plan_path(const ScenarioConfig& cfg, size_t agent) {
    return cfg.output_dir + "/plan_agent" + std::to_string(agent) + ".json";
}

int cmd_build_graph(const ScenarioConfig& cfg) {
    const UrbanScene scene = load_scene(cfg.scene_path);
    const PlannerGraph graph = build_graph(scene, cfg.planner, cfg.noise.dt);
    if (graph.nodes.size() <= 4) {
        std::cerr << "warning: grid spacing leaves only " << graph.nodes.size()
                  << " nodes in the area\n";
    }
    write_file(cfg.output_dir + "/graph.json", graph_to_json(graph, cfg));
    std::cout << "graph: " << graph.nodes.size() << " nodes, " << graph.edges.size()
              << " edges -> " << cfg.output_dir << "/graph.json\n";
    log_line(cfg, "build-graph completed");
    return kExitOk;
}

int cmd_plan(const ScenarioConfig& cfg) {
    const UrbanScene scene = load_scene(cfg.scene_path);
    PlannerGraph graph;
    try {
        graph = graph_from_json(read_file(cfg.output_dir + "/graph.json"), cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << " (run build-graph first)\n";
        return kExitConfigError;
    }
    const auto env = make_environment(cfg, scene);
    const ExploreSetup setup = make_explore_setup(cfg, *env);
    const auto results = plan_sequential(cfg.agents, graph, scene, cfg.planner, setup);

    nlohmann::json summary;
    summary["config_hash"] = scenario_hash(cfg);
    summary["agents"] = nlohmann::json::array();
    bool all_ok = true;
    for (size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        nlohmann::json aj;
        aj["agent"] = i;
        aj["success"] = r.success;
        aj["expansions"] = r.stats.expansions;
        aj["rejected_static"] = r.stats.rejected_static;
        aj["rejected_conflicts"] = r.stats.rejected_dynamic;
        aj["pruned_dominated"] = r.stats.pruned_dominated;
        if (r.success) {
            aj["length"] = r.plan.length;
            aj["horizon"] = r.plan.horizon();
            nlohmann::json cov = nlohmann::json::array();
            for (const auto& s : r.plan.state_sets) {
                cov.push_back(covariation(confidence_zonotope(
                    s, ConfidenceConfig(cfg.planner.confidence(), 3))));
            }
            aj["per_step_covariation"] = std::move(cov);
            write_file(plan_path(cfg, i), plan_to_json(r.plan, cfg, static_cast<int>(i)));
            std::cout << "agent " << i << ": length " << r.plan.length << " m, "
                      << r.plan.horizon() << " steps\n";
        } else {
            aj["message"] = r.message;
            std::cout << "agent " << i << ": FAILED (" << r.message << ")\n";
            all_ok = false;
        }
        summary["agents"].push_back(std::move(aj));
    }
    write_file(cfg.output_dir + "/plan_summary.json", summary.dump(2));
    log_line(cfg, "plan completed");
    return all_ok ? kExitOk : kExitInfeasible;
}

int cmd_validate(const ScenarioConfig& cfg) {
    std::vector<Plan> plans;
    try {
        for (size_t i = 0; i < cfg.agents.size(); ++i) {
            plans.push_back(plan_from_json(read_file(plan_path(cfg, i)), cfg));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidationIo;
    }
    std::vector<ContainmentReport> reports;
    for (size_t i = 0; i < plans.size(); ++i) {
        McConfig mc = cfg.mc;
        mc.master_seed = split_seed(cfg.mc.master_seed, i);
        const auto traces = run_ensemble(plans[i], cfg.noise, mc);
        reports.push_back(
            containment_stats(traces, plans[i], cfg.planner.confidence()));
        write_file(cfg.output_dir + "/traces_agent" + std::to_string(i) + ".csv",
                   traces_csv(traces, 5));
        std::cout << "agent " << i << ": min containment 2d "
                  << reports.back().min_fraction_2d << ", 3d "
                  << reports.back().min_fraction_3d << " over " << mc.runs << " runs\n";
    }
    write_file(cfg.output_dir + "/validation_report.json", report_to_json(reports, cfg));
    log_line(cfg, "validate completed");
    return kExitOk;
}

int cmd_export(const ScenarioConfig& cfg) {
    const UrbanScene scene = load_scene(cfg.scene_path);
    write_file(cfg.output_dir + "/buildings.csv", buildings_csv(scene));
    for (size_t i = 0; i < cfg.agents.size(); ++i) {
        Plan plan;
        try {
            plan = plan_from_json(read_file(plan_path(cfg, i)), cfg);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitValidationIo;
        }
        write_file(cfg.output_dir + "/nominal_path_agent" + std::to_string(i) + ".csv",
                   nominal_path_csv(plan));
        write_file(cfg.output_dir + "/confidence_sets_agent" + std::to_string(i) + ".csv",
                   confidence_sets_csv(plan, cfg.planner.confidence(), 5));
    }
    log_line(cfg, "export completed");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reachability-based chance-constrained trajectory planner"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    int threads = 0;
    app.add_option("--config", config_path, "Scenario config JSON")->required();
    app.add_option("--seed", seed_override, "Override the Monte Carlo master seed");
    app.add_option("--threads", threads, "Worker thread cap (0 = hardware)");

    auto* sub_graph = app.add_subcommand("build-graph", "Construct the planner graph");
    auto* sub_plan = app.add_subcommand("plan", "Plan trajectories for all agents");
    auto* sub_validate = app.add_subcommand("validate", "Monte Carlo validation of plans");
    auto* sub_export = app.add_subcommand("export", "Write plot-ready CSV files");

    CLI11_PARSE(app, argc, argv);
    set_worker_threads(threads);

    ScenarioConfig cfg;
    try {
        cfg = load_scenario(config_path);
        cfg.validate_paths("");
        if (seed_override) {
            cfg.mc.master_seed = *seed_override;
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        if (sub_graph->parsed()) return cmd_build_graph(cfg);
        if (sub_plan->parsed()) return cmd_plan(cfg);
        if (sub_validate->parsed()) return cmd_validate(cfg);
        if (sub_export->parsed()) return cmd_export(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitConfigError;
}
