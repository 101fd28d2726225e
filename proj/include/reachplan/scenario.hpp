#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reachplan/gnss.hpp"
#include "reachplan/montecarlo.hpp"
#include "reachplan/planner.hpp"
#include "reachplan/reach.hpp"

namespace reachplan {

// Everything one experiment needs: scene, constellation, agents, and the
// planner/reachability/noise/validation knobs.
struct ScenarioConfig {
    std::string scene_path;
    std::string almanac_path;
    double epoch = 302400.0;  // seconds of week at launch step 0
    std::vector<AgentTask> agents;
    PlannerConfig planner;
    ReachConfig reach;
    NoiseConfig noise;
    MultipathEnvelope envelope;
    McConfig mc;
    double q_sigma = 3.0;
    std::string output_dir = "out";

    void validate_paths(const std::string& base_dir) const;
};

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario_json(const std::string& text, const std::string& base_dir);

// FNV-1a over the canonical JSON form of the scenario; stamped into every
// artifact so downstream commands can refuse stale inputs.
std::string scenario_hash(const ScenarioConfig& cfg);

// Builds the almanac-driven environment described by the scenario.
std::unique_ptr<UrbanGnssEnvironment> make_environment(const ScenarioConfig& cfg,
                                                       const UrbanScene& scene);

ExploreSetup make_explore_setup(const ScenarioConfig& cfg, const GnssEnvironment& env);

// Graph artifact: topology plus per-edge input sequences; states and gains
// are re-derived deterministically on load.
std::string graph_to_json(const PlannerGraph& graph, const ScenarioConfig& cfg);
PlannerGraph graph_from_json(const std::string& text, const ScenarioConfig& cfg);

std::string plan_to_json(const Plan& plan, const ScenarioConfig& cfg, int agent_id);
Plan plan_from_json(const std::string& text, const ScenarioConfig& cfg);

std::string report_to_json(const std::vector<ContainmentReport>& reports,
                           const ScenarioConfig& cfg);

// Plot-ready CSV emitters.
std::string nominal_path_csv(const Plan& plan);
std::string confidence_sets_csv(const Plan& plan, double confidence, int stride = 1);
std::string traces_csv(const std::vector<RunTrace>& traces, int stride = 1);
std::string buildings_csv(const UrbanScene& scene);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace reachplan
