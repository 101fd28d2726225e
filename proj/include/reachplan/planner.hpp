#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reachplan/estimator.hpp"
#include "reachplan/gnss.hpp"
#include "reachplan/models.hpp"
#include "reachplan/reach.hpp"
#include "reachplan/zonotope.hpp"

namespace reachplan {

// Output of the low-level connection primitive: nominal states, inputs and
// stabilizing feedback gains over one edge. states/inputs/gains have equal
// length; the edge's closing state (the target node pose, up to rollout
// rounding) is end_state.
struct NominalEdge {
    std::vector<VehicleState> states;
    std::vector<ControlInput> inputs;
    std::vector<Eigen::Matrix<double, 2, 3>> gains;
    VehicleState end_state;
    int from_node = -1;
    int to_node = -1;
    double length = 0.0;  // m

    int steps() const { return static_cast<int>(inputs.size()); }
};

struct PlannerConfig {
    double delta = 1.0 - 0.9973002039367398;  // collision probability threshold
    double grid_spacing = 100.0;               // m
    int headings_per_node = 4;
    double v_nominal = 10.0;   // m/s
    double v_max = 15.0;       // m/s
    double omega_max = 0.6;    // rad/s
    double dominance_slack = 0.01;
    double corridor_radius = 2.0;  // static clearance around the nominal, m
    Eigen::Vector3d lqr_state_weights = {1.0, 1.0, 10.0};
    Eigen::Vector2d lqr_input_weights = {0.1, 1.0};
    Eigen::Vector2d area_lo = {0.0, 0.0};
    Eigen::Vector2d area_hi = {400.0, 400.0};
    int max_expansions = 1000000;

    void validate() const;
    double confidence() const { return 1.0 - delta; }
};

// Initial dispersion of the true state and the estimation error.
struct InitialUncertainty {
    Eigen::Matrix3d x0_cov =
        Eigen::Vector3d(1.0, 1.0, 0.01).asDiagonal();
    Eigen::Matrix3d x0_tilde_cov =
        Eigen::Vector3d(1.0, 1.0, 0.01).asDiagonal();
};

// Dubins-style arc/line connection sampled at dt, exact under the discrete
// rollout. Returns nullopt when the turn-rate or speed bounds cannot realize
// the transfer.
std::optional<NominalEdge> connect(const VehicleState& xi, const VehicleState& xj,
                                   const PlannerConfig& cfg, double dt);

struct GraphNode {
    Eigen::Vector2d pos;
    double heading = 0.0;

    VehicleState state() const { return {pos.x(), pos.y(), heading}; }
};

struct PlannerGraph {
    std::vector<GraphNode> nodes;
    std::vector<NominalEdge> edges;
    std::vector<std::vector<int>> out_edges;  // per node, edge indices

    int nearest_node(const VehicleState& x, double max_pos_dist) const;
};

// Grid x heading-set graph of feasible, statically collision-free edges.
PlannerGraph build_graph(const UrbanScene& scene, const PlannerConfig& cfg, double dt);

// Time-indexed 2D confidence zonotopes of previously planned agents.
struct DynamicObstacles {
    std::map<int, std::vector<Zonotope>> by_abs_step;

    const std::vector<Zonotope>* at(int abs_step) const {
        auto it = by_abs_step.find(abs_step);
        return it == by_abs_step.end() ? nullptr : &it->second;
    }
};

// Conservative chance constraint: the position-projected confidence zonotope
// at confidence 1-delta must miss every obstacle.
bool chance_check(const ProbabilisticZonotope& predicted,
                  const std::vector<const std::vector<Eigen::Vector2d>*>& obstacles,
                  const std::vector<Zonotope>* dynamic_obstacles,
                  const PlannerConfig& cfg);

struct Plan {
    std::vector<VehicleState> states;               // T+1
    std::vector<ControlInput> inputs;               // T
    std::vector<Eigen::Matrix<double, 2, 3>> gains; // T
    std::vector<ScheduleEntry> schedule;            // T, entry k-1 drives step k
    std::vector<ProbabilisticZonotope> state_sets;  // T+1
    std::vector<ProbabilisticZonotope> est_sets;    // T+1
    double length = 0.0;
    int launch_step = 0;

    int horizon() const { return static_cast<int>(inputs.size()); }
};

struct ExploreStats {
    int expansions = 0;
    int pruned_dominated = 0;
    int rejected_static = 0;
    int rejected_dynamic = 0;
};

struct ExploreSetup {
    const GnssEnvironment* env = nullptr;
    NoiseConfig noise;
    ReachConfig reach;
    ScheduleConfig schedule;
    InitialUncertainty init;
    int launch_step = 0;
    const DynamicObstacles* dynamic = nullptr;
};

// Uncertainty-aware best-first search over the graph, ordered by nominal
// length, with Pareto dominance pruning at (node, arrival step).
std::optional<Plan> explore(const PlannerGraph& graph, const VehicleState& x_init,
                            const VehicleState& x_goal, const UrbanScene& scene,
                            const PlannerConfig& cfg, const ExploreSetup& setup,
                            ExploreStats* stats = nullptr);

struct AgentTask {
    VehicleState start;
    VehicleState goal;
    int launch_step = 0;
};

struct AgentPlanResult {
    bool success = false;
    Plan plan;
    ExploreStats stats;
    std::string message;
};

// Plans agents in priority order; each agent treats the time-indexed
// confidence zonotopes of earlier agents as dynamic obstacles.
std::vector<AgentPlanResult> plan_sequential(const std::vector<AgentTask>& agents,
                                             const PlannerGraph& graph,
                                             const UrbanScene& scene,
                                             const PlannerConfig& cfg,
                                             const ExploreSetup& base_setup);

// Position-projected confidence zonotope of a 3D predicted set.
Zonotope position_confidence_zonotope(const ProbabilisticZonotope& set,
                                      double confidence);

}  // namespace reachplan
