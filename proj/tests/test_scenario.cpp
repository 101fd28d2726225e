#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "reachplan/scenario.hpp"

using namespace reachplan;

namespace {

std::string asset(const std::string& name) {
    // Tests run from the build tree; assets live in the source tree.
    for (const char* base : {"../assets/", "../../assets/", "assets/"}) {
        const std::string p = base + name;
        if (std::filesystem::exists(p)) {
            return p;
        }
    }
    return "assets/" + name;
}

}  // namespace

TEST_CASE("demo scenario loads with defaults applied") {
    const ScenarioConfig cfg = load_scenario(asset("demo_config.json"));
    CHECK(cfg.agents.size() == 1);
    CHECK(cfg.noise.dt == doctest::Approx(0.2));
    CHECK(cfg.noise.sigma_rho == doctest::Approx(5.0));
    CHECK(cfg.noise.heading_var == doctest::Approx(0.001));
    CHECK(cfg.planner.grid_spacing == doctest::Approx(100.0));
    CHECK(cfg.reach.confidence == doctest::Approx(0.9973002039367398));
    CHECK(cfg.envelope.correlator_spacing == doctest::Approx(0.25));
    CHECK(cfg.mc.bias_policy == BiasPolicy::WorstCaseConstant);
    cfg.validate_paths("");
}

TEST_CASE("scenario hash is stable and seed-insensitive") {
    ScenarioConfig a = load_scenario(asset("demo_config.json"));
    ScenarioConfig b = a;
    CHECK(scenario_hash(a) == scenario_hash(b));
    b.mc.master_seed = 999;
    b.mc.runs = 7;
    CHECK(scenario_hash(a) == scenario_hash(b));  // validation knobs excluded
    b.planner.grid_spacing = 50.0;
    CHECK(scenario_hash(a) != scenario_hash(b));
}

TEST_CASE("scene file round trip") {
    const UrbanScene scene = load_scene(asset("demo_scene.json"));
    CHECK(scene.buildings.size() == 6);
    CHECK(scene.flight_altitude == doctest::Approx(65.0));
    CHECK(scene.tall_buildings().size() == 4);
    const UrbanScene again = parse_scene_json(scene_to_json(scene));
    CHECK(again.buildings.size() == scene.buildings.size());
    for (size_t i = 0; i < scene.buildings.size(); ++i) {
        CHECK(again.buildings[i].height == doctest::Approx(scene.buildings[i].height));
    }
}

TEST_CASE("malformed scene reports the offending building") {
    const char* bad = R"({"altitude": 65, "anchor": {"lat_deg": 0, "lon_deg": 0},
                          "buildings": [{"footprint": [[0,0],[1,0]], "height": 10}]})";
    CHECK_THROWS_WITH_AS(parse_scene_json(bad), doctest::Contains("building 0"),
                         std::invalid_argument);
    CHECK_THROWS(parse_scene_json("{not json"));
}

TEST_CASE("non-convex footprints are decomposed on ingest") {
    const char* lshape = R"({"altitude": 65, "anchor": {"lat_deg": 0, "lon_deg": 0},
        "buildings": [{"footprint": [[0,0],[40,0],[40,20],[20,20],[20,40],[0,40]],
                       "height": 100}]})";
    const UrbanScene scene = parse_scene_json(lshape);
    REQUIRE(scene.buildings.size() == 1);
    CHECK(scene.buildings[0].convex_parts.size() >= 2);
    for (const auto& part : scene.buildings[0].convex_parts) {
        CHECK(is_convex_polygon(part));
    }
    // The union still covers interior points of both arms.
    CHECK(scene.point_in_tall_building({30, 10}));
    CHECK(scene.point_in_tall_building({10, 30}));
    CHECK_FALSE(scene.point_in_tall_building({30, 30}));
}

TEST_CASE("graph artifact round trip preserves rollouts and gains") {
    ScenarioConfig cfg = load_scenario(asset("demo_config.json"));
    cfg.planner.area_hi = {200.0, 200.0};
    const UrbanScene scene = load_scene(cfg.scene_path);
    const PlannerGraph graph = build_graph(scene, cfg.planner, cfg.noise.dt);
    const std::string text = graph_to_json(graph, cfg);
    const PlannerGraph back = graph_from_json(text, cfg);
    REQUIRE(back.nodes.size() == graph.nodes.size());
    REQUIRE(back.edges.size() == graph.edges.size());
    for (size_t i = 0; i < graph.edges.size(); ++i) {
        const auto& a = graph.edges[i];
        const auto& b = back.edges[i];
        CHECK(a.from_node == b.from_node);
        CHECK(a.to_node == b.to_node);
        REQUIRE(a.steps() == b.steps());
        CHECK((a.end_state.vec() - b.end_state.vec()).norm() < 1e-12);
        for (int k = 0; k < a.steps(); ++k) {
            CHECK((a.gains[static_cast<size_t>(k)] - b.gains[static_cast<size_t>(k)])
                      .norm() < 1e-12);
        }
    }
    // A different config refuses the artifact.
    ScenarioConfig other = cfg;
    other.planner.grid_spacing = 50.0;
    CHECK_THROWS(graph_from_json(text, other));
    // Byte-identical re-serialization (idempotent artifacts).
    CHECK(graph_to_json(back, cfg) == text);
}

TEST_CASE("csv emitters produce the documented headers") {
    Plan plan;
    plan.states = {VehicleState(0, 0, 0), VehicleState(2, 0, 0)};
    plan.inputs = {ControlInput(10, 0)};
    plan.gains = {Eigen::Matrix<double, 2, 3>::Zero()};
    plan.state_sets = {
        ProbabilisticZonotope::gaussian(Eigen::Vector3d(0, 0, 0),
                                        Eigen::Matrix3d::Identity() * 0.1),
        ProbabilisticZonotope::gaussian(Eigen::Vector3d(2, 0, 0),
                                        Eigen::Matrix3d::Identity() * 0.1)};
    const std::string nominal = nominal_path_csv(plan);
    CHECK(nominal.rfind("step,x1,x2,theta,v,omega\n", 0) == 0);
    const std::string conf = confidence_sets_csv(plan, 0.9973, 1);
    CHECK(conf.rfind("step,vertex,x1,x2\n", 0) == 0);

    RunTrace t;
    t.true_states = {Eigen::Vector3d::Zero(), Eigen::Vector3d(2, 0, 0)};
    t.estimates = t.true_states;
    const std::string traces = traces_csv({t}, 1);
    CHECK(traces.rfind("run,step,x1,x2,theta,est_x1,est_x2,est_theta\n", 0) == 0);
}
