#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "reachplan/gnss.hpp"
#include "reachplan/planner.hpp"

namespace reachplan {

struct McConfig {
    int runs = 1000;
    std::uint64_t master_seed = 1;
    BiasPolicy bias_policy = BiasPolicy::WorstCaseConstant;
    InitialUncertainty init;
    bool feedback_enabled = true;
};

// Counter-based seed split so run i is reproducible in isolation.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

struct RunTrace {
    std::vector<Eigen::Vector3d> true_states;   // length horizon+1
    std::vector<Eigen::Vector3d> estimates;     // length horizon+1
    std::vector<std::vector<double>> biases;    // per step, per satellite
    std::uint64_t seed = 0;
};

// One closed-loop rollout: truth under process noise, measurements from the
// scheduled satellite geometry with drawn biases, EKF with the schedule's
// gains, feedback per the plan's gains.
RunTrace run_closed_loop(const Plan& plan, const NoiseConfig& noise,
                         const McConfig& cfg, std::uint64_t run_seed);

struct ContainmentReport {
    std::vector<double> fraction_2d;  // per step, position projection
    std::vector<double> fraction_3d;  // per step, full state
    double min_fraction_2d = 1.0;
    double min_fraction_3d = 1.0;
    // Per run: worst halfspace violation of the 2D set over the horizon
    // (<= 0 means the run stayed inside at every step).
    std::vector<double> worst_excursion;
    int runs = 0;
};

// Per-step membership of the true state in the confidence zonotopes of the
// plan's predicted sets (position projection; full 3D reported separately).
ContainmentReport containment_stats(const std::vector<RunTrace>& traces,
                                    const Plan& plan, double confidence);

// Convenience driver: runs the ensemble in parallel (deterministic per-run
// seeds) and aggregates containment.
std::vector<RunTrace> run_ensemble(const Plan& plan, const NoiseConfig& noise,
                                   const McConfig& cfg);

}  // namespace reachplan
