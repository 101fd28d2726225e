#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <vector>

#include "reachplan/estimator.hpp"
#include "reachplan/models.hpp"
#include "reachplan/zonotope.hpp"

namespace reachplan {

// Noise channels of the independent-quantity decomposition. Channels 1/2
// (initial state and initial estimation error) are not time-indexed and are
// stored separately; channels 3..8 carry per-injection-time coefficients.
//   3: process noise w_n            (n = 1..k)
//   4: sensing noise v_n            (n = 1..k)
//   5: dynamics remainder, true     (n = 0..k-1)
//   6: dynamics remainder, estimate (n = 0..k-1)
//   7: range remainder, true        (slot n holds the term entering at the
//   8: range remainder, predicted    step n+1 correction)
inline constexpr int kNumIndexedChannels = 6;
inline constexpr int kFirstIndexedChannel = 3;

// Matrix coefficients mapping each independent noise quantity into the state
// (phi) and the estimation error (phi_tilde) at step `step`.
struct CoefficientTable {
    int step = 0;
    int dim = 0;
    Eigen::MatrixXd phi1;        // initial state deviation -> state
    Eigen::MatrixXd phi2;        // initial estimation error -> state
    Eigen::MatrixXd phi2_tilde;  // initial estimation error -> estimation error
    // Indexed by channel - 3; keys are injection slots. Entries absent from a
    // map are exact zeros (either never created or removed by truncation).
    std::array<std::map<int, Eigen::MatrixXd>, kNumIndexedChannels> phi;
    std::array<std::map<int, Eigen::MatrixXd>, kNumIndexedChannels> phi_tilde;
};

// One step of the closed-loop error dynamics as consumed by the recursion:
// the step k update uses the k-1 dynamics matrices and the step k filter
// matrices.
struct ReachStep {
    Eigen::MatrixXd a;         // n x n, at step k-1
    Eigen::MatrixXd b;         // n x nu, at step k-1
    Eigen::MatrixXd feedback;  // nu x n, at step k-1
    Eigen::MatrixXd c;         // m x n, at step k
    Eigen::MatrixXd gain_l;    // n x m, at step k
};

ReachStep make_reach_step(const ScheduleEntry& entry);

struct ReachConfig {
    // Frobenius-norm thresholds per indexed channel (3..8); coefficients
    // below the threshold are dropped. Shared between phi and phi_tilde.
    std::array<double, kNumIndexedChannels> zeta = {1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4};
    int max_generators = 60;   // order reduction after assembly; <= 0 disables
    double confidence = 0.9973002039367398;

    void validate() const;
};

// Independent input sets per channel and injection slot.
struct ReachInputs {
    ProbabilisticZonotope x0;        // initial state set (absolute coordinates)
    ProbabilisticZonotope x0_tilde;  // initial estimation error set
    Eigen::VectorXd x_nom_0;
    std::array<std::map<int, ProbabilisticZonotope>, kNumIndexedChannels> channel;

    const ProbabilisticZonotope& lookup(int channel_index, int slot) const;
    void insert(int channel_index, int slot, ProbabilisticZonotope set);
    // Drops inputs whose slot is gone from both coefficient maps.
    void prune(const CoefficientTable& table);
};

// Base case: phi1 = I, phi2_tilde = I, everything else zero.
CoefficientTable init_coefficients(int dimension);

// One step of the coefficient recursions, including the fresh-term seeds.
// Zero seeds are not stored; missing entries are treated as exact zeros.
CoefficientTable propagate_coefficients(const CoefficientTable& prev,
                                        const ReachStep& step);

// Drops indexed coefficients with Frobenius norm below the channel threshold.
CoefficientTable truncate(const CoefficientTable& table, const ReachConfig& cfg);

// Predicted state uncertainty: nominal ++ mapped independent inputs.
ProbabilisticZonotope assemble_state_set(const CoefficientTable& table,
                                         const Eigen::VectorXd& x_nom_k,
                                         const ReachInputs& inputs);

// State estimation error set (phi_tilde side, no nominal translation).
ProbabilisticZonotope assemble_estimation_error_set(const CoefficientTable& table,
                                                    const ReachInputs& inputs);

struct ReachSets {
    ProbabilisticZonotope state_set;
    ProbabilisticZonotope estimation_error_set;
    std::array<int, kNumIndexedChannels> kept_phi_counts = {};
    std::array<int, kNumIndexedChannels> kept_phi_tilde_counts = {};
};

// Per-step inputs for the legacy recursion (and the propagator below).
struct StepNoise {
    ProbabilisticZonotope w;    // process noise at step k
    ProbabilisticZonotope v;    // sensing noise at step k
    ProbabilisticZonotope lf1;  // dynamics remainder (true trajectory), step k-1
    ProbabilisticZonotope lf2;  // dynamics remainder (estimate), step k-1
    ProbabilisticZonotope lh1;  // range remainder (true), step k
    ProbabilisticZonotope lh2;  // range remainder (predicted), step k
};

// Prior-generation recursion that sums the state and estimation-error sets
// step by step, ignoring their shared noise history. Kept as a comparison
// baseline; the summed sets are correlated, so the result over-/under-shoots
// the exact covariance.
std::vector<ReachSets> legacy_recursive_sets(
    const std::vector<ReachStep>& steps,
    const std::vector<Eigen::VectorXd>& x_nominal,  // length steps+1
    const std::vector<StepNoise>& noise,            // length steps
    const ProbabilisticZonotope& x0,
    const ProbabilisticZonotope& x0_tilde,
    int max_generators = 0);

// Stateful propagation of the improved recursion along a schedule:
// derives remainder inputs from the current confidence hulls, seeds the
// per-step noise inputs, and assembles the sets after each step.
class TrajectoryReachability {
  public:
    TrajectoryReachability(ProbabilisticZonotope x0, ProbabilisticZonotope x0_tilde,
                           const Eigen::Vector3d& x_nom_0, NoiseConfig noise,
                           ReachConfig cfg, double remainder_divisor = 3.0);

    // Advances one step along the schedule and returns the step-k sets.
    ReachSets advance(const ScheduleEntry& entry);

    const ReachSets& current() const { return current_; }
    int step() const { return table_.step; }

    const CoefficientTable& table() const { return table_; }
    const ReachInputs& inputs() const { return inputs_; }

  private:
    CoefficientTable table_;
    ReachInputs inputs_;
    NoiseConfig noise_;
    ReachConfig cfg_;
    double remainder_divisor_;
    ReachSets current_;
};

}  // namespace reachplan
