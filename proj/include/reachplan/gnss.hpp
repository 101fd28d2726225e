#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <random>
#include <unordered_map>
#include <vector>

#include "reachplan/almanac.hpp"
#include "reachplan/models.hpp"
#include "reachplan/multipath.hpp"
#include "reachplan/scene.hpp"

namespace reachplan {

enum class SignalClass { Open, Blocked, Multipath };

struct SignalClassification {
    SignalClass cls = SignalClass::Open;
    // Differential path lengths (reflected minus direct), meters, one per
    // valid single-bounce reflection. Nonempty only for Multipath.
    std::vector<double> path_deltas;
};

// LOS/NLOS/multipath classification by ray tracing against the extruded
// building footprints. Blocked means the direct ray hits a building;
// Multipath means the direct ray is clear and at least one specular
// single-bounce reflection off a vertical facade reaches the receiver.
SignalClassification classify_signal(const Eigen::Vector2d& receiver_pos,
                                     const Eigen::Vector3d& sat_flight_local,
                                     const UrbanScene& scene);

// Elevation-weighted pseudorange variance sigma_rho / sin^2(el).
// Throws below the elevation mask (such satellites must be filtered out).
double pseudorange_noise_var(double elevation, double sigma_rho,
                             double elevation_mask_rad);

// One usable satellite at a given receiver position and epoch.
struct SatObservation {
    int prn = 0;
    Eigen::Vector3d pos_flight_local = Eigen::Vector3d::Zero();
    double elevation = 0.0;
    double azimuth = 0.0;
    SignalClass cls = SignalClass::Open;
    double bias_bound = 0.0;  // m; > 0 only under multipath
    double noise_var = 0.0;   // m^2
};

// Satellite geometry/quality source consumed by the filter schedule, the
// reachability inputs, and the closed-loop simulator.
class GnssEnvironment {
  public:
    virtual ~GnssEnvironment() = default;
    // Satellites above the mask whose direct signal is not blocked, at the
    // given position and absolute step.
    virtual std::vector<SatObservation> snapshot(const Eigen::Vector2d& pos,
                                                 int abs_step) const = 0;
    virtual double heading_noise_var() const = 0;
};

// Almanac-driven urban environment. Satellite positions are recomputed per
// step and cached per (prn, step).
class UrbanGnssEnvironment : public GnssEnvironment {
  public:
    UrbanGnssEnvironment(UrbanScene scene, std::vector<AlmanacRecord> almanac,
                         double epoch_start, double dt, MultipathEnvelope envelope,
                         double sigma_rho, double heading_var);

    std::vector<SatObservation> snapshot(const Eigen::Vector2d& pos,
                                         int abs_step) const override;
    double heading_noise_var() const override { return heading_var_; }

    const UrbanScene& scene() const { return scene_; }
    double dt() const { return dt_; }
    double epoch_at(int abs_step) const { return epoch_start_ + abs_step * dt_; }

  private:
    Eigen::Vector3d sat_ecef_cached(int rec_index, int abs_step) const;

    UrbanScene scene_;
    std::vector<AlmanacRecord> almanac_;
    double epoch_start_;
    double dt_;
    MultipathEnvelope envelope_;
    double sigma_rho_;
    double heading_var_;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<long long, Eigen::Vector3d> ecef_cache_;
};

// Fixed-geometry environment for tests and synthetic studies.
class StaticGnssEnvironment : public GnssEnvironment {
  public:
    StaticGnssEnvironment(std::vector<SatObservation> sats, double heading_var)
        : sats_(std::move(sats)), heading_var_(heading_var) {}

    std::vector<SatObservation> snapshot(const Eigen::Vector2d&, int) const override {
        return sats_;
    }
    double heading_noise_var() const override { return heading_var_; }

  private:
    std::vector<SatObservation> sats_;
    double heading_var_;
};

enum class BiasPolicy { WorstCaseConstant, UniformPerEpoch };

struct MeasurementSample {
    Eigen::VectorXd z;            // N ranges + heading
    std::vector<double> biases;   // per satellite, as drawn
    std::vector<int> prns;
};

// Draws one measurement vector at the true state: per-satellite range plus
// Gaussian noise plus a bias within [-bias_bound, bias_bound] per the
// policy, and the heading measurement. For WorstCaseConstant the sign map
// persists across calls (one sign per satellite per run).
MeasurementSample simulate_measurements(const VehicleState& x_true,
                                        const std::vector<SatObservation>& sats,
                                        double heading_var, BiasPolicy policy,
                                        std::unordered_map<int, double>& bias_signs,
                                        std::mt19937_64& rng);

}  // namespace reachplan
