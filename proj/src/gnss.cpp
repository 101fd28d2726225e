#include "reachplan/gnss.hpp"

#include <cmath>
#include <stdexcept>

namespace reachplan {

namespace {

// Clips segment p + t(q - p), t in [0,1], against a convex polygon (CCW).
// Returns false when the segment misses the polygon.
bool clip_segment_2d(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                     const std::vector<Eigen::Vector2d>& poly,
                     double& t_lo, double& t_hi) {
    t_lo = 0.0;
    t_hi = 1.0;
    const size_t n = poly.size();
    const Eigen::Vector2d d = q - p;
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d a = poly[i];
        const Eigen::Vector2d e = poly[(i + 1) % n] - a;
        const Eigen::Vector2d inward(-e.y(), e.x());  // interior is left of CCW edges
        const double num = inward.dot(p - a);
        const double den = inward.dot(d);
        if (std::fabs(den) < 1e-15) {
            if (num < 0.0) {
                return false;  // parallel and outside
            }
            continue;
        }
        const double t = -num / den;
        if (den > 0.0) {
            t_lo = std::max(t_lo, t);
        } else {
            t_hi = std::min(t_hi, t);
        }
        if (t_lo > t_hi) {
            return false;
        }
    }
    return true;
}

// True if the 3D segment passes through the extruded prism (footprint x
// [z_ground, z_top]), ignoring grazes within t_margin of the endpoints.
bool segment_hits_prism(const Eigen::Vector3d& p, const Eigen::Vector3d& q,
                        const std::vector<Eigen::Vector2d>& footprint,
                        double z_top, double t_margin) {
    double t_lo, t_hi;
    if (!clip_segment_2d(p.head<2>(), q.head<2>(), footprint, t_lo, t_hi)) {
        return false;
    }
    t_lo = std::max(t_lo, t_margin);
    t_hi = std::min(t_hi, 1.0 - t_margin);
    if (t_lo >= t_hi) {
        return false;
    }
    const double z_at_lo = p.z() + t_lo * (q.z() - p.z());
    const double z_at_hi = p.z() + t_hi * (q.z() - p.z());
    return std::min(z_at_lo, z_at_hi) < z_top - 1e-12;
}

bool segment_occluded(const Eigen::Vector3d& p, const Eigen::Vector3d& q,
                      const UrbanScene& scene, double t_margin) {
    for (const auto& b : scene.buildings) {
        const double z_top = b.height - scene.flight_altitude;
        for (const auto& part : b.convex_parts) {
            if (segment_hits_prism(p, q, part, z_top, t_margin)) {
                return true;
            }
        }
    }
    return false;
}

}  // namespace

SignalClassification classify_signal(const Eigen::Vector2d& receiver_pos,
                                     const Eigen::Vector3d& sat_flight_local,
                                     const UrbanScene& scene) {
    SignalClassification out;
    const Eigen::Vector3d rx(receiver_pos.x(), receiver_pos.y(), 0.0);

    if (segment_occluded(rx, sat_flight_local, scene, 0.0)) {
        out.cls = SignalClass::Blocked;
        return out;
    }

    const double direct_len = (sat_flight_local - rx).norm();
    for (const auto& b : scene.buildings) {
        const double z_top = b.height - scene.flight_altitude;
        if (z_top <= 0.0) {
            continue;  // facade entirely below the flight plane cannot reflect upward paths
        }
        const auto& fp = b.footprint;
        const size_t n = fp.size();
        for (size_t i = 0; i < n; ++i) {
            const Eigen::Vector2d a = fp[i];
            const Eigen::Vector2d edge = fp[(i + 1) % n] - a;
            const double elen = edge.norm();
            if (elen < 1e-12) {
                continue;
            }
            const Eigen::Vector2d out_n(edge.y() / elen, -edge.x() / elen);
            const double side_rx = out_n.dot(receiver_pos - a);
            const double side_sat = out_n.dot(sat_flight_local.head<2>() - a);
            if (side_rx <= 1e-9 || side_sat <= 0.0) {
                continue;  // reflection only off the facade facing both endpoints
            }
            // Image of the receiver across the facade plane.
            const Eigen::Vector2d image = receiver_pos - 2.0 * side_rx * out_n;
            const double denom = out_n.dot(sat_flight_local.head<2>() - image);
            if (denom <= 1e-12) {
                continue;
            }
            const double s = -out_n.dot(image - a) / denom;
            if (s <= 0.0 || s >= 1.0) {
                continue;
            }
            const Eigen::Vector2d w2d = image + s * (sat_flight_local.head<2>() - image);
            const double wz = s * sat_flight_local.z();
            if (wz < -scene.flight_altitude || wz > z_top) {
                continue;  // off the wall rectangle vertically
            }
            const double u = (w2d - a).dot(edge) / (elen * elen);
            if (u < 0.0 || u > 1.0) {
                continue;  // off the wall horizontally
            }
            const Eigen::Vector3d w(w2d.x(), w2d.y(), wz);
            if (segment_occluded(rx, w, scene, 1e-6) ||
                segment_occluded(w, sat_flight_local, scene, 1e-6)) {
                continue;
            }
            const double delta = (w - rx).norm() + (sat_flight_local - w).norm() - direct_len;
            out.path_deltas.push_back(delta);
        }
    }
    out.cls = out.path_deltas.empty() ? SignalClass::Open : SignalClass::Multipath;
    return out;
}

double pseudorange_noise_var(double elevation, double sigma_rho,
                             double elevation_mask_rad) {
    if (elevation < elevation_mask_rad) {
        throw std::invalid_argument(
            "pseudorange_noise_var: satellite below elevation mask");
    }
    const double s = std::sin(elevation);
    return sigma_rho / (s * s);
}

UrbanGnssEnvironment::UrbanGnssEnvironment(UrbanScene scene,
                                           std::vector<AlmanacRecord> almanac,
                                           double epoch_start, double dt,
                                           MultipathEnvelope envelope,
                                           double sigma_rho, double heading_var)
    : scene_(std::move(scene)),
      almanac_(std::move(almanac)),
      epoch_start_(epoch_start),
      dt_(dt),
      envelope_(envelope),
      sigma_rho_(sigma_rho),
      heading_var_(heading_var) {
    envelope_.validate();
    if (dt_ <= 0.0) {
        throw std::invalid_argument("gnss environment: dt must be positive");
    }
}

Eigen::Vector3d UrbanGnssEnvironment::sat_ecef_cached(int rec_index, int abs_step) const {
    const long long key = static_cast<long long>(rec_index) * (1LL << 32) + abs_step;
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = ecef_cache_.find(key);
        if (it != ecef_cache_.end()) {
            return it->second;
        }
    }
    Eigen::Vector3d p = sat_position(almanac_[static_cast<size_t>(rec_index)],
                                     epoch_at(abs_step));
    std::lock_guard<std::mutex> lock(cache_mutex_);
    ecef_cache_.emplace(key, p);
    return p;
}

std::vector<SatObservation> UrbanGnssEnvironment::snapshot(const Eigen::Vector2d& pos,
                                                           int abs_step) const {
    std::vector<SatObservation> out;
    const double mask = scene_.elevation_mask_deg * M_PI / 180.0;
    const Eigen::Vector3d rx_local(pos.x(), pos.y(), scene_.flight_altitude);
    for (size_t i = 0; i < almanac_.size(); ++i) {
        const Eigen::Vector3d ecef = sat_ecef_cached(static_cast<int>(i), abs_step);
        auto [el, az] = elevation_azimuth(scene_, rx_local, ecef);
        if (el < mask) {
            continue;
        }
        const Eigen::Vector3d local = sat_to_flight_local(scene_, ecef);
        SignalClassification cls = classify_signal(pos, local, scene_);
        if (cls.cls == SignalClass::Blocked) {
            continue;  // excluded upstream, never reaches the filter
        }
        SatObservation obs;
        obs.prn = almanac_[i].prn;
        obs.pos_flight_local = local;
        obs.elevation = el;
        obs.azimuth = az;
        obs.cls = cls.cls;
        obs.noise_var = pseudorange_noise_var(el, sigma_rho_, mask);
        for (double delta : cls.path_deltas) {
            obs.bias_bound = std::max(obs.bias_bound,
                                      multipath_bias_bound(delta, envelope_));
        }
        out.push_back(std::move(obs));
    }
    return out;
}

MeasurementSample simulate_measurements(const VehicleState& x_true,
                                        const std::vector<SatObservation>& sats,
                                        double heading_var, BiasPolicy policy,
                                        std::unordered_map<int, double>& bias_signs,
                                        std::mt19937_64& rng) {
    const int n = static_cast<int>(sats.size());
    MeasurementSample sample;
    sample.z.resize(n + 1);
    sample.biases.resize(static_cast<size_t>(n));
    sample.prns.resize(static_cast<size_t>(n));

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    const Eigen::Vector3d rx(x_true.x1, x_true.x2, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto& s = sats[static_cast<size_t>(i)];
        double bias = 0.0;
        if (s.bias_bound > 0.0) {
            if (policy == BiasPolicy::WorstCaseConstant) {
                auto it = bias_signs.find(s.prn);
                if (it == bias_signs.end()) {
                    const double sign = uniform(rng) >= 0.0 ? 1.0 : -1.0;
                    it = bias_signs.emplace(s.prn, sign).first;
                }
                bias = it->second * s.bias_bound;
            } else {
                bias = uniform(rng) * s.bias_bound;
            }
        }
        if (std::fabs(bias) > s.bias_bound + 1e-12) {
            throw std::logic_error("simulate_measurements: bias outside its bound");
        }
        const double range = (s.pos_flight_local - rx).norm();
        sample.z(i) = range + bias + std::sqrt(s.noise_var) * gauss(rng);
        sample.biases[static_cast<size_t>(i)] = bias;
        sample.prns[static_cast<size_t>(i)] = s.prn;
    }
    sample.z(n) = x_true.theta + std::sqrt(heading_var) * gauss(rng);
    return sample;
}

}  // namespace reachplan
