#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace reachplan {

struct GeodeticAnchor {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    double alt_m = 0.0;
};

Eigen::Vector3d geodetic_to_ecef(const GeodeticAnchor& g);

// Rotation taking ECEF offsets (relative to the anchor) into the local
// east-north-up frame at the anchor.
Eigen::Matrix3d ecef_to_enu_rotation(const GeodeticAnchor& g);

struct Building {
    std::vector<Eigen::Vector2d> footprint;  // original polygon, CCW
    double height = 0.0;                     // m above local ground
    // Convex decomposition of the footprint, filled on ingest. Equal to
    // {footprint} when the footprint is already convex.
    std::vector<std::vector<Eigen::Vector2d>> convex_parts;
};

// 2.5D environment: extruded building footprints plus the satellite-frame
// anchor and receiver flight altitude.
struct UrbanScene {
    std::vector<Building> buildings;
    double flight_altitude = 65.0;      // m
    GeodeticAnchor anchor;
    double elevation_mask_deg = 10.0;

    void validate_and_decompose();

    // Bounding box over building footprints (zero box when empty).
    void bounds(Eigen::Vector2d& lo, Eigen::Vector2d& hi) const;

    // Buildings that rise above the flight altitude (planner obstacles).
    std::vector<const Building*> tall_buildings() const;

    bool point_in_tall_building(const Eigen::Vector2d& p) const;
};

UrbanScene load_scene(const std::string& path);
UrbanScene parse_scene_json(const std::string& text);
std::string scene_to_json(const UrbanScene& scene);

// (elevation, azimuth) of a satellite seen from a receiver at the given
// local ENU position. Azimuth is north-referenced, clockwise positive.
// sat_ecef is earth-fixed; the receiver sits at anchor + local offset.
std::pair<double, double> elevation_azimuth(const UrbanScene& scene,
                                            const Eigen::Vector3d& receiver_local,
                                            const Eigen::Vector3d& sat_ecef);

// Satellite position mapped into the flight-local frame: ENU at the anchor,
// shifted down so z = 0 is the flight plane.
Eigen::Vector3d sat_to_flight_local(const UrbanScene& scene,
                                    const Eigen::Vector3d& sat_ecef);

bool point_in_convex_polygon(const std::vector<Eigen::Vector2d>& poly,
                             const Eigen::Vector2d& p, double tol = 1e-9);

// Splits a simple polygon into convex pieces (ear clipping into triangles
// when the polygon is not convex).
std::vector<std::vector<Eigen::Vector2d>> decompose_convex(
    const std::vector<Eigen::Vector2d>& polygon);

}  // namespace reachplan
