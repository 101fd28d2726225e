#include "reachplan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "reachplan/zonotope.hpp"

namespace reachplan {

namespace {

// WGS-84
constexpr double kSemiMajor = 6378137.0;
constexpr double kFlattening = 1.0 / 298.257223563;
constexpr double kEccSq = kFlattening * (2.0 - kFlattening);

double deg2rad(double d) { return d * M_PI / 180.0; }

double polygon_signed_area(const std::vector<Eigen::Vector2d>& poly) {
    double a = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % n];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

bool point_in_triangle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c, const Eigen::Vector2d& p) {
    auto cross = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
        return u.x() * v.y() - u.y() * v.x();
    };
    const double d1 = cross(b - a, p - a);
    const double d2 = cross(c - b, p - b);
    const double d3 = cross(a - c, p - c);
    const bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    const bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    return !(has_neg && has_pos);
}

}  // namespace

Eigen::Vector3d geodetic_to_ecef(const GeodeticAnchor& g) {
    const double lat = deg2rad(g.lat_deg);
    const double lon = deg2rad(g.lon_deg);
    const double sl = std::sin(lat);
    const double n = kSemiMajor / std::sqrt(1.0 - kEccSq * sl * sl);
    return {(n + g.alt_m) * std::cos(lat) * std::cos(lon),
            (n + g.alt_m) * std::cos(lat) * std::sin(lon),
            (n * (1.0 - kEccSq) + g.alt_m) * sl};
}

Eigen::Matrix3d ecef_to_enu_rotation(const GeodeticAnchor& g) {
    const double lat = deg2rad(g.lat_deg);
    const double lon = deg2rad(g.lon_deg);
    const double sl = std::sin(lat), cl = std::cos(lat);
    const double so = std::sin(lon), co = std::cos(lon);
    Eigen::Matrix3d r;
    r << -so, co, 0.0,
         -sl * co, -sl * so, cl,
         cl * co, cl * so, sl;
    return r;
}

std::vector<std::vector<Eigen::Vector2d>> decompose_convex(
    const std::vector<Eigen::Vector2d>& polygon) {
    if (polygon.size() < 3) {
        throw std::invalid_argument("building footprint needs >= 3 vertices");
    }
    if (is_convex_polygon(polygon)) {
        return {polygon};
    }
    // Ear clipping into triangles; triangles are trivially convex.
    std::vector<Eigen::Vector2d> verts = polygon;
    if (polygon_signed_area(verts) < 0.0) {
        std::reverse(verts.begin(), verts.end());
    }
    std::vector<std::vector<Eigen::Vector2d>> parts;
    int guard = static_cast<int>(verts.size()) * static_cast<int>(verts.size()) + 16;
    while (verts.size() > 3 && guard-- > 0) {
        bool clipped = false;
        const size_t n = verts.size();
        for (size_t i = 0; i < n; ++i) {
            const Eigen::Vector2d& prev = verts[(i + n - 1) % n];
            const Eigen::Vector2d& cur = verts[i];
            const Eigen::Vector2d& next = verts[(i + 1) % n];
            const double cross = (cur - prev).x() * (next - cur).y() -
                                 (cur - prev).y() * (next - cur).x();
            if (cross <= 0.0) {
                continue;  // reflex or collinear corner
            }
            bool ear = true;
            for (size_t j = 0; j < n; ++j) {
                if (j == i || j == (i + n - 1) % n || j == (i + 1) % n) {
                    continue;
                }
                if (point_in_triangle(prev, cur, next, verts[j])) {
                    ear = false;
                    break;
                }
            }
            if (!ear) {
                continue;
            }
            parts.push_back({prev, cur, next});
            verts.erase(verts.begin() + static_cast<long>(i));
            clipped = true;
            break;
        }
        if (!clipped) {
            throw std::runtime_error("footprint decomposition failed (self-intersecting polygon?)");
        }
    }
    parts.push_back(verts);
    return parts;
}

void UrbanScene::validate_and_decompose() {
    for (size_t i = 0; i < buildings.size(); ++i) {
        auto& b = buildings[i];
        if (b.height <= 0.0) {
            throw std::invalid_argument("building " + std::to_string(i) +
                                        ": height must be positive");
        }
        if (b.footprint.size() < 3) {
            throw std::invalid_argument("building " + std::to_string(i) +
                                        ": footprint needs >= 3 vertices");
        }
        if (polygon_signed_area(b.footprint) < 0.0) {
            std::reverse(b.footprint.begin(), b.footprint.end());
        }
        try {
            b.convex_parts = decompose_convex(b.footprint);
        } catch (const std::exception& e) {
            throw std::invalid_argument("building " + std::to_string(i) + ": " + e.what());
        }
    }
    if (flight_altitude <= 0.0) {
        throw std::invalid_argument("scene: flight altitude must be positive");
    }
}

void UrbanScene::bounds(Eigen::Vector2d& lo, Eigen::Vector2d& hi) const {
    lo.setZero();
    hi.setZero();
    bool first = true;
    for (const auto& b : buildings) {
        for (const auto& v : b.footprint) {
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                lo = lo.cwiseMin(v);
                hi = hi.cwiseMax(v);
            }
        }
    }
}

std::vector<const Building*> UrbanScene::tall_buildings() const {
    std::vector<const Building*> out;
    for (const auto& b : buildings) {
        if (b.height > flight_altitude) {
            out.push_back(&b);
        }
    }
    return out;
}

bool UrbanScene::point_in_tall_building(const Eigen::Vector2d& p) const {
    for (const auto* b : tall_buildings()) {
        for (const auto& part : b->convex_parts) {
            if (point_in_convex_polygon(part, p)) {
                return true;
            }
        }
    }
    return false;
}

bool point_in_convex_polygon(const std::vector<Eigen::Vector2d>& poly,
                             const Eigen::Vector2d& p, double tol) {
    const size_t n = poly.size();
    if (n < 3) {
        return false;
    }
    const double orient = polygon_signed_area(poly) >= 0.0 ? 1.0 : -1.0;
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d e = poly[(i + 1) % n] - poly[i];
        const Eigen::Vector2d w = p - poly[i];
        if (orient * (e.x() * w.y() - e.y() * w.x()) < -tol * (1.0 + e.norm())) {
            return false;
        }
    }
    return true;
}

UrbanScene parse_scene_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("scene: JSON parse error: ") + e.what());
    }
    UrbanScene scene;
    try {
        if (j.contains("altitude")) {
            scene.flight_altitude = j.at("altitude").get<double>();
        }
        if (j.contains("elevation_mask_deg")) {
            scene.elevation_mask_deg = j.at("elevation_mask_deg").get<double>();
        }
        if (j.contains("anchor")) {
            const auto& a = j.at("anchor");
            scene.anchor.lat_deg = a.at("lat_deg").get<double>();
            scene.anchor.lon_deg = a.at("lon_deg").get<double>();
            scene.anchor.alt_m = a.value("alt_m", 0.0);
        }
        for (const auto& bj : j.value("buildings", nlohmann::json::array())) {
            Building b;
            b.height = bj.at("height").get<double>();
            for (const auto& vj : bj.at("footprint")) {
                b.footprint.emplace_back(vj.at(0).get<double>(), vj.at(1).get<double>());
            }
            scene.buildings.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("scene: schema error: ") + e.what());
    }
    scene.validate_and_decompose();
    return scene;
}

UrbanScene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("scene: cannot open " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene_json(ss.str());
}

std::string scene_to_json(const UrbanScene& scene) {
    nlohmann::json j;
    j["altitude"] = scene.flight_altitude;
    j["elevation_mask_deg"] = scene.elevation_mask_deg;
    j["anchor"] = {{"lat_deg", scene.anchor.lat_deg},
                   {"lon_deg", scene.anchor.lon_deg},
                   {"alt_m", scene.anchor.alt_m}};
    j["buildings"] = nlohmann::json::array();
    for (const auto& b : scene.buildings) {
        nlohmann::json bj;
        bj["height"] = b.height;
        bj["footprint"] = nlohmann::json::array();
        for (const auto& v : b.footprint) {
            bj["footprint"].push_back({v.x(), v.y()});
        }
        j["buildings"].push_back(bj);
    }
    return j.dump(2);
}

std::pair<double, double> elevation_azimuth(const UrbanScene& scene,
                                            const Eigen::Vector3d& receiver_local,
                                            const Eigen::Vector3d& sat_ecef) {
    const Eigen::Vector3d anchor_ecef = geodetic_to_ecef(scene.anchor);
    const Eigen::Matrix3d r = ecef_to_enu_rotation(scene.anchor);
    const Eigen::Vector3d sat_enu = r * (sat_ecef - anchor_ecef);
    const Eigen::Vector3d los = sat_enu - receiver_local;
    const double horiz = std::hypot(los.x(), los.y());
    const double el = std::atan2(los.z(), horiz);
    const double az = std::atan2(los.x(), los.y());  // from north, clockwise
    return {el, az};
}

Eigen::Vector3d sat_to_flight_local(const UrbanScene& scene,
                                    const Eigen::Vector3d& sat_ecef) {
    const Eigen::Vector3d anchor_ecef = geodetic_to_ecef(scene.anchor);
    const Eigen::Matrix3d r = ecef_to_enu_rotation(scene.anchor);
    Eigen::Vector3d enu = r * (sat_ecef - anchor_ecef);
    enu.z() -= scene.flight_altitude;
    return enu;
}

}  // namespace reachplan
