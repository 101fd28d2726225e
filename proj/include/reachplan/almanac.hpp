#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace reachplan {

// One satellite record from a YUMA-format almanac. Clock terms are parsed
// but unused downstream (zero clock bias assumption).
struct AlmanacRecord {
    int prn = 0;
    int health = 0;
    double eccentricity = 0.0;
    double toa = 0.0;            // time of applicability, s of week
    double inclination = 0.0;    // rad
    double raan_rate = 0.0;      // rad/s
    double sqrt_a = 0.0;         // m^(1/2)
    double raan_week = 0.0;      // right ascension at week epoch, rad
    double arg_perigee = 0.0;    // rad
    double mean_anomaly = 0.0;   // rad
    double af0 = 0.0;            // s
    double af1 = 0.0;            // s/s
    int week = 0;

    void validate() const;
};

// Parses YUMA almanac text: blank-line separated blocks of
// "<label>: <value>" lines. Unknown labels are ignored; a block missing a
// mandatory field is rejected with an error naming the PRN and field.
std::vector<AlmanacRecord> parse_yuma(const std::string& text);

std::string serialize_yuma(const std::vector<AlmanacRecord>& records);

// Earth-fixed satellite position at t seconds of week, via standard
// almanac Kepler propagation (mean anomaly advance, eccentric anomaly
// iteration, plane rotation with earth-rotation-corrected ascending node).
Eigen::Vector3d sat_position(const AlmanacRecord& rec, double t);

inline constexpr double kGravitationalParameter = 3.986005e14;  // m^3/s^2
inline constexpr double kEarthRotationRate = 7.2921151467e-5;   // rad/s
inline constexpr double kSecondsPerWeek = 604800.0;

}  // namespace reachplan
