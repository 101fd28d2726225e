#include "reachplan/almanac.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace reachplan {

void AlmanacRecord::validate() const {
    if (eccentricity < 0.0 || eccentricity >= 1.0) {
        throw std::invalid_argument("almanac record: eccentricity out of [0,1)");
    }
    if (sqrt_a <= 0.0) {
        throw std::invalid_argument("almanac record: SQRT(A) must be positive");
    }
}

namespace {

std::string normalize_label(const std::string& raw) {
    std::string out;
    for (char ch : raw) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    return out;
}

struct FieldSlot {
    double AlmanacRecord::*fval = nullptr;
    int AlmanacRecord::*ival = nullptr;
    bool mandatory = true;
};

const std::map<std::string, FieldSlot>& field_table() {
    static const std::map<std::string, FieldSlot> table = {
        {"id", {nullptr, &AlmanacRecord::prn, true}},
        {"health", {nullptr, &AlmanacRecord::health, false}},
        {"eccentricity", {&AlmanacRecord::eccentricity, nullptr, true}},
        {"timeofapplicabilitys", {&AlmanacRecord::toa, nullptr, true}},
        {"orbitalinclinationrad", {&AlmanacRecord::inclination, nullptr, true}},
        {"rateofrightascenrs", {&AlmanacRecord::raan_rate, nullptr, true}},
        {"sqrtam12", {&AlmanacRecord::sqrt_a, nullptr, true}},
        {"rightascenatweekrad", {&AlmanacRecord::raan_week, nullptr, true}},
        {"argumentofperigeerad", {&AlmanacRecord::arg_perigee, nullptr, true}},
        {"meananomrad", {&AlmanacRecord::mean_anomaly, nullptr, true}},
        {"af0s", {&AlmanacRecord::af0, nullptr, false}},
        {"af1ss", {&AlmanacRecord::af1, nullptr, false}},
        {"week", {nullptr, &AlmanacRecord::week, true}},
    };
    return table;
}

const char* display_name(const std::string& key) {
    static const std::map<std::string, const char*> names = {
        {"id", "ID"},
        {"eccentricity", "Eccentricity"},
        {"timeofapplicabilitys", "Time of Applicability(s)"},
        {"orbitalinclinationrad", "Orbital Inclination(rad)"},
        {"rateofrightascenrs", "Rate of Right Ascen(r/s)"},
        {"sqrtam12", "SQRT(A)  (m 1/2)"},
        {"rightascenatweekrad", "Right Ascen at Week(rad)"},
        {"argumentofperigeerad", "Argument of Perigee(rad)"},
        {"meananomrad", "Mean Anom(rad)"},
        {"week", "week"},
    };
    auto it = names.find(key);
    return it == names.end() ? key.c_str() : it->second;
}

}  // namespace

std::vector<AlmanacRecord> parse_yuma(const std::string& text) {
    std::vector<AlmanacRecord> records;
    std::istringstream in(text);
    std::string line;

    AlmanacRecord rec;
    std::map<std::string, bool> seen;
    bool in_block = false;

    auto finish_block = [&]() {
        if (!in_block) {
            return;
        }
        for (const auto& [key, slot] : field_table()) {
            if (slot.mandatory && !seen.count(key)) {
                std::ostringstream msg;
                msg << "almanac block";
                if (seen.count("id")) {
                    msg << " for PRN " << rec.prn;
                }
                msg << " missing field \"" << display_name(key) << "\"";
                throw std::runtime_error(msg.str());
            }
        }
        rec.validate();
        records.push_back(rec);
        rec = AlmanacRecord{};
        seen.clear();
        in_block = false;
    };

    while (std::getline(in, line)) {
        // Strip CR and surrounding whitespace.
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
            line.pop_back();
        }
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) {
            finish_block();
            continue;
        }
        if (line[start] == '*') {
            // Header/banner row between blocks.
            finish_block();
            continue;
        }
        size_t colon = line.find(':', start);
        if (colon == std::string::npos) {
            throw std::runtime_error("almanac: malformed line \"" + line + "\"");
        }
        const std::string key = normalize_label(line.substr(start, colon - start));
        const std::string value_str = line.substr(colon + 1);
        auto it = field_table().find(key);
        if (it == field_table().end()) {
            continue;  // unknown label
        }
        in_block = true;
        double value = 0.0;
        try {
            value = std::stod(value_str);
        } catch (const std::exception&) {
            throw std::runtime_error("almanac: bad numeric value in \"" + line + "\"");
        }
        if (it->second.fval != nullptr) {
            rec.*(it->second.fval) = value;
        } else {
            rec.*(it->second.ival) = static_cast<int>(std::lround(value));
        }
        seen[key] = true;
    }
    finish_block();
    return records;
}

std::string serialize_yuma(const std::vector<AlmanacRecord>& records) {
    std::ostringstream out;
    char buf[128];
    for (const auto& rec : records) {
        std::snprintf(buf, sizeof(buf), "******** Week %d almanac for PRN-%02d ********\n",
                      rec.week % 1024, rec.prn);
        out << buf;
        auto num = [&](const char* label, double v) {
            std::snprintf(buf, sizeof(buf), "%-27s %.10E\n", label, v);
            out << buf;
        };
        std::snprintf(buf, sizeof(buf), "%-27s %02d\n", "ID:", rec.prn);
        out << buf;
        std::snprintf(buf, sizeof(buf), "%-27s %03d\n", "Health:", rec.health);
        out << buf;
        num("Eccentricity:", rec.eccentricity);
        num("Time of Applicability(s):", rec.toa);
        num("Orbital Inclination(rad):", rec.inclination);
        num("Rate of Right Ascen(r/s):", rec.raan_rate);
        num("SQRT(A)  (m 1/2):", rec.sqrt_a);
        num("Right Ascen at Week(rad):", rec.raan_week);
        num("Argument of Perigee(rad):", rec.arg_perigee);
        num("Mean Anom(rad):", rec.mean_anomaly);
        num("Af0(s):", rec.af0);
        num("Af1(s/s):", rec.af1);
        std::snprintf(buf, sizeof(buf), "%-27s %d\n", "week:", rec.week);
        out << buf;
        out << "\n";
    }
    return out.str();
}

Eigen::Vector3d sat_position(const AlmanacRecord& rec, double t) {
    rec.validate();
    const double a = rec.sqrt_a * rec.sqrt_a;
    const double n = std::sqrt(kGravitationalParameter / (a * a * a));

    double tk = t - rec.toa;
    if (tk > kSecondsPerWeek / 2.0) {
        tk -= kSecondsPerWeek;
    } else if (tk < -kSecondsPerWeek / 2.0) {
        tk += kSecondsPerWeek;
    }

    const double m = rec.mean_anomaly + n * tk;
    double e_anom = m;
    bool converged = false;
    for (int i = 0; i < 30; ++i) {
        const double delta = (e_anom - rec.eccentricity * std::sin(e_anom) - m) /
                             (1.0 - rec.eccentricity * std::cos(e_anom));
        e_anom -= delta;
        if (std::fabs(delta) < 1e-12) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw std::runtime_error("sat_position: Kepler iteration did not converge");
    }

    const double sin_e = std::sin(e_anom);
    const double cos_e = std::cos(e_anom);
    const double nu = std::atan2(std::sqrt(1.0 - rec.eccentricity * rec.eccentricity) * sin_e,
                                 cos_e - rec.eccentricity);
    const double phi = nu + rec.arg_perigee;  // argument of latitude
    const double r = a * (1.0 - rec.eccentricity * cos_e);

    const double xp = r * std::cos(phi);
    const double yp = r * std::sin(phi);

    const double omega = rec.raan_week + (rec.raan_rate - kEarthRotationRate) * tk -
                         kEarthRotationRate * rec.toa;

    const double ci = std::cos(rec.inclination);
    const double si = std::sin(rec.inclination);
    const double co = std::cos(omega);
    const double so = std::sin(omega);

    return {xp * co - yp * ci * so,
            xp * so + yp * ci * co,
            yp * si};
}

}  // namespace reachplan
