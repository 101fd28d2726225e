#include "reachplan/multipath.hpp"

#include <stdexcept>

namespace reachplan {

void MultipathEnvelope::validate() const {
    if (correlator_spacing <= 0.0 || correlator_spacing > 1.0) {
        throw std::invalid_argument("multipath envelope: spacing must be in (0,1] chips");
    }
    if (chip_length <= 0.0) {
        throw std::invalid_argument("multipath envelope: chip length must be positive");
    }
    if (amplitude_ratio <= 0.0 || amplitude_ratio > 1.0) {
        throw std::invalid_argument("multipath envelope: amplitude ratio must be in (0,1]");
    }
}

double multipath_bias_bound(double delta_m, const MultipathEnvelope& env) {
    env.validate();
    if (delta_m < 0.0) {
        throw std::invalid_argument("multipath_bias_bound: delta must be >= 0");
    }
    const double d = env.correlator_spacing;
    const double a = env.amplitude_ratio;
    const double x = delta_m / env.chip_length;  // chips

    const double rise_end = 0.5 * d * (1.0 + a);
    const double plateau = 0.5 * a * d;
    const double decay_start = 1.0 - 0.5 * d * (1.0 - a);
    const double support_end = 1.0 + 0.5 * d;

    double err_chips = 0.0;
    if (x <= rise_end) {
        err_chips = a / (1.0 + a) * x;
    } else if (x <= decay_start) {
        err_chips = plateau;
    } else if (x < support_end) {
        err_chips = a * (support_end - x) / (2.0 - a);
    } else {
        err_chips = 0.0;
    }
    return err_chips * env.chip_length;
}

}  // namespace reachplan
