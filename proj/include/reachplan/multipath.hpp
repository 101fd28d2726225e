#pragma once

namespace reachplan {

// Receiver front-end parameters driving the code-tracking multipath error.
struct MultipathEnvelope {
    double correlator_spacing = 0.25;   // d, chips
    double chip_length = 293.05213;     // m (C/A code)
    double amplitude_ratio = 1.0;       // alpha in (0, 1]

    void validate() const;
};

// Worst-case tracking error of a coherent early-late discriminator with one
// reflected ray of the given differential path length (meters). Piecewise
// linear: rises with slope alpha/(1+alpha), plateaus at alpha*d/2 chips,
// then decays to zero at (1 + d/2) chips.
double multipath_bias_bound(double delta_m, const MultipathEnvelope& env);

}  // namespace reachplan
