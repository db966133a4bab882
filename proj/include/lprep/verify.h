#pragma once

#include <cstddef>

#include "lprep/state_vector.h"

namespace lprep {

struct VVerification {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::size_t branches = 0;
    /// Worst branch fidelity with the direct reference.
    double min_fidelity = 1;
    /// Worst weight left on non-control ancillas outside |0⟩.
    double max_ancilla_leak = 0;
    /// Worst |Σ branch weights − 1| over trials.
    double max_weight_defect = 0;
    std::size_t min_depth = 0;
    std::size_t max_depth = 0;
};

/// Random branch unitaries and random entangled inputs; every measurement branch of the V protocol
/// is enumerated and compared with the direct controlled product.
VVerification verify_v_protocol(std::size_t n, std::size_t trials, Rng &rng);

struct MeasureVerification {
    std::size_t n = 0;
    unsigned ell = 0;
    std::size_t trials = 0;
    /// Worst total-variation distance between the circuit readout law and the projector weights.
    double max_tv_distance = 0;
    /// Worst post-measurement fidelity with the normalized projection, over branches of nonzero weight.
    double min_post_fidelity = 1;
};

/// Modular excitation measurement on random states against the brute-force projector.
MeasureVerification verify_excitation_measurement(std::size_t n, unsigned ell, std::size_t trials, Rng &rng);

}  // namespace lprep
