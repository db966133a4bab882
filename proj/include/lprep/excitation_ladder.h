#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lprep/resource_ledger.h"
#include "lprep/state_vector.h"

namespace lprep {

using Mode = std::vector<Complex>;

/// B† = Σ_j c_j σ⁺_j (adjoint = false) or B = Σ_j conj(c_j) σ⁻_j, applied directly. Unnormalized.
std::vector<Complex> apply_spin_mode(const StateVector &state, const Mode &c, bool adjoint);

/// Normalized B_M† … B_1† |0…0⟩; throws if the product vanishes.
StateVector ladder_target(std::size_t n, const std::vector<Mode> &modes);

/// max_{α,β} |Σ_j conj(c_j^α) c_j^β − δ_{αβ}|.
double orthonormality_deviation(const std::vector<Mode> &modes);

enum class LadderMeasure {
    /// Exact N_e readout through the modular excitation measurement with ℓ = ⌈log2(N+1)⌉.
    Circuit,
    /// Born sampling of N_e followed by the sector projector.
    Projector,
};

struct LadderSpec {
    std::size_t n = 0;
    std::vector<Mode> modes;
    double theta = 0.1;
    std::size_t max_retries = 200;
    std::size_t max_restarts = 20;
    LadderMeasure measure = LadderMeasure::Circuit;

    std::size_t m() const {
        return modes.size();
    }
    void validate() const;
};

/// All modes equal to 1/√N: the target is the Dicke state with M excitations.
std::vector<Mode> uniform_modes(std::size_t n, std::size_t m);
/// The lowest M open-chain sine modes (orthonormal).
std::vector<Mode> sine_modes(std::size_t n, std::size_t m);
/// Gram–Schmidt of Gaussian vectors; then c^α ← normalize(c^α + overlap·c^{α−1}) for α ≥ 2.
std::vector<Mode> random_modes(std::size_t n, std::size_t m, Rng &rng, double overlap = 0);

/// One mode per line as whitespace-separated (re, im) pairs.
std::vector<Mode> parse_modes(const std::string &text);
std::vector<Mode> read_modes_file(const std::string &path);

struct LadderStep {
    StateVector state;
    /// Weight per excitation number 0..N.
    std::vector<double> sector_weights;
    std::size_t series_terms = 0;
};

/// e^{iθ(B + B†)}|ψ⟩ by its Taylor series, summed until a term's norm drops below 1e-13.
LadderStep ladder_step(const StateVector &state, const Mode &c, double theta);

/// Weight of |ψ⟩ per excitation number.
std::vector<double> sector_weights(const StateVector &state);

/// ‖([B_α, B_β†] − δ_{αβ})|ψ⟩‖ for every pair.
std::vector<std::vector<double>> commutator_residual(const std::vector<Mode> &modes, const StateVector &state);

struct LadderAttempt {
    std::size_t step = 0;
    std::size_t restart = 0;
    /// N_e after the attempt minus N_e before it.
    int k = 0;
    double probability = 0;
};

struct LadderTrace {
    bool success = false;
    std::vector<LadderAttempt> attempts;
    std::size_t restarts = 0;
    /// Attempts used by each accepted step of the final pass.
    std::vector<std::size_t> attempts_per_step;
    std::optional<StateVector> final_state;
    double infidelity = 1;
    double orthonormality_deviation = 0;
    /// Product of every recorded branch probability.
    double path_weight = 1;
    ResourceLedger ledger;
};

/// Accept on k = 1, repeat the step on k = 0, restart from |0…0⟩ on any other k or when a step runs
/// out of retries.
LadderTrace run_ladder(const LadderSpec &spec, Rng &rng);

struct AttemptStatistics {
    double theta = 0;
    std::size_t attempts = 0;
    /// Born probabilities of k = 1 and k ≥ 2 for one attempt.
    double p_one = 0;
    double p_two_plus = 0;
    /// Frequencies from `attempts` sampled outcomes.
    double freq_one = 0;
    double freq_two_plus = 0;
};

/// Per-attempt outcome statistics of one rotation applied to `state`, which holds `base` excitations.
AttemptStatistics attempt_statistics(const StateVector &state, std::size_t base, const Mode &c, double theta,
                                     std::size_t attempts, Rng &rng);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double> &x, const std::vector<double> &y);

}  // namespace lprep
