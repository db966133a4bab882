#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lprep/fanout.h"
#include "lprep/resource_ledger.h"
#include "lprep/state_vector.h"

namespace lprep {

/// Which excitation-count residue class to resolve: N_e − offset (mod 2^ell) on `sites`.
struct ModularMeasurementSpec {
    unsigned ell = 1;
    std::vector<Qubit> sites;
    unsigned offset = 0;

    /// Spec over sites 0..n_sites−1.
    static ModularMeasurementSpec over_sites(std::size_t n_sites, unsigned ell, unsigned offset = 0);
    void validate() const;
};

/// Smallest ell that resolves every excitation number on n_sites sites exactly.
unsigned exact_ell(std::size_t n_sites);

/// How the controlled phase kicks are executed. Fast applies the controlled diagonal directly;
/// Protocol runs the constant-depth V circuit with one ancilla per site and its mid-circuit
/// measurements. Both produce the same state and the same ledger.
enum class KickMode { Fast, Protocol };

/// Multiplies by e^{2πi(N_e − offset)/2^x} on spec.sites, uncontrolled.
void apply_phase_kick(StateVector &state, const ModularMeasurementSpec &spec, unsigned x);

struct ExcitationMeasurement {
    /// Integer read from the ancillas, i_1 the most significant bit: (N_e − offset) mod 2^ell.
    std::uint64_t readout;
    /// N_e mod 2^ell of the post-measurement state.
    std::uint64_t residue;
    double probability;
    StateVector state;
    MeasurementRecord record;
    ResourceLedger ledger;
};

/// Phase-estimation measurement of N_e mod 2^ell on a full register. The first ell extra ancillas
/// of `layout` are used and must be |0⟩; they are returned to |0⟩. Protocol mode needs per-site
/// ancillas. `postselect` forces the readout; otherwise it is sampled from `rng`, which also drives
/// the V sub-protocol measurements.
ExcitationMeasurement measure_excitations_mod(StateVector state, const RegisterLayout &layout,
                                              const ModularMeasurementSpec &spec, Rng &rng,
                                              std::optional<std::uint64_t> postselect = std::nullopt,
                                              KickMode mode = KickMode::Fast);

/// System-only convenience: sites are 0..n−1 of `system`; ancillas are attached and removed.
ExcitationMeasurement measure_excitations_mod(const StateVector &system, unsigned ell, unsigned offset, Rng &rng,
                                              std::optional<std::uint64_t> postselect = std::nullopt,
                                              KickMode mode = KickMode::Fast);

/// Born distribution of the readout, indexed by readout value, computed from the pre-measurement
/// register without sampling.
std::vector<double> readout_distribution(const StateVector &system, unsigned ell, unsigned offset);

/// Ledger of measure_excitations_mod without simulating: 7·ell + 2.
ResourceLedger excitation_measurement_ledger(std::size_t n_sites, unsigned ell);

struct ParallelMeasurement {
    bool success;
    /// Probability of the observed ancilla outcome string.
    double probability;
    StateVector state;
    ResourceLedger ledger;
};

/// Constant-depth variant: the system is fanned out into ell − 1 copies, each copy kicks its own
/// phase ancilla with e^{2πi(N_e − target)/2^x}, the copies are uncomputed and the phase ancillas are
/// read in the X basis. Success (all zeros) leaves Π_target^ell|ψ⟩ normalized.
///
/// Register: n·ell + ell qubits, capped at 26. `postselect_success` forces the all-zero string.
ParallelMeasurement measure_excitations_parallel(const StateVector &system, unsigned ell, unsigned target, Rng &rng,
                                                 bool postselect_success = false);
/// Ledger-only path for any size: depth 15, 2·ell − 1 ancillas per site, ell extra.
ResourceLedger parallel_measurement_ledger(std::size_t n_sites, unsigned ell);
/// Qubits the parallel simulation needs.
std::size_t parallel_register_size(std::size_t n_sites, unsigned ell);

struct SignFlipRun {
    StateVector state;
    ResourceLedger ledger;
};

/// F_φ^[ell;m]: multiplies by e^{iφ} the components with N_e ≡ m (mod 2^ell), as a unitary circuit
/// (kicks, inverse QFT, phase on the all-zero ancilla string, QFT, inverse kicks). The ell
/// ancillas are attached and removed.
SignFlipRun partial_sign_flip(const StateVector &system, unsigned ell, unsigned m, double phi);
/// Diagonal reference for partial_sign_flip.
StateVector partial_sign_flip_reference(StateVector system, unsigned ell, unsigned m, double phi);
/// Ledger of partial_sign_flip: 2 + 14·ell + ell².
ResourceLedger partial_sign_flip_ledger(std::size_t n_sites, unsigned ell);

}  // namespace lprep
