#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lprep/bounds.h"
#include "lprep/excitation_measure.h"
#include "lprep/resource_ledger.h"
#include "lprep/state_vector.h"

namespace lprep {

/// Uniform superposition of the C(n, m) basis states with m excitations.
StateVector make_dicke_state(std::size_t n, std::size_t m);
/// (√(1−p)|0⟩ + √p|1⟩)^{⊗n}, built by one layer of single-qubit rotations.
StateVector make_product_state(std::size_t n, double p);
/// The rotation taking |0⟩ to √(1−p)|0⟩ + √p|1⟩.
Matrix product_rotation(double p);

/// The real-valued ell of the Dicke accuracy condition, before rounding.
double ell_for_dicke_real(unsigned m, double eps);
/// Ceiling of ell_for_dicke_real.
unsigned ell_for_dicke(unsigned m, double eps);

/// √(8πM)·e^{−2^{ell−1}}: infidelity guaranteed once 2^ell ≥ 4M.
double dicke_infidelity_bound(unsigned m, unsigned ell);

struct DickeParams {
    unsigned n = 0;
    unsigned m = 0;
    double eps = 1e-3;
    /// Replaces ell_for_dicke (still capped at the exact value).
    std::optional<unsigned> ell;

    double p() const {
        return double(m) / n;
    }
    void validate() const;
};

struct PreparationReport {
    bool success = false;
    std::optional<StateVector> final_state;
    double infidelity = 1;
    /// Analytic probability of the accepted branch per attempt.
    double success_probability = 0;
    std::size_t repetitions_used = 0;
    /// Readout (or success flag) of every attempt in order.
    std::vector<std::uint64_t> trial_outcomes;
    ResourceLedger ledger;
    std::vector<BoundCheck> bound_checks;
    unsigned ell = 0;
    double ell_formula = 0;
    /// ell reached ⌈log2(N+1)⌉, so the excitation number is resolved exactly.
    bool exact_regime = false;

    bool bounds_satisfied() const {
        return all_satisfied(bound_checks);
    }
};

/// Repeat until success: prepare Ψ(M/N), measure N_e mod 2^ell, accept when the residue is M.
PreparationReport prepare_dicke(const DickeParams &params, std::size_t max_repetitions, Rng &rng,
                                KickMode mode = KickMode::Fast);

/// Same as prepare_dicke with the constant-depth measurement; accepts on the all-zero ancilla string.
PreparationReport prepare_dicke_parallel(const DickeParams &params, std::size_t max_repetitions, Rng &rng);

/// One attempt with the accepting readout forced; success_probability stays the analytic weight.
PreparationReport prepare_dicke_postselected(const DickeParams &params, KickMode mode = KickMode::Fast);

/// Resources and analytic success probability without simulating; infidelity checks are omitted.
PreparationReport dicke_ledger_report(const DickeParams &params, bool parallel);

/// Prepares (√(1−δ/N)|0⟩ + √(δ/N)|1⟩)^{⊗N}, measures parity and accepts odd.
PreparationReport prepare_w_parity(unsigned n, double delta, std::size_t max_repetitions, Rng &rng);

/// ½(1 − (1 − 2q)^N) with q = δ/N.
double w_parity_success_probability(unsigned n, double delta);

}  // namespace lprep
