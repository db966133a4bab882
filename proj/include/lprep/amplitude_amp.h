#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lprep/bounds.h"
#include "lprep/resource_ledger.h"
#include "lprep/state_vector.h"

namespace lprep {

/// A phase-parameterized family of unitaries ω ↦ S(ω), applied to a state.
using PhaseOracle = std::function<StateVector(const StateVector &, double omega)>;

/// Iteration schedule for |ψ⟩ = sin α |ψ1⟩ + cos α |ψ2⟩.
struct AAInstance {
    double alpha = 0;
    /// π/(4α) − 1/2.
    double m_star = 0;
    unsigned floor_m = 0;
    bool integer = false;
    /// Phases (φ*, ϕ*) of the final step, used only when m* is not an integer. φ* goes to the
    /// reflection about |ψ⟩, ϕ* to the one about |ψ1⟩.
    double phi_star = 0;
    double varphi_star = 0;

    static AAInstance from_alpha(double alpha);
    /// floor_m, plus one when a final step is needed.
    unsigned iterations() const {
        return floor_m + (integer ? 0 : 1);
    }
};

/// |ψ2⟩-component of Q(φ, ϕ) Q^k(π, π)|ψ⟩ in the two-dimensional model, as (re, im).
std::pair<double, double> final_step_residual(double alpha, unsigned k, double phi, double varphi);

struct AAProblem {
    StateVector psi;
    /// Target; its overlap with psi is taken real and positive after rephasing.
    StateVector psi1;
    /// Reflection S1 about psi and S2 about psi1 (or their perturbed versions T1, T2).
    PhaseOracle s1;
    PhaseOracle s2;

    /// Builds with α = asin|⟨ψ1|ψ⟩| and ψ1 rephased so the overlap is real.
    static AAProblem from_states(StateVector psi, StateVector psi1, PhaseOracle s1, PhaseOracle s2);
    double alpha() const;
    /// The component of ψ orthogonal to ψ1, normalized.
    StateVector psi2() const;
    /// The state orthogonal to ψ inside span{ψ1, ψ2}.
    StateVector psi_tilde() const;
};

struct AAResult {
    StateVector state = StateVector(1);
    AAInstance instance;
    unsigned iterations = 0;
    /// |1 − |⟨ψ1|χ⟩|²|.
    double infidelity = 1;
    /// Largest weight outside span{ψ1, ψ2} seen after any iteration.
    double max_leakage = 0;
};

/// Q(φ, ϕ) = −S1(φ) S2(ϕ), applying S2 first.
StateVector apply_q(const AAProblem &problem, const StateVector &state, double phi, double varphi);

/// Checks the defining eigen-relations of S1, S2 on the 2D subspace; throws on failure.
void validate_exact_oracles(const AAProblem &problem, double tolerance = 1e-10);

AAResult aa_exact(const AAProblem &problem);

struct ApproximateAAResult {
    AAResult run;
    /// Largest ‖T1(ω)ψ̃ − ψ̃‖ and ‖T2(ω)ψ2 − ψ2‖ over the phases used by the schedule.
    double eps1 = 0;
    double eps2 = 0;
    /// 4(⌊m*⌋ + 1)δ.
    double bound = 0;
    bool within_bound = false;
};

/// Perturbation sizes of T1, T2 over the phases the schedule uses.
std::pair<double, double> measure_perturbations(const AAProblem &problem, const AAInstance &instance);

/// Runs the exact schedule with perturbed reflections. Throws if either perturbation is not below
/// δ/2 or the exact eigen-relations T1ψ = e^{iω}ψ, T2ψ1 = e^{iω}ψ1 fail.
ApproximateAAResult aa_approximate(const AAProblem &problem, double delta);

struct ImprovedDickeParams {
    unsigned n = 0;
    unsigned m = 0;
    double delta = 0.01;
    /// Replaces the formula value (still capped at the exact value).
    std::optional<unsigned> ell;
    void validate() const;
};

/// log2 of [2M(ln 2M + 9/2) + ln(Poly(M)/δ²)] / ln(4/3).
double improved_dicke_ell_real(unsigned m, double delta);
/// Poly(M) = 8πe²√(8πM) / (M ln(4/3) (1 − √(8/(3πM)))).
double improved_dicke_poly(unsigned m);
/// π(8πM)^{1/4}/2.
double improved_dicke_iteration_bound(unsigned m);
/// δ / (π (8πM)^{1/4}).
double improved_dicke_residual_budget(unsigned m, double delta);

struct ImprovedDickeReport {
    StateVector state = StateVector(1);
    double infidelity = 1;
    unsigned iterations = 0;
    double iteration_bound = 0;
    double ell_formula = 0;
    unsigned ell = 0;
    bool exact_regime = false;
    /// Perturbations of T1 = V F^[ℓ,0] V† and T2 = F^[ℓ,M] measured on the 2D subspace.
    double eps1 = 0;
    double eps2 = 0;
    double residual_budget = 0;
    ResourceLedger ledger;
    std::vector<BoundCheck> bound_checks;
    bool bounds_satisfied() const {
        return all_satisfied(bound_checks);
    }
};

/// Deterministic preparation of |W(M)⟩ by approximate amplitude amplification from V|0⟩.
ImprovedDickeReport improved_dicke(const ImprovedDickeParams &params);

/// Coefficients c_s of V†|W(M)⟩ = Σ_s c_s |W(s)⟩ with V = e^{−iθS_y}, from the closed-form double sum
/// evaluated in log space.
std::vector<Complex> sector_coefficients(unsigned n, unsigned m, double theta);
/// Σ_{k ≥ s} |c_k|².
double sector_tail(const std::vector<Complex> &c, unsigned s);
/// (2e²/(Mπ ln(4/3))) exp[−(s−1) ln(4/3) + 2M(ln 2M + 9/2)], valid for s ≥ 3M and N ≥ 4M.
double sector_tail_bound(unsigned m, unsigned s);

}  // namespace lprep
