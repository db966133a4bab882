#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lprep/dicke.h"
#include "lprep/fanout.h"
#include "lprep/resource_ledger.h"
#include "lprep/state_vector.h"

namespace lprep {

/// Single-particle modes of the open XX chain H = −Σ_k (σ^x_k σ^x_{k+1} + σ^y_k σ^y_{k+1}).
struct XXModeSet {
    std::size_t n = 0;
    /// modes[α][j] = c_j^α, sorted by ascending energy.
    std::vector<std::vector<Complex>> modes;
    /// ε_α = 2λ_α, with λ_α the eigenvalues of the hopping matrix with −1 off the diagonal.
    std::vector<double> energies;

    /// Orthonormality within 1e-10 and pairwise distinct modes.
    void validate() const;
};

/// Diagonalizes the N×N hopping matrix. Mode signs follow the analytic sine form.
XXModeSet xx_modes(std::size_t n);
/// √(2/(N+1)) sin(π k j/(N+1)) for j = 1..N, k = 1..N.
std::vector<double> xx_sine_mode(std::size_t n, std::size_t k);

struct AngleSplit {
    double beta;
    double gamma;
};

/// Solves cos2β cosγ = cosα, sin2β cosγ = sinα sinθ, sinγ = sinα cosθ with cosγ ≥ 0.
AngleSplit angle_split(double alpha, double theta);

/// e^{iα(A+A†)} = R_{N−1} … R_1 R_0 R_1 … R_{N−1} with R_j = exp(iθ_j(u_j a_j + conj(u_j) a_j†)).
struct AngleSchedule {
    double alpha = 0;
    std::vector<double> theta;
    /// c_j/|c_j|, or 1 where c_j vanishes.
    std::vector<Complex> phase;
};

/// Peels sites N−1 down to 0 with angle_split. `mode` must be normalized.
AngleSchedule angle_schedule(const std::vector<Complex> &mode, double alpha);

/// exp(iθ(u σ⁻ + conj(u) σ⁺)) with σ⁻ = |0⟩⟨1|.
Matrix xx_local_rotation(double theta, Complex u);

/// Σ_j c_j a_j (or its adjoint) applied directly with Jordan–Wigner strings on sites 0..n−1.
/// Returns the unnormalized result.
std::vector<Complex> apply_mode_operator(const StateVector &state, const std::vector<Complex> &mode, bool adjoint);
/// H|ψ⟩ for the open chain on all qubits of `state`.
std::vector<Complex> apply_xx_hamiltonian(const StateVector &state);

enum class JWMode {
    /// V_j as a diagonal sign (−1)^{n_j · Σ_{k<j} n_k}.
    Direct,
    /// V_j through the constant-depth controlled-product protocol with one ancilla per site.
    Protocol,
};

enum class XXCircuit {
    /// T L_{N−1} … L_0 L̃_1 … L̃_{N−1} T, with the T pairs of successive excitations cancelled.
    Compressed,
    /// R_{N−1} … R_0 … R_{N−1} with R_j = V_j X_j V_j per excitation.
    Palindrome,
};

struct XXOptions {
    JWMode jw = JWMode::Protocol;
    XXCircuit circuit = XXCircuit::Compressed;
};

struct XXReport : PreparationReport {
    std::vector<std::size_t> mode_indices;
    double energy = 0;
    /// ‖H|Ψ⟩ − E|Ψ⟩‖.
    double eigen_residual = 0;
    /// Weight in the M-excitation sector.
    double sector_weight = 0;
    /// 1 − ⟨Ψ|P_E|Ψ⟩ with P_E the exact eigenprojector of the M-excitation sector; present while the
    /// sector has at most kMaxSectorDim states.
    std::optional<double> eigenspace_infidelity;
    /// Infidelity against A†_M … A†_1 |0⟩ built by direct operator action.
    double construction_infidelity = 1;

    static constexpr std::size_t kMaxSectorDim = 1000;
};

/// Applies e^{iα(A+A†)} for `mode` (Palindrome) or T e^{iα(A+A†)} T (Compressed, with
/// T = Π_j V_j) and records the layers into `ledger`. Sites are qubits 0..n−1 of `state`; in Protocol
/// mode the state must carry one ancilla per site laid out by RegisterLayout::contiguous(n, 1, 0).
void apply_mode_rotation(StateVector &state, const std::vector<Complex> &mode, double alpha, const XXOptions &options,
                         ResourceLedger &ledger, MeasurementDriver &driver);

/// Prepares A†_{S_M} … A†_{S_1}|0⟩ (up to phase) deterministically. Indices refer to xx_modes order.
XXReport prepare_xx_eigenstate(std::size_t n, const std::vector<std::size_t> &mode_indices, Rng &rng,
                               const XXOptions &options = {});

/// Depth of the compressed circuit: M(14N − 13) + 6(N − 1) for M ≥ 1.
std::size_t xx_compressed_depth(std::size_t n, std::size_t m);

/// 1 − ⟨ψ|P|ψ⟩ with P projecting onto the eigenvectors of the m-excitation sector Hamiltonian whose
/// energies lie within 1e-8 of `energy`.
double xx_eigenspace_infidelity(const StateVector &state, std::size_t m, double energy);

}  // namespace lprep
