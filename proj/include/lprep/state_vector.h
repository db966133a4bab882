#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace lprep {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Qubit = std::size_t;

/// Raised when an operation would condition on a branch of (numerically) zero weight.
class ZeroProbabilityBranch : public std::runtime_error {
   public:
    ZeroProbabilityBranch(const std::string &what, double probability)
        : std::runtime_error(what), probability_(probability) {
    }
    double probability() const {
        return probability_;
    }

   private:
    double probability_;
};

/// Raised by apply_unitary when u·u† deviates from the identity.
class NonUnitaryMatrix : public std::invalid_argument {
   public:
    NonUnitaryMatrix(const std::string &what, double deviation)
        : std::invalid_argument(what), deviation_(deviation) {
    }
    /// Frobenius norm of u·u† − I.
    double deviation() const {
        return deviation_;
    }

   private:
    double deviation_;
};

/// Seedable random stream. Every protocol run owns exactly one; sampling consumes it in call order.
class Rng {
   public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    std::uint64_t next_u64();
    /// Independent child stream, for parallel trials.
    Rng split(std::uint64_t stream) const;
    std::uint64_t seed() const {
        return seed_;
    }

   private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

enum class Basis { Z, X };

struct Sample {
    Rng *rng;
};
struct Postselect {
    int bit;
};
using MeasureMode = std::variant<Sample, Postselect>;

struct MeasurementEntry {
    Qubit qubit;
    Basis basis;
    int outcome;
    double probability;
};

/// Ordered log of single-qubit measurements taken along one branch.
struct MeasurementRecord {
    std::vector<MeasurementEntry> entries;

    void push(MeasurementEntry entry);
    /// Product of the per-measurement conditional probabilities.
    double branch_weight() const;
    void append(const MeasurementRecord &other);
};

/// Dense 2^n amplitude vector. Qubit 0 is the least-significant bit of the basis index.
class StateVector {
   public:
    static constexpr std::size_t kMaxQubits = 26;
    static constexpr double kNormTolerance = 1e-12;
    static constexpr double kZeroBranch = 1e-14;

    /// |0…0⟩ on n qubits.
    explicit StateVector(std::size_t n_qubits);
    static StateVector basis_state(std::size_t n_qubits, std::uint64_t index);
    /// Takes ownership of amplitudes; the length must be a power of two. When normalize is false the
    /// vector must already have unit norm.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes, bool normalize = false);

    std::size_t n_qubits() const {
        return n_qubits_;
    }
    std::size_t dim() const {
        return amplitudes_.size();
    }
    std::span<const Complex> amplitudes() const {
        return amplitudes_;
    }
    Complex operator[](std::uint64_t index) const {
        return amplitudes_[index];
    }
    double norm() const;

    /// Applies u to the listed qubits; targets[0] is the least-significant bit of u's row index.
    void apply_unitary(std::span<const Qubit> targets, const Matrix &u);
    void apply_single(Qubit target, const Matrix &u);

    /// Multiplies amplitude i by phase(i). Callers guarantee |phase(i)| = 1.
    template <class PhaseFn>
    void apply_phases(PhaseFn &&phase) {
        for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
            amplitudes_[i] *= phase(i);
        }
    }

    /// Keeps only amplitudes with keep(i) true and renormalizes. Returns the kept weight.
    template <class Pred>
    double project(Pred &&keep) {
        double weight = 0;
        for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
            if (keep(i)) {
                weight += std::norm(amplitudes_[i]);
            }
        }
        if (weight <= kZeroBranch) {
            throw ZeroProbabilityBranch("projection onto a zero-weight subspace", weight);
        }
        double scale = 1.0 / std::sqrt(weight);
        for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
            amplitudes_[i] = keep(i) ? amplitudes_[i] * scale : Complex(0);
        }
        return weight;
    }

    /// Born probability that qubit q reads 1 in the Z basis.
    double probability_one(Qubit q) const;
    /// Probability that every listed qubit reads 0.
    double probability_all_zero(std::span<const Qubit> qubits) const;

    /// Projective single-qubit measurement, collapsing this state. Returns (outcome, probability).
    std::pair<int, double> measure(Qubit q, Basis basis, const MeasureMode &mode);

    /// This state tensored with |0…0⟩ on `extra` new most-significant qubits.
    StateVector with_zero_qubits(std::size_t extra) const;
    /// Drops the qubits above n_low, which must be in |0⟩ up to `tolerance` in weight.
    StateVector without_high_qubits(std::size_t n_low, double tolerance = 1e-10) const;

   private:
    StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes);
    void check_qubit(Qubit q) const;
    void apply_two(Qubit q0, Qubit q1, const Matrix &u);

    std::size_t n_qubits_;
    std::vector<Complex> amplitudes_;
};

Complex inner_product(const StateVector &a, const StateVector &b);

/// |⟨a|b⟩|², clamped to [0, 1].
double fidelity(const StateVector &a, const StateVector &b);
/// |1 − fidelity|.
double infidelity(const StateVector &a, const StateVector &b);

StateVector apply_unitary(StateVector state, std::span<const Qubit> targets, const Matrix &u);

struct MeasureOutcome {
    int bit;
    double probability;
    StateVector state;
};
MeasureOutcome measure(StateVector state, Qubit qubit, Basis basis, const MeasureMode &mode);

/// Per-basis-index excitation counts over a fixed set of sites.
class ExcitationCounter {
   public:
    ExcitationCounter(std::size_t n_qubits, std::span<const Qubit> sites);
    unsigned operator()(std::uint64_t index) const {
        return table_[index];
    }
    std::uint64_t site_mask() const {
        return mask_;
    }
    std::size_t n_qubits() const {
        return n_qubits_;
    }

   private:
    std::size_t n_qubits_;
    std::uint64_t mask_;
    std::vector<std::uint8_t> table_;
};

struct Projection {
    double probability;
    StateVector state;
};

/// Brute-force Π_j^ℓ: keeps basis states whose excitation count on `sites` is ≡ residue (mod 2^ℓ).
Projection excitation_projector_reference(
    StateVector state, std::span<const Qubit> sites, std::uint64_t residue, unsigned ell);

/// Assignment of logical roles to qubit indices.
struct RegisterLayout {
    std::vector<Qubit> system_sites;
    std::vector<std::vector<Qubit>> site_ancillas;
    std::vector<Qubit> extra_ancillas;

    /// System sites first (0..N−1), then the extra ancillas, then the per-site ancillas site-major.
    /// With ancillas_per_site = 0 the register holds only system and extra qubits.
    static RegisterLayout contiguous(std::size_t n_sites, std::size_t ancillas_per_site, std::size_t n_extra);

    std::size_t n_sites() const {
        return system_sites.size();
    }
    std::size_t ancillas_per_site() const;
    std::size_t n_qubits() const;
    /// Checks disjointness, coverage of 0..n−1 and uniform per-site ancilla count.
    void validate() const;
};

namespace gates {
Matrix identity(std::size_t dim = 2);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix hadamard();
Matrix phase(double angle);
/// CNOT with targets ordered {control, target}.
Matrix cnot();
/// exp(−i·angle·σ_y): |0⟩ ↦ cos(angle)|0⟩ + sin(angle)|1⟩.
Matrix ry_full(double angle);
/// Diagonal block matrix acting as u0 when the control (second target) is 0 and u1 when it is 1.
Matrix controlled_pair(const Matrix &u0, const Matrix &u1);
/// Dense inverse QFT on k qubits in the target order used by apply_unitary, such that the last
/// target carries the most significant bit of the register integer.
Matrix inverse_qft(unsigned k);
Matrix random_unitary(std::size_t dim, Rng &rng);
}  // namespace gates

/// Frobenius norm of u·u† − I.
double unitarity_deviation(const Matrix &u);

/// Haar-ish random normalized state (Gaussian amplitudes).
StateVector random_state(std::size_t n_qubits, Rng &rng);

}  // namespace lprep
