#include "lprep/state_vector.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>

namespace lprep {

namespace {

bool is_power_of_two(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream),
        static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_u64() {
    return engine_();
}

Rng Rng::split(std::uint64_t stream) const {
    return Rng(seed_, stream_ * 0x9E3779B97F4A7C15ULL + stream + 1);
}

void MeasurementRecord::push(MeasurementEntry entry) {
    if (!(entry.probability >= 0.0 && entry.probability <= 1.0 + 1e-12)) {
        throw std::invalid_argument("measurement probability outside [0, 1]");
    }
    entries.push_back(entry);
}

double MeasurementRecord::branch_weight() const {
    double w = 1.0;
    for (const auto &e : entries) {
        w *= e.probability;
    }
    return w;
}

void MeasurementRecord::append(const MeasurementRecord &other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw std::invalid_argument(
            "qubit count " + std::to_string(n_qubits) + " outside [1, " + std::to_string(kMaxQubits) + "]");
    }
    amplitudes_.assign(std::size_t{1} << n_qubits, Complex(0));
    amplitudes_[0] = 1.0;
}

StateVector::StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
}

StateVector StateVector::basis_state(std::size_t n_qubits, std::uint64_t index) {
    StateVector s(n_qubits);
    if (index >= s.dim()) {
        throw std::out_of_range("basis index out of range");
    }
    s.amplitudes_[0] = 0.0;
    s.amplitudes_[index] = 1.0;
    return s;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes, bool normalize) {
    if (!is_power_of_two(amplitudes.size())) {
        throw std::invalid_argument("amplitude count must be a power of two");
    }
    auto n = static_cast<std::size_t>(std::countr_zero(amplitudes.size()));
    if (n < 1 || n > kMaxQubits) {
        throw std::invalid_argument("qubit count outside supported range");
    }
    double norm2 = 0;
    for (auto a : amplitudes) {
        norm2 += std::norm(a);
    }
    if (normalize) {
        if (norm2 <= kZeroBranch) {
            throw ZeroProbabilityBranch("cannot normalize a zero vector", norm2);
        }
        double scale = 1.0 / std::sqrt(norm2);
        for (auto &a : amplitudes) {
            a *= scale;
        }
    } else if (std::abs(std::sqrt(norm2) - 1.0) > kNormTolerance) {
        throw std::invalid_argument("amplitudes are not normalized (norm " + std::to_string(std::sqrt(norm2)) + ")");
    }
    return StateVector(n, std::move(amplitudes));
}

double StateVector::norm() const {
    double norm2 = 0;
    for (auto a : amplitudes_) {
        norm2 += std::norm(a);
    }
    return std::sqrt(norm2);
}

void StateVector::check_qubit(Qubit q) const {
    if (q >= n_qubits_) {
        throw std::out_of_range("qubit " + std::to_string(q) + " outside register of " + std::to_string(n_qubits_));
    }
}

double unitarity_deviation(const Matrix &u) {
    if (u.rows() != u.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    return (u * u.adjoint() - Matrix::Identity(u.rows(), u.cols())).norm();
}

void StateVector::apply_single(Qubit target, const Matrix &u) {
    check_qubit(target);
    if (u.rows() != 2 || u.cols() != 2) {
        throw std::invalid_argument("single-qubit gate must be 2x2");
    }
    double dev = unitarity_deviation(u);
    if (dev > 1e-10) {
        throw NonUnitaryMatrix("gate is not unitary, |u u^dag - I| = " + std::to_string(dev), dev);
    }
    const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
    const std::uint64_t bit = std::uint64_t{1} << target;
    Complex *amps = amplitudes_.data();
    for (std::uint64_t hi = 0; hi < amplitudes_.size(); hi += 2 * bit) {
        for (std::uint64_t i = hi; i < hi + bit; ++i) {
            const Complex a0 = amps[i];
            const Complex a1 = amps[i + bit];
            amps[i] = u00 * a0 + u01 * a1;
            amps[i + bit] = u10 * a0 + u11 * a1;
        }
    }
}

void StateVector::apply_two(Qubit q0, Qubit q1, const Matrix &u) {
    Complex m[4][4];
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            m[r][c] = u(r, c);
        }
    }
    const std::uint64_t b0 = std::uint64_t{1} << q0, b1 = std::uint64_t{1} << q1;
    const std::uint64_t lo = std::min(b0, b1), hi = std::max(b0, b1);
    Complex *amps = amplitudes_.data();
    for (std::uint64_t outer = 0; outer < amplitudes_.size(); outer += 2 * hi) {
        for (std::uint64_t mid = outer; mid < outer + hi; mid += 2 * lo) {
            for (std::uint64_t i = mid; i < mid + lo; ++i) {
                const Complex a0 = amps[i], a1 = amps[i + b0], a2 = amps[i + b1], a3 = amps[i + b0 + b1];
                amps[i] = m[0][0] * a0 + m[0][1] * a1 + m[0][2] * a2 + m[0][3] * a3;
                amps[i + b0] = m[1][0] * a0 + m[1][1] * a1 + m[1][2] * a2 + m[1][3] * a3;
                amps[i + b1] = m[2][0] * a0 + m[2][1] * a1 + m[2][2] * a2 + m[2][3] * a3;
                amps[i + b0 + b1] = m[3][0] * a0 + m[3][1] * a1 + m[3][2] * a2 + m[3][3] * a3;
            }
        }
    }
}

void StateVector::apply_unitary(std::span<const Qubit> targets, const Matrix &u) {
    const std::size_t k = targets.size();
    if (k == 0 || k > 12) {
        throw std::invalid_argument("apply_unitary supports 1 to 12 targets");
    }
    std::set<Qubit> seen;
    for (auto q : targets) {
        check_qubit(q);
        if (!seen.insert(q).second) {
            throw std::invalid_argument("duplicate target qubit " + std::to_string(q));
        }
    }
    const std::size_t block = std::size_t{1} << k;
    if (static_cast<std::size_t>(u.rows()) != block || static_cast<std::size_t>(u.cols()) != block) {
        throw std::invalid_argument("matrix dimension does not match target count");
    }
    double dev = unitarity_deviation(u);
    if (dev > 1e-10) {
        throw NonUnitaryMatrix("matrix is not unitary, |u u^dag - I| = " + std::to_string(dev), dev);
    }
    if (k == 1) {
        apply_single(targets[0], u);
        return;
    }

    std::vector<std::uint64_t> offsets(block, 0);
    for (std::size_t local = 0; local < block; ++local) {
        for (std::size_t b = 0; b < k; ++b) {
            if (local & (std::size_t{1} << b)) {
                offsets[local] |= std::uint64_t{1} << targets[b];
            }
        }
    }

    if (k == 2) {
        apply_two(targets[0], targets[1], u);
        return;
    }
    std::vector<Qubit> sorted(targets.begin(), targets.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<Complex> m(block * block);
    for (std::size_t r = 0; r < block; ++r) {
        for (std::size_t c = 0; c < block; ++c) {
            m[r * block + c] = u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
    std::vector<Complex> in(block), out(block);
    const std::uint64_t n_bases = amplitudes_.size() >> k;
    for (std::uint64_t j = 0; j < n_bases; ++j) {
        // Spread j over the non-target bit positions.
        std::uint64_t base = j;
        for (auto q : sorted) {
            const std::uint64_t low = base & ((std::uint64_t{1} << q) - 1);
            base = ((base ^ low) << 1) | low;
        }
        for (std::size_t c = 0; c < block; ++c) {
            in[c] = amplitudes_[base | offsets[c]];
        }
        for (std::size_t r = 0; r < block; ++r) {
            const Complex *row = &m[r * block];
            Complex acc = 0;
            for (std::size_t c = 0; c < block; ++c) {
                acc += row[c] * in[c];
            }
            out[r] = acc;
        }
        for (std::size_t r = 0; r < block; ++r) {
            amplitudes_[base | offsets[r]] = out[r];
        }
    }
}

double StateVector::probability_one(Qubit q) const {
    check_qubit(q);
    const std::uint64_t bit = std::uint64_t{1} << q;
    double p = 0;
    for (std::uint64_t hi = bit; hi < amplitudes_.size(); hi += 2 * bit) {
        for (std::uint64_t i = hi; i < hi + bit; ++i) {
            p += std::norm(amplitudes_[i]);
        }
    }
    return p;
}

double StateVector::probability_all_zero(std::span<const Qubit> qubits) const {
    std::uint64_t mask = 0;
    for (auto q : qubits) {
        check_qubit(q);
        mask |= std::uint64_t{1} << q;
    }
    double p = 0;
    for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
        if ((i & mask) == 0) {
            p += std::norm(amplitudes_[i]);
        }
    }
    return p;
}

std::pair<int, double> StateVector::measure(Qubit q, Basis basis, const MeasureMode &mode) {
    check_qubit(q);
    if (basis == Basis::X) {
        apply_single(q, gates::hadamard());
    }
    const double p1 = std::clamp(probability_one(q), 0.0, 1.0);
    const double p0 = 1.0 - p1;
    int bit;
    if (const auto *s = std::get_if<Sample>(&mode)) {
        bit = s->rng->uniform() < p1 ? 1 : 0;
    } else {
        bit = std::get<Postselect>(mode).bit;
        if (bit != 0 && bit != 1) {
            throw std::invalid_argument("postselected bit must be 0 or 1");
        }
    }
    const double prob = bit ? p1 : p0;
    if (prob <= kZeroBranch) {
        throw ZeroProbabilityBranch("measurement branch has zero probability", prob);
    }
    const std::uint64_t bitmask = std::uint64_t{1} << q;
    const double scale = 1.0 / std::sqrt(prob);
    for (std::uint64_t hi = 0; hi < amplitudes_.size(); hi += 2 * bitmask) {
        Complex *keep = &amplitudes_[bit ? hi + bitmask : hi];
        Complex *drop = &amplitudes_[bit ? hi : hi + bitmask];
        for (std::uint64_t i = 0; i < bitmask; ++i) {
            keep[i] *= scale;
            drop[i] = 0;
        }
    }
    if (basis == Basis::X) {
        apply_single(q, gates::hadamard());
    }
    return {bit, prob};
}

StateVector StateVector::with_zero_qubits(std::size_t extra) const {
    if (n_qubits_ + extra > kMaxQubits) {
        throw std::invalid_argument("register would exceed " + std::to_string(kMaxQubits) + " qubits");
    }
    std::vector<Complex> amps(std::size_t{1} << (n_qubits_ + extra), Complex(0));
    std::copy(amplitudes_.begin(), amplitudes_.end(), amps.begin());
    return StateVector(n_qubits_ + extra, std::move(amps));
}

StateVector StateVector::without_high_qubits(std::size_t n_low, double tolerance) const {
    if (n_low < 1 || n_low > n_qubits_) {
        throw std::invalid_argument("invalid subsystem size");
    }
    const std::size_t low_dim = std::size_t{1} << n_low;
    double kept = 0;
    for (std::size_t i = 0; i < low_dim; ++i) {
        kept += std::norm(amplitudes_[i]);
    }
    if (1.0 - kept > tolerance) {
        throw std::runtime_error("high qubits are not in |0>: leaked weight " + std::to_string(1.0 - kept));
    }
    std::vector<Complex> amps(amplitudes_.begin(), amplitudes_.begin() + static_cast<std::ptrdiff_t>(low_dim));
    return StateVector::from_amplitudes(std::move(amps), true);
}

Complex inner_product(const StateVector &a, const StateVector &b) {
    if (a.n_qubits() != b.n_qubits()) {
        throw std::invalid_argument(
            "dimension mismatch: " + std::to_string(a.n_qubits()) + " vs " + std::to_string(b.n_qubits()) + " qubits");
    }
    Complex acc = 0;
    auto x = a.amplitudes();
    auto y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += std::conj(x[i]) * y[i];
    }
    return acc;
}

double fidelity(const StateVector &a, const StateVector &b) {
    return std::clamp(std::norm(inner_product(a, b)), 0.0, 1.0);
}

double infidelity(const StateVector &a, const StateVector &b) {
    return std::abs(1.0 - fidelity(a, b));
}

StateVector apply_unitary(StateVector state, std::span<const Qubit> targets, const Matrix &u) {
    state.apply_unitary(targets, u);
    return state;
}

MeasureOutcome measure(StateVector state, Qubit qubit, Basis basis, const MeasureMode &mode) {
    auto [bit, prob] = state.measure(qubit, basis, mode);
    return MeasureOutcome{bit, prob, std::move(state)};
}

ExcitationCounter::ExcitationCounter(std::size_t n_qubits, std::span<const Qubit> sites)
    : n_qubits_(n_qubits), mask_(0) {
    for (auto q : sites) {
        if (q >= n_qubits) {
            throw std::out_of_range("site outside register");
        }
        mask_ |= std::uint64_t{1} << q;
    }
    table_.resize(std::size_t{1} << n_qubits);
    for (std::uint64_t i = 0; i < table_.size(); ++i) {
        table_[i] = static_cast<std::uint8_t>(std::popcount(i & mask_));
    }
}

Projection excitation_projector_reference(
    StateVector state, std::span<const Qubit> sites, std::uint64_t residue, unsigned ell) {
    if (ell >= 63) {
        throw std::invalid_argument("modulus exponent too large");
    }
    const std::uint64_t modulus = std::uint64_t{1} << ell;
    if (residue >= modulus) {
        throw std::invalid_argument("residue must lie in [0, 2^ell)");
    }
    ExcitationCounter count(state.n_qubits(), sites);
    double weight = state.project([&](std::uint64_t i) {
        return (count(i) & (modulus - 1)) == residue;
    });
    return Projection{weight, std::move(state)};
}

RegisterLayout RegisterLayout::contiguous(std::size_t n_sites, std::size_t ancillas_per_site, std::size_t n_extra) {
    RegisterLayout layout;
    Qubit next = 0;
    for (std::size_t j = 0; j < n_sites; ++j) {
        layout.system_sites.push_back(next++);
    }
    for (std::size_t x = 0; x < n_extra; ++x) {
        layout.extra_ancillas.push_back(next++);
    }
    layout.site_ancillas.resize(n_sites);
    for (std::size_t j = 0; j < n_sites; ++j) {
        for (std::size_t a = 0; a < ancillas_per_site; ++a) {
            layout.site_ancillas[j].push_back(next++);
        }
    }
    return layout;
}

std::size_t RegisterLayout::ancillas_per_site() const {
    return site_ancillas.empty() ? 0 : site_ancillas.front().size();
}

std::size_t RegisterLayout::n_qubits() const {
    std::size_t n = system_sites.size() + extra_ancillas.size();
    for (const auto &a : site_ancillas) {
        n += a.size();
    }
    return n;
}

void RegisterLayout::validate() const {
    if (!site_ancillas.empty() && site_ancillas.size() != system_sites.size()) {
        throw std::invalid_argument("site_ancillas must have one entry per system site");
    }
    const std::size_t per_site = ancillas_per_site();
    std::vector<bool> used(n_qubits(), false);
    auto claim = [&](Qubit q) {
        if (q >= used.size() || used[q]) {
            throw std::invalid_argument("layout indices overlap or leave gaps at qubit " + std::to_string(q));
        }
        used[q] = true;
    };
    for (auto q : system_sites) {
        claim(q);
    }
    for (const auto &list : site_ancillas) {
        if (list.size() != per_site) {
            throw std::invalid_argument("non-uniform ancilla count across sites");
        }
        for (auto q : list) {
            claim(q);
        }
    }
    for (auto q : extra_ancillas) {
        claim(q);
    }
}

namespace gates {

Matrix identity(std::size_t dim) {
    return Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Matrix hadamard() {
    Matrix m(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
    return m;
}

Matrix phase(double angle) {
    Matrix m(2, 2);
    m << 1, 0, 0, std::polar(1.0, angle);
    return m;
}

Matrix cnot() {
    // Local index bit 0 = control, bit 1 = target.
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = 1;
    m(2, 2) = 1;
    m(3, 1) = 1;
    m(1, 3) = 1;
    return m;
}

Matrix ry_full(double angle) {
    Matrix m(2, 2);
    m << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return m;
}

Matrix controlled_pair(const Matrix &u0, const Matrix &u1) {
    Matrix m = Matrix::Zero(4, 4);
    m.block(0, 0, 2, 2) = u0;
    m.block(2, 2, 2, 2) = u1;
    return m;
}

Matrix inverse_qft(unsigned k) {
    const Eigen::Index d = Eigen::Index{1} << k;
    Matrix m(d, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index c = 0; c < d; ++c) {
            const auto jc = static_cast<std::uint64_t>(j * c) % static_cast<std::uint64_t>(d);
            m(j, c) = std::polar(scale, -2.0 * std::numbers::pi * static_cast<double>(jc) / static_cast<double>(d));
        }
    }
    return m;
}

Matrix random_unitary(std::size_t dim, Rng &rng) {
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix g(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
            double u3 = std::max(rng.uniform(), 1e-300), u4 = rng.uniform();
            double a = std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
            double b = std::sqrt(-2 * std::log(u3)) * std::cos(2 * std::numbers::pi * u4);
            g(r, c) = Complex(a, b);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < n; ++c) {
        Complex d = r(c, c);
        double mag = std::abs(d);
        q.col(c) *= mag > 0 ? d / mag : Complex(1);
    }
    return q;
}

}  // namespace gates

StateVector random_state(std::size_t n_qubits, Rng &rng) {
    std::vector<Complex> amps(std::size_t{1} << n_qubits);
    for (auto &a : amps) {
        double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
        double r = std::sqrt(-2 * std::log(u1));
        a = std::polar(r, 2 * std::numbers::pi * u2);
    }
    return StateVector::from_amplitudes(std::move(amps), true);
}

}  // namespace lprep
