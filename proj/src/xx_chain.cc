#include "lprep/xx_chain.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <Eigen/Eigenvalues>

namespace lprep {

namespace {

constexpr double kPi = std::numbers::pi;

double norm_prefix(const std::vector<Complex> &c, std::size_t len) {
    double s = 0;
    for (std::size_t i = 0; i < len; ++i) {
        s += std::norm(c[i]);
    }
    return std::sqrt(s);
}

ControlledProductSpec jw_spec(Qubit j) {
    ControlledProductSpec spec;
    spec.control = j;
    for (Qubit k = 0; k < j; ++k) {
        spec.sites.push_back(k);
        spec.branch0.push_back(gates::identity());
        spec.branch1.push_back(gates::pauli_z());
    }
    return spec;
}

/// Applies one step of the circuit and charges it.
class StepRunner {
   public:
    StepRunner(StateVector &state, std::size_t n, const XXOptions &options, ResourceLedger &ledger,
               MeasurementDriver &driver)
        : state_(state),
          options_(options),
          ledger_(ledger),
          driver_(driver),
          layout_(RegisterLayout::contiguous(n, 1, 0)) {
        if (options.jw == JWMode::Protocol && state.n_qubits() != layout_.n_qubits()) {
            throw std::invalid_argument("protocol mode expects one ancilla per site");
        }
        if (state.n_qubits() < n) {
            throw std::invalid_argument("state is smaller than the chain");
        }
    }

    void x(Qubit j, double theta, Complex u) {
        if (theta == 0) {
            // A zero angle still occupies its slot in the schedule.
            ledger_.record(LayerEvent::unitary("X_" + std::to_string(j) + " (identity)", {{j}}));
            return;
        }
        state_.apply_single(j, xx_local_rotation(theta, u));
        ledger_.record(LayerEvent::unitary("X_" + std::to_string(j), {{j}}));
    }

    void v(Qubit j) {
        if (j == 0) {
            return;
        }
        const auto spec = jw_spec(j);
        if (options_.jw == JWMode::Protocol) {
            auto run = apply_v_protocol(std::move(state_), layout_, spec, driver_);
            state_ = std::move(run.state);
            ledger_.append(run.ledger);
        } else {
            const std::uint64_t below = (std::uint64_t{1} << j) - 1;
            state_.apply_phases([=](std::uint64_t i) {
                const bool flip = ((i >> j) & 1) && (std::popcount(i & below) & 1);
                return flip ? Complex(-1) : Complex(1);
            });
            ledger_.append(v_protocol_ledger(layout_, spec));
        }
    }

   private:
    StateVector &state_;
    const XXOptions &options_;
    ResourceLedger &ledger_;
    MeasurementDriver &driver_;
    RegisterLayout layout_;
};

std::vector<std::uint64_t> sector_basis(std::size_t n, std::size_t m) {
    std::vector<std::uint64_t> basis;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
        if (static_cast<std::size_t>(std::popcount(i)) == m) {
            basis.push_back(i);
        }
    }
    return basis;
}

}  // namespace

void XXModeSet::validate() const {
    if (modes.size() != energies.size()) {
        throw std::invalid_argument("mode and energy counts differ");
    }
    for (std::size_t a = 0; a < modes.size(); ++a) {
        if (modes[a].size() != n) {
            throw std::invalid_argument("mode length differs from chain length");
        }
        for (std::size_t b = a; b < modes.size(); ++b) {
            Complex g = 0;
            for (std::size_t j = 0; j < n; ++j) {
                g += std::conj(modes[a][j]) * modes[b][j];
            }
            const double expect = a == b ? 1.0 : 0.0;
            if (std::abs(g - expect) > 1e-10) {
                throw std::invalid_argument("modes are not orthonormal");
            }
        }
    }
}

std::vector<double> xx_sine_mode(std::size_t n, std::size_t k) {
    if (k < 1 || k > n) {
        throw std::invalid_argument("mode number must lie in 1..N");
    }
    std::vector<double> c(n);
    const double scale = std::sqrt(2.0 / (n + 1));
    for (std::size_t j = 1; j <= n; ++j) {
        c[j - 1] = scale * std::sin(kPi * double(k * j) / double(n + 1));
    }
    return c;
}

XXModeSet xx_modes(std::size_t n) {
    if (n < 2) {
        throw std::invalid_argument("the XX chain needs N >= 2");
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        h(j, j + 1) = h(j + 1, j) = -1;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    XXModeSet set;
    set.n = n;
    for (std::size_t a = 0; a < n; ++a) {
        Eigen::VectorXd v = es.eigenvectors().col(a);
        // Ascending λ = −2cos(πk/(N+1)) puts mode k = a + 1 at position a.
        const auto ref = xx_sine_mode(n, a + 1);
        double dot = 0, err = 0;
        for (std::size_t j = 0; j < n; ++j) {
            dot += v(j) * ref[j];
        }
        if (dot < 0) {
            v = -v;
        }
        for (std::size_t j = 0; j < n; ++j) {
            err = std::max(err, std::abs(v(j) - ref[j]));
        }
        if (err > 1e-8) {
            throw std::runtime_error("numerical XX modes disagree with the sine form");
        }
        set.modes.emplace_back(v.data(), v.data() + n);
        set.energies.push_back(2 * es.eigenvalues()(a));
    }
    set.validate();
    return set;
}

AngleSplit angle_split(double alpha, double theta) {
    const double sa = std::sin(alpha), ca = std::cos(alpha);
    const double gamma = std::asin(std::clamp(sa * std::cos(theta), -1.0, 1.0));
    const double cg = std::hypot(ca, sa * std::sin(theta));
    // cos γ = 0 leaves β free; β = 0 keeps the layer trivial.
    const double beta = cg < 1e-300 ? 0.0 : 0.5 * std::atan2(sa * std::sin(theta), ca);
    return {beta, gamma};
}

AngleSchedule angle_schedule(const std::vector<Complex> &mode, double alpha) {
    const std::size_t n = mode.size();
    if (n == 0) {
        throw std::invalid_argument("empty mode");
    }
    if (std::abs(norm_prefix(mode, n) - 1) > 1e-10) {
        throw std::invalid_argument("mode must be normalized");
    }
    AngleSchedule s;
    s.alpha = alpha;
    s.theta.assign(n, 0.0);
    s.phase.assign(n, Complex(1));
    for (std::size_t j = 0; j < n; ++j) {
        const double r = std::abs(mode[j]);
        if (r > 1e-14) {
            s.phase[j] = mode[j] / r;
        }
    }
    double a = alpha;
    for (std::size_t j = n - 1; j >= 1; --j) {
        const double cj = std::abs(mode[j]);
        if (cj <= 1e-14) {
            continue;
        }
        const auto split = angle_split(a, std::atan2(cj, norm_prefix(mode, j)));
        s.theta[j] = split.beta;
        a = split.gamma;
    }
    s.theta[0] = std::abs(mode[0]) > 1e-14 ? a : 0.0;
    return s;
}

Matrix xx_local_rotation(double theta, Complex u) {
    Matrix m(2, 2);
    const Complex is(0, std::sin(theta));
    m << std::cos(theta), is * u, is * std::conj(u), std::cos(theta);
    return m;
}

std::vector<Complex> apply_mode_operator(const StateVector &state, const std::vector<Complex> &mode, bool adjoint) {
    const std::size_t n = mode.size();
    if (n > state.n_qubits()) {
        throw std::invalid_argument("mode longer than the register");
    }
    std::vector<Complex> out(state.dim(), 0.0);
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        const Complex amp = state[i];
        if (amp == Complex(0)) {
            continue;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const bool occupied = (i >> k) & 1;
            // a_k empties site k, a_k† fills it.
            if (occupied == adjoint) {
                continue;
            }
            const int string = std::popcount(i & ((std::uint64_t{1} << k) - 1)) & 1;
            const Complex coeff = adjoint ? std::conj(mode[k]) : mode[k];
            out[i ^ (std::uint64_t{1} << k)] += (string ? -1.0 : 1.0) * coeff * amp;
        }
    }
    return out;
}

std::vector<Complex> apply_xx_hamiltonian(const StateVector &state) {
    const std::size_t n = state.n_qubits();
    std::vector<Complex> out(state.dim(), 0.0);
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const std::uint64_t pair = std::uint64_t{3} << k;
            const std::uint64_t bits = i & pair;
            // σ^xσ^x + σ^yσ^y = 2(σ⁺σ⁻ + σ⁻σ⁺): only |01⟩ ↔ |10⟩ couple.
            if (bits != 0 && bits != pair) {
                out[i ^ pair] += -2.0 * state[i];
            }
        }
    }
    return out;
}

void apply_mode_rotation(StateVector &state, const std::vector<Complex> &mode, double alpha, const XXOptions &options,
                         ResourceLedger &ledger, MeasurementDriver &driver) {
    const std::size_t n = mode.size();
    const auto s = angle_schedule(mode, alpha);
    StepRunner run(state, n, options, ledger, driver);
    if (n == 1) {
        run.x(0, s.theta[0], s.phase[0]);
        return;
    }
    const Qubit top = static_cast<Qubit>(n - 1);
    if (options.circuit == XXCircuit::Palindrome) {
        for (Qubit j = top; j >= 1; --j) {
            run.v(j);
            run.x(j, s.theta[j], s.phase[j]);
            run.v(j);
        }
        run.x(0, s.theta[0], s.phase[0]);
        for (Qubit j = 1; j <= top; ++j) {
            run.v(j);
            run.x(j, s.theta[j], s.phase[j]);
            run.v(j);
        }
        return;
    }
    // Operators listed right to left in the product, so the rightmost (L̃_{N−1} = X_{N−1}) runs first.
    run.x(top, s.theta[top], s.phase[top]);
    for (Qubit j = top - 1; j >= 1; --j) {
        run.v(j + 1);
        run.x(j, s.theta[j], s.phase[j]);
    }
    run.v(1);
    run.x(0, s.theta[0], s.phase[0]);
    run.v(1);
    for (Qubit j = 1; j + 1 <= top; ++j) {
        run.x(j, s.theta[j], s.phase[j]);
        run.v(j + 1);
    }
    run.x(top, s.theta[top], s.phase[top]);
}

std::size_t xx_compressed_depth(std::size_t n, std::size_t m) {
    if (m == 0) {
        return 0;
    }
    return m * (14 * n - 13) + 6 * (n - 1);
}

double xx_eigenspace_infidelity(const StateVector &state, std::size_t m, double energy) {
    const std::size_t n = state.n_qubits();
    const auto basis = sector_basis(n, m);
    std::unordered_map<std::uint64_t, Eigen::Index> index;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        index[basis[i]] = static_cast<Eigen::Index>(i);
    }
    const auto dim = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const std::uint64_t pair = std::uint64_t{3} << k;
            const std::uint64_t bits = basis[a] & pair;
            if (bits != 0 && bits != pair) {
                h(index.at(basis[a] ^ pair), a) += -2.0;
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
        psi(a) = state[basis[a]];
    }
    double weight = 0;
    for (Eigen::Index e = 0; e < dim; ++e) {
        if (std::abs(es.eigenvalues()(e) - energy) <= 1e-8) {
            weight += std::norm(es.eigenvectors().col(e).cast<Complex>().dot(psi));
        }
    }
    return std::max(0.0, 1 - weight);
}

XXReport prepare_xx_eigenstate(std::size_t n, const std::vector<std::size_t> &mode_indices, Rng &rng,
                               const XXOptions &options) {
    const auto modes = xx_modes(n);
    std::set<std::size_t> seen;
    for (auto a : mode_indices) {
        if (a >= n) {
            throw std::invalid_argument("mode index " + std::to_string(a) + " out of range");
        }
        if (!seen.insert(a).second) {
            throw std::invalid_argument("repeated mode index " + std::to_string(a));
        }
    }
    const std::size_t register_size = options.jw == JWMode::Protocol ? 2 * n : n;
    if (register_size > StateVector::kMaxQubits) {
        throw std::invalid_argument("register of " + std::to_string(register_size) + " qubits exceeds the simulator cap");
    }

    XXReport report;
    report.mode_indices = mode_indices;
    StateVector state(register_size);
    MeasurementDriver driver = MeasurementDriver::sampling(rng);
    for (auto a : mode_indices) {
        apply_mode_rotation(state, modes.modes[a], kPi / 2, options, report.ledger, driver);
        report.energy += modes.energies[a];
    }
    if (options.circuit == XXCircuit::Compressed && !mode_indices.empty()) {
        // Closing T; the opening one acts on the vacuum and is dropped.
        StepRunner run(state, n, options, report.ledger, driver);
        for (Qubit j = 1; j < n; ++j) {
            run.v(j);
        }
    }
    StateVector system = options.jw == JWMode::Protocol ? state.without_high_qubits(n) : state;

    const auto h_psi = apply_xx_hamiltonian(system);
    double r = 0;
    for (std::uint64_t i = 0; i < system.dim(); ++i) {
        r += std::norm(h_psi[i] - report.energy * system[i]);
    }
    report.eigen_residual = std::sqrt(r);
    const std::size_t m = mode_indices.size();
    for (std::uint64_t i = 0; i < system.dim(); ++i) {
        if (static_cast<std::size_t>(std::popcount(i)) == m) {
            report.sector_weight += std::norm(system[i]);
        }
    }

    StateVector reference(n);
    for (auto a : mode_indices) {
        reference = StateVector::from_amplitudes(apply_mode_operator(reference, modes.modes[a], true), true);
    }
    report.construction_infidelity = infidelity(reference, system);
    if (std::exp(log_binomial(unsigned(n), unsigned(m))) <= XXReport::kMaxSectorDim + 0.5) {
        report.eigenspace_infidelity = xx_eigenspace_infidelity(system, m, report.energy);
    }
    report.infidelity = report.eigenspace_infidelity.value_or(report.construction_infidelity);

    report.success = true;
    report.success_probability = 1;
    report.repetitions_used = 1;
    report.exact_regime = true;
    report.ledger.ancillas_per_site = 1;
    report.ledger.repetitions = 1;
    report.bound_checks.push_back(BoundCheck::at_most("eigen residual <= 1e-8", report.eigen_residual, 1e-8));
    report.bound_checks.push_back(BoundCheck::at_most("infidelity <= 1e-9", report.infidelity, 1e-9));
    if (options.circuit == XXCircuit::Compressed) {
        report.bound_checks.push_back(BoundCheck::at_most("depth <= M(14N - 13) + 6(N - 1)",
                                                          double(report.ledger.depth()),
                                                          double(xx_compressed_depth(n, m))));
    }
    report.final_state = std::move(system);
    return report;
}

}  // namespace lprep
