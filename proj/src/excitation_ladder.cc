#include "lprep/excitation_ladder.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lprep/excitation_measure.h"
#include "lprep/xx_chain.h"

namespace lprep {

namespace {

constexpr double kSeriesTolerance = 1e-13;
constexpr std::size_t kMaxSeriesTerms = 400;

double vec_norm(const std::vector<Complex> &v) {
    double s = 0;
    for (auto x : v) {
        s += std::norm(x);
    }
    return std::sqrt(s);
}

/// (B + B†)|ψ⟩ with B = Σ conj(c_j) σ⁻_j.
std::vector<Complex> apply_hermitian(const std::vector<Complex> &amps, const Mode &c) {
    std::vector<Complex> out(amps.size(), 0.0);
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        const Complex a = amps[i];
        if (a == Complex(0)) {
            continue;
        }
        for (std::size_t j = 0; j < c.size(); ++j) {
            const std::uint64_t bit = std::uint64_t{1} << j;
            out[i ^ bit] += ((i & bit) ? std::conj(c[j]) : c[j]) * a;
        }
    }
    return out;
}

void check_mode(const Mode &c, std::size_t n) {
    if (c.size() != n) {
        throw std::invalid_argument("mode length " + std::to_string(c.size()) + " differs from N = " +
                                    std::to_string(n));
    }
}

struct Outcome {
    std::size_t count;
    double probability;
    StateVector state;
};

Outcome measure_count(const StateVector &state, LadderMeasure how, Rng &rng) {
    const std::size_t n = state.n_qubits();
    if (how == LadderMeasure::Circuit) {
        auto out = measure_excitations_mod(state, exact_ell(n), 0, rng);
        return {static_cast<std::size_t>(out.residue), out.probability, std::move(out.state)};
    }
    const auto w = sector_weights(state);
    double u = rng.uniform(), acc = 0;
    std::size_t k = 0;
    for (; k + 1 < w.size(); ++k) {
        acc += w[k];
        if (u < acc) {
            break;
        }
    }
    StateVector s = state;
    s.project([k](std::uint64_t i) { return static_cast<std::size_t>(std::popcount(i)) == k; });
    return {k, w[k], std::move(s)};
}

}  // namespace

std::vector<Complex> apply_spin_mode(const StateVector &state, const Mode &c, bool adjoint) {
    check_mode(c, state.n_qubits());
    std::vector<Complex> out(state.dim(), 0.0);
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        const Complex a = state[i];
        if (a == Complex(0)) {
            continue;
        }
        for (std::size_t j = 0; j < c.size(); ++j) {
            const std::uint64_t bit = std::uint64_t{1} << j;
            const bool occupied = i & bit;
            if (occupied == adjoint) {
                out[i ^ bit] += (adjoint ? std::conj(c[j]) : c[j]) * a;
            }
        }
    }
    return out;
}

StateVector ladder_target(std::size_t n, const std::vector<Mode> &modes) {
    StateVector s(n);
    for (const auto &c : modes) {
        auto next = apply_spin_mode(s, c, false);
        if (vec_norm(next) < 1e-14) {
            throw std::invalid_argument("product of creation operators annihilates the vacuum");
        }
        s = StateVector::from_amplitudes(std::move(next), true);
    }
    return s;
}

double orthonormality_deviation(const std::vector<Mode> &modes) {
    double worst = 0;
    for (std::size_t a = 0; a < modes.size(); ++a) {
        for (std::size_t b = 0; b < modes.size(); ++b) {
            Complex g = 0;
            for (std::size_t j = 0; j < modes[a].size(); ++j) {
                g += std::conj(modes[a][j]) * modes[b][j];
            }
            worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
        }
    }
    return worst;
}

void LadderSpec::validate() const {
    if (n < 1) {
        throw std::invalid_argument("N must be positive");
    }
    if (modes.size() > n) {
        throw std::invalid_argument("more modes than sites");
    }
    for (const auto &c : modes) {
        check_mode(c, n);
    }
    if (!(std::abs(theta) > 0 && std::abs(theta) <= 1)) {
        throw std::invalid_argument("theta must satisfy 0 < |theta| <= 1");
    }
    const std::size_t reg = measure == LadderMeasure::Circuit ? n + exact_ell(n) : n;
    if (reg > StateVector::kMaxQubits) {
        throw std::invalid_argument("register of " + std::to_string(reg) + " qubits exceeds the simulator cap");
    }
}

std::vector<Mode> uniform_modes(std::size_t n, std::size_t m) {
    return std::vector<Mode>(m, Mode(n, 1 / std::sqrt(double(n))));
}

std::vector<Mode> sine_modes(std::size_t n, std::size_t m) {
    if (m > n) {
        throw std::invalid_argument("more modes than sites");
    }
    std::vector<Mode> out;
    for (std::size_t k = 1; k <= m; ++k) {
        auto s = xx_sine_mode(n, k);
        out.emplace_back(s.begin(), s.end());
    }
    return out;
}

std::vector<Mode> random_modes(std::size_t n, std::size_t m, Rng &rng, double overlap) {
    if (m > n) {
        throw std::invalid_argument("more modes than sites");
    }
    auto gauss = [&rng] {
        // Box–Muller on the library stream keeps runs reproducible across standard libraries.
        const double u = 1 - rng.uniform(), v = rng.uniform();
        return std::sqrt(-2 * std::log(u)) * std::polar(1.0, 2 * std::numbers::pi * v);
    };
    std::vector<Mode> out;
    while (out.size() < m) {
        Mode c(n);
        for (auto &x : c) {
            x = gauss();
        }
        for (const auto &prev : out) {
            Complex d = 0;
            for (std::size_t j = 0; j < n; ++j) {
                d += std::conj(prev[j]) * c[j];
            }
            for (std::size_t j = 0; j < n; ++j) {
                c[j] -= d * prev[j];
            }
        }
        const double r = vec_norm(c);
        if (r < 1e-8) {
            continue;
        }
        for (auto &x : c) {
            x /= r;
        }
        out.push_back(std::move(c));
    }
    for (std::size_t a = out.size(); a-- > 1;) {
        Mode c = out[a];
        for (std::size_t j = 0; j < n; ++j) {
            c[j] += overlap * out[a - 1][j];
        }
        const double r = vec_norm(c);
        for (auto &x : c) {
            x /= r;
        }
        out[a] = std::move(c);
    }
    return out;
}

std::vector<Mode> parse_modes(const std::string &text) {
    std::vector<Mode> modes;
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::vector<double> values;
        double v;
        while (fields >> v) {
            values.push_back(v);
        }
        if (!fields.eof()) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": not a number");
        }
        if (values.empty()) {
            continue;
        }
        if (values.size() % 2 != 0) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": odd number of values");
        }
        Mode c;
        for (std::size_t i = 0; i < values.size(); i += 2) {
            c.emplace_back(values[i], values[i + 1]);
        }
        if (!modes.empty() && c.size() != modes.front().size()) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": mode length differs");
        }
        modes.push_back(std::move(c));
    }
    return modes;
}

std::vector<Mode> read_modes_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_modes(buf.str());
}

std::vector<double> sector_weights(const StateVector &state) {
    std::vector<double> w(state.n_qubits() + 1, 0.0);
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        w[std::popcount(i)] += std::norm(state[i]);
    }
    return w;
}

LadderStep ladder_step(const StateVector &state, const Mode &c, double theta) {
    check_mode(c, state.n_qubits());
    std::vector<Complex> term(state.amplitudes().begin(), state.amplitudes().end());
    std::vector<Complex> sum = term;
    std::size_t terms = 1;
    while (vec_norm(term) > kSeriesTolerance) {
        if (terms >= kMaxSeriesTerms) {
            throw std::runtime_error("rotation series did not converge");
        }
        term = apply_hermitian(term, c);
        const Complex f = Complex(0, theta) / double(terms);
        for (std::size_t i = 0; i < term.size(); ++i) {
            term[i] *= f;
            sum[i] += term[i];
        }
        ++terms;
    }
    LadderStep out{StateVector::from_amplitudes(std::move(sum), true), {}, terms};
    out.sector_weights = sector_weights(out.state);
    return out;
}

std::vector<std::vector<double>> commutator_residual(const std::vector<Mode> &modes, const StateVector &state) {
    std::vector<std::vector<double>> r(modes.size(), std::vector<double>(modes.size(), 0.0));
    auto as_state = [](std::vector<Complex> v) {
        // Wraps an unnormalized vector so the operator helpers can act on it.
        const double s = vec_norm(v);
        if (s < 1e-300) {
            return std::pair{StateVector(std::bit_width(v.size()) - 1), 0.0};
        }
        return std::pair{StateVector::from_amplitudes(std::move(v), true), s};
    };
    for (std::size_t a = 0; a < modes.size(); ++a) {
        for (std::size_t b = 0; b < modes.size(); ++b) {
            auto [cb, cb_norm] = as_state(apply_spin_mode(state, modes[b], false));
            auto bab = apply_spin_mode(cb, modes[a], true);
            auto [ba, ba_norm] = as_state(apply_spin_mode(state, modes[a], true));
            auto bba = apply_spin_mode(ba, modes[b], false);
            double s = 0;
            for (std::uint64_t i = 0; i < state.dim(); ++i) {
                const Complex v = cb_norm * bab[i] - ba_norm * bba[i] - (a == b ? 1.0 : 0.0) * state[i];
                s += std::norm(v);
            }
            r[a][b] = std::sqrt(s);
        }
    }
    return r;
}

LadderTrace run_ladder(const LadderSpec &spec, Rng &rng) {
    spec.validate();
    const std::size_t n = spec.n, m = spec.m();
    LadderTrace trace;
    trace.orthonormality_deviation = orthonormality_deviation(spec.modes);
    const auto measurement = excitation_measurement_ledger(n, exact_ell(n));

    while (true) {
        StateVector state(n);
        trace.attempts_per_step.clear();
        bool failed = false;
        for (std::size_t step = 0; step < m && !failed; ++step) {
            std::size_t used = 0;
            while (true) {
                if (used == spec.max_retries) {
                    failed = true;
                    break;
                }
                ++used;
                auto rotated = ladder_step(state, spec.modes[step], spec.theta);
                trace.ledger.record(LayerEvent::unitary_charge("rotation e^{i theta (B + B^dagger)}", n));
                trace.ledger.append(measurement);
                auto out = measure_count(rotated.state, spec.measure, rng);
                const int k = static_cast<int>(out.count) - static_cast<int>(step);
                trace.attempts.push_back({step, trace.restarts, k, out.probability});
                trace.path_weight *= out.probability;
                state = std::move(out.state);
                if (k == 1) {
                    break;
                }
                if (k != 0) {
                    failed = true;
                    break;
                }
            }
            trace.attempts_per_step.push_back(used);
        }
        if (!failed) {
            trace.success = true;
            if (m > 0) {
                trace.infidelity = infidelity(state, ladder_target(n, spec.modes));
            } else {
                trace.infidelity = 1 - std::norm(state[0]);
            }
            trace.final_state = std::move(state);
            break;
        }
        if (trace.restarts == spec.max_restarts) {
            break;
        }
        ++trace.restarts;
    }
    trace.ledger.extra_ancillas = exact_ell(n);
    trace.ledger.ancillas_per_site = 1;
    trace.ledger.repetitions = trace.restarts + 1;
    return trace;
}

AttemptStatistics attempt_statistics(const StateVector &state, std::size_t base, const Mode &c, double theta,
                                     std::size_t attempts, Rng &rng) {
    const auto step = ladder_step(state, c, theta);
    AttemptStatistics s;
    s.theta = theta;
    s.attempts = attempts;
    const auto &w = step.sector_weights;
    if (base + 1 < w.size()) {
        s.p_one = w[base + 1];
    }
    for (std::size_t k = base + 2; k < w.size(); ++k) {
        s.p_two_plus += w[k];
    }
    std::size_t ones = 0, more = 0;
    for (std::size_t t = 0; t < attempts; ++t) {
        const double u = rng.uniform();
        if (u < s.p_one) {
            ++ones;
        } else if (u < s.p_one + s.p_two_plus) {
            ++more;
        }
    }
    s.freq_one = double(ones) / double(std::max<std::size_t>(attempts, 1));
    s.freq_two_plus = double(more) / double(std::max<std::size_t>(attempts, 1));
    return s;
}

double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("slope fit needs two or more matching points");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace lprep
