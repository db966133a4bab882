#include "lprep/dicke.h"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lprep {

namespace {

ResourceLedger rotation_layer(std::size_t n) {
    std::vector<std::vector<Qubit>> gates;
    for (Qubit q = 0; q < n; ++q) {
        gates.push_back({q});
    }
    ResourceLedger ledger;
    ledger.record(LayerEvent::unitary("single-qubit rotations to the product state", std::move(gates)));
    return ledger;
}

ResourceLedger attempt_ledger(std::size_t n, const ResourceLedger &measurement, std::size_t repetitions) {
    ResourceLedger ledger = rotation_layer(n);
    ledger.append(measurement);
    ledger.ancillas_per_site = measurement.ancillas_per_site;
    ledger.extra_ancillas = measurement.extra_ancillas;
    ledger.repetitions = repetitions;
    return ledger;
}

struct EllChoice {
    unsigned ell;
    double formula;
    bool exact;
    bool from_formula;
};

EllChoice choose_ell(const DickeParams &params) {
    EllChoice c{};
    c.formula = params.m == 0 ? 1.0 : ell_for_dicke_real(params.m, params.eps);
    c.from_formula = !params.ell.has_value();
    c.ell = params.ell ? *params.ell : (params.m == 0 ? 1u : ell_for_dicke(params.m, params.eps));
    const unsigned cap = exact_ell(params.n);
    if (c.ell >= cap) {
        c.ell = cap;
        c.exact = true;
    }
    if (c.ell < 1) {
        throw std::invalid_argument("ell must be positive");
    }
    return c;
}

// Infidelity checks need a prepared state; runs that never succeeded only get the probability check.
void add_dicke_checks(PreparationReport &report, const DickeParams &params, bool from_formula,
                      bool simulated = true) {
    const unsigned m = params.m;
    if (simulated && (from_formula || report.exact_regime)) {
        report.bound_checks.push_back(BoundCheck::at_most("infidelity <= eps", report.infidelity, params.eps));
    }
    if (m >= 1) {
        report.bound_checks.push_back(BoundCheck::at_least(
            "success probability >= 1/sqrt(8 pi M)", report.success_probability,
            1 / std::sqrt(8 * std::numbers::pi * m)));
        if (simulated && (std::uint64_t{1} << report.ell) >= 4ull * m) {
            report.bound_checks.push_back(BoundCheck::at_most("infidelity <= sqrt(8 pi M) exp(-2^(ell-1))",
                                                              report.infidelity,
                                                              dicke_infidelity_bound(m, report.ell)));
        }
    }
}

}  // namespace

StateVector make_dicke_state(std::size_t n, std::size_t m) {
    if (m > n) {
        throw std::invalid_argument("excitation number exceeds site count");
    }
    std::vector<Complex> amps(std::size_t{1} << n, 0.0);
    const double a = std::exp(-0.5 * log_binomial(static_cast<unsigned>(n), static_cast<unsigned>(m)));
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        if (static_cast<std::size_t>(std::popcount(i)) == m) {
            amps[i] = a;
        }
    }
    return StateVector::from_amplitudes(std::move(amps), true);
}

Matrix product_rotation(double p) {
    if (!(p >= 0 && p <= 1)) {
        throw std::invalid_argument("p must lie in [0, 1]");
    }
    return gates::ry_full(std::asin(std::sqrt(p)));
}

StateVector make_product_state(std::size_t n, double p) {
    StateVector s(n);
    const Matrix r = product_rotation(p);
    for (Qubit q = 0; q < n; ++q) {
        s.apply_single(q, r);
    }
    return s;
}

double ell_for_dicke_real(unsigned m, double eps) {
    if (m < 1 || !(eps > 0 && eps < 1)) {
        throw std::invalid_argument("ell_for_dicke needs M >= 1 and 0 < eps < 1");
    }
    const double first = std::log2(4.0 * m);
    const double second = 1 + std::log2(std::log(std::sqrt(8 * std::numbers::pi * m) / eps));
    return std::max(first, second);
}

unsigned ell_for_dicke(unsigned m, double eps) {
    // The small slack keeps exact powers of two (log2(4M) for M = 2^k) from rounding up.
    return static_cast<unsigned>(std::ceil(ell_for_dicke_real(m, eps) - 1e-12));
}

double dicke_infidelity_bound(unsigned m, unsigned ell) {
    return std::sqrt(8 * std::numbers::pi * m) * std::exp(-std::ldexp(1.0, static_cast<int>(ell) - 1));
}

void DickeParams::validate() const {
    if (n < 1) {
        throw std::invalid_argument("N must be positive");
    }
    if (2 * m > n) {
        throw std::invalid_argument("M must satisfy 0 <= M <= N/2");
    }
    if (!(eps > 0 && eps < 1)) {
        throw std::invalid_argument("eps must lie in (0, 1)");
    }
}

PreparationReport prepare_dicke(const DickeParams &params, std::size_t max_repetitions, Rng &rng, KickMode mode) {
    params.validate();
    const auto choice = choose_ell(params);
    PreparationReport report;
    report.ell = choice.ell;
    report.ell_formula = choice.formula;
    report.exact_regime = choice.exact;
    report.success_probability = residue_class_probability(params.n, params.p(), params.m, choice.ell);
    report.ledger = attempt_ledger(params.n, excitation_measurement_ledger(params.n, choice.ell), 0);

    const std::uint64_t accept = params.m % (std::uint64_t{1} << choice.ell);
    const auto input = make_product_state(params.n, params.p());
    for (std::size_t attempt = 0; attempt < max_repetitions; ++attempt) {
        auto out = measure_excitations_mod(input, choice.ell, 0, rng, std::nullopt, mode);
        report.trial_outcomes.push_back(out.residue);
        if (out.residue == accept) {
            report.success = true;
            report.repetitions_used = attempt + 1;
            report.infidelity = infidelity(out.state, make_dicke_state(params.n, params.m));
            report.final_state = std::move(out.state);
            break;
        }
    }
    if (!report.success) {
        report.repetitions_used = max_repetitions;
    }
    report.ledger.repetitions = report.repetitions_used;
    add_dicke_checks(report, params, choice.from_formula, report.success);
    return report;
}

PreparationReport prepare_dicke_parallel(const DickeParams &params, std::size_t max_repetitions, Rng &rng) {
    params.validate();
    const auto choice = choose_ell(params);
    PreparationReport report;
    report.ell = choice.ell;
    report.ell_formula = choice.formula;
    report.exact_regime = choice.exact;
    report.success_probability = residue_class_probability(params.n, params.p(), params.m, choice.ell);
    report.ledger = attempt_ledger(params.n, parallel_measurement_ledger(params.n, choice.ell), 0);

    const auto input = make_product_state(params.n, params.p());
    for (std::size_t attempt = 0; attempt < max_repetitions; ++attempt) {
        auto out = measure_excitations_parallel(input, choice.ell, params.m, rng);
        report.trial_outcomes.push_back(out.success ? 1 : 0);
        if (out.success) {
            report.success = true;
            report.repetitions_used = attempt + 1;
            report.infidelity = infidelity(out.state, make_dicke_state(params.n, params.m));
            report.final_state = std::move(out.state);
            break;
        }
    }
    if (!report.success) {
        report.repetitions_used = max_repetitions;
    }
    report.ledger.repetitions = report.repetitions_used;
    add_dicke_checks(report, params, choice.from_formula, report.success);
    return report;
}

PreparationReport prepare_dicke_postselected(const DickeParams &params, KickMode mode) {
    params.validate();
    const auto choice = choose_ell(params);
    PreparationReport report;
    report.ell = choice.ell;
    report.ell_formula = choice.formula;
    report.exact_regime = choice.exact;
    report.success_probability = residue_class_probability(params.n, params.p(), params.m, choice.ell);
    report.ledger = attempt_ledger(params.n, excitation_measurement_ledger(params.n, choice.ell), 1);
    const std::uint64_t accept = params.m % (std::uint64_t{1} << choice.ell);
    // The sampling stream only drives the V sub-protocol in Protocol mode.
    Rng rng(0);
    auto out = measure_excitations_mod(make_product_state(params.n, params.p()), choice.ell, 0, rng, accept, mode);
    report.trial_outcomes.push_back(out.residue);
    report.success = true;
    report.repetitions_used = 1;
    report.infidelity = infidelity(out.state, make_dicke_state(params.n, params.m));
    report.final_state = std::move(out.state);
    add_dicke_checks(report, params, choice.from_formula);
    return report;
}

PreparationReport dicke_ledger_report(const DickeParams &params, bool parallel) {
    params.validate();
    const auto choice = choose_ell(params);
    PreparationReport report;
    report.ell = choice.ell;
    report.ell_formula = choice.formula;
    report.exact_regime = choice.exact;
    report.success_probability = residue_class_probability(params.n, params.p(), params.m, choice.ell);
    const auto measurement = parallel ? parallel_measurement_ledger(params.n, choice.ell)
                                      : excitation_measurement_ledger(params.n, choice.ell);
    report.ledger = attempt_ledger(params.n, measurement, 1);
    add_dicke_checks(report, params, choice.from_formula, false);
    return report;
}

double w_parity_success_probability(unsigned n, double delta) {
    return 0.5 * (1 - std::pow(1 - 2 * delta / n, n));
}

PreparationReport prepare_w_parity(unsigned n, double delta, std::size_t max_repetitions, Rng &rng) {
    if (n < 2) {
        throw std::invalid_argument("the W-state parity protocol needs N >= 2");
    }
    if (!(delta > 0 && delta <= 1)) {
        throw std::invalid_argument("delta must lie in (0, 1]");
    }
    PreparationReport report;
    report.ell = 1;
    report.ell_formula = 1;
    report.exact_regime = n <= 2;
    const double q = delta / n;
    report.success_probability = residue_class_probability(n, q, 1, 1);
    report.ledger = attempt_ledger(n, excitation_measurement_ledger(n, 1), 0);

    const auto input = make_product_state(n, q);
    for (std::size_t attempt = 0; attempt < max_repetitions; ++attempt) {
        auto out = measure_excitations_mod(input, 1, 0, rng);
        report.trial_outcomes.push_back(out.residue);
        if (out.residue == 1) {
            report.success = true;
            report.repetitions_used = attempt + 1;
            report.infidelity = infidelity(out.state, make_dicke_state(n, 1));
            report.final_state = std::move(out.state);
            break;
        }
    }
    if (!report.success) {
        report.repetitions_used = max_repetitions;
    }
    report.ledger.repetitions = report.repetitions_used;
    if (report.success) {
        report.bound_checks.push_back(
            BoundCheck::at_most("infidelity <= delta^2/4", report.infidelity, delta * delta / 4));
    }
    report.bound_checks.push_back(
        BoundCheck::at_least("success probability >= delta/2", report.success_probability, delta / 2));
    return report;
}

}  // namespace lprep
