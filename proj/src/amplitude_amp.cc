#include "lprep/amplitude_amp.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "lprep/dicke.h"
#include "lprep/excitation_measure.h"

namespace lprep {

namespace {

constexpr double kPi = std::numbers::pi;

/// a·x + b·y without renormalization checks (the callers combine orthonormal pieces).
StateVector combine(Complex a, const StateVector &x, Complex b, const StateVector &y) {
    if (x.dim() != y.dim()) {
        throw std::invalid_argument("dimension mismatch");
    }
    std::vector<Complex> amps(x.dim());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        amps[i] = a * x[i] + b * y[i];
    }
    return StateVector::from_amplitudes(std::move(amps), true);
}

double distance(const StateVector &x, Complex phase, const StateVector &y) {
    double d = 0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        d += std::norm(x[i] - phase * y[i]);
    }
    return std::sqrt(d);
}

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

/// Q(φ, ϕ) in the basis (ψ1, ψ2) with ψ = (sin α, cos α).
Mat2 q_model(double alpha, double phi, double varphi) {
    Vec2 psi(std::sin(alpha), std::cos(alpha));
    Mat2 s1 = Mat2::Identity() + (std::polar(1.0, phi) - 1.0) * psi * psi.adjoint();
    Mat2 s2 = Mat2::Identity();
    s2(0, 0) = std::polar(1.0, varphi);
    return -s1 * s2;
}

Complex residual_complex(double alpha, unsigned k, double phi, double varphi) {
    Vec2 v(std::sin(alpha), std::cos(alpha));
    const Mat2 grover = q_model(alpha, kPi, kPi);
    for (unsigned i = 0; i < k; ++i) {
        v = grover * v;
    }
    v = q_model(alpha, phi, varphi) * v;
    return v(1);
}

/// Two-variable Newton with a finite-difference Jacobian. Returns true on |r| ≤ 1e-13.
bool newton(double alpha, unsigned k, double &phi, double &varphi) {
    for (int iter = 0; iter < 100; ++iter) {
        Complex r = residual_complex(alpha, k, phi, varphi);
        if (std::abs(r) <= 1e-13) {
            return true;
        }
        const double h = 1e-7;
        Complex dphi = (residual_complex(alpha, k, phi + h, varphi) - residual_complex(alpha, k, phi - h, varphi)) / (2 * h);
        Complex dvar = (residual_complex(alpha, k, phi, varphi + h) - residual_complex(alpha, k, phi, varphi - h)) / (2 * h);
        Eigen::Matrix2d j;
        j << dphi.real(), dvar.real(), dphi.imag(), dvar.imag();
        if (std::abs(j.determinant()) < 1e-14) {
            return false;
        }
        Eigen::Vector2d step = j.inverse() * Eigen::Vector2d(r.real(), r.imag());
        // Damp large steps so the iteration stays on one branch.
        const double len = step.norm();
        if (len > 0.5) {
            step *= 0.5 / len;
        }
        phi -= step(0);
        varphi -= step(1);
    }
    return std::abs(residual_complex(alpha, k, phi, varphi)) <= 1e-13;
}

/// Closed-form solution: with β = (2k+1)α, cos ϕ = −cot(2α)cot(β) and e^{iφ} = 1 − cos β/(cos α · z),
/// z = sin α sin β e^{iϕ} + cos α cos β.
std::pair<double, double> closed_form_phases(double alpha, unsigned k) {
    const double beta = (2.0 * k + 1) * alpha;
    const double c = std::clamp(-std::cos(2 * alpha) * std::cos(beta) / (std::sin(2 * alpha) * std::sin(beta)), -1.0, 1.0);
    const double varphi = std::acos(c);
    const Complex z = std::sin(alpha) * std::sin(beta) * std::polar(1.0, varphi) + std::cos(alpha) * std::cos(beta);
    const Complex e = 1.0 - std::cos(beta) / (std::cos(alpha) * z);
    return {std::arg(e), varphi};
}

double wrap(double x) {
    return std::remainder(x, 2 * kPi);
}

AAResult run_schedule(const AAProblem &problem, const AAInstance &instance) {
    const bool has_psi2 = std::cos(instance.alpha) > 1e-12;
    std::optional<StateVector> psi2;
    if (has_psi2) {
        psi2 = problem.psi2();
    }
    AAResult result;
    result.state = problem.psi;
    result.instance = instance;
    auto track = [&](const StateVector &s) {
        double in_span = std::norm(inner_product(problem.psi1, s));
        if (psi2) {
            in_span += std::norm(inner_product(*psi2, s));
        }
        result.max_leakage = std::max(result.max_leakage, std::max(0.0, 1 - in_span));
    };
    for (unsigned i = 0; i < instance.floor_m; ++i) {
        result.state = apply_q(problem, result.state, kPi, kPi);
        ++result.iterations;
        track(result.state);
    }
    if (!instance.integer) {
        result.state = apply_q(problem, result.state, instance.phi_star, instance.varphi_star);
        ++result.iterations;
        track(result.state);
    }
    result.infidelity = infidelity(problem.psi1, result.state);
    return result;
}

std::vector<std::pair<double, double>> schedule_phases(const AAInstance &instance) {
    std::vector<std::pair<double, double>> phases;
    if (instance.floor_m > 0 || instance.integer) {
        phases.emplace_back(kPi, kPi);
    }
    if (!instance.integer) {
        phases.emplace_back(instance.phi_star, instance.varphi_star);
    }
    return phases;
}

}  // namespace

std::pair<double, double> final_step_residual(double alpha, unsigned k, double phi, double varphi) {
    Complex r = residual_complex(alpha, k, phi, varphi);
    return {r.real(), r.imag()};
}

AAInstance AAInstance::from_alpha(double alpha) {
    if (!(alpha > 0 && alpha <= kPi / 2 + 1e-15)) {
        throw std::invalid_argument("alpha must lie in (0, pi/2]");
    }
    AAInstance inst;
    inst.alpha = alpha;
    inst.m_star = kPi / (4 * alpha) - 0.5;
    const double nearest = std::round(inst.m_star);
    inst.integer = std::abs(inst.m_star - nearest) <= 1e-9;
    inst.floor_m = static_cast<unsigned>(inst.integer ? nearest : std::floor(inst.m_star));
    if (!inst.integer) {
        double phi = kPi, varphi = kPi;
        if (!newton(alpha, inst.floor_m, phi, varphi)) {
            std::tie(phi, varphi) = closed_form_phases(alpha, inst.floor_m);
            if (!newton(alpha, inst.floor_m, phi, varphi)) {
                throw std::runtime_error("final-step phase solve did not converge");
            }
        }
        inst.phi_star = wrap(phi);
        inst.varphi_star = wrap(varphi);
    }
    return inst;
}

AAProblem AAProblem::from_states(StateVector psi, StateVector psi1, PhaseOracle s1, PhaseOracle s2) {
    const Complex ov = inner_product(psi1, psi);
    if (std::abs(ov) < 1e-14) {
        throw std::invalid_argument("initial state has no overlap with the target");
    }
    const Complex rephase = ov / std::abs(ov);
    // ψ1 ← e^{i arg ov} ψ1, so ⟨ψ1|ψ⟩ = |ov|.
    auto rotated = combine(rephase, psi1, 0.0, psi1);
    return AAProblem{std::move(psi), std::move(rotated), std::move(s1), std::move(s2)};
}

double AAProblem::alpha() const {
    return std::asin(std::clamp(std::abs(inner_product(psi1, psi)), 0.0, 1.0));
}

StateVector AAProblem::psi2() const {
    const double a = alpha();
    if (std::cos(a) < 1e-12) {
        throw std::logic_error("psi is already the target; psi2 is undefined");
    }
    return combine(1.0 / std::cos(a), psi, -std::tan(a), psi1);
}

StateVector AAProblem::psi_tilde() const {
    const double a = alpha();
    return combine(std::cos(a), psi1, -std::sin(a), psi2());
}

StateVector apply_q(const AAProblem &problem, const StateVector &state, double phi, double varphi) {
    StateVector out = problem.s1(problem.s2(state, varphi), phi);
    return combine(-1.0, out, 0.0, out);
}

void validate_exact_oracles(const AAProblem &problem, double tolerance) {
    const auto psi2 = problem.psi2();
    const auto tilde = problem.psi_tilde();
    for (double omega : {kPi, 0.7}) {
        const Complex e = std::polar(1.0, omega);
        const double errs[4] = {distance(problem.s1(problem.psi, omega), e, problem.psi),
                                distance(problem.s1(tilde, omega), 1.0, tilde),
                                distance(problem.s2(problem.psi1, omega), e, problem.psi1),
                                distance(problem.s2(psi2, omega), 1.0, psi2)};
        for (double err : errs) {
            if (err > tolerance) {
                throw std::invalid_argument("reflection oracle violates its eigen-relations by " + std::to_string(err));
            }
        }
    }
}

AAResult aa_exact(const AAProblem &problem) {
    const double a = problem.alpha();
    if (std::cos(a) > 1e-12) {
        validate_exact_oracles(problem);
    }
    return run_schedule(problem, AAInstance::from_alpha(a));
}

std::pair<double, double> measure_perturbations(const AAProblem &problem, const AAInstance &instance) {
    if (std::cos(instance.alpha) < 1e-12) {
        return {0, 0};
    }
    const auto psi2 = problem.psi2();
    const auto tilde = problem.psi_tilde();
    double e1 = 0, e2 = 0;
    for (auto [phi, varphi] : schedule_phases(instance)) {
        e1 = std::max(e1, distance(problem.s1(tilde, phi), 1.0, tilde));
        e2 = std::max(e2, distance(problem.s2(psi2, varphi), 1.0, psi2));
    }
    return {e1, e2};
}

ApproximateAAResult aa_approximate(const AAProblem &problem, double delta) {
    if (!(delta > 0 && delta < 1)) {
        throw std::invalid_argument("delta must lie in (0, 1)");
    }
    const auto instance = AAInstance::from_alpha(problem.alpha());
    for (auto [phi, varphi] : schedule_phases(instance)) {
        const double e1 = distance(problem.s1(problem.psi, phi), std::polar(1.0, phi), problem.psi);
        const double e2 = distance(problem.s2(problem.psi1, varphi), std::polar(1.0, varphi), problem.psi1);
        if (e1 > 1e-10 || e2 > 1e-10) {
            throw std::invalid_argument("perturbed oracles must keep psi and psi1 as exact eigenvectors");
        }
    }
    ApproximateAAResult out;
    std::tie(out.eps1, out.eps2) = measure_perturbations(problem, instance);
    if (out.eps1 >= delta / 2 || out.eps2 >= delta / 2) {
        throw std::invalid_argument("oracle perturbation is not below delta/2");
    }
    out.run = run_schedule(problem, instance);
    out.bound = 4.0 * (instance.floor_m + 1) * delta;
    out.within_bound = out.run.infidelity <= out.bound;
    return out;
}

void ImprovedDickeParams::validate() const {
    if (m < 1 || n < 4 * m) {
        throw std::invalid_argument("improved Dicke preparation needs M >= 1 and N >= 4M");
    }
    if (!(delta > 0 && delta < 1)) {
        throw std::invalid_argument("delta must lie in (0, 1)");
    }
}

double improved_dicke_poly(unsigned m) {
    const double ln43 = std::log(4.0 / 3);
    return 8 * kPi * std::exp(2.0) * std::sqrt(8 * kPi * m) /
           (m * ln43 * (1 - std::sqrt(8 / (3 * kPi * m))));
}

double improved_dicke_ell_real(unsigned m, double delta) {
    const double ln43 = std::log(4.0 / 3);
    const double inner = 2.0 * m * (std::log(2.0 * m) + 4.5) + std::log(improved_dicke_poly(m) / (delta * delta));
    return std::log2(inner / ln43);
}

double improved_dicke_iteration_bound(unsigned m) {
    return kPi * std::pow(8 * kPi * m, 0.25) / 2;
}

double improved_dicke_residual_budget(unsigned m, double delta) {
    return delta / (kPi * std::pow(8 * kPi * m, 0.25));
}

ImprovedDickeReport improved_dicke(const ImprovedDickeParams &params) {
    params.validate();
    const unsigned n = params.n, m = params.m;
    ImprovedDickeReport report;
    report.ell_formula = improved_dicke_ell_real(m, params.delta);
    unsigned ell = params.ell ? *params.ell : static_cast<unsigned>(std::ceil(report.ell_formula - 1e-12));
    const unsigned cap = exact_ell(n);
    if (ell >= cap) {
        ell = cap;
        report.exact_regime = true;
    }
    if (ell < 1) {
        throw std::invalid_argument("ell must be positive");
    }
    if (n + ell > StateVector::kMaxQubits) {
        throw std::invalid_argument("register of " + std::to_string(n + ell) + " qubits exceeds the simulator cap");
    }
    report.ell = ell;
    report.iteration_bound = improved_dicke_iteration_bound(m);
    report.residual_budget = improved_dicke_residual_budget(m, params.delta);

    const double p = double(m) / n;
    const Matrix v = product_rotation(p);
    const Matrix v_dag = v.adjoint();
    auto local = [n](StateVector s, const Matrix &u) {
        for (Qubit q = 0; q < n; ++q) {
            s.apply_single(q, u);
        }
        return s;
    };
    PhaseOracle t1 = [=](const StateVector &s, double omega) {
        return local(partial_sign_flip(local(s, v_dag), ell, 0, omega).state, v);
    };
    PhaseOracle t2 = [=](const StateVector &s, double omega) { return partial_sign_flip(s, ell, m, omega).state; };

    const auto theta_state = local(StateVector(n), v);
    const auto target = make_dicke_state(n, m);
    const auto problem = AAProblem::from_states(theta_state, target, t1, t2);
    const auto instance = AAInstance::from_alpha(problem.alpha());
    std::tie(report.eps1, report.eps2) = measure_perturbations(problem, instance);
    auto run = run_schedule(problem, instance);
    report.state = std::move(run.state);
    report.infidelity = run.infidelity;
    report.iterations = run.iterations;

    ResourceLedger &ledger = report.ledger;
    std::vector<std::vector<Qubit>> layer;
    for (Qubit q = 0; q < n; ++q) {
        layer.push_back({q});
    }
    ledger.record(LayerEvent::unitary("V: prepare the rotated product state", layer));
    const auto flip = partial_sign_flip_ledger(n, ell);
    for (unsigned i = 0; i < run.iterations; ++i) {
        ledger.append(flip);
        ledger.record(LayerEvent::unitary("V dagger", layer));
        ledger.append(flip);
        ledger.record(LayerEvent::unitary("V", layer));
    }
    ledger.ancillas_per_site = flip.ancillas_per_site;
    ledger.extra_ancillas = ell;

    report.bound_checks.push_back(BoundCheck::at_most("infidelity <= 4 delta", report.infidelity, 4 * params.delta));
    report.bound_checks.push_back(BoundCheck::at_most("iterations <= pi (8 pi M)^(1/4) / 2", report.iterations,
                                                      report.iteration_bound));
    if (!params.ell || report.exact_regime) {
        report.bound_checks.push_back(
            BoundCheck::at_most("eps1 <= delta / (pi (8 pi M)^(1/4))", report.eps1, report.residual_budget));
        report.bound_checks.push_back(
            BoundCheck::at_most("eps2 <= delta / (pi (8 pi M)^(1/4))", report.eps2, report.residual_budget));
    }
    // Approximate-amplification bound at the smallest admissible δ' = 2 max(eps1, eps2).
    const double delta_min = 2 * std::max(report.eps1, report.eps2);
    report.bound_checks.push_back(BoundCheck::at_most("infidelity <= 4 (floor(m*) + 1) * 2 max(eps1, eps2)",
                                                      report.infidelity,
                                                      4.0 * (instance.floor_m + 1) * delta_min + 1e-12));
    return report;
}

std::vector<Complex> sector_coefficients(unsigned n, unsigned m, double theta) {
    if (m > n) {
        throw std::invalid_argument("excitation number exceeds site count");
    }
    const double s_th = std::sin(theta), c_th = std::cos(theta);
    const double log_s = std::log(std::abs(s_th)), log_c = std::log(std::abs(c_th));
    auto power = [](double log_base, double base, unsigned k, double &log_acc, int &sign) {
        if (k == 0) {
            return true;
        }
        if (base == 0) {
            return false;
        }
        log_acc += k * log_base;
        if (base < 0 && k % 2 == 1) {
            sign = -sign;
        }
        return true;
    };
    std::vector<Complex> c(n + 1, 0.0);
    for (unsigned s = 0; s <= n; ++s) {
        const double pref = 0.5 * (std::lgamma(s + 1.0) + std::lgamma(n - s + 1.0) - std::lgamma(m + 1.0) -
                                   std::lgamma(n - m + 1.0));
        std::vector<std::pair<double, int>> terms;
        for (unsigned e = 0; e <= m; ++e) {
            if (s < e || s - e > n - m) {
                continue;
            }
            const unsigned f = s - e;
            double log_t = log_binomial(m, e) + log_binomial(n - m, f);
            int sign = f % 2 == 1 ? -1 : 1;
            // sin^{M−e} cos^{e} from the excited sites, cos^{N−M−f} (−sin)^{f} from the empty ones.
            if (!power(log_s, s_th, m - e + f, log_t, sign) || !power(log_c, c_th, e + (n - m - f), log_t, sign)) {
                continue;
            }
            terms.emplace_back(log_t, sign);
        }
        if (terms.empty()) {
            continue;
        }
        double top = -INFINITY;
        for (auto &t : terms) {
            top = std::max(top, t.first);
        }
        double acc = 0;
        for (auto &t : terms) {
            acc += t.second * std::exp(t.first - top);
        }
        c[s] = acc * std::exp(pref + top);
    }
    return c;
}

double sector_tail(const std::vector<Complex> &c, unsigned s) {
    double total = 0;
    for (std::size_t k = s; k < c.size(); ++k) {
        total += std::norm(c[k]);
    }
    return total;
}

double sector_tail_bound(unsigned m, unsigned s) {
    if (m < 1) {
        throw std::invalid_argument("tail bound needs M >= 1");
    }
    const double ln43 = std::log(4.0 / 3);
    return 2 * std::exp(2.0) / (m * kPi * ln43) *
           std::exp(-(s - 1.0) * ln43 + 2.0 * m * (std::log(2.0 * m) + 4.5));
}

}  // namespace lprep
