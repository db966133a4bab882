#pragma once

#include <string>
#include <vector>

namespace lprep {

/// ln C(n, k) via lgamma; −inf for k > n.
double log_binomial(unsigned n, unsigned k);
/// C(n, e) p^e (1−p)^{n−e}, evaluated in log space. Handles p ∈ {0, 1}.
double binomial_pmf(unsigned n, unsigned e, double p);
/// Σ_{e ≥ k} binomial_pmf(n, e, p).
double binomial_upper_tail(unsigned n, unsigned k, double p);
/// Σ_{e ≡ residue (mod 2^ell)} binomial_pmf(n, e, p).
double residue_class_probability(unsigned n, double p, unsigned residue, unsigned ell);

/// D(a‖p) = a ln(a/p) + (1−a) ln((1−a)/(1−p)), with 0·ln 0 = 0.
double relative_entropy(double a, double p);
/// exp[−n·D(k/n ‖ p)], the Chernoff bound on Pr[e ≥ k] for k ≥ n·p.
double chernoff_upper_tail(unsigned n, unsigned k, double p);

/// ½·(n / (2π m (n−m)))^{1/2}; the upper Stirling bound is four times this.
double stirling_lower(unsigned n, unsigned m);
double stirling_upper(unsigned n, unsigned m);

/// One checked inequality lhs ≤ rhs (or lhs ≥ rhs).
struct BoundCheck {
    std::string name;
    double lhs;
    double rhs;
    std::string relation;
    bool satisfied;

    static BoundCheck at_most(std::string name, double lhs, double rhs);
    static BoundCheck at_least(std::string name, double lhs, double rhs);
};

bool all_satisfied(const std::vector<BoundCheck> &checks);

}  // namespace lprep
