#include "lprep/bounds.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lprep {

double log_binomial(unsigned n, unsigned k) {
    if (k > n) {
        return -std::numeric_limits<double>::infinity();
    }
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial_pmf(unsigned n, unsigned e, double p) {
    if (p < 0 || p > 1) {
        throw std::invalid_argument("probability outside [0, 1]");
    }
    if (e > n) {
        return 0;
    }
    if (p == 0) {
        return e == 0 ? 1 : 0;
    }
    if (p == 1) {
        return e == n ? 1 : 0;
    }
    return std::exp(log_binomial(n, e) + e * std::log(p) + (n - e) * std::log1p(-p));
}

double binomial_upper_tail(unsigned n, unsigned k, double p) {
    double total = 0;
    for (unsigned e = k; e <= n; ++e) {
        total += binomial_pmf(n, e, p);
    }
    return total;
}

double residue_class_probability(unsigned n, double p, unsigned residue, unsigned ell) {
    const unsigned d = 1u << ell;
    double total = 0;
    for (unsigned e = residue % d; e <= n; e += d) {
        total += binomial_pmf(n, e, p);
    }
    return total;
}

double relative_entropy(double a, double p) {
    auto term = [](double x, double y) {
        if (x == 0) {
            return 0.0;
        }
        if (y == 0) {
            return std::numeric_limits<double>::infinity();
        }
        return x * std::log(x / y);
    };
    return term(a, p) + term(1 - a, 1 - p);
}

double chernoff_upper_tail(unsigned n, unsigned k, double p) {
    const double a = static_cast<double>(k) / n;
    if (a < p) {
        throw std::invalid_argument("Chernoff upper tail requires k >= n p");
    }
    if (a > 1) {
        return 0;
    }
    return std::exp(-static_cast<double>(n) * relative_entropy(a, p));
}

double stirling_lower(unsigned n, unsigned m) {
    if (m == 0 || m >= n) {
        throw std::invalid_argument("Stirling sandwich needs 0 < m < n");
    }
    return 0.5 * std::sqrt(n / (2 * std::numbers::pi * m * double(n - m)));
}

double stirling_upper(unsigned n, unsigned m) {
    return 4 * stirling_lower(n, m);
}

BoundCheck BoundCheck::at_most(std::string name, double lhs, double rhs) {
    return BoundCheck{std::move(name), lhs, rhs, "<=", lhs <= rhs};
}

BoundCheck BoundCheck::at_least(std::string name, double lhs, double rhs) {
    return BoundCheck{std::move(name), lhs, rhs, ">=", lhs >= rhs};
}

bool all_satisfied(const std::vector<BoundCheck> &checks) {
    for (const auto &c : checks) {
        if (!c.satisfied) {
            return false;
        }
    }
    return true;
}

}  // namespace lprep
