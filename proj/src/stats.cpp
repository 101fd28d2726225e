#include "reachplan/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace reachplan {

namespace {

// Series representation, converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), better for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / 1e-30;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
    if (a <= 0.0) {
        throw std::invalid_argument("gamma_p: shape parameter must be positive");
    }
    if (x < 0.0) {
        throw std::invalid_argument("gamma_p: argument must be nonnegative");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (x < a + 1.0) {
        return gamma_p_series(a, x);
    }
    return 1.0 - gamma_q_cf(a, x);
}

double chi_square_cdf(double x, int dof) {
    if (dof < 1) {
        throw std::invalid_argument("chi_square_cdf: dof must be >= 1");
    }
    if (x <= 0.0) {
        return 0.0;
    }
    return gamma_p(0.5 * dof, 0.5 * x);
}

double chi_square_quantile(double p, int dof) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("chi_square_quantile: p must lie in (0,1)");
    }
    if (dof < 1) {
        throw std::invalid_argument("chi_square_quantile: dof must be >= 1");
    }
    // Bracket the root. The mean is dof, tails decay fast.
    double lo = 0.0;
    double hi = static_cast<double>(dof);
    while (chi_square_cdf(hi, dof) < p) {
        hi *= 2.0;
        if (hi > 1e9) {
            throw std::runtime_error("chi_square_quantile: bracket expansion failed");
        }
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (chi_square_cdf(mid, dof) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13 * (1.0 + hi)) {
            break;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace reachplan
