#pragma once

namespace reachplan {

// Regularized lower incomplete gamma function P(a, x), a > 0, x >= 0.
// Series expansion for x < a + 1, continued fraction otherwise.
double gamma_p(double a, double x);

// Chi-square CDF with `dof` degrees of freedom.
double chi_square_cdf(double x, int dof);

// Inverse chi-square CDF via bracketed bisection/secant on gamma_p.
// p in (0, 1), dof >= 1.
double chi_square_quantile(double p, int dof);

// Confidence preset matching the per-axis three-sigma probability mass,
// erf(3/sqrt(2)). Used to label "3-sigma" confidence sets regardless of
// the set dimension; the chi-square quantile at this mass supplies the
// actual scaling.
inline constexpr double kThreeSigmaConfidence = 0.99730020393673979;

}  // namespace reachplan
