#ifndef PPFFM_SPECIAL_FUNCTIONS_HPP_
#define PPFFM_SPECIAL_FUNCTIONS_HPP_

// Scalar special functions backing the ISI densities and survival
// functions. Everything here is implemented from the standard series /
// continued-fraction algorithms; accuracy is ~1e-13 relative or better
// on the domains used (positive shape parameters up to ~1e3, arguments
// reachable from integrated intensities).

namespace ppffm {

inline constexpr double kPi = 3.14159265358979323846;

// ln Gamma(x), x > 0. Lanczos approximation (g = 7, 9 terms).
double log_gamma(double x);

// Regularized lower/upper incomplete gamma P(a, x), Q(a, x); a > 0, x >= 0.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// ln Q(a, x), stable for large x where Q underflows.
double log_gamma_q(double a, double x);

// Standard normal CDF and its log; the log stays finite far into the
// lower tail (asymptotic expansion below the erfc underflow point).
double norm_cdf(double x);
double log_norm_cdf(double x);

// Inverse-Gaussian distribution with mean mu and shape parameter 1.
double inverse_gaussian_cdf(double x, double mu);
double inverse_gaussian_log_pdf(double x, double mu);
// ln S(x) = ln(1 - CDF); computed in log space so the deep tail keeps
// relative accuracy instead of cancelling to zero.
double inverse_gaussian_log_survival(double x, double mu);

}  // namespace ppffm

#endif  // PPFFM_SPECIAL_FUNCTIONS_HPP_
