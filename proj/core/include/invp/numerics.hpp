#pragma once

#include <cmath>
#include <functional>
#include <numbers>

namespace invp::num {

inline double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// cdf(-x) and sf(x) evaluate the same expression, so mirrored tail masses
// are bit-identical.
inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p);

double chisq_cdf(double k, double t);
double chisq_sf(double k, double t);
/// Upper quantile: the t with chisq_sf(k, t) = alpha.
double chisq_upper_quantile(double k, double alpha);

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

/// Globally adaptive 31-point Gauss-Kronrod on [a, b]; infinite bounds are
/// mapped to [0, 1). Throws NumericalError when the summed error estimate
/// stays above max(abs_tol, rel_tol * |value|) after 4000 subintervals.
Integral integrate(const std::function<double(double)>& f, double a, double b,
                   double rel_tol = 1e-10, double abs_tol = 0.0);

}  // namespace invp::num
