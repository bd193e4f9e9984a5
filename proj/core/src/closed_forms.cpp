#include "invp/closed_forms.hpp"

#include <cmath>
#include <string>

#include "invp/core.hpp"
#include "invp/numerics.hpp"

namespace invp {

namespace {

constexpr double kRootTol = 1e-12;

double log_g(double e, double t) { return e * std::log(t) - 0.5 * t; }

// Bisection on [lo, hi] for log_g = level; the endpoints straddle the level.
double bisect(double e, double level, double lo, double hi) {
  const bool lo_below = log_g(e, lo) < level;
  for (int it = 0; it < 400 && hi - lo > kRootTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((log_g(e, mid) < level) == lo_below) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double mean_stat_pvalue(double xbar0, int n) {
  if (n < 1) throw ValidationError("mean statistic needs n >= 1");
  if (!std::isfinite(xbar0)) throw ValidationError("observed mean must be finite");
  return std::erfc(std::sqrt(static_cast<double>(n)) * std::abs(xbar0) / std::sqrt(2.0));
}

LevelSetPValue chisq_level_set(int k, double exponent, double t0) {
  if (k < 1) throw ValidationError("chi-square degrees of freedom must be >= 1");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw ValidationError("t0 must be a positive finite number");
  const double dk = static_cast<double>(k);
  if (exponent <= 0.0) return {num::chisq_sf(dk, t0), 0.0, t0};

  const double mode = 2.0 * exponent;
  if (t0 == mode) return {1.0, mode, mode};
  const double level = log_g(exponent, t0);
  LevelSetPValue r;
  if (t0 < mode) {
    r.a = t0;
    double lo = mode;
    double hi = 2.0 * mode;
    int guard = 0;
    while (!(log_g(exponent, hi) < level)) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 1100 || !std::isfinite(hi)) throw NumericalError("cannot bracket right root of the level set");
    }
    r.b = bisect(exponent, level, lo, hi);
  } else {
    r.b = t0;
    double hi = mode;
    double lo = 0.5 * mode;
    int guard = 0;
    while (!(log_g(exponent, lo) < level)) {
      hi = lo;
      lo *= 0.5;
      if (++guard > 1100 || !(lo > 0.0)) throw NumericalError("cannot bracket left root of the level set");
    }
    r.a = bisect(exponent, level, lo, hi);
  }
  r.p = num::chisq_cdf(dk, r.a) + num::chisq_sf(dk, r.b);
  if (r.p > 1.0) r.p = 1.0;
  return r;
}

double chisq_invariant_pvalue(int k, double t0) {
  return chisq_level_set(k, 0.5 * (k - 1), t0).p;
}

double chisq_measured_pvalue(int k, double t0) {
  return chisq_level_set(k, 0.5 * k - 1.0, t0).p;
}

double jb_asymptotic_pvalue(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("statistic must be a nonnegative finite number");
  return std::exp(-0.5 * t);
}

}  // namespace invp
