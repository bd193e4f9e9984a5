#pragma once

#include <functional>

namespace invp {

/// Two-sided P-value 2(1 - Phi(sqrt(n) |xbar0|)) for the mean of n N(0, 1)
/// observations.
[[nodiscard]] double mean_stat_pvalue(double xbar0, int n);

/// Result of a level-set computation P(g(T) <= g(t0)) for unimodal g.
struct LevelSetPValue {
  double p = 1.0;
  double a = 0.0;  ///< left root of g(t) = g(t0) (0 when g is decreasing)
  double b = 0.0;  ///< right root
};

/// P(g(T) <= g(t0)) for T ~ chi^2(k) and log g(t) = e log t - t/2.
/// For e <= 0, g is decreasing and the result is the survival function.
/// For e > 0 the two roots around the mode 2e are found by bisection
/// (absolute tolerance 1e-12) after geometric bracket expansion.
[[nodiscard]] LevelSetPValue chisq_level_set(int k, double exponent, double t0);

/// Comparison function t^{(k-1)/2} e^{-t/2}.
[[nodiscard]] double chisq_invariant_pvalue(int k, double t0);
/// Comparison function t^{k/2-1} e^{-t/2} (the chi^2(k) density itself).
[[nodiscard]] double chisq_measured_pvalue(int k, double t0);

/// Asymptotic chi^2(2) tail e^{-t/2} for the Jarque-Bera statistic.
[[nodiscard]] double jb_asymptotic_pvalue(double t);

}  // namespace invp
