#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "invp/core.hpp"

namespace invp {

/// Monte-Carlo draws of a statistic with inverse-distortion weights J^{-1}.
struct WeightedDraws {
  std::size_t dim = 1;       ///< 1, or 2 for a pair statistic
  std::vector<double> t;     ///< size() * dim values, row-major
  std::vector<double> w;     ///< one nonnegative weight per draw
  std::size_t singular_count = 0;

  [[nodiscard]] std::size_t size() const noexcept { return w.size(); }
  [[nodiscard]] double at(std::size_t i, std::size_t axis = 0) const { return t[i * dim + axis]; }

  /// Throws ValidationError on shape or weight problems and NumericalError
  /// when more than 0.1% of the simulated points were singular.
  void validate() const;
};

/// Maximum fraction of singular draws tolerated by any Monte-Carlo run.
inline constexpr double kMaxSingularFraction = 0.001;

/// Silverman's reference rule 0.9 min(sd, IQR/1.34) N^{-1/5}, per axis.
/// When the IQR vanishes but the sd does not, the sd alone is used.
[[nodiscard]] std::vector<double> bandwidth_select(const WeightedDraws& draws);

/// Axis-aligned uniform grid; `axes[1]` is empty for one-dimensional curves.
struct Grid {
  std::vector<double> axes[2];

  [[nodiscard]] std::size_t dim() const noexcept { return axes[1].empty() ? 1 : 2; }
  [[nodiscard]] std::size_t size() const noexcept {
    return axes[0].size() * (axes[1].empty() ? 1 : axes[1].size());
  }
  static Grid uniform(double lo, double hi, std::size_t count);
  static Grid uniform2(double lo1, double hi1, std::size_t n1, double lo2, double hi2, std::size_t n2);
};

/// Evaluation grid for KDE-based P-values: the hull of the draws widened by
/// 4 bandwidths, with at least `min_points` per axis and spacing no coarser
/// than h/4 (1-D) or h/2 (2-D), so linear interpolation stays well inside
/// the kernel resolution whatever the spread of the statistic.
[[nodiscard]] Grid evaluation_grid(const WeightedDraws& draws, std::span<const double> bandwidth,
                                   std::size_t min_points);

/// Plain and corrected density estimates on a grid. In 2-D, values are
/// stored with the first axis varying fastest.
struct DensityCurve {
  Grid grid;
  std::vector<double> f_plain;
  std::vector<double> f_star;
  std::vector<double> bandwidth;

  /// Trapezoid integral of f_plain (1-D) or its tensor analogue (2-D).
  [[nodiscard]] double plain_mass() const;
};

/// f_plain(t) = N^{-1} sum K_h(t - t_i), f_star(t) = N^{-1} sum w_i K_h(t - t_i),
/// Gaussian kernel (product kernel in 2-D), truncated at 8 bandwidths.
/// Each grid value is accumulated in a fixed draw order, so the result does
/// not depend on `workers`.
[[nodiscard]] DensityCurve weighted_kde(const WeightedDraws& draws, std::span<const double> bandwidth,
                                        const Grid& grid, std::size_t workers = 1);

/// Density values at a point: interpolated on the curve inside the grid,
/// summed directly over the draws outside it.
struct DensityValue {
  double plain = 0.0;
  double star = 0.0;
};
[[nodiscard]] DensityValue evaluate_density(const WeightedDraws& draws, const DensityCurve& curve,
                                            std::span<const double> t);

/// Curve values at every draw (self-term included).
struct DensityAtDraws {
  std::vector<double> plain;
  std::vector<double> star;
};
[[nodiscard]] DensityAtDraws evaluate_at_draws(const WeightedDraws& draws, const DensityCurve& curve);

struct McPValue {
  double p = 0.0;
  double se = 0.0;
};

/// Fraction of values <= level, with binomial standard error.
[[nodiscard]] McPValue fraction_at_most(std::span<const double> values, double level);

/// N^{-1} sum 1[f*(t_i) <= f*(t0)].
[[nodiscard]] McPValue invariant_pvalue_mc(const WeightedDraws& draws, const DensityCurve& curve,
                                           std::span<const double> t0);
/// N^{-1} sum 1[f(t_i) <= f(t0)] with the uncorrected estimate.
[[nodiscard]] McPValue plain_pvalue_mc(const WeightedDraws& draws, const DensityCurve& curve,
                                       std::span<const double> t0);
/// N^{-1} sum 1[t_i >= t0]; one-dimensional statistics only.
[[nodiscard]] McPValue tail_pvalue_mc(const WeightedDraws& draws, double t0);

inline McPValue invariant_pvalue_mc(const WeightedDraws& draws, const DensityCurve& curve, double t0) {
  return invariant_pvalue_mc(draws, curve, std::span<const double>(&t0, 1));
}
inline McPValue plain_pvalue_mc(const WeightedDraws& draws, const DensityCurve& curve, double t0) {
  return plain_pvalue_mc(draws, curve, std::span<const double>(&t0, 1));
}

/// CSV text: `t,f_plain,f_star` or `t1,t2,f_plain,f_star`, shortest round-trip numbers.
[[nodiscard]] std::string density_csv(const DensityCurve& curve);

/// Resamples a curve onto a coarser uniform grid (used for plot output).
[[nodiscard]] DensityCurve resample(const WeightedDraws& draws, const DensityCurve& curve,
                                    const Grid& grid);

}  // namespace invp
