#pragma once

#include <string>
#include <utility>
#include <vector>

#include "invp/core.hpp"
#include "invp/estimate.hpp"

namespace invp {

enum class NormalStatistic { jb, t3t4, sw };

[[nodiscard]] std::string to_string(NormalStatistic s);
/// Accepts "jb", "t3t4" or "sw"; anything else is a ValidationError.
[[nodiscard]] NormalStatistic parse_normal_statistic(const std::string& name);

struct NormalCheckRequest {
  Sample data;
  NormalStatistic statistic = NormalStatistic::jb;
  MonteCarloConfig config;
};

/// Reference draws of a statistic over uniform directions in dimension n,
/// with inverse-distortion weights at r = 1. Singular draws are dropped and
/// counted.
[[nodiscard]] WeightedDraws simulate_statistic(NormalStatistic statistic, std::size_t n,
                                               const MonteCarloConfig& config);

/// Statistic value(s) at a point of the centered unit sphere.
[[nodiscard]] std::vector<double> statistic_value(NormalStatistic statistic,
                                                  std::span<const double> d);

/// Grid points per axis for 2-D density output.
inline constexpr std::size_t kDisplayGrid2D = 128;

struct NormalCheckResult {
  PValueReport report;
  DensityCurve curve;  ///< plot-resolution curve (grid_size points, or 128 x 128)
  WeightedDraws draws;
};

/// Conditional check of normality given the sufficient statistic (mean,
/// radius), carried out on the unit residual direction.
[[nodiscard]] NormalCheckResult check_normal(const NormalCheckRequest& request);

/// Same as check_normal, reusing reference draws already simulated for the
/// sample size and statistic of the request.
[[nodiscard]] NormalCheckResult check_normal(const NormalCheckRequest& request,
                                             const WeightedDraws& draws);

using Polyline = std::vector<std::pair<double, double>>;

/// Level set {f = level} of a function sampled on a 2-D grid (first axis
/// fastest), traced as polylines. Closed curves repeat their first point.
[[nodiscard]] std::vector<Polyline> marching_squares(const Grid& grid, const std::vector<double>& f,
                                                     double level);

struct AlphaContour {
  double alpha = 0.05;
  std::size_t n = 0;
  double level_star = 0.0;   ///< f* threshold whose sub-level set has mass alpha
  double level_plain = 0.0;  ///< same for the uncorrected density
  std::vector<Polyline> invariant;
  std::vector<Polyline> plain;
  Polyline jb_asymptotic;
  DensityCurve curve;  ///< display curve the contours were traced on
};

/// Level-alpha contours in the (T3, T4) plane: the corrected and uncorrected
/// density thresholds, plus the asymptotic Jarque-Bera curve
/// n (n T3^2/6 + (n T4 - 3)^2/24) = chi^2_2 upper alpha quantile.
/// Rejects alpha unless alpha * n_sim >= 10 and (1 - alpha) * n_sim >= 10.
[[nodiscard]] AlphaContour alpha_contour_t3t4(std::size_t n, double alpha,
                                              const MonteCarloConfig& config);

/// The asymptotic Jarque-Bera curve, `points` samples plus the closing point.
[[nodiscard]] Polyline jb_asymptotic_curve(std::size_t n, double alpha, std::size_t points = 256);

/// CSV text with header `curve_id,t3,t4`; ids are "invariant-<i>",
/// "plain-<i>" and "jb-asymptotic".
[[nodiscard]] std::string contour_csv(const AlphaContour& contour);

}  // namespace invp
