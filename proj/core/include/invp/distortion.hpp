#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invp/core.hpp"
#include "invp/sampler.hpp"

namespace invp {

/// Power sums T_p(d) = sum d_i^p for p = 0..8 (index p).
struct PowerSums {
  std::array<double, 9> t{};
  std::size_t n = 0;

  explicit PowerSums(std::span<const double> d);
  [[nodiscard]] double operator[](int p) const { return t[static_cast<std::size_t>(p)]; }
};

[[nodiscard]] double power_sum(std::span<const double> d, int p);
[[nodiscard]] inline double power_sum(const UnitResidual& d, int p) { return power_sum(d.values(), p); }

/// n (n T3^2 / 6 + (n T4 - 3)^2 / 24) with n = d.size().
[[nodiscard]] double jarque_bera(std::span<const double> d);
[[nodiscard]] inline double jarque_bera(const UnitResidual& d) { return jarque_bera(d.values()); }

// Inverse volume distortions J^{-1} of composed maps x -> T(d(x)), taken at
// r = |x - mean| = 1. The `try_` forms return nullopt at singular fiber
// points (vanishing Gram determinant); the plain forms throw NumericalError.

/// p (T_{2p-2} - T_{p-1}^2 / n - T_p^2)^{1/2}, for p >= 2.
[[nodiscard]] std::optional<double> try_inv_distortion_power_sum(std::span<const double> d, int p);
[[nodiscard]] double inv_distortion_power_sum(std::span<const double> d, int p);

/// n^2 [ (nT4/3 - 1)^2 T6 + 2 (nT4/3 - 1) T3 T5 - (T3^2 + nT4^2/3 - T4)^2
///       + T3^2 T4 - n T3^2 T4^2 / 9 ]^{1/2}
[[nodiscard]] std::optional<double> try_inv_distortion_jarque_bera(std::span<const double> d);
[[nodiscard]] double inv_distortion_jarque_bera(std::span<const double> d);

/// sqrt(det G) for the 2x2 Gram matrix of the projected gradients of
/// T3(d(x)) and T4(d(x)).
[[nodiscard]] std::optional<double> try_inv_distortion_t3t4(std::span<const double> d);

/// A discrepancy statistic evaluated on an ambient point x in R^n.
struct StatisticDef {
  std::string name;
  std::size_t dim_out = 1;  ///< 1 or 2
  std::function<void(std::span<const double> x, std::span<double> out)> eval;

  /// Wraps `on_direction` (a function of d) as the composed map x -> T(d(x)).
  static StatisticDef on_direction(
      std::string name, std::size_t dim_out,
      std::function<void(std::span<const double> d, std::span<double> out)> on_direction);

  static StatisticDef power_sum(int p);
  static StatisticDef jarque_bera();
  static StatisticDef t3t4();
  static StatisticDef shapiro_wilk(std::size_t n);
};

/// |det(dT dT')|^{1/2} from central differences with step
/// h_j = step * (1 + |x_j|). For dim_out = 1 this is the gradient norm.
[[nodiscard]] double generic_inverse_distortion(const StatisticDef& stat,
                                                std::span<const double> x, double step = 1e-5);

/// Label of the Shapiro-Wilk coefficient approximation, echoed in reports.
inline constexpr const char* kShapiroWilkMethod = "Royston (1995) AS R94 coefficients";

/// Antisymmetric-half coefficients a_1..a_{n/2} for the pairs
/// (x_(n+1-i) - x_(i)); 3 <= n <= 5000.
[[nodiscard]] std::vector<double> shapiro_wilk_coefficients(std::size_t n);

/// W for a point on the centered unit sphere: (sum a_i (d_(n+1-i) - d_(i)))^2.
[[nodiscard]] double shapiro_wilk(std::span<const double> d, std::span<const double> coefficients);

/// W of a sample (computed on its standardized direction).
[[nodiscard]] double shapiro_wilk(const Sample& x);

}  // namespace invp
