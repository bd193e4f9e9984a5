#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace invp {

/// A continuous density on the line.
///
/// `lo`/`hi` bound the true support (possibly infinite). `enum_lo`/`enum_hi`
/// are the finite limits used for enumeration; for unbounded supports they
/// cut off mass 1e-12 in total. `turning_points` lists interior modes and
/// antimodes in increasing order; the density is monotone between them.
struct Density1D {
  std::string name;
  std::function<double(double)> pdf;
  std::function<double(double)> cdf;  ///< optional; quadrature is used when empty
  std::function<double(double)> sf;   ///< optional; 1 - cdf is used when empty
  double lo = 0.0;
  double hi = 1.0;
  double enum_lo = 0.0;
  double enum_hi = 1.0;
  double center = 0.5;  ///< median; tails are measured from the nearer side
  std::vector<double> turning_points;

  static Density1D normal(double mean = 0.0, double sd = 1.0);
  static Density1D laplace(double location = 0.0, double scale = 1.0);
  static Density1D uniform(double a = 0.0, double b = 1.0);
  static Density1D exponential(double rate = 1.0);

  [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x <= hi; }

  /// P((a, b]) with both ends clipped to the support.
  [[nodiscard]] double mass(double a, double b) const;
};

/// Throws ValidationError unless the pdf is nonnegative on a probe grid and
/// integrates to 1 within 1e-6.
void validate_density(const Density1D& f);

/// Equal-width cells ((i-1)w + anchor, i w + anchor], i in Z.
struct Partition1D {
  double width = 1.0;
  double anchor = 0.0;

  [[nodiscard]] long long cell_index(double x) const;
  [[nodiscard]] double cell_lower(long long i) const { return anchor + (static_cast<double>(i) - 1.0) * width; }
  [[nodiscard]] double cell_upper(long long i) const { return anchor + static_cast<double>(i) * width; }
};

/// Probability of the partition cell containing x.
[[nodiscard]] double cell_probability(const Density1D& f, const Partition1D& partition, double x);

/// Discrete P-value of the measured (cell-valued) observation: total mass of
/// cells no more probable than the cell of x0. Mass beyond the enumeration
/// limits is counted when the outermost enumerated cell on that side
/// qualifies.
[[nodiscard]] double partition_pvalue(const Density1D& f, const Partition1D& partition, double x0);

/// P(f(X) <= f(x0)), from the level set of the pdf at f(x0).
[[nodiscard]] double continuous_density_pvalue(const Density1D& f, double x0);

struct ConvergenceRow {
  double width;
  double p_discrete;
  double p_continuous;
  double gap;
};

/// Partition P-values along nested refinements (each width an integer
/// divisor of the previous one), against the continuous limit.
[[nodiscard]] std::vector<ConvergenceRow> convergence_sweep(const Density1D& f, double x0,
                                                            const std::vector<double>& widths,
                                                            double anchor = 0.0);

/// CSV text with header `width,p_discrete,p_continuous,gap`.
[[nodiscard]] std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

/// Widths 2^-from .. 2^-to.
[[nodiscard]] std::vector<double> halving_widths(int from, int to);

}  // namespace invp
