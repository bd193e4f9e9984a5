#pragma once

#include <string>
#include <vector>

#include "invp/core.hpp"
#include "invp/rng.hpp"

namespace invp {

enum class BaseFamily { normal, student_t, laplace, logistic };

/// Location-scale family x = mu 1 + sigma z with i.i.d. standard marginals.
struct LocScaleModel {
  BaseFamily family = BaseFamily::normal;
  double df = 0.0;  ///< degrees of freedom, student_t only

  static LocScaleModel normal() { return {BaseFamily::normal, 0.0}; }
  static LocScaleModel student_t(double df) { return {BaseFamily::student_t, df}; }
  static LocScaleModel laplace() { return {BaseFamily::laplace, 0.0}; }
  static LocScaleModel logistic() { return {BaseFamily::logistic, 0.0}; }

  /// Parses "normal", "laplace", "logistic" or "student_t(<df>)" / "t<df>".
  static LocScaleModel parse(const std::string& label);

  [[nodiscard]] std::string label() const;
  [[nodiscard]] double log_pdf(double z) const { return log_kernel(z) + log_norm(); }
  /// log_pdf without its constant term.
  [[nodiscard]] double log_kernel(double z) const;
  [[nodiscard]] double log_norm() const;
  /// sum_i log_kernel(a + c u_i), with fewer transcendental calls.
  [[nodiscard]] double log_kernel_sum(double a, double c, const std::vector<double>& u) const;
  [[nodiscard]] double pdf(double z) const;
  [[nodiscard]] double sample(StreamRng& rng) const;

  /// Checks df > 0 for student_t and that the marginal integrates to 1
  /// within 1e-8.
  void validate() const;
};

/// Standardized configuration u = (x - median) / (q3 - q1).
///
/// Quartiles are the medians of the lower and upper halves of the sorted
/// sample, the overall median excluded when n is odd. The ratio is formed in
/// extended precision and snapped to a 2^-32 lattice, then recentered and
/// rescaled so that median(u) = 0 and q3(u) - q1(u) = 1 hold to rounding;
/// the snap makes u bit-identical for x and a + c x (c > 0).
struct AncillaryU {
  std::vector<double> u;
};

/// Rejects n < 4 and a zero interquartile range.
[[nodiscard]] AncillaryU ancillary_u(const Sample& x);

/// Median and quartiles under the convention above.
struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};
[[nodiscard]] Quartiles quartiles(std::vector<double> values);

/// (2 pi)^{-(n-1)/2} n^{-1/2} exp(-(c^2/2)(|u|^2 - (1'u)^2/n)): the
/// integral over a of the standard normal product density at a 1 + c u.
[[nodiscard]] double normal_inner_closed_form(const std::vector<double>& u, double c);

/// Integral over a of prod f(a + c u_i) by adaptive quadrature.
[[nodiscard]] double inner_integral(const std::vector<double>& u, const LocScaleModel& model, double c);

/// f*_U(u) = int_0^inf int_R prod f(a + c u_i) da dc, the location-scale
/// corrected density of u up to a constant common to all u. The inner
/// integral is closed-form for the normal base; the outer one is adaptive
/// on [0, c_max], with c_max doubled until the last segment adds less than
/// 1e-11 of the total.
[[nodiscard]] double fstar_u(const AncillaryU& u, const LocScaleModel& model);

/// Values fstar_u(u_i) for n_sim simulated configurations of size n.
[[nodiscard]] std::vector<double> loc_scale_reference(std::size_t n, const LocScaleModel& model,
                                                      const MonteCarloConfig& config);

/// Default simulation size for this check.
inline constexpr std::size_t kLocScaleDefaultSims = 2000;

/// N^{-1} sum 1[fstar_u(u_i) <= fstar_u(u_0)] over datasets simulated from the
/// model at (mu, sigma) = (0, 1).
[[nodiscard]] PValueReport loc_scale_pvalue(const Sample& x0, const LocScaleModel& model,
                                            const MonteCarloConfig& config);

/// Same, against reference values from loc_scale_reference.
[[nodiscard]] PValueReport loc_scale_pvalue(const Sample& x0, const LocScaleModel& model,
                                            const MonteCarloConfig& config,
                                            const std::vector<double>& reference);

}  // namespace invp
