#include "invp/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "invp/numerics.hpp"

namespace invp {

PowerSums::PowerSums(std::span<const double> d) : n(d.size()) {
  for (double e : d) {
    double pw = 1.0;
    for (std::size_t p = 0; p < t.size(); ++p) {
      t[p] += pw;
      pw *= e;
    }
  }
}

double power_sum(std::span<const double> d, int p) {
  if (p < 1) throw ValidationError("power sum order must be >= 1");
  double s = 0.0;
  for (double e : d) {
    double pw = e;
    for (int k = 1; k < p; ++k) pw *= e;
    s += pw;
  }
  return s;
}

double jarque_bera(std::span<const double> d) {
  const PowerSums s(d);
  const double n = static_cast<double>(d.size());
  const double kurt = n * s[4] - 3.0;
  return n * (n * s[3] * s[3] / 6.0 + kurt * kurt / 24.0);
}

std::optional<double> try_inv_distortion_power_sum(std::span<const double> d, int p) {
  if (p < 2) throw ValidationError("inverse distortion needs power-sum order p >= 2");
  const double n = static_cast<double>(d.size());
  const double t_p = power_sum(d, p);
  const double t_pm1 = power_sum(d, p - 1);
  const double t_2pm2 = power_sum(d, 2 * p - 2);
  const double bracket = t_2pm2 - t_pm1 * t_pm1 / n - t_p * t_p;
  // T_2 is identically 1 on the sphere; its bracket is zero up to rounding.
  if (!(bracket > 1e-14)) return std::nullopt;
  return p * std::sqrt(bracket);
}

double inv_distortion_power_sum(std::span<const double> d, int p) {
  if (auto v = try_inv_distortion_power_sum(d, p)) return *v;
  throw NumericalError("singular fiber point");
}

std::optional<double> try_inv_distortion_jarque_bera(std::span<const double> d) {
  const PowerSums s(d);
  const double n = static_cast<double>(d.size());
  const double t3 = s[3], t4 = s[4], t5 = s[5], t6 = s[6];
  const double alpha = n * t4 / 3.0 - 1.0;
  const double mixed = t3 * t3 + n * t4 * t4 / 3.0 - t4;
  const double bracket = alpha * alpha * t6 + 2.0 * alpha * t3 * t5 - mixed * mixed +
                         t3 * t3 * t4 - n * t3 * t3 * t4 * t4 / 9.0;
  // Zero at the minimum JB = 0; rounding leaves a residue near 1e-16.
  if (!(bracket > 1e-14)) return std::nullopt;
  return n * n * std::sqrt(bracket);
}

double inv_distortion_jarque_bera(std::span<const double> d) {
  if (auto v = try_inv_distortion_jarque_bera(d)) return *v;
  throw NumericalError("singular fiber point");
}

std::optional<double> try_inv_distortion_t3t4(std::span<const double> d) {
  // Projected gradients g3 = P(3 d^2), g4 = P(4 d^3) with
  // P = I - 11'/n - dd'.
  const PowerSums s(d);
  const double n = static_cast<double>(d.size());
  const double g33 = 9.0 * (s[4] - 1.0 / n - s[3] * s[3]);
  const double g44 = 16.0 * (s[6] - s[3] * s[3] / n - s[4] * s[4]);
  const double g34 = 12.0 * (s[5] - s[3] / n - s[3] * s[4]);
  const double det = g33 * g44 - g34 * g34;
  if (!(det > 0.0)) return std::nullopt;
  return std::sqrt(det);
}

StatisticDef StatisticDef::on_direction(
    std::string name, std::size_t dim_out,
    std::function<void(std::span<const double>, std::span<double>)> on_direction) {
  StatisticDef def;
  def.name = std::move(name);
  def.dim_out = dim_out;
  def.eval = [fn = std::move(on_direction)](std::span<const double> x, std::span<double> out) {
    double small[64];
    std::vector<double> large;
    std::span<double> d;
    if (x.size() <= 64) {
      d = {small, x.size()};
    } else {
      large.resize(x.size());
      d = large;
    }
    if (!unit_direction(x, d)) throw NumericalError("composed statistic at a degenerate point");
    fn(d, out);
  };
  return def;
}

StatisticDef StatisticDef::power_sum(int p) {
  return on_direction("T" + std::to_string(p), 1,
                      [p](std::span<const double> d, std::span<double> out) {
                        out[0] = invp::power_sum(d, p);
                      });
}

StatisticDef StatisticDef::jarque_bera() {
  return on_direction("jb", 1, [](std::span<const double> d, std::span<double> out) {
    out[0] = invp::jarque_bera(d);
  });
}

StatisticDef StatisticDef::t3t4() {
  return on_direction("t3t4", 2, [](std::span<const double> d, std::span<double> out) {
    const PowerSums s(d);
    out[0] = s[3];
    out[1] = s[4];
  });
}

StatisticDef StatisticDef::shapiro_wilk(std::size_t n) {
  auto coef = std::make_shared<const std::vector<double>>(shapiro_wilk_coefficients(n));
  return on_direction("sw", 1, [coef](std::span<const double> d, std::span<double> out) {
    out[0] = invp::shapiro_wilk(d, *coef);
  });
}

double generic_inverse_distortion(const StatisticDef& stat, std::span<const double> x,
                                  double step) {
  const std::size_t n = x.size();
  const std::size_t m = stat.dim_out;
  if (m < 1 || m > 2) throw ValidationError("statistics must have dim_out 1 or 2");
  if (!(step > 0.0)) throw ValidationError("finite-difference step must be positive");
  std::vector<double> pt(x.begin(), x.end());
  std::vector<double> grad(m * n);
  std::array<double, 2> plus{};
  std::array<double, 2> minus{};
  for (std::size_t j = 0; j < n; ++j) {
    const double h = step * (1.0 + std::abs(x[j]));
    pt[j] = x[j] + h;
    stat.eval(pt, std::span<double>(plus.data(), m));
    pt[j] = x[j] - h;
    stat.eval(pt, std::span<double>(minus.data(), m));
    pt[j] = x[j];
    // Use the realized step so the difference quotient is exact in x.
    const double span = (x[j] + h) - (x[j] - h);
    for (std::size_t k = 0; k < m; ++k) {
      const double g = (plus[k] - minus[k]) / span;
      if (!std::isfinite(g)) throw NumericalError("non-finite finite difference in " + stat.name);
      grad[k * n + j] = g;
    }
  }
  auto dot = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += grad[a * n + j] * grad[b * n + j];
    return s;
  };
  if (m == 1) return std::sqrt(dot(0, 0));
  const double det = dot(0, 0) * dot(1, 1) - dot(0, 1) * dot(0, 1);
  return std::sqrt(std::abs(det));
}

std::vector<double> shapiro_wilk_coefficients(std::size_t n) {
  if (n < 3 || n > 5000) throw ValidationError("Shapiro-Wilk requires 3 <= n <= 5000");
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
    return a;
  }
  static constexpr std::array<double, 6> c1{0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static constexpr std::array<double, 6> c2{0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  auto poly = [](const std::array<double, 6>& c, double x) {
    double r = c[5];
    for (int i = 4; i >= 0; --i) r = r * x + c[static_cast<std::size_t>(i)];
    return r;
  };
  const double an = static_cast<double>(n);
  std::vector<double> m(half);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    m[i] = num::normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
    summ2 += m[i] * m[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = poly(c1, rsn) - m[0] / ssumm2;
  std::size_t first_plain;
  double fac;
  if (n > 5) {
    first_plain = 2;
    const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                    (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
    a[1] = a2;
  } else {
    first_plain = 1;
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
  }
  a[0] = a1;
  for (std::size_t i = first_plain; i < half; ++i) a[i] = -m[i] / fac;
  return a;
}

double shapiro_wilk(std::span<const double> d, std::span<const double> coefficients) {
  const std::size_t n = d.size();
  if (coefficients.size() != n / 2) throw ValidationError("coefficient count does not match n");
  double small[64];
  std::vector<double> large;
  std::span<double> sorted;
  if (n <= 64) {
    sorted = {small, n};
  } else {
    large.resize(n);
    sorted = large;
  }
  std::copy(d.begin(), d.end(), sorted.begin());
  std::sort(sorted.begin(), sorted.end());
  double num = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    num += coefficients[i] * (sorted[n - 1 - i] - sorted[i]);
  }
  double ss = 0.0;
  for (double e : d) ss += e * e;
  return std::min(1.0, num * num / ss);
}

double shapiro_wilk(const Sample& x) {
  const auto d = standardize(x);
  const auto coef = shapiro_wilk_coefficients(x.size());
  return shapiro_wilk(d.values(), coef);
}

}  // namespace invp
