#include "invp/estimate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "invp/parallel.hpp"

namespace invp {

namespace {

constexpr double kCutoff = 8.0;  // kernel truncated at 8 bandwidths
constexpr std::size_t kMaxPoints1D = std::size_t{1} << 22;
constexpr std::size_t kMaxPoints2D = 2048;
constexpr std::size_t kBlock1D = 4096;
constexpr std::size_t kBlockRows2D = 16;

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<std::size_t> order_by_axis(const WeightedDraws& draws, std::size_t axis) {
  std::vector<std::size_t> order(draws.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return draws.at(a, axis) < draws.at(b, axis);
  });
  return order;
}

// Index range [first, last) of axis values within [lo, hi].
std::pair<std::size_t, std::size_t> axis_window(const std::vector<double>& axis, double lo, double hi) {
  const auto first = std::lower_bound(axis.begin(), axis.end(), lo) - axis.begin();
  const auto last = std::upper_bound(axis.begin(), axis.end(), hi) - axis.begin();
  return {static_cast<std::size_t>(first), static_cast<std::size_t>(std::max(first, last))};
}

// Locates t on an axis: index i and weight of axis[i+1]; false if outside.
bool locate(const std::vector<double>& axis, double t, std::size_t& i, double& frac) {
  if (axis.size() < 2 || !(t >= axis.front() && t <= axis.back())) return false;
  auto it = std::upper_bound(axis.begin(), axis.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - axis.begin());
  if (hi >= axis.size()) hi = axis.size() - 1;
  i = hi - 1;
  frac = (t - axis[i]) / (axis[hi] - axis[i]);
  return true;
}

double kernel_norm(std::span<const double> h, std::size_t n) {
  double norm = static_cast<double>(n);
  for (double hk : h) norm *= hk * std::sqrt(2.0 * std::numbers::pi);
  return 1.0 / norm;
}

DensityValue direct_density(const WeightedDraws& draws, std::span<const double> h,
                            std::span<const double> t) {
  DensityValue v;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    double e = 0.0;
    bool inside = true;
    for (std::size_t a = 0; a < draws.dim; ++a) {
      const double u = (t[a] - draws.at(i, a)) / h[a];
      if (std::abs(u) > kCutoff) {
        inside = false;
        break;
      }
      e += u * u;
    }
    if (!inside) continue;
    const double k = std::exp(-0.5 * e);
    v.plain += k;
    v.star += draws.w[i] * k;
  }
  const double norm = kernel_norm(h, draws.size());
  v.plain *= norm;
  v.star *= norm;
  return v;
}

}  // namespace

void WeightedDraws::validate() const {
  if (dim != 1 && dim != 2) throw ValidationError("draws must be one- or two-dimensional");
  if (t.size() != w.size() * dim) throw ValidationError("draw values and weights differ in length");
  if (w.empty()) throw ValidationError("no draws");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) {
      throw ValidationError("weight " + std::to_string(i) + " is negative or non-finite");
    }
  }
  for (double v : t) {
    if (!std::isfinite(v)) throw ValidationError("non-finite statistic value among draws");
  }
  const double total = static_cast<double>(w.size() + singular_count);
  if (static_cast<double>(singular_count) > kMaxSingularFraction * total) {
    throw NumericalError("too many singular fiber points: " + std::to_string(singular_count) +
                         " of " + std::to_string(w.size() + singular_count) + " draws");
  }
}

std::vector<double> bandwidth_select(const WeightedDraws& draws) {
  draws.validate();
  const std::size_t n = draws.size();
  if (n < 100) throw ValidationError("bandwidth selection needs at least 100 draws");
  std::vector<double> h(draws.dim);
  for (std::size_t a = 0; a < draws.dim; ++a) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = draws.at(i, a);
    const double mean = pairwise_sum(v) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double sd = std::sqrt(pairwise_sum(sq) / static_cast<double>(n - 1));
    std::sort(v.begin(), v.end());
    const double iqr = quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) throw ValidationError("draws have zero spread; bandwidth undefined");
    h[a] = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  }
  return h;
}

Grid Grid::uniform(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw ValidationError("grid needs two or more points and lo < hi");
  Grid g;
  g.axes[0].resize(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g.axes[0][i] = lo + step * static_cast<double>(i);
  g.axes[0].back() = hi;
  return g;
}

Grid Grid::uniform2(double lo1, double hi1, std::size_t n1, double lo2, double hi2, std::size_t n2) {
  Grid g = uniform(lo1, hi1, n1);
  g.axes[1] = uniform(lo2, hi2, n2).axes[0];
  return g;
}

Grid evaluation_grid(const WeightedDraws& draws, std::span<const double> bandwidth,
                     std::size_t min_points) {
  if (bandwidth.size() != draws.dim) throw ValidationError("bandwidth dimension mismatch");
  const double per_h = draws.dim == 1 ? 4.0 : 2.0;
  const std::size_t cap = draws.dim == 1 ? kMaxPoints1D : kMaxPoints2D;
  Grid g;
  for (std::size_t a = 0; a < draws.dim; ++a) {
    double lo = draws.at(0, a);
    double hi = lo;
    for (std::size_t i = 1; i < draws.size(); ++i) {
      lo = std::min(lo, draws.at(i, a));
      hi = std::max(hi, draws.at(i, a));
    }
    lo -= 4.0 * bandwidth[a];
    hi += 4.0 * bandwidth[a];
    const double wanted = std::ceil((hi - lo) / (bandwidth[a] / per_h)) + 1.0;
    const auto count = static_cast<std::size_t>(
        std::clamp(wanted, static_cast<double>(std::max<std::size_t>(min_points, 2)),
                   static_cast<double>(std::max(cap, min_points))));
    g.axes[a] = Grid::uniform(lo, hi, count).axes[0];
  }
  return g;
}

double DensityCurve::plain_mass() const {
  auto trap_weights = [](const std::vector<double>& axis) {
    std::vector<double> wts(axis.size(), 0.0);
    for (std::size_t i = 0; i + 1 < axis.size(); ++i) {
      const double half = 0.5 * (axis[i + 1] - axis[i]);
      wts[i] += half;
      wts[i + 1] += half;
    }
    return wts;
  };
  const auto w0 = trap_weights(grid.axes[0]);
  if (grid.dim() == 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < w0.size(); ++i) s += w0[i] * f_plain[i];
    return s;
  }
  const auto w1 = trap_weights(grid.axes[1]);
  double s = 0.0;
  for (std::size_t r = 0; r < w1.size(); ++r) {
    for (std::size_t c = 0; c < w0.size(); ++c) s += w1[r] * w0[c] * f_plain[r * w0.size() + c];
  }
  return s;
}

DensityCurve weighted_kde(const WeightedDraws& draws, std::span<const double> bandwidth,
                          const Grid& grid, std::size_t workers) {
  draws.validate();
  if (bandwidth.size() != draws.dim || grid.dim() != draws.dim) {
    throw ValidationError("bandwidth/grid dimension does not match the draws");
  }
  for (double h : bandwidth) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("bandwidth must be positive");
  }
  DensityCurve curve;
  curve.grid = grid;
  curve.bandwidth.assign(bandwidth.begin(), bandwidth.end());
  curve.f_plain.assign(grid.size(), 0.0);
  curve.f_star.assign(grid.size(), 0.0);
  const std::size_t n = draws.size();

  if (draws.dim == 1) {
    const auto order = order_by_axis(draws, 0);
    std::vector<double> ts(n), ws(n);
    for (std::size_t k = 0; k < n; ++k) {
      ts[k] = draws.t[order[k]];
      ws[k] = draws.w[order[k]];
    }
    const auto& axis = grid.axes[0];
    const double h = bandwidth[0];
    const double reach = kCutoff * h;
    const std::size_t blocks = (axis.size() + kBlock1D - 1) / kBlock1D;
    parallel_for(blocks, workers, [&](std::size_t b) {
      const std::size_t j0 = b * kBlock1D;
      const std::size_t j1 = std::min(axis.size(), j0 + kBlock1D);
      const auto [first, last] = axis_window(ts, axis[j0] - reach, axis[j1 - 1] + reach);
      for (std::size_t k = first; k < last; ++k) {
        auto [c0, c1] = axis_window(axis, ts[k] - reach, ts[k] + reach);
        c0 = std::max(c0, j0);
        c1 = std::min(c1, j1);
        for (std::size_t j = c0; j < c1; ++j) {
          const double u = (axis[j] - ts[k]) / h;
          const double kern = std::exp(-0.5 * u * u);
          curve.f_plain[j] += kern;
          curve.f_star[j] += ws[k] * kern;
        }
      }
    });
  } else {
    const auto order = order_by_axis(draws, 1);
    std::vector<double> xs(n), ys(n), ws(n);
    for (std::size_t k = 0; k < n; ++k) {
      xs[k] = draws.at(order[k], 0);
      ys[k] = draws.at(order[k], 1);
      ws[k] = draws.w[order[k]];
    }
    const auto& ax = grid.axes[0];
    const auto& ay = grid.axes[1];
    const double hx = bandwidth[0];
    const double hy = bandwidth[1];
    const double rx = kCutoff * hx;
    const double ry = kCutoff * hy;
    const std::size_t nx = ax.size();
    const std::size_t blocks = (ay.size() + kBlockRows2D - 1) / kBlockRows2D;
    parallel_for(blocks, workers, [&](std::size_t b) {
      const std::size_t r0 = b * kBlockRows2D;
      const std::size_t r1 = std::min(ay.size(), r0 + kBlockRows2D);
      const auto [first, last] = axis_window(ys, ay[r0] - ry, ay[r1 - 1] + ry);
      std::vector<double> kx;
      for (std::size_t k = first; k < last; ++k) {
        auto [q0, q1] = axis_window(ay, ys[k] - ry, ys[k] + ry);
        q0 = std::max(q0, r0);
        q1 = std::min(q1, r1);
        if (q0 >= q1) continue;
        const auto [c0, c1] = axis_window(ax, xs[k] - rx, xs[k] + rx);
        kx.resize(c1 - c0);
        for (std::size_t c = c0; c < c1; ++c) {
          const double u = (ax[c] - xs[k]) / hx;
          kx[c - c0] = std::exp(-0.5 * u * u);
        }
        for (std::size_t r = q0; r < q1; ++r) {
          const double v = (ay[r] - ys[k]) / hy;
          const double ky = std::exp(-0.5 * v * v);
          double* plain = curve.f_plain.data() + r * nx;
          double* star = curve.f_star.data() + r * nx;
          const double wk = ws[k] * ky;
          for (std::size_t c = c0; c < c1; ++c) {
            plain[c] += kx[c - c0] * ky;
            star[c] += kx[c - c0] * wk;
          }
        }
      }
    });
  }

  const double norm = kernel_norm(bandwidth, n);
  for (auto& v : curve.f_plain) v *= norm;
  for (auto& v : curve.f_star) v *= norm;
  return curve;
}

DensityValue evaluate_density(const WeightedDraws& draws, const DensityCurve& curve,
                              std::span<const double> t) {
  if (t.size() != draws.dim) throw ValidationError("evaluation point has the wrong dimension");
  const Grid& g = curve.grid;
  std::size_t i = 0, j = 0;
  double fx = 0.0, fy = 0.0;
  if (!locate(g.axes[0], t[0], i, fx) || (draws.dim == 2 && !locate(g.axes[1], t[1], j, fy))) {
    return direct_density(draws, curve.bandwidth, t);
  }
  if (draws.dim == 1) {
    return {curve.f_plain[i] + fx * (curve.f_plain[i + 1] - curve.f_plain[i]),
            curve.f_star[i] + fx * (curve.f_star[i + 1] - curve.f_star[i])};
  }
  const std::size_t nx = g.axes[0].size();
  auto bilinear = [&](const std::vector<double>& f) {
    const double a = f[j * nx + i], b = f[j * nx + i + 1];
    const double c = f[(j + 1) * nx + i], d = f[(j + 1) * nx + i + 1];
    return (1.0 - fy) * (a + fx * (b - a)) + fy * (c + fx * (d - c));
  };
  return {bilinear(curve.f_plain), bilinear(curve.f_star)};
}

DensityAtDraws evaluate_at_draws(const WeightedDraws& draws, const DensityCurve& curve) {
  DensityAtDraws out;
  out.plain.resize(draws.size());
  out.star.resize(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto v = evaluate_density(draws, curve, std::span<const double>(draws.t.data() + i * draws.dim, draws.dim));
    out.plain[i] = v.plain;
    out.star[i] = v.star;
  }
  return out;
}

McPValue fraction_at_most(std::span<const double> values, double level) {
  if (values.empty()) throw ValidationError("no values");
  std::size_t count = 0;
  for (double v : values) count += v <= level ? 1 : 0;
  const double n = static_cast<double>(values.size());
  const double p = static_cast<double>(count) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

McPValue invariant_pvalue_mc(const WeightedDraws& draws, const DensityCurve& curve,
                             std::span<const double> t0) {
  const auto at = evaluate_at_draws(draws, curve);
  return fraction_at_most(at.star, evaluate_density(draws, curve, t0).star);
}

McPValue plain_pvalue_mc(const WeightedDraws& draws, const DensityCurve& curve,
                         std::span<const double> t0) {
  const auto at = evaluate_at_draws(draws, curve);
  return fraction_at_most(at.plain, evaluate_density(draws, curve, t0).plain);
}

McPValue tail_pvalue_mc(const WeightedDraws& draws, double t0) {
  if (draws.dim != 1) throw ValidationError("tail P-value needs a one-dimensional statistic");
  if (draws.size() == 0) throw ValidationError("no draws");
  std::size_t count = 0;
  for (double t : draws.t) count += t >= t0 ? 1 : 0;
  const double n = static_cast<double>(draws.size());
  const double p = static_cast<double>(count) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

DensityCurve resample(const WeightedDraws& draws, const DensityCurve& curve, const Grid& grid) {
  DensityCurve out;
  out.grid = grid;
  out.bandwidth = curve.bandwidth;
  out.f_plain.resize(grid.size());
  out.f_star.resize(grid.size());
  const std::size_t nx = grid.axes[0].size();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::array<double, 2> pt{grid.axes[0][k % nx], grid.dim() == 2 ? grid.axes[1][k / nx] : 0.0};
    const auto v = evaluate_density(draws, curve, std::span<const double>(pt.data(), grid.dim()));
    out.f_plain[k] = v.plain;
    out.f_star[k] = v.star;
  }
  return out;
}

std::string density_csv(const DensityCurve& curve) {
  std::string out = curve.grid.dim() == 1 ? "t,f_plain,f_star\n" : "t1,t2,f_plain,f_star\n";
  const std::size_t nx = curve.grid.axes[0].size();
  for (std::size_t k = 0; k < curve.f_plain.size(); ++k) {
    out += format_number(curve.grid.axes[0][k % nx]);
    out += ',';
    if (curve.grid.dim() == 2) {
      out += format_number(curve.grid.axes[1][k / nx]);
      out += ',';
    }
    out += format_number(curve.f_plain[k]);
    out += ',';
    out += format_number(curve.f_star[k]);
    out += '\n';
  }
  return out;
}

}  // namespace invp
