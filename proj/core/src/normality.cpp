#include "invp/normality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "invp/closed_forms.hpp"
#include "invp/distortion.hpp"
#include "invp/parallel.hpp"
#include "invp/sampler.hpp"

namespace invp {

namespace {

std::size_t output_dim(NormalStatistic s) { return s == NormalStatistic::t3t4 ? 2 : 1; }

std::size_t min_sample_size(NormalStatistic s) { return s == NormalStatistic::sw ? 3 : 8; }

std::vector<double> resolve_bandwidth(const WeightedDraws& draws, const MonteCarloConfig& config) {
  if (config.bandwidth) return std::vector<double>(draws.dim, *config.bandwidth);
  return bandwidth_select(draws);
}

nlohmann::ordered_json config_json(NormalStatistic statistic, std::size_t n,
                                   const MonteCarloConfig& config) {
  nlohmann::ordered_json j;
  j["statistic"] = to_string(statistic);
  j["n"] = n;
  j["n_sim"] = config.n_sim;
  j["seed"] = config.seed;
  j["chunk_size"] = config.chunk_size;
  j["bandwidth"] = config.bandwidth ? nlohmann::ordered_json(*config.bandwidth) : nlohmann::ordered_json();
  j["grid_size"] = config.grid_size;
  return j;
}

// Uniform display grid spanning the estimation lattice.
Grid display_grid(const Grid& lattice, std::size_t points_1d) {
  if (lattice.dim() == 1) {
    return Grid::uniform(lattice.axes[0].front(), lattice.axes[0].back(), points_1d);
  }
  return Grid::uniform2(lattice.axes[0].front(), lattice.axes[0].back(), kDisplayGrid2D,
                        lattice.axes[1].front(), lattice.axes[1].back(), kDisplayGrid2D);
}

// Threshold c with a fraction alpha of `values` at or below it.
double sublevel_threshold(std::vector<double> values, double alpha) {
  std::sort(values.begin(), values.end());
  const auto m = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(values.size())));
  const std::size_t hi = std::clamp<std::size_t>(m, 1, values.size() - 1);
  return 0.5 * (values[hi - 1] + values[hi]);
}

}  // namespace

std::string to_string(NormalStatistic s) {
  switch (s) {
    case NormalStatistic::jb:
      return "jb";
    case NormalStatistic::t3t4:
      return "t3t4";
    case NormalStatistic::sw:
      return "sw";
  }
  return "?";
}

NormalStatistic parse_normal_statistic(const std::string& name) {
  if (name == "jb") return NormalStatistic::jb;
  if (name == "t3t4") return NormalStatistic::t3t4;
  if (name == "sw") return NormalStatistic::sw;
  throw ValidationError("unknown statistic '" + name + "' (expected jb, t3t4 or sw)");
}

std::vector<double> statistic_value(NormalStatistic statistic, std::span<const double> d) {
  switch (statistic) {
    case NormalStatistic::jb:
      return {jarque_bera(d)};
    case NormalStatistic::t3t4: {
      const PowerSums s(d);
      return {s[3], s[4]};
    }
    case NormalStatistic::sw:
      return {shapiro_wilk(d, shapiro_wilk_coefficients(d.size()))};
  }
  return {};
}

WeightedDraws simulate_statistic(NormalStatistic statistic, std::size_t n,
                                 const MonteCarloConfig& config) {
  if (n < min_sample_size(statistic)) {
    throw ValidationError("statistic " + to_string(statistic) + " needs n >= " +
                          std::to_string(min_sample_size(statistic)));
  }
  const ResidualBatch batch = draw_directions(n, config);
  const std::size_t count = batch.size();
  const std::size_t dim = output_dim(statistic);
  std::vector<double> t(count * dim);
  std::vector<double> w(count);
  std::vector<char> ok(count, 0);

  std::vector<double> sw_coef;
  StatisticDef sw_def;
  if (statistic == NormalStatistic::sw) {
    sw_coef = shapiro_wilk_coefficients(n);
    sw_def = StatisticDef::shapiro_wilk(n);
  }
  const std::size_t chunks = (count + config.chunk_size - 1) / config.chunk_size;
  parallel_for(chunks, config.resolved_workers(), [&](std::size_t c) {
    const std::size_t end = std::min(count, (c + 1) * config.chunk_size);
    for (std::size_t i = c * config.chunk_size; i < end; ++i) {
      const auto d = batch[i];
      std::optional<double> wi;
      switch (statistic) {
        case NormalStatistic::jb:
          t[i] = jarque_bera(d);
          wi = try_inv_distortion_jarque_bera(d);
          break;
        case NormalStatistic::t3t4: {
          const PowerSums s(d);
          t[2 * i] = s[3];
          t[2 * i + 1] = s[4];
          wi = try_inv_distortion_t3t4(d);
          break;
        }
        case NormalStatistic::sw: {
          t[i] = shapiro_wilk(d, sw_coef);
          const double g = generic_inverse_distortion(sw_def, d);
          if (g > 0.0 && std::isfinite(g)) wi = g;
          break;
        }
      }
      if (wi) {
        w[i] = *wi;
        ok[i] = 1;
      }
    }
  });

  WeightedDraws draws;
  draws.dim = dim;
  draws.t.reserve(count * dim);
  draws.w.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!ok[i]) {
      ++draws.singular_count;
      continue;
    }
    for (std::size_t a = 0; a < dim; ++a) draws.t.push_back(t[i * dim + a]);
    draws.w.push_back(w[i]);
  }
  draws.validate();
  return draws;
}

NormalCheckResult check_normal(const NormalCheckRequest& request) {
  request.config.validate();
  if (request.data.size() < min_sample_size(request.statistic)) {
    throw ValidationError("statistic " + to_string(request.statistic) + " needs n >= " +
                          std::to_string(min_sample_size(request.statistic)));
  }
  static_cast<void>(standardize(request.data));  // rejects degenerate data before simulating
  return check_normal(request, simulate_statistic(request.statistic, request.data.size(), request.config));
}

NormalCheckResult check_normal(const NormalCheckRequest& request, const WeightedDraws& draws) {
  const MonteCarloConfig& config = request.config;
  config.validate();
  const std::size_t n = request.data.size();
  if (n < min_sample_size(request.statistic)) {
    throw ValidationError("statistic " + to_string(request.statistic) + " needs n >= " +
                          std::to_string(min_sample_size(request.statistic)));
  }
  if (draws.dim != output_dim(request.statistic)) {
    throw ValidationError("reference draws do not match the statistic");
  }
  draws.validate();
  const UnitResidual d0 = standardize(request.data);
  const std::vector<double> t0 = statistic_value(request.statistic, d0.values());

  const std::vector<double> h = resolve_bandwidth(draws, config);
  const std::size_t floor_points = draws.dim == 1 ? config.grid_size : kDisplayGrid2D;
  const Grid lattice = evaluation_grid(draws, h, floor_points);
  const DensityCurve curve = weighted_kde(draws, h, lattice, config.resolved_workers());
  const DensityAtDraws at = evaluate_at_draws(draws, curve);
  const DensityValue at0 = evaluate_density(draws, curve, t0);
  const McPValue inv = fraction_at_most(at.star, at0.star);
  const McPValue plain = fraction_at_most(at.plain, at0.plain);

  NormalCheckResult result;
  PValueReport& r = result.report;
  r.statistic_name = to_string(request.statistic);
  r.t_observed = t0;
  r.p_invariant = inv.p;
  r.p_plain = plain.p;
  if (request.statistic == NormalStatistic::jb) {
    r.p_tail = tail_pvalue_mc(draws, t0[0]).p;
    r.p_asymptotic = jb_asymptotic_pvalue(t0[0]);
  }
  r.mc_standard_error = inv.se;
  r.n_sim = config.n_sim;
  r.seed = config.seed;
  r.bandwidth = h;
  r.singular_count = draws.singular_count;
  r.method = request.statistic == NormalStatistic::sw
                 ? std::string("weighted Gaussian KDE on uniform directions; finite-difference "
                               "inverse distortion; ") +
                       kShapiroWilkMethod
                 : "weighted Gaussian KDE on uniform directions; analytic inverse distortion";
  r.config = config_json(request.statistic, n, config);
  r.check_invariants();

  result.curve = resample(draws, curve, display_grid(lattice, config.grid_size));
  result.draws = draws;
  return result;
}

std::vector<Polyline> marching_squares(const Grid& grid, const std::vector<double>& f, double level) {
  if (grid.dim() != 2 || f.size() != grid.size()) {
    throw ValidationError("marching squares needs a 2-D grid with matching values");
  }
  const auto& ax = grid.axes[0];
  const auto& ay = grid.axes[1];
  const std::size_t nx = ax.size();
  const std::size_t ny = ay.size();
  auto value = [&](std::size_t i, std::size_t j) { return f[j * nx + i] - level; };
  auto below = [&](std::size_t i, std::size_t j) { return value(i, j) < 0.0; };

  // Edge ids: 2 * node for the edge to the right, 2 * node + 1 for the edge up.
  auto h_edge = [&](std::size_t i, std::size_t j) { return 2 * (j * nx + i); };
  auto v_edge = [&](std::size_t i, std::size_t j) { return 2 * (j * nx + i) + 1; };
  auto edge_point = [&](std::size_t id) {
    const std::size_t node = id / 2;
    const std::size_t i = node % nx;
    const std::size_t j = node / nx;
    const double v0 = value(i, j);
    if (id % 2 == 0) {
      const double s = v0 / (v0 - value(i + 1, j));
      return std::pair{ax[i] + s * (ax[i + 1] - ax[i]), ay[j]};
    }
    const double s = v0 / (v0 - value(i, j + 1));
    return std::pair{ax[i], ay[j] + s * (ay[j + 1] - ay[j])};
  };

  std::map<std::size_t, std::vector<std::size_t>> adjacency;
  auto link = [&](std::size_t a, std::size_t b) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  };
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const std::array<bool, 4> s{below(i, j), below(i + 1, j), below(i + 1, j + 1), below(i, j + 1)};
      // Edges: bottom, right, top, left.
      const std::array<std::size_t, 4> e{h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)};
      const std::array<bool, 4> cut{s[0] != s[1], s[1] != s[2], s[3] != s[2], s[0] != s[3]};
      const int cuts = cut[0] + cut[1] + cut[2] + cut[3];
      if (cuts == 2) {
        std::array<std::size_t, 2> ends{};
        int k = 0;
        for (int q = 0; q < 4; ++q) {
          if (cut[static_cast<std::size_t>(q)]) ends[static_cast<std::size_t>(k++)] = e[static_cast<std::size_t>(q)];
        }
        link(ends[0], ends[1]);
      } else if (cuts == 4) {
        const double center = 0.25 * (value(i, j) + value(i + 1, j) + value(i + 1, j + 1) + value(i, j + 1));
        if ((center < 0.0) == s[0]) {
          link(e[0], e[1]);
          link(e[2], e[3]);
        } else {
          link(e[3], e[0]);
          link(e[1], e[2]);
        }
      }
    }
  }

  std::vector<Polyline> lines;
  std::map<std::size_t, bool> used;
  auto trace = [&](std::size_t start) {
    Polyline line;
    std::size_t prev = start;
    std::size_t cur = start;
    line.push_back(edge_point(cur));
    used[cur] = true;
    while (true) {
      std::size_t next = cur;
      for (std::size_t nb : adjacency[cur]) {
        if (nb != prev && !used[nb]) {
          next = nb;
          break;
        }
      }
      if (next == cur) {
        // Close the loop if the start is adjacent.
        const auto& nbs = adjacency[cur];
        if (line.size() > 2 && std::find(nbs.begin(), nbs.end(), start) != nbs.end()) {
          line.push_back(line.front());
        }
        break;
      }
      prev = cur;
      cur = next;
      used[cur] = true;
      line.push_back(edge_point(cur));
    }
    lines.push_back(std::move(line));
  };
  for (const auto& [id, nbs] : adjacency) {
    if (nbs.size() == 1 && !used[id]) trace(id);
  }
  for (const auto& [id, nbs] : adjacency) {
    if (!used[id]) trace(id);
  }
  return lines;
}

Polyline jb_asymptotic_curve(std::size_t n, double alpha, std::size_t points) {
  if (n < 1) throw ValidationError("n must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (points < 4) throw ValidationError("need at least 4 curve points");
  const double q = -2.0 * std::log(alpha);  // chi^2_2 upper quantile
  const double dn = static_cast<double>(n);
  const double r3 = std::sqrt(6.0 * q) / dn;
  const double r4 = std::sqrt(24.0 * q / dn);
  Polyline curve;
  curve.reserve(points + 1);
  for (std::size_t k = 0; k < points; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(points);
    curve.emplace_back(r3 * std::cos(theta), (3.0 + r4 * std::sin(theta)) / dn);
  }
  curve.push_back(curve.front());
  return curve;
}

AlphaContour alpha_contour_t3t4(std::size_t n, double alpha, const MonteCarloConfig& config) {
  config.validate();
  if (n < 8) throw ValidationError("the (T3, T4) contour needs n >= 8");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  const double total = static_cast<double>(config.n_sim);
  if (alpha * total < 10.0 || (1.0 - alpha) * total < 10.0) {
    throw ValidationError("alpha " + std::to_string(alpha) + " is not resolvable with n_sim = " +
                          std::to_string(config.n_sim) + " (need alpha * n_sim >= 10 and (1 - alpha) * n_sim >= 10)");
  }
  const WeightedDraws draws = simulate_statistic(NormalStatistic::t3t4, n, config);
  const std::vector<double> h = resolve_bandwidth(draws, config);
  const Grid lattice = evaluation_grid(draws, h, kDisplayGrid2D);
  const DensityCurve curve = weighted_kde(draws, h, lattice, config.resolved_workers());
  const DensityAtDraws at = evaluate_at_draws(draws, curve);

  AlphaContour out;
  out.alpha = alpha;
  out.n = n;
  out.level_star = sublevel_threshold(at.star, alpha);
  out.level_plain = sublevel_threshold(at.plain, alpha);

  // Display grid over the hull of the draws.
  double lo[2] = {draws.at(0, 0), draws.at(0, 1)};
  double hi[2] = {lo[0], lo[1]};
  for (std::size_t i = 1; i < draws.size(); ++i) {
    for (std::size_t a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], draws.at(i, a));
      hi[a] = std::max(hi[a], draws.at(i, a));
    }
  }
  const Grid display = Grid::uniform2(lo[0], hi[0], kDisplayGrid2D, lo[1], hi[1], kDisplayGrid2D);
  out.curve = resample(draws, curve, display);
  out.invariant = marching_squares(display, out.curve.f_star, out.level_star);
  out.plain = marching_squares(display, out.curve.f_plain, out.level_plain);
  out.jb_asymptotic = jb_asymptotic_curve(n, alpha);
  return out;
}

std::string contour_csv(const AlphaContour& contour) {
  std::string out = "curve_id,t3,t4\n";
  auto emit = [&](const std::string& id, const Polyline& line) {
    for (const auto& [x, y] : line) out += id + ',' + format_number(x) + ',' + format_number(y) + '\n';
  };
  for (std::size_t k = 0; k < contour.invariant.size(); ++k) emit("invariant-" + std::to_string(k), contour.invariant[k]);
  for (std::size_t k = 0; k < contour.plain.size(); ++k) emit("plain-" + std::to_string(k), contour.plain[k]);
  emit("jb-asymptotic", contour.jb_asymptotic);
  return out;
}

}  // namespace invp
