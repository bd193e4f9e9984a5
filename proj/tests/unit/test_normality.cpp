#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "invp/closed_forms.hpp"
#include "invp/distortion.hpp"
#include "invp/normality.hpp"
#include "invp/rng.hpp"
#include "oracles.hpp"

namespace {

using namespace invp;

MonteCarloConfig config(std::size_t n_sim, std::uint64_t seed, std::size_t workers = 0) {
  MonteCarloConfig c;
  c.n_sim = n_sim;
  c.seed = seed;
  c.workers = workers;
  return c;
}

std::vector<double> normal_data(std::size_t n, std::uint64_t seed, double mu = 3.0, double sigma = 2.0) {
  StreamRng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = mu + sigma * rng.normal();
  return x;
}

std::vector<double> exponential_data(std::size_t n, std::uint64_t seed) {
  StreamRng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = -std::log(rng.uniform_open());
  return x;
}

TEST(NormalStatistic, ParseAndPrint) {
  for (auto s : {NormalStatistic::jb, NormalStatistic::t3t4, NormalStatistic::sw}) {
    EXPECT_EQ(parse_normal_statistic(to_string(s)), s);
  }
  EXPECT_THROW(static_cast<void>(parse_normal_statistic("ad")), ValidationError);
}

TEST(SimulateStatistic, ShapesAndDeterminism) {
  const WeightedDraws a = simulate_statistic(NormalStatistic::t3t4, 10, config(5000, 1, 1));
  const WeightedDraws b = simulate_statistic(NormalStatistic::t3t4, 10, config(5000, 1, 4));
  EXPECT_EQ(a.dim, 2u);
  EXPECT_EQ(a.size() + a.singular_count, 5000u);
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(a.w, b.w);
  const WeightedDraws jb = simulate_statistic(NormalStatistic::jb, 10, config(5000, 1));
  EXPECT_EQ(jb.dim, 1u);
  for (std::size_t i = 0; i < jb.size(); ++i) EXPECT_GE(jb.t[i], 0.0);
}

TEST(SimulateStatistic, SizeRequirements) {
  EXPECT_THROW(static_cast<void>(simulate_statistic(NormalStatistic::jb, 7, config(100, 1))), ValidationError);
  EXPECT_THROW(static_cast<void>(simulate_statistic(NormalStatistic::t3t4, 7, config(100, 1))), ValidationError);
  EXPECT_NO_THROW(static_cast<void>(simulate_statistic(NormalStatistic::sw, 3, config(200, 1))));
}

TEST(StatisticValue, MatchesDefinitions) {
  const std::vector<double> d = {-0.5, -0.5, 0.1, 0.2, 0.7};
  EXPECT_EQ(statistic_value(NormalStatistic::jb, d), std::vector<double>{jarque_bera(d)});
  EXPECT_EQ(statistic_value(NormalStatistic::t3t4, d), (std::vector<double>{power_sum(d, 3), power_sum(d, 4)}));
}

TEST(CheckNormal, JarqueBeraReportSchema) {
  const NormalCheckRequest req{Sample(normal_data(20, 1)), NormalStatistic::jb, config(20000, 7)};
  const auto res = check_normal(req);
  const auto j = to_json(res.report);
  for (const char* key : {"statistic_name", "p_invariant", "p_plain", "p_tail", "p_asymptotic", "mc_standard_error",
                          "n_sim", "seed", "bandwidth"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["statistic_name"], "jb");
  EXPECT_EQ(j["n_sim"], 20000);
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(res.report.p_asymptotic, jb_asymptotic_pvalue(res.report.t_observed[0]));
  EXPECT_EQ(res.curve.grid.axes[0].size(), 512u);
  EXPECT_NO_THROW(res.report.check_invariants());
}

TEST(CheckNormal, PairAndShapiroWilkReports) {
  const Sample x(normal_data(12, 2));
  const auto pair = check_normal({x, NormalStatistic::t3t4, config(10000, 3)});
  EXPECT_EQ(pair.report.t_observed.size(), 2u);
  EXPECT_FALSE(pair.report.p_tail.has_value());
  EXPECT_EQ(pair.report.bandwidth.size(), 2u);
  EXPECT_EQ(pair.curve.grid.size(), kDisplayGrid2D * kDisplayGrid2D);
  const auto sw = check_normal({x, NormalStatistic::sw, config(10000, 3)});
  EXPECT_NE(sw.report.method.find(kShapiroWilkMethod), std::string::npos);
  EXPECT_NEAR(sw.report.t_observed[0], shapiro_wilk(x), 1e-12);
}

TEST(CheckNormal, AffineBitIdentity) {
  const auto x = normal_data(20, 4);
  for (auto stat : {NormalStatistic::jb, NormalStatistic::t3t4, NormalStatistic::sw}) {
    const auto r0 = check_normal({Sample(x), stat, config(5000, 5)}).report;
    for (auto [a, c] : {std::pair{10.0, 0.5}, std::pair{-3.0, 12.0}}) {
      std::vector<double> y(x);
      for (auto& v : y) v = a + c * v;
      EXPECT_EQ(dump_report(check_normal({Sample(y), stat, config(5000, 5)}).report), dump_report(r0));
    }
  }
}

TEST(CheckNormal, WorkerCountDoesNotChangeReport) {
  const Sample x(normal_data(15, 6));
  const auto a = check_normal({x, NormalStatistic::jb, config(30000, 8, 1)});
  const auto b = check_normal({x, NormalStatistic::jb, config(30000, 8, 5)});
  EXPECT_EQ(dump_report(a.report), dump_report(b.report));
  EXPECT_EQ(a.curve.f_star, b.curve.f_star);
}

TEST(CheckNormal, ReusedDrawsGiveSameReport) {
  const NormalCheckRequest req{Sample(normal_data(20, 9)), NormalStatistic::jb, config(10000, 10)};
  const WeightedDraws draws = simulate_statistic(NormalStatistic::jb, 20, req.config);
  EXPECT_EQ(dump_report(check_normal(req).report), dump_report(check_normal(req, draws).report));
  const WeightedDraws wrong = simulate_statistic(NormalStatistic::t3t4, 20, req.config);
  EXPECT_THROW(static_cast<void>(check_normal(req, wrong)), ValidationError);
}

TEST(CheckNormal, Rejections) {
  EXPECT_THROW(static_cast<void>(check_normal({Sample(std::vector<double>(10, 1.0)), NormalStatistic::jb, config(1000, 1)})),
               ValidationError);
  EXPECT_THROW(static_cast<void>(check_normal({Sample(normal_data(6, 1)), NormalStatistic::jb, config(1000, 1)})),
               ValidationError);
  EXPECT_NO_THROW(static_cast<void>(check_normal({Sample(normal_data(6, 1)), NormalStatistic::sw, config(1000, 1)})));
}

TEST(CheckNormal, NullCalibrationWithSharedReference) {
  const MonteCarloConfig c = config(20000, 11);
  const WeightedDraws draws = simulate_statistic(NormalStatistic::jb, 20, c);
  std::vector<double> p;
  for (std::uint64_t r = 0; r < 200; ++r) {
    p.push_back(check_normal({Sample(normal_data(20, 7000 + r)), NormalStatistic::jb, c}, draws).report.p_invariant);
  }
  EXPECT_LT(oracle::ks_uniform(p), 0.1);
}

TEST(CheckNormal, JointSkewKurtosisMorePowerfulThanAsymptoticJb) {
  const MonteCarloConfig c = config(20000, 12);
  const WeightedDraws draws = simulate_statistic(NormalStatistic::t3t4, 20, c);
  int joint = 0, asymptotic = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const Sample x(exponential_data(20, 9000 + r));
    const auto rep = check_normal({x, NormalStatistic::t3t4, c}, draws).report;
    joint += rep.p_invariant <= 0.05;
    asymptotic += jb_asymptotic_pvalue(jarque_bera(standardize(x))) <= 0.05;
  }
  EXPECT_GT(joint, asymptotic) << "joint " << joint << " vs asymptotic " << asymptotic;
}

TEST(JarqueBeraShape, SkewedDensityAndPValueProfiles) {
  for (std::size_t n : {10u, 20u}) {
    const WeightedDraws d = simulate_statistic(NormalStatistic::jb, n, config(100000, 13));
    std::vector<double> t = d.t;
    double mean = 0;
    for (double v : t) {
      ASSERT_GE(v, 0.0);
      mean += v / static_cast<double>(t.size());
    }
    std::nth_element(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(t.size() / 2), t.end());
    EXPECT_GT(mean, t[t.size() / 2]) << n;

    // Invariant P-value along t0: rises then falls; tail P-value only falls.
    const auto h = bandwidth_select(d);
    const DensityCurve curve = weighted_kde(d, h, evaluation_grid(d, h, 512));
    std::vector<double> inv, tail;
    for (double t0 = 0.0; t0 <= 12.0; t0 += 0.05) {
      inv.push_back(invariant_pvalue_mc(d, curve, t0).p);
      tail.push_back(tail_pvalue_mc(d, t0).p);
    }
    const auto peak = std::max_element(inv.begin(), inv.end());
    EXPECT_GT(*peak, inv.front() + 0.05) << n;
    EXPECT_GT(*peak, inv.back() + 0.05) << n;
    EXPECT_TRUE(std::is_sorted(tail.rbegin(), tail.rend()));
  }
}

TEST(ShapiroWilkWeights, NearlyConstantOnFibers) {
  const WeightedDraws d = simulate_statistic(NormalStatistic::sw, 20, config(20000, 14));
  std::map<long, std::pair<double, double>> bins;  // sum, sum of squares
  std::map<long, int> counts;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const long b = std::lround(d.t[i] / 0.002);
    bins[b].first += d.w[i];
    bins[b].second += d.w[i] * d.w[i];
    ++counts[b];
  }
  double worst = 0;
  for (const auto& [b, s] : bins) {
    const int k = counts[b];
    if (k < 20) continue;
    const double m = s.first / k;
    const double v = std::max(0.0, s.second / k - m * m);
    worst = std::max(worst, std::sqrt(v) / m);
  }
  EXPECT_LT(worst, 0.1);
}

TEST(MarchingSquares, TracesCircle) {
  const Grid g = Grid::uniform2(-2, 2, 81, -2, 2, 81);
  std::vector<double> f(g.size());
  for (std::size_t j = 0; j < 81; ++j) {
    for (std::size_t i = 0; i < 81; ++i) f[j * 81 + i] = std::hypot(g.axes[0][i], g.axes[1][j]);
  }
  const auto lines = marching_squares(g, f, 1.0);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0].front(), lines[0].back());
  for (const auto& [x, y] : lines[0]) EXPECT_NEAR(std::hypot(x, y), 1.0, 0.01);
}

TEST(MarchingSquares, OpenCurveAndTwoComponents) {
  const Grid g = Grid::uniform2(-3, 3, 61, -1, 1, 21);
  std::vector<double> f(g.size());
  for (std::size_t j = 0; j < 21; ++j) {
    for (std::size_t i = 0; i < 61; ++i) f[j * 61 + i] = std::abs(g.axes[0][i]);
  }
  const auto lines = marching_squares(g, f, 1.05);
  ASSERT_EQ(lines.size(), 2u);
  for (const auto& line : lines) {
    EXPECT_NE(line.front(), line.back());
    for (const auto& [x, y] : line) EXPECT_NEAR(std::abs(x), 1.05, 1e-12);
  }
}

TEST(MarchingSquares, RejectsMismatch) {
  EXPECT_THROW(static_cast<void>(marching_squares(Grid::uniform(0, 1, 5), std::vector<double>(5), 0.5)),
               ValidationError);
}

TEST(JbAsymptoticCurve, LiesOnChiSquareQuantile) {
  const Polyline c = jb_asymptotic_curve(10, 0.05);
  EXPECT_EQ(c.size(), 257u);
  EXPECT_EQ(c.front(), c.back());
  for (const auto& [t3, t4] : c) {
    const double v = 10.0 * (10.0 * t3 * t3 / 6.0 + (10.0 * t4 - 3.0) * (10.0 * t4 - 3.0) / 24.0);
    EXPECT_NEAR(v, 5.991464547107979, 1e-12);
  }
  EXPECT_THROW(static_cast<void>(jb_asymptotic_curve(10, 1.5)), ValidationError);
}

TEST(AlphaContour, ResolvabilityAndCsv) {
  EXPECT_THROW(static_cast<void>(alpha_contour_t3t4(10, 0.001, config(5000, 1))), ValidationError);
  EXPECT_THROW(static_cast<void>(alpha_contour_t3t4(7, 0.05, config(5000, 1))), ValidationError);
  const AlphaContour c = alpha_contour_t3t4(10, 0.1, config(20000, 15));
  EXPECT_FALSE(c.invariant.empty());
  EXPECT_FALSE(c.plain.empty());
  EXPECT_GT(c.level_star, 0.0);
  const std::string csv = contour_csv(c);
  EXPECT_EQ(csv.rfind("curve_id,t3,t4\n", 0), 0u);
  EXPECT_NE(csv.find("\ninvariant-0,"), std::string::npos);
  EXPECT_NE(csv.find("\nplain-0,"), std::string::npos);
  EXPECT_NE(csv.find("\njb-asymptotic,"), std::string::npos);
}

TEST(AlphaContour, ThresholdsSplitDrawsAtAlpha) {
  const MonteCarloConfig cfg = config(20000, 16);
  const AlphaContour c = alpha_contour_t3t4(12, 0.05, cfg);
  const WeightedDraws d = simulate_statistic(NormalStatistic::t3t4, 12, cfg);
  const auto h = bandwidth_select(d);
  const auto curve = weighted_kde(d, h, evaluation_grid(d, h, kDisplayGrid2D));
  const auto at = evaluate_at_draws(d, curve);
  EXPECT_NEAR(fraction_at_most(at.star, c.level_star).p, 0.05, 1.0 / 20000.0);
  EXPECT_NEAR(fraction_at_most(at.plain, c.level_plain).p, 0.05, 1.0 / 20000.0);
}

}  // namespace
