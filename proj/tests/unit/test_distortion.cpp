#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "invp/distortion.hpp"
#include "invp/sampler.hpp"
#include "oracles.hpp"

namespace {

using namespace invp;

const double kRt2 = 1.0 / std::sqrt(2.0);
const std::vector<double> kD3 = {-kRt2, 0.0, kRt2};

MonteCarloConfig config(std::size_t n_sim, std::uint64_t seed) {
  MonteCarloConfig c;
  c.n_sim = n_sim;
  c.seed = seed;
  c.workers = 1;
  return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TEST(PowerSum, CenteringAndNorm) {
  const ResidualBatch b = draw_directions(12, config(2000, 1));
  for (std::size_t i = 0; i < b.size(); ++i) {
    ASSERT_NEAR(power_sum(b[i], 1), 0.0, 1e-12);
    ASSERT_NEAR(power_sum(b[i], 2), 1.0, 1e-12);
  }
  EXPECT_NEAR(power_sum(kD3, 3), 0.0, 1e-16);
}

TEST(PowerSum, TableMatchesDirectSums) {
  const std::vector<double> d = {0.1, -0.4, 0.7, -0.4};
  const PowerSums s(d);
  for (int p = 1; p <= 8; ++p) EXPECT_NEAR(s[p], power_sum(d, p), 1e-15);
  EXPECT_EQ(s[0], 4.0);
  EXPECT_THROW(static_cast<void>(power_sum(d, 0)), ValidationError);
}

TEST(JarqueBera, VanishesAtNormalShape) {
  // Symmetric point with n T4 = 3.
  const std::vector<double> d = {-kRt2, 0, 0, 0, 0, kRt2};
  EXPECT_NEAR(power_sum(d, 4), 3.0 / 6.0, 1e-15);
  EXPECT_NEAR(jarque_bera(d), 0.0, 1e-14);
}

TEST(JarqueBera, HandEvaluationAtThreePoints) {
  // n = 3: T3 = 0, T4 = 1/2 gives 3 (3/2 - 3)^2 / 24.
  EXPECT_NEAR(jarque_bera(kD3), 0.28125, 1e-15);
}

TEST(JarqueBera, LargeSampleMeanNearChiSquareTwo) {
  const ResidualBatch b = draw_directions(1000, config(4000, 2));
  double m = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double t = jarque_bera(b[i]);
    ASSERT_GE(t, 0.0);
    m += t;
  }
  EXPECT_NEAR(m / b.size(), 2.0, 0.15);
}

TEST(InvDistortionPowerSum, SquaresAreSingular) {
  const ResidualBatch b = draw_directions(7, config(20, 3));
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_FALSE(try_inv_distortion_power_sum(b[i], 2).has_value());
  }
  EXPECT_THROW(static_cast<void>(inv_distortion_power_sum(b[0], 2)), NumericalError);
  EXPECT_THROW(static_cast<void>(inv_distortion_power_sum(b[0], 1)), ValidationError);
}

TEST(InvDistortionPowerSum, HandValueForCubes) {
  EXPECT_NEAR(inv_distortion_power_sum(kD3, 3), 3.0 * std::sqrt(0.5 - 1.0 / 3.0), 1e-14);
  EXPECT_NEAR(inv_distortion_power_sum(kD3, 3), 1.2247, 1e-4);
}

TEST(InvDistortionPowerSum, MatchesIndependentFiniteDifferences) {
  const ResidualBatch b = draw_directions(10, config(30, 4));
  for (int p : {3, 4, 5}) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const std::vector<double> x(b[i].begin(), b[i].end());
      auto composed = [p](const std::vector<double>& y) {
        std::vector<double> d(y.size());
        unit_direction(y, d);
        return power_sum(d, p);
      };
      const double fd = oracle::gradient_norm(composed, x);
      EXPECT_LT(rel(inv_distortion_power_sum(b[i], p), fd), 1e-5) << "p=" << p;
      EXPECT_LT(rel(generic_inverse_distortion(StatisticDef::power_sum(p), b[i]), fd), 1e-7);
    }
  }
}

TEST(InvDistortionJarqueBera, SingularAtMinimum) {
  const std::vector<double> d = {-kRt2, 0, 0, 0, 0, kRt2};
  EXPECT_FALSE(try_inv_distortion_jarque_bera(d).has_value());
  EXPECT_THROW(static_cast<void>(inv_distortion_jarque_bera(d)), NumericalError);
}

TEST(InvDistortionJarqueBera, PositiveOnRandomDraws) {
  const ResidualBatch b = draw_directions(20, config(100, 5));
  int nonsingular = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (const auto w = try_inv_distortion_jarque_bera(b[i])) {
      EXPECT_GT(*w, 0.0);
      ++nonsingular;
    }
  }
  EXPECT_GE(nonsingular, 99);
}

TEST(InvDistortionJarqueBera, MatchesGenericAcrossDimensions) {
  for (std::size_t n : {5u, 10u, 20u}) {
    const ResidualBatch b = draw_directions(n, config(100, 40 + n));
    for (std::size_t i = 0; i < b.size(); ++i) {
      EXPECT_LT(rel(generic_inverse_distortion(StatisticDef::jarque_bera(), b[i]),
                    inv_distortion_jarque_bera(b[i])),
                1e-5);
    }
  }
}

TEST(InvDistortionT3T4, MatchesGenericGramDeterminant) {
  for (std::size_t n : {8u, 10u, 20u}) {
    const ResidualBatch b = draw_directions(n, config(100, 70 + n));
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto analytic = try_inv_distortion_t3t4(b[i]);
      ASSERT_TRUE(analytic.has_value());
      EXPECT_LT(rel(generic_inverse_distortion(StatisticDef::t3t4(), b[i]), *analytic), 1e-5) << "n=" << n;
    }
  }
}

TEST(GenericInverseDistortion, AffineMapIsConstant) {
  // T(x) = a + B x with B 2 x 4; |det(B B')|^{1/2} computed by hand.
  const double B[2][4] = {{1.0, 2.0, 0.0, -1.0}, {0.5, 0.0, 3.0, 1.0}};
  StatisticDef affine{"affine", 2, [&](std::span<const double> x, std::span<double> out) {
                        for (int r = 0; r < 2; ++r) {
                          out[static_cast<std::size_t>(r)] = 1.5 * r - 2.0;
                          for (int j = 0; j < 4; ++j) out[static_cast<std::size_t>(r)] += B[r][j] * x[static_cast<std::size_t>(j)];
                        }
                      }};
  double g00 = 0, g01 = 0, g11 = 0;
  for (int j = 0; j < 4; ++j) {
    g00 += B[0][j] * B[0][j];
    g01 += B[0][j] * B[1][j];
    g11 += B[1][j] * B[1][j];
  }
  const double want = std::sqrt(g00 * g11 - g01 * g01);
  for (const std::vector<double>& x : {std::vector<double>{0, 0, 0, 0}, std::vector<double>{3, -1, 2, 10}}) {
    EXPECT_LT(rel(generic_inverse_distortion(affine, x), want), 1e-9);
  }
}

TEST(GenericInverseDistortion, SquaredNorm) {
  StatisticDef sq{"x'x", 1, [](std::span<const double> x, std::span<double> out) {
                    out[0] = 0.0;
                    for (double v : x) out[0] += v * v;
                  }};
  const std::vector<double> x = {0.5, -1.0, 2.0};
  const double t = 0.25 + 1.0 + 4.0;
  EXPECT_LT(rel(generic_inverse_distortion(sq, x), 2.0 * std::sqrt(t)), 1e-9);
}

TEST(GenericInverseDistortion, ScalesInverselyWithRadius) {
  // Composed maps T(d(x)) are scale-free, so the gradient norm at 2x is half
  // the one at x.
  const ResidualBatch b = draw_directions(10, config(20, 8));
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::vector<double> x(b[i].begin(), b[i].end());
    for (auto& v : x) v = 0.3 + v;  // same d, radius 1
    std::vector<double> x2(x);
    for (auto& v : x2) v *= 2.0;   // same d, radius 2
    for (const auto& def : {StatisticDef::power_sum(3), StatisticDef::jarque_bera()}) {
      const double r1 = generic_inverse_distortion(def, x);
      const double r2 = generic_inverse_distortion(def, x2);
      EXPECT_NEAR(r2 / r1, 0.5, 1e-6) << def.name;
    }
  }
}

TEST(GenericInverseDistortion, RejectsNonFinite) {
  StatisticDef bad{"bad", 1, [](std::span<const double>, std::span<double> out) { out[0] = std::nan(""); }};
  EXPECT_THROW(static_cast<void>(generic_inverse_distortion(bad, std::vector<double>{1.0, 2.0})), NumericalError);
}

// Expected normal order statistics by direct quadrature of the order-statistic density.
std::vector<double> expected_normal_scores(int n) {
  std::vector<double> m(static_cast<std::size_t>(n));
  const double lfact = std::lgamma(n + 1.0);
  for (int i = 1; i <= n; ++i) {
    double s = 0;
    const double h = 1e-3;
    for (double x = -12.0; x <= 12.0; x += h) {
      const double F = oracle::normal_cdf(x);
      if (F <= 0.0 || F >= 1.0) continue;
      const double logc = lfact - std::lgamma(i) - std::lgamma(n - i + 1.0);
      s += x * std::exp(logc + (i - 1) * std::log(F) + (n - i) * std::log1p(-F)) * oracle::normal_pdf(x) * h;
    }
    m[static_cast<std::size_t>(i - 1)] = s;
  }
  return m;
}

TEST(ShapiroWilk, ExpectedNormalScoresNearOne) {
  const double w = shapiro_wilk(Sample(expected_normal_scores(20)));
  EXPECT_GT(w, 0.99);
  EXPECT_LE(w, 1.0);
}

TEST(ShapiroWilk, MatchesReferenceImplementation) {
  // Reference values from scipy.stats.shapiro (AS R94, single-precision core).
  EXPECT_NEAR(shapiro_wilk(Sample({1, 1, 1, 1, 1, 1, 1, 1, 1, 2})), 0.36572062769765235, 1e-5);
  EXPECT_NEAR(shapiro_wilk(Sample({2.1, -0.3, 1.7, 0.4, 3.3, -1.2, 0.9, 0.05, 2.6, 1.1, -0.7, 0.2})),
              0.9758304907124824, 1e-5);
  EXPECT_NEAR(shapiro_wilk(Sample({1, 2, 3, 4, 5, 6, 7, 8, 9, 100})), 0.4485215411935256, 1e-5);
  EXPECT_NEAR(shapiro_wilk(Sample({0.5, 1.5, 2.0})), 0.9642857142857142, 1e-5);
  std::vector<double> x(25);
  for (int i = 0; i < 25; ++i) x[static_cast<std::size_t>(i)] = std::exp(-2.0 + 4.0 * i / 24.0);
  EXPECT_NEAR(shapiro_wilk(Sample(x)), 0.8094700505076746, 1e-5);
}

TEST(ShapiroWilk, OutlierPatternIsSmall) {
  EXPECT_LT(shapiro_wilk(Sample({1, 1, 1, 1, 1, 1, 1, 1, 1, 2})), 0.5);
}

TEST(ShapiroWilk, AffineInvariant) {
  const std::vector<double> x = {2.1, -0.3, 1.7, 0.4, 3.3, -1.2, 0.9, 0.05, 2.6, 1.1, -0.7, 0.2};
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = -40.0 + 2.75 * x[i];
  EXPECT_EQ(shapiro_wilk(Sample(x)), shapiro_wilk(Sample(y)));
}

TEST(ShapiroWilk, CoefficientsHaveUnitNorm) {
  for (std::size_t n : {3u, 4u, 5u, 6u, 11u, 20u, 100u, 5000u}) {
    const auto a = shapiro_wilk_coefficients(n);
    double s = 0;
    for (double v : a) s += 2.0 * v * v;
    EXPECT_NEAR(s, 1.0, 1e-12) << n;
  }
  EXPECT_THROW(static_cast<void>(shapiro_wilk_coefficients(2)), ValidationError);
  EXPECT_THROW(static_cast<void>(shapiro_wilk_coefficients(5001)), ValidationError);
}

TEST(ShapiroWilk, GenericDistortionMatchesClosedForm) {
  // W = (a' d_sorted)^2 on the unit sphere has gradient norm 2 sqrt(W (1 - W)).
  const std::size_t n = 20;
  const auto coef = shapiro_wilk_coefficients(n);
  const ResidualBatch b = draw_directions(n, config(50, 9));
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double w = shapiro_wilk(b[i], coef);
    EXPECT_LT(rel(generic_inverse_distortion(StatisticDef::shapiro_wilk(n), b[i]), 2.0 * std::sqrt(w * (1.0 - w))),
              1e-5);
  }
}

}  // namespace
