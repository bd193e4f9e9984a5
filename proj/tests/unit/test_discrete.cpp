#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "invp/discrete.hpp"

namespace {

using namespace invp;

TEST(Pushforward, MergesByAddition) {
  const FinitePmf<char> pmf({'a', 'b', 'c'}, {0.25, 0.5, 0.25});
  const std::map<char, int> t{{'a', 0}, {'b', 1}, {'c', 0}};
  const auto out = pushforward(pmf, [&](char x) { return t.at(x); });
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.prob(0), 0.5);
  EXPECT_EQ(out.prob(1), 0.5);
}

TEST(Pushforward, IdentityKeepsPmf) {
  const FinitePmf<int> pmf({0, 1, 2}, {0.25, 0.5, 0.25});
  const auto out = pushforward(pmf, [](int x) { return x; });
  EXPECT_EQ(out.support(), pmf.support());
  EXPECT_EQ(out.probs(), pmf.probs());
}

TEST(Pushforward, BinomialParityMatchesEnumeration) {
  const auto pmf = binomial_pmf(4, 0.5);
  // Enumeration oracle: C(4, k) / 16 summed by parity.
  const double choose[] = {1, 4, 6, 4, 1};
  double even = 0, odd = 0;
  for (int k = 0; k <= 4; ++k) (k % 2 == 0 ? even : odd) += choose[k] / 16.0;
  const auto parity = pushforward(pmf, [](long long k) { return std::string(k % 2 == 0 ? "even" : "odd"); });
  EXPECT_NEAR(parity.prob("even"), even, 1e-15);
  EXPECT_NEAR(parity.prob("odd"), odd, 1e-15);
  EXPECT_EQ(even, 0.5);
}

TEST(DiscretePValue, ModalOutcomeGivesOne) {
  const FinitePmf<int> pmf({0, 1, 2}, {0.25, 0.5, 0.25});
  EXPECT_EQ(discrete_pvalue(pmf, 1), 1.0);
}

TEST(DiscretePValue, TiesIncluded) {
  const FinitePmf<int> pmf({0, 1, 2}, {0.25, 0.5, 0.25});
  EXPECT_EQ(discrete_pvalue(pmf, 0), 0.5);
  EXPECT_EQ(discrete_pvalue(pmf, 2), 0.5);
}

TEST(DiscretePValue, TruncatedPoissonMatchesBruteForce) {
  const auto pmf = truncated_poisson(4.2, 30);
  ASSERT_EQ(pmf.size(), 31u);
  // Independent pmf: direct formula, renormalized over {0..30}.
  std::vector<double> q(31);
  double term = std::exp(-4.2);
  for (int k = 0; k <= 30; ++k) {
    if (k > 0) term *= 4.2 / k;
    q[static_cast<std::size_t>(k)] = term;
  }
  const double total = std::accumulate(q.begin(), q.end(), 0.0);
  for (auto& v : q) v /= total;
  double brute = 0.0;
  for (double v : q) {
    if (v <= q[10]) brute += v;
  }
  EXPECT_NEAR(discrete_pvalue(pmf, 10LL), brute, 1e-13);
  for (int k = 0; k <= 30; ++k) EXPECT_NEAR(pmf.probs()[static_cast<std::size_t>(k)], q[static_cast<std::size_t>(k)], 1e-15);
}

TEST(DiscretePValue, UniqueMinimumGivesItsProbability) {
  const FinitePmf<int> pmf({1, 2, 3, 4}, {0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(discrete_pvalue(pmf, 1), 0.1);
  EXPECT_EQ(discrete_pvalue(pmf, 4), 1.0);
}

TEST(DiscretePValue, RejectsUnknownOutcome) {
  const FinitePmf<int> pmf({0, 1}, {0.5, 0.5});
  EXPECT_THROW(static_cast<void>(discrete_pvalue(pmf, 7)), ValidationError);
}

TEST(DiscretePValue, AlwaysInUnitInterval) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> p(20);
    for (auto& v : p) v = u(gen);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= s;
    std::vector<int> labels(20);
    std::iota(labels.begin(), labels.end(), 0);
    const FinitePmf<int> pmf(labels, p);
    for (int t0 = 0; t0 < 20; ++t0) {
      const double pv = discrete_pvalue(pmf, t0);
      EXPECT_GE(pv, 0.0);
      EXPECT_LE(pv, 1.0);
      EXPECT_GE(pv, pmf.prob(t0));
    }
  }
}

TEST(DiscretePValue, TieGroupSurvivesLastBitNoise) {
  // 0.1 + 0.2 and 0.3 differ in the last bit but are one tie group.
  const FinitePmf<int> pmf({0, 1, 2}, {0.1 + 0.2, 0.3, 0.4 - 1e-17});
  EXPECT_EQ(discrete_pvalue(pmf, 0), discrete_pvalue(pmf, 1));
}

TEST(DiscretePValue, RelabelingIsBitInvariantOnBinomial) {
  const auto pmf = binomial_pmf(40, 0.3);
  std::mt19937_64 gen(11);
  for (int r = 0; r < 10; ++r) {
    std::vector<long long> image(41);
    std::iota(image.begin(), image.end(), 1000);
    std::shuffle(image.begin(), image.end(), gen);
    const auto relabeled = pushforward(pmf, [&](long long k) { return image[static_cast<std::size_t>(k)]; });
    for (long long t0 = 0; t0 <= 40; ++t0) {
      EXPECT_EQ(discrete_pvalue(relabeled, image[static_cast<std::size_t>(t0)]), discrete_pvalue(pmf, t0));
    }
  }
}

TEST(FinitePmf, Validation) {
  EXPECT_THROW((FinitePmf<int>({0, 1}, {0.5})), ValidationError);
  EXPECT_THROW((FinitePmf<int>({}, {})), ValidationError);
  EXPECT_THROW((FinitePmf<int>({0, 1}, {0.7, 0.7})), ValidationError);
  EXPECT_THROW((FinitePmf<int>({0, 1}, {1.5, -0.5})), ValidationError);
  EXPECT_THROW((FinitePmf<int>({0, 0}, {0.5, 0.5})), ValidationError);
  EXPECT_NO_THROW((FinitePmf<int>({0, 1}, {0.5, 0.5 + 5e-10})));
}

TEST(TruncatedPoisson, Validation) {
  EXPECT_THROW(static_cast<void>(truncated_poisson(-1.0, 10)), ValidationError);
  EXPECT_THROW(static_cast<void>(truncated_poisson(1.0, -1)), ValidationError);
  EXPECT_THROW(static_cast<void>(binomial_pmf(5, 1.5)), ValidationError);
}

TEST(ExactSum, CorrectlyRounded) {
  namespace mp = boost::multiprecision;
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-60, 60);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(50);
    mp::cpp_bin_float_100 exact = 0;
    for (auto& x : v) {
      x = std::ldexp(mant(gen), expo(gen));
      exact += x;
    }
    const double want = static_cast<double>(exact);
    EXPECT_EQ(exact_sum(v), want);
    std::shuffle(v.begin(), v.end(), gen);
    EXPECT_EQ(exact_sum(v), want);
  }
}

TEST(ExactSum, Cancellation) {
  EXPECT_EQ(exact_sum({1e100, 1.0, -1e100}), 1.0);
  EXPECT_EQ(exact_sum({0.1, 0.1, 0.1, -0.3}), 2.7755575615628914e-17);
  EXPECT_EQ(exact_sum({}), 0.0);
}

TEST(RoundSignificant, TwelveDigits) {
  EXPECT_EQ(round_significant(0.1 + 0.2), round_significant(0.3));
  EXPECT_EQ(round_significant(0.123456789012345), 0.123456789012);
  EXPECT_EQ(round_significant(0.0), 0.0);
}

}  // namespace
