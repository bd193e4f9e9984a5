#include "invp/discrete.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace invp {

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::scientific, digits - 1);
  if (ec != std::errc{}) return value;
  double out = value;
  std::from_chars(buf.data(), end, out);
  return out;
}

double exact_sum(const std::vector<double>& values) {
  std::vector<double> partials;
  for (double x : values) {
    std::size_t used = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[used++] = lo;
      x = hi;
    }
    partials.resize(used);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;
  // Round the non-overlapping expansion, largest component first.
  std::size_t i = partials.size() - 1;
  double hi = partials[i];
  double lo = 0.0;
  while (i > 0) {
    const double x = hi;
    const double y = partials[--i];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  if (i > 0 && ((lo < 0.0 && partials[i - 1] < 0.0) || (lo > 0.0 && partials[i - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

namespace {

FinitePmf<long long> from_log_weights(const std::vector<double>& logw) {
  const double top = *std::max_element(logw.begin(), logw.end());
  std::vector<double> p(logw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    p[i] = std::exp(logw[i] - top);
    total += p[i];
  }
  std::vector<long long> labels(logw.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] /= total;
    labels[i] = static_cast<long long>(i);
  }
  return FinitePmf<long long>(std::move(labels), std::move(p));
}

}  // namespace

FinitePmf<long long> truncated_poisson(double lambda, long long max) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("Poisson mean must be positive");
  if (max < 0 || max > 10000) throw ValidationError("Poisson truncation point must lie in [0, 10000]");
  std::vector<double> logw(static_cast<std::size_t>(max) + 1);
  for (long long k = 0; k <= max; ++k) {
    const double dk = static_cast<double>(k);
    logw[static_cast<std::size_t>(k)] = dk * std::log(lambda) - lambda - std::lgamma(dk + 1.0);
  }
  return from_log_weights(logw);
}

FinitePmf<long long> binomial_pmf(long long size, double prob) {
  if (size < 0 || size > 10000) throw ValidationError("binomial size must lie in [0, 10000]");
  if (!(prob > 0.0 && prob < 1.0)) throw ValidationError("binomial probability must lie in (0, 1)");
  const double n = static_cast<double>(size);
  std::vector<double> logw(static_cast<std::size_t>(size) + 1);
  for (long long k = 0; k <= size; ++k) {
    const double dk = static_cast<double>(k);
    logw[static_cast<std::size_t>(k)] = std::lgamma(n + 1.0) - std::lgamma(dk + 1.0) -
                                        std::lgamma(n - dk + 1.0) + dk * std::log(prob) +
                                        (n - dk) * std::log1p(-prob);
  }
  return from_log_weights(logw);
}

}  // namespace invp
