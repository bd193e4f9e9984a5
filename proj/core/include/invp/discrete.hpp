#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "invp/core.hpp"

namespace invp {

/// Rounds to `digits` significant decimal digits (locale independent).
/// Probabilities are compared after this rounding so that a relabeling
/// cannot split a tie group through last-bit noise.
[[nodiscard]] double round_significant(double value, int digits = 12);

/// Correctly rounded sum of finite values (Shewchuk's exact partials), so the
/// result does not depend on the order of the terms.
[[nodiscard]] double exact_sum(const std::vector<double>& values);

/// Probability function on a finite support of distinct labels.
template <std::equality_comparable Label>
class FinitePmf {
 public:
  /// Mass tolerance for supports truncated by the caller.
  static constexpr double kMassTolerance = 1e-9;

  FinitePmf(std::vector<Label> support, std::vector<double> probs)
      : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.size() != probs_.size()) {
      throw ValidationError("pmf support and probabilities differ in length");
    }
    if (support_.empty()) throw ValidationError("pmf support is empty");
    double total = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (!std::isfinite(probs_[i]) || probs_[i] < 0.0) {
        throw ValidationError("pmf probability at index " + std::to_string(i) +
                              " is negative or non-finite");
      }
      total += probs_[i];
      for (std::size_t j = 0; j < i; ++j) {
        if (support_[j] == support_[i]) {
          throw ValidationError("pmf support labels must be distinct (duplicate at index " +
                                std::to_string(i) + ")");
        }
      }
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
      throw ValidationError("pmf total mass " + std::to_string(total) + " is not 1");
    }
  }

  [[nodiscard]] const std::vector<Label>& support() const noexcept { return support_; }
  [[nodiscard]] const std::vector<double>& probs() const noexcept { return probs_; }
  [[nodiscard]] std::size_t size() const noexcept { return support_.size(); }

  /// Index of `label` in the support, or size() when absent.
  [[nodiscard]] std::size_t find(const Label& label) const {
    return static_cast<std::size_t>(std::find(support_.begin(), support_.end(), label) -
                                    support_.begin());
  }

  [[nodiscard]] double prob(const Label& label) const {
    const std::size_t i = find(label);
    if (i == size()) throw ValidationError("label not in pmf support");
    return probs_[i];
  }

 private:
  std::vector<Label> support_;
  std::vector<double> probs_;
};

/// Distribution of T(X): p_T(t) = sum of P(X = x) over x with T(x) = t.
/// Output labels appear in order of first occurrence along the input support.
template <std::equality_comparable Label, class Map>
  requires std::invocable<Map&, const Label&>
[[nodiscard]] auto pushforward(const FinitePmf<Label>& pmf, Map&& t_map) {
  using Out = std::remove_cvref_t<std::invoke_result_t<Map&, const Label&>>;
  std::vector<Out> labels;
  std::vector<double> mass;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    Out t = std::invoke(t_map, pmf.support()[i]);
    auto it = std::find(labels.begin(), labels.end(), t);
    if (it == labels.end()) {
      labels.push_back(std::move(t));
      mass.push_back(pmf.probs()[i]);
    } else {
      mass[static_cast<std::size_t>(it - labels.begin())] += pmf.probs()[i];
    }
  }
  return FinitePmf<Out>(std::move(labels), std::move(mass));
}

/// Total probability of outcomes no more probable than `t0` (non-strict <=
/// after rounding to 12 significant digits). The qualifying probabilities are
/// summed exactly, so the result does not depend on how the support is
/// labeled or ordered.
template <std::equality_comparable Label>
[[nodiscard]] double discrete_pvalue(const FinitePmf<Label>& pmf, const Label& t0) {
  const std::size_t i0 = pmf.find(t0);
  if (i0 == pmf.size()) throw ValidationError("observed outcome is not in the pmf support");
  const double threshold = round_significant(pmf.probs()[i0]);
  std::vector<double> qualifying;
  qualifying.reserve(pmf.size());
  for (double p : pmf.probs()) {
    if (round_significant(p) <= threshold) qualifying.push_back(p);
  }
  return std::clamp(exact_sum(qualifying), 0.0, 1.0);
}

/// Poisson(lambda) restricted to {0..max} and renormalized.
[[nodiscard]] FinitePmf<long long> truncated_poisson(double lambda, long long max);

/// Binomial(size, prob) on {0..size}.
[[nodiscard]] FinitePmf<long long> binomial_pmf(long long size, double prob);

}  // namespace invp
