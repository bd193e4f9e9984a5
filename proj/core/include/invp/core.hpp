#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace invp {

/// Thrown when user input violates a documented precondition.
/// The CLI maps it to exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical procedure cannot deliver a trustworthy result
/// (failed bracketing, non-convergent quadrature, too many singular draws).
/// The CLI maps it to exit status 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An ordered, validated sequence of finite observations.
class Sample {
 public:
  /// Rejects empty input and any non-finite entry (the message names the
  /// offending index).
  explicit Sample(std::vector<double> values);

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

  /// True when every entry equals the first one.
  [[nodiscard]] bool is_constant() const noexcept;

 private:
  std::vector<double> values_;
};

[[nodiscard]] Sample validate_sample(std::vector<double> values);

/// Monte-Carlo settings shared by every simulation-backed operation.
///
/// Results depend on (n_sim, seed, chunk_size, bandwidth, grid_size) only;
/// `workers` changes wall time, never output.
struct MonteCarloConfig {
  std::size_t n_sim = 200000;
  std::uint64_t seed = 0;
  std::size_t chunk_size = 4096;
  std::optional<double> bandwidth;
  std::size_t grid_size = 512;
  std::size_t workers = 0;  ///< 0 selects std::thread::hardware_concurrency()

  /// Throws ValidationError on zero counts or a non-positive bandwidth.
  void validate() const;
  [[nodiscard]] std::size_t resolved_workers() const noexcept;
};

/// Output record for every P-value computation.
///
/// Monte-Carlo fields are empty for closed-form and exact computations.
struct PValueReport {
  std::string statistic_name;
  std::vector<double> t_observed;  ///< one entry, or two for (T3, T4)
  double p_invariant = 1.0;
  std::optional<double> p_plain;  ///< uncorrected-density counterpart, when defined
  std::optional<double> p_tail;
  std::optional<double> p_asymptotic;
  std::optional<double> mc_standard_error;
  std::optional<std::size_t> n_sim;
  std::optional<std::uint64_t> seed;
  std::vector<double> bandwidth;
  std::optional<std::size_t> singular_count;
  std::string method;                     ///< free-form estimator/algorithm label
  nlohmann::ordered_json config = nlohmann::ordered_json::object();

  /// Throws NumericalError if a P-value leaves [0, 1] or the standard error
  /// exceeds 0.5/sqrt(n_sim).
  void check_invariants() const;

  friend bool operator==(const PValueReport&, const PValueReport&) = default;
};

[[nodiscard]] nlohmann::ordered_json to_json(const PValueReport& report);
[[nodiscard]] PValueReport report_from_json(const nlohmann::ordered_json& j);

/// Shortest-form text of a double with up to 17 significant digits, for CSV output.
[[nodiscard]] std::string format_number(double value);

/// Serialized form written to report.json; fixed field order, trailing newline.
[[nodiscard]] std::string dump_report(const PValueReport& report);

}  // namespace invp
