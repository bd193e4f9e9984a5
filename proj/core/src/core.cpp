#include "invp/core.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <thread>

namespace invp {

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw ValidationError("empty sample");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("non-finite value at index " + std::to_string(i));
    }
  }
}

bool Sample::is_constant() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [first = values_.front()](double v) { return v == first; });
}

Sample validate_sample(std::vector<double> values) { return Sample(std::move(values)); }

void MonteCarloConfig::validate() const {
  if (n_sim == 0) throw ValidationError("n_sim must be positive");
  if (chunk_size == 0) throw ValidationError("chunk_size must be positive");
  if (grid_size < 2) throw ValidationError("grid_size must be at least 2");
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw ValidationError("bandwidth must be a positive finite number");
  }
}

std::size_t MonteCarloConfig::resolved_workers() const noexcept {
  if (workers > 0) return workers;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void PValueReport::check_invariants() const {
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(p_invariant) || (p_plain && !in_unit(*p_plain)) || (p_tail && !in_unit(*p_tail)) ||
      (p_asymptotic && !in_unit(*p_asymptotic))) {
    throw NumericalError("P-value outside [0, 1] in report for " + statistic_name);
  }
  if (mc_standard_error && n_sim) {
    const std::size_t used = *n_sim - std::min(*n_sim - 1, singular_count.value_or(0));
    const double bound = 0.5 / std::sqrt(static_cast<double>(used));
    if (*mc_standard_error < 0.0 || *mc_standard_error > bound * (1.0 + 1e-12)) {
      throw NumericalError("Monte-Carlo standard error outside [0, 0.5/sqrt(n_sim)]");
    }
  }
}

nlohmann::ordered_json to_json(const PValueReport& r) {
  nlohmann::ordered_json j;
  j["statistic_name"] = r.statistic_name;
  if (r.t_observed.size() == 1) {
    j["t_observed"] = r.t_observed.front();
  } else {
    j["t_observed"] = r.t_observed;
  }
  j["p_invariant"] = r.p_invariant;
  if (r.p_plain) j["p_plain"] = *r.p_plain;
  if (r.p_tail) j["p_tail"] = *r.p_tail;
  if (r.p_asymptotic) j["p_asymptotic"] = *r.p_asymptotic;
  if (r.mc_standard_error) j["mc_standard_error"] = *r.mc_standard_error;
  if (r.n_sim) j["n_sim"] = *r.n_sim;
  if (r.seed) j["seed"] = *r.seed;
  if (!r.bandwidth.empty()) {
    if (r.bandwidth.size() == 1) {
      j["bandwidth"] = r.bandwidth.front();
    } else {
      j["bandwidth"] = r.bandwidth;
    }
  }
  if (r.singular_count) j["singular_count"] = *r.singular_count;
  if (!r.method.empty()) j["method"] = r.method;
  j["config"] = r.config;
  return j;
}

namespace {

std::vector<double> scalar_or_array(const nlohmann::ordered_json& v) {
  if (v.is_array()) return v.get<std::vector<double>>();
  return {v.get<double>()};
}

}  // namespace

PValueReport report_from_json(const nlohmann::ordered_json& j) {
  PValueReport r;
  r.statistic_name = j.at("statistic_name").get<std::string>();
  r.t_observed = scalar_or_array(j.at("t_observed"));
  r.p_invariant = j.at("p_invariant").get<double>();
  if (j.contains("p_plain")) r.p_plain = j["p_plain"].get<double>();
  if (j.contains("p_tail")) r.p_tail = j["p_tail"].get<double>();
  if (j.contains("p_asymptotic")) r.p_asymptotic = j["p_asymptotic"].get<double>();
  if (j.contains("mc_standard_error")) r.mc_standard_error = j["mc_standard_error"].get<double>();
  if (j.contains("n_sim")) r.n_sim = j["n_sim"].get<std::size_t>();
  if (j.contains("seed")) r.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("bandwidth")) r.bandwidth = scalar_or_array(j["bandwidth"]);
  if (j.contains("singular_count")) r.singular_count = j["singular_count"].get<std::size_t>();
  if (j.contains("method")) r.method = j["method"].get<std::string>();
  if (j.contains("config")) r.config = j["config"];
  return r;
}

std::string format_number(double value) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::string dump_report(const PValueReport& report) { return to_json(report).dump(2) + "\n"; }

}  // namespace invp
