#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "invp/core.hpp"

namespace invp::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2 };

struct RunConfig {
  std::string subcommand;
  std::optional<std::string> input_path;
  std::string output_dir = ".";
  MonteCarloConfig mc;
  bool n_sim_given = false;

  // check-normal
  std::string statistic = "jb";
  // pvalue
  std::string dist = "chisq";  ///< chisq | mean | jb
  int k = 1;
  double t0 = 1.0;
  double xbar = 0.0;
  int n = 10;  ///< mean-statistic sample size; contour dimension
  // discrete
  std::string discrete_dist = "poisson";  ///< poisson | binomial
  double lambda = 4.2;
  long long max = 30;
  long long size = 10;
  double prob = 0.5;
  long long outcome = 0;
  // discretize-demo
  std::string density = "normal";
  double x0 = 1.5;
  int from = 1;
  int to = 12;
  double anchor = 0.0;
  // loc-scale-check
  std::string model = "normal";
  // contour
  double alpha = 0.05;
};

/// One value per line; a single non-numeric first line is taken as a header.
/// Blank lines are ignored. Numbers are parsed independently of the locale.
[[nodiscard]] Sample ingest_csv(const std::string& path);

/// Resolved configuration echoed into every report.
[[nodiscard]] nlohmann::ordered_json config_json(const RunConfig& config);

/// Executes a subcommand, writing its files under output_dir. Errors are
/// reported on `err` and mapped to exit codes.
int run(const RunConfig& config, std::ostream& err);

/// Parses argv and runs; the entry point of the executable.
int main_entry(int argc, const char* const* argv);

}  // namespace invp::cli
