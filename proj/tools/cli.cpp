#include "cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "invp/closed_forms.hpp"
#include "invp/discrete.hpp"
#include "invp/discretization.hpp"
#include "invp/loc_scale.hpp"
#include "invp/normality.hpp"

namespace invp::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(std::string text) {
  // Accept a typographic minus sign and an explicit plus sign.
  if (text.rfind("\xE2\x88\x92", 0) == 0) text = "-" + text.substr(3);
  if (!text.empty() && text[0] == '+') text.erase(0, 1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return v;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw ValidationError("failed writing " + path.string());
}

bool is_monte_carlo(const std::string& sub) {
  return sub == "check-normal" || sub == "loc-scale-check" || sub == "contour";
}

MonteCarloConfig effective_mc(const RunConfig& c) {
  MonteCarloConfig mc = c.mc;
  if (c.subcommand == "loc-scale-check" && !c.n_sim_given) mc.n_sim = kLocScaleDefaultSims;
  return mc;
}

void merge_config(PValueReport& report, const RunConfig& config) {
  nlohmann::ordered_json j = config_json(config);
  for (const auto& [key, value] : report.config.items()) {
    if (!j.contains(key)) j[key] = value;
  }
  report.config = j;
}

Density1D density_by_name(const std::string& name) {
  if (name == "normal") return Density1D::normal();
  if (name == "laplace") return Density1D::laplace();
  if (name == "uniform") return Density1D::uniform();
  if (name == "exponential") return Density1D::exponential();
  throw ValidationError("unknown density '" + name + "' (expected normal, laplace, uniform or exponential)");
}

Sample require_input(const RunConfig& c) {
  if (!c.input_path) throw ValidationError(c.subcommand + " needs an input CSV file");
  return ingest_csv(*c.input_path);
}

PValueReport run_pvalue(const RunConfig& c) {
  PValueReport r;
  r.method = "closed form";
  if (c.dist == "chisq") {
    r.statistic_name = "chisq";
    r.t_observed = {c.t0};
    r.p_invariant = chisq_invariant_pvalue(c.k, c.t0);
    r.p_plain = chisq_measured_pvalue(c.k, c.t0);
  } else if (c.dist == "mean") {
    r.statistic_name = "mean";
    r.t_observed = {c.xbar};
    r.p_invariant = mean_stat_pvalue(c.xbar, c.n);
    r.p_plain = r.p_invariant;
  } else if (c.dist == "jb") {
    r.statistic_name = "jb";
    r.t_observed = {c.t0};
    r.p_invariant = jb_asymptotic_pvalue(c.t0);
    r.p_asymptotic = r.p_invariant;
    r.method = "asymptotic chi-square(2) tail";
  } else {
    throw ValidationError("unknown distribution '" + c.dist + "' for pvalue (expected chisq, mean or jb)");
  }
  return r;
}

PValueReport run_discrete(const RunConfig& c) {
  if (c.discrete_dist != "poisson" && c.discrete_dist != "binomial") {
    throw ValidationError("unknown distribution '" + c.discrete_dist +
                          "' for discrete (expected poisson or binomial)");
  }
  const FinitePmf<long long> pmf = c.discrete_dist == "poisson" ? truncated_poisson(c.lambda, c.max)
                                                                : binomial_pmf(c.size, c.prob);
  PValueReport r;
  r.statistic_name = c.discrete_dist;
  r.t_observed = {static_cast<double>(c.outcome)};
  r.p_invariant = discrete_pvalue(pmf, c.outcome);
  r.method = "exact enumeration";
  return r;
}

}  // namespace

Sample ingest_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file " + path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = trim(line);
    if (line_no == 1 && text.rfind("\xEF\xBB\xBF", 0) == 0) text = trim(text.substr(3));
    if (text.empty()) continue;
    const auto v = parse_number(text);
    if (!v) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ValidationError(path + ":" + std::to_string(line_no) + ": cannot parse '" + text + "' as a number");
    }
    first = false;
    if (!std::isfinite(*v)) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": non-finite value");
    }
    values.push_back(*v);
  }
  if (values.empty()) throw ValidationError("no data values in " + path);
  return Sample(std::move(values));
}

nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["subcommand"] = c.subcommand;
  if (c.input_path) j["input"] = *c.input_path;
  j["out"] = c.output_dir;
  if (is_monte_carlo(c.subcommand)) {
    const MonteCarloConfig mc = effective_mc(c);
    j["n_sim"] = mc.n_sim;
    j["seed"] = mc.seed;
    j["chunk_size"] = mc.chunk_size;
    j["bandwidth"] = mc.bandwidth ? nlohmann::ordered_json(*mc.bandwidth) : nlohmann::ordered_json();
    j["grid_size"] = mc.grid_size;
  }
  if (c.subcommand == "check-normal") {
    j["statistic"] = c.statistic;
  } else if (c.subcommand == "pvalue") {
    j["dist"] = c.dist;
    if (c.dist == "chisq") {
      j["k"] = c.k;
      j["t0"] = c.t0;
    } else if (c.dist == "mean") {
      j["xbar"] = c.xbar;
      j["n"] = c.n;
    } else {
      j["t0"] = c.t0;
    }
  } else if (c.subcommand == "discrete") {
    j["dist"] = c.discrete_dist;
    if (c.discrete_dist == "poisson") {
      j["lambda"] = c.lambda;
      j["max"] = c.max;
    } else {
      j["size"] = c.size;
      j["prob"] = c.prob;
    }
    j["t0"] = c.outcome;
  } else if (c.subcommand == "discretize-demo") {
    j["density"] = c.density;
    j["x0"] = c.x0;
    j["from"] = c.from;
    j["to"] = c.to;
    j["anchor"] = c.anchor;
  } else if (c.subcommand == "loc-scale-check") {
    j["model"] = c.model;
  } else if (c.subcommand == "contour") {
    j["n"] = c.n;
    j["alpha"] = c.alpha;
  }
  return j;
}

int run(const RunConfig& c, std::ostream& err) {
  try {
    const std::filesystem::path out_dir(c.output_dir);
    const MonteCarloConfig mc = effective_mc(c);
    if (is_monte_carlo(c.subcommand)) mc.validate();
    PValueReport report;

    if (c.subcommand == "check-normal") {
      NormalCheckRequest request{require_input(c), parse_normal_statistic(c.statistic), mc};
      const NormalCheckResult result = check_normal(request);
      report = result.report;
      std::filesystem::create_directories(out_dir);
      write_file(out_dir / "density.csv", density_csv(result.curve));
    } else if (c.subcommand == "pvalue") {
      report = run_pvalue(c);
    } else if (c.subcommand == "discrete") {
      report = run_discrete(c);
    } else if (c.subcommand == "discretize-demo") {
      if (c.from > c.to) throw ValidationError("--from must not exceed --to");
      const Density1D f = density_by_name(c.density);
      const auto rows = convergence_sweep(f, c.x0, halving_widths(c.from, c.to), c.anchor);
      report.statistic_name = "identity";
      report.t_observed = {c.x0};
      report.p_invariant = rows.back().p_continuous;
      report.method = "nested equal-width partitions against the continuous density P-value";
      report.config["finest_width"] = rows.back().width;
      report.config["p_discrete_finest"] = rows.back().p_discrete;
      report.config["gap_finest"] = rows.back().gap;
      std::filesystem::create_directories(out_dir);
      write_file(out_dir / "convergence.csv", convergence_csv(rows));
    } else if (c.subcommand == "loc-scale-check") {
      report = loc_scale_pvalue(require_input(c), LocScaleModel::parse(c.model), mc);
    } else if (c.subcommand == "contour") {
      if (c.n < 8) throw ValidationError("contour needs --n >= 8");
      const AlphaContour contour = alpha_contour_t3t4(static_cast<std::size_t>(c.n), c.alpha, mc);
      report.statistic_name = "t3t4";
      report.p_invariant = c.alpha;
      report.p_plain = c.alpha;
      report.p_asymptotic = c.alpha;
      report.n_sim = mc.n_sim;
      report.seed = mc.seed;
      report.bandwidth = contour.curve.bandwidth;
      report.method = "level-alpha contours; P-value fields give the contour level";
      report.config["level_star"] = contour.level_star;
      report.config["level_plain"] = contour.level_plain;
      report.config["invariant_curves"] = contour.invariant.size();
      report.config["plain_curves"] = contour.plain.size();
      std::filesystem::create_directories(out_dir);
      write_file(out_dir / "contour.csv", contour_csv(contour));
      write_file(out_dir / "density.csv", density_csv(contour.curve));
    } else {
      throw ValidationError("unknown subcommand '" + c.subcommand + "'");
    }

    merge_config(report, c);
    report.check_invariants();
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "report.json", dump_report(report));
    return kOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

int main_entry(int argc, const char* const* argv) {
  CLI::App app{"Invariant P-values: model checks, closed forms and plot data"};
  app.require_subcommand(1);
  RunConfig c;
  std::string input;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", c.output_dir, "Output directory")->capture_default_str();
  };
  auto add_mc = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option_function<std::size_t>(
        "--n-sim", [&](std::size_t v) { c.mc.n_sim = v; c.n_sim_given = true; },
        "Monte-Carlo draws (default 200000; 2000 for loc-scale-check)");
    sub->add_option("--seed", c.mc.seed, "Master seed")->capture_default_str();
    sub->add_option("--chunk-size", c.mc.chunk_size, "Draws per RNG substream")->capture_default_str();
    sub->add_option_function<double>("--bandwidth", [&](double v) { c.mc.bandwidth = v; },
                                     "Fixed KDE bandwidth (default: Silverman rule)");
    sub->add_option("--grid-size", c.mc.grid_size, "Density grid points per axis (floor)")->capture_default_str();
    sub->add_option("--workers", c.mc.workers, "Worker threads (0 = all cores; output unaffected)")
        ->capture_default_str();
  };

  auto* check = app.add_subcommand("check-normal", "Check normality of a sample");
  check->add_option("input", input, "CSV file, one value per line")->required();
  check->add_option("--stat", c.statistic, "jb, t3t4 or sw")->capture_default_str();
  add_mc(check);

  auto* pvalue = app.add_subcommand("pvalue", "Closed-form P-values");
  pvalue->add_option("--dist", c.dist, "chisq, mean or jb")->capture_default_str();
  pvalue->add_option("--k", c.k, "Chi-square degrees of freedom")->capture_default_str();
  pvalue->add_option("--t0", c.t0, "Observed statistic")->capture_default_str();
  pvalue->add_option("--xbar", c.xbar, "Observed mean (dist mean)")->capture_default_str();
  pvalue->add_option("--n", c.n, "Sample size (dist mean)")->capture_default_str();
  add_common(pvalue);

  auto* discrete = app.add_subcommand("discrete", "Exact discrete P-value");
  discrete->add_option("--dist", c.discrete_dist, "poisson or binomial")->capture_default_str();
  discrete->add_option("--lambda", c.lambda, "Poisson mean")->capture_default_str();
  discrete->add_option("--max", c.max, "Poisson truncation point")->capture_default_str();
  discrete->add_option("--size", c.size, "Binomial size")->capture_default_str();
  discrete->add_option("--prob", c.prob, "Binomial success probability")->capture_default_str();
  discrete->add_option("--t0", c.outcome, "Observed outcome")->required();
  add_common(discrete);

  auto* demo = app.add_subcommand("discretize-demo", "Partition P-values converging to the continuous one");
  demo->add_option("--density", c.density, "normal, laplace, uniform or exponential")->capture_default_str();
  demo->add_option("--x0", c.x0, "Observation")->capture_default_str();
  demo->add_option("--from", c.from, "Coarsest width exponent (width 2^-from)")->capture_default_str();
  demo->add_option("--to", c.to, "Finest width exponent")->capture_default_str();
  demo->add_option("--anchor", c.anchor, "Partition anchor")->capture_default_str();
  add_common(demo);

  auto* loc = app.add_subcommand("loc-scale-check", "Location-scale model check");
  loc->add_option("input", input, "CSV file, one value per line")->required();
  loc->add_option("--model", c.model, "normal, laplace, logistic or student_t(<df>)")->capture_default_str();
  add_mc(loc);

  auto* contour = app.add_subcommand("contour", "Level-alpha contours of (T3, T4)");
  contour->add_option("--n", c.n, "Sample size")->capture_default_str();
  contour->add_option("--alpha", c.alpha, "Contour level")->capture_default_str();
  add_mc(contour);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  for (auto* sub : app.get_subcommands()) c.subcommand = sub->get_name();
  if (!input.empty()) c.input_path = input;
  return run(c, std::cerr);
}

}  // namespace invp::cli
