#include "invp/loc_scale.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "invp/numerics.hpp"
#include "invp/parallel.hpp"

namespace invp {

namespace {

constexpr long double kSnap = 0x1.0p32L;
constexpr double kInnerTol = 1e-10;
constexpr double kOuterTol = 1e-8;
constexpr double kTailFraction = 1e-11;  // stop once a doubling segment adds less

template <class T>
T median_sorted(const std::vector<T>& v, std::size_t begin, std::size_t end) {
  const std::size_t len = end - begin;
  const std::size_t mid = begin + len / 2;
  if (len % 2 == 1) return v[mid];
  return (v[mid - 1] + v[mid]) / 2;
}

template <class T>
void quartiles_sorted(const std::vector<T>& s, T& q1, T& med, T& q3) {
  const std::size_t n = s.size();
  const std::size_t half = n / 2;
  med = median_sorted(s, 0, n);
  q1 = median_sorted(s, 0, half);
  q3 = median_sorted(s, n - half, n);
}

double parse_df(const std::string& text, const std::string& label) {
  double df = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), df);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ValidationError("cannot read degrees of freedom in model '" + label + "'");
  }
  return df;
}

}  // namespace

LocScaleModel LocScaleModel::parse(const std::string& label) {
  if (label == "normal") return normal();
  if (label == "laplace") return laplace();
  if (label == "logistic") return logistic();
  LocScaleModel m;
  const std::string prefix = "student_t(";
  if (label.rfind(prefix, 0) == 0 && label.size() > prefix.size() + 1 && label.back() == ')') {
    m = student_t(parse_df(label.substr(prefix.size(), label.size() - prefix.size() - 1), label));
  } else if (label.size() > 1 && label[0] == 't') {
    m = student_t(parse_df(label.substr(1), label));
  } else {
    throw ValidationError("unknown model '" + label +
                          "' (expected normal, laplace, logistic or student_t(<df>))");
  }
  m.validate();
  return m;
}

std::string LocScaleModel::label() const {
  switch (family) {
    case BaseFamily::normal:
      return "normal";
    case BaseFamily::student_t:
      return "student_t(" + format_number(df) + ")";
    case BaseFamily::laplace:
      return "laplace";
    case BaseFamily::logistic:
      return "logistic";
  }
  return "?";
}

double LocScaleModel::log_kernel(double z) const {
  switch (family) {
    case BaseFamily::normal:
      return -0.5 * z * z;
    case BaseFamily::student_t:
      return -0.5 * (df + 1.0) * std::log1p(z * z / df);
    case BaseFamily::laplace:
      return -std::abs(z);
    case BaseFamily::logistic: {
      const double a = std::abs(z);
      return -a - 2.0 * std::log1p(std::exp(-a));
    }
  }
  return -INFINITY;
}

double LocScaleModel::log_norm() const {
  switch (family) {
    case BaseFamily::normal:
      return -0.5 * std::log(2.0 * std::numbers::pi);
    case BaseFamily::student_t:
      return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi);
    case BaseFamily::laplace:
      return -std::numbers::ln2;
    case BaseFamily::logistic:
      return 0.0;
  }
  return 0.0;
}

double LocScaleModel::log_kernel_sum(double a, double c, const std::vector<double>& u) const {
  double s = 0.0;
  switch (family) {
    case BaseFamily::normal:
    case BaseFamily::laplace:
      for (double e : u) s += log_kernel(a + c * e);
      return s;
    case BaseFamily::student_t: {
      // Multiply the (1 + z^2/df) factors, taking a log only when large.
      double prod = 1.0;
      double log_prod = 0.0;
      for (double e : u) {
        const double z = a + c * e;
        prod *= 1.0 + z * z / df;
        if (prod > 1e200) {
          log_prod += std::log(prod);
          prod = 1.0;
        }
      }
      return -0.5 * (df + 1.0) * (log_prod + std::log(prod));
    }
    case BaseFamily::logistic: {
      double prod = 1.0;
      for (double e : u) {
        const double z = std::abs(a + c * e);
        s -= z;
        prod *= 1.0 + std::exp(-z);  // each factor lies in (1, 2]
        if (prod > 1e200) {
          s -= 2.0 * std::log(prod);
          prod = 1.0;
        }
      }
      return s - 2.0 * std::log(prod);
    }
  }
  return s;
}

double LocScaleModel::pdf(double z) const { return std::exp(log_pdf(z)); }

double LocScaleModel::sample(StreamRng& rng) const {
  switch (family) {
    case BaseFamily::normal:
      return rng.normal();
    case BaseFamily::student_t:
      return boost::math::quantile(boost::math::students_t(df), rng.uniform_open());
    case BaseFamily::laplace: {
      const double u = rng.uniform_open() - 0.5;
      return u < 0.0 ? std::log1p(2.0 * u) : -std::log1p(-2.0 * u);
    }
    case BaseFamily::logistic: {
      const double u = rng.uniform_open();
      return std::log(u / (1.0 - u));
    }
  }
  return 0.0;
}

void LocScaleModel::validate() const {
  if (family == BaseFamily::student_t && !(df > 0.0 && std::isfinite(df))) {
    throw ValidationError("student_t degrees of freedom must be positive");
  }
  auto f = [this](double z) { return pdf(z); };
  const double total = num::integrate(f, -INFINITY, 0.0, 1e-12).value +
                       num::integrate(f, 0.0, INFINITY, 1e-12).value;
  if (std::abs(total - 1.0) > 1e-8) {
    throw ValidationError("base density of model " + label() + " integrates to " +
                          format_number(total));
  }
}

Quartiles quartiles(std::vector<double> values) {
  if (values.size() < 4) throw ValidationError("quartiles need at least 4 observations");
  std::sort(values.begin(), values.end());
  Quartiles q;
  quartiles_sorted(values, q.q1, q.median, q.q3);
  return q;
}

AncillaryU ancillary_u(const Sample& x) {
  const std::size_t n = x.size();
  if (n < 4) throw ValidationError("the location-scale ancillary needs n >= 4");
  std::vector<long double> s(x.values().begin(), x.values().end());
  std::sort(s.begin(), s.end());
  long double q1 = 0, med = 0, q3 = 0;
  quartiles_sorted(s, q1, med, q3);
  if (!(q3 > q1)) throw ValidationError("zero interquartile range: the ancillary is undefined");

  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long double v = (static_cast<long double>(x[i]) - med) / (q3 - q1);
    u[i] = static_cast<double>(std::nearbyint(v * kSnap) / kSnap);
  }
  std::vector<double> su(u);
  std::sort(su.begin(), su.end());
  double uq1 = 0, umed = 0, uq3 = 0;
  quartiles_sorted(su, uq1, umed, uq3);
  if (!(uq3 > uq1)) throw ValidationError("zero interquartile range: the ancillary is undefined");
  const double iqr = uq3 - uq1;
  for (double& e : u) e = (e - umed) / iqr;
  return {std::move(u)};
}

double normal_inner_closed_form(const std::vector<double>& u, double c) {
  const double n = static_cast<double>(u.size());
  double sum = 0.0;
  double ss = 0.0;
  for (double e : u) {
    sum += e;
    ss += e * e;
  }
  const double spread = ss - sum * sum / n;
  return std::pow(2.0 * std::numbers::pi, -0.5 * (n - 1.0)) / std::sqrt(n) *
         std::exp(-0.5 * c * c * spread);
}

double inner_integral(const std::vector<double>& u, const LocScaleModel& model, double c) {
  if (u.empty()) throw ValidationError("empty configuration");
  const double log_norm = static_cast<double>(u.size()) * model.log_norm();
  const auto [umin, umax] = std::minmax_element(u.begin(), u.end());
  // Beyond this margin outside the hull every factor is in its tail; for the
  // exponential-tailed bases the product has dropped below e^-30 there.
  const double margin = 1.0 + 30.0 / static_cast<double>(u.size());
  const double lo = -c * *umax - margin;
  const double hi = -c * *umin + margin;
  std::vector<double> cuts{lo, hi};
  if (model.family == BaseFamily::laplace || (model.family == BaseFamily::student_t && c > 2.0)) {
    // Kinks (Laplace) or separated peaks (heavy tails, large c) at a = -c u_i.
    for (double e : u) cuts.push_back(-c * e);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  }
  auto log_product = [&](double a) { return model.log_kernel_sum(a, c, u); };
  // Integrate exp(log_product - shift) with the shift at the best cut point,
  // so the quadrature works on values of order one.
  double shift = log_product(0.0);
  for (double a : cuts) shift = std::max(shift, log_product(a));
  auto integrand = [&](double a) { return std::exp(log_product(a) - shift); };
  const double abs_floor = 1e-3 * kInnerTol;
  double central = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    central += num::integrate(integrand, cuts[k], cuts[k + 1], kInnerTol, abs_floor).value;
  }
  // Heavy tails: add the mass beyond the margin unless every factor there is
  // already below e^-30 in product.
  const double tail_log = static_cast<double>(u.size()) * model.log_kernel(margin);
  if (model.family == BaseFamily::student_t && tail_log > -30.0) {
    const double floor = kInnerTol * central;
    central += num::integrate(integrand, -INFINITY, lo, kInnerTol, floor).value +
               num::integrate(integrand, hi, INFINITY, kInnerTol, floor).value;
  }
  return central * std::exp(shift + log_norm);
}

double fstar_u(const AncillaryU& u, const LocScaleModel& model) {
  if (u.u.size() < 2) throw ValidationError("configuration too short");
  std::function<double(double)> inner;
  if (model.family == BaseFamily::normal) {
    inner = [&](double c) { return normal_inner_closed_form(u.u, c); };
  } else {
    inner = [&](double c) { return inner_integral(u.u, model, c); };
  }
  double total = num::integrate(inner, 0.0, 1.0, kOuterTol).value;
  double c_max = 1.0;
  for (int k = 0; k < 64; ++k) {
    const double seg = num::integrate(inner, c_max, 2.0 * c_max, kOuterTol, 1e-3 * kTailFraction * total).value;
    total += seg;
    c_max *= 2.0;
    if (seg <= kTailFraction * total) {
      if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericalError("corrected density of u is not a positive finite number");
      }
      return total;
    }
  }
  throw NumericalError("outer integral did not settle by c = " + format_number(c_max));
}

std::vector<double> loc_scale_reference(std::size_t n, const LocScaleModel& model,
                                        const MonteCarloConfig& config) {
  if (n < 4) throw ValidationError("the location-scale ancillary needs n >= 4");
  config.validate();
  std::vector<double> values(config.n_sim);
  const std::size_t chunks = (config.n_sim + config.chunk_size - 1) / config.chunk_size;
  parallel_for(chunks, config.resolved_workers(), [&](std::size_t c) {
    StreamRng rng(config.seed, c);
    std::vector<double> z(n);
    const std::size_t end = std::min(config.n_sim, (c + 1) * config.chunk_size);
    for (std::size_t i = c * config.chunk_size; i < end; ++i) {
      while (true) {
        for (double& e : z) e = model.sample(rng);
        const Quartiles q = quartiles(z);
        if (q.q3 > q.q1) break;  // ties have probability zero; redraw
      }
      values[i] = fstar_u(ancillary_u(Sample(z)), model);
    }
  });
  return values;
}

PValueReport loc_scale_pvalue(const Sample& x0, const LocScaleModel& model,
                              const MonteCarloConfig& config) {
  static_cast<void>(ancillary_u(x0));  // rejects bad data before simulating
  model.validate();
  return loc_scale_pvalue(x0, model, config, loc_scale_reference(x0.size(), model, config));
}

PValueReport loc_scale_pvalue(const Sample& x0, const LocScaleModel& model,
                              const MonteCarloConfig& config,
                              const std::vector<double>& reference) {
  config.validate();
  if (reference.size() != config.n_sim) {
    throw ValidationError("reference size does not match n_sim");
  }
  const AncillaryU u0 = ancillary_u(x0);
  const double v0 = fstar_u(u0, model);
  std::size_t count = 0;
  for (double v : reference) count += v <= v0 ? 1 : 0;
  const double total = static_cast<double>(reference.size());
  const double p = static_cast<double>(count) / total;

  PValueReport r;
  r.statistic_name = "u";
  r.t_observed = {v0};
  r.p_invariant = p;
  r.mc_standard_error = std::sqrt(p * (1.0 - p) / total);
  r.n_sim = config.n_sim;
  r.seed = config.seed;
  r.method = "location-scale ancillary; corrected density by double quadrature";
  nlohmann::ordered_json j;
  j["model"] = model.label();
  j["n"] = x0.size();
  j["n_sim"] = config.n_sim;
  j["seed"] = config.seed;
  j["chunk_size"] = config.chunk_size;
  j["u_observed"] = u0.u;
  r.config = j;
  r.check_invariants();
  return r;
}

}  // namespace invp
