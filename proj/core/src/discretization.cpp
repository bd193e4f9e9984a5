#include "invp/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "invp/core.hpp"
#include "invp/discrete.hpp"
#include "invp/numerics.hpp"
#include "invp/parallel.hpp"

namespace invp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailMass = 0.5e-12;  // per side

}  // namespace

Density1D Density1D::normal(double mean, double sd) {
  if (!(sd > 0.0)) throw ValidationError("normal sd must be positive");
  Density1D f;
  f.name = "normal";
  f.pdf = [=](double x) { return num::normal_pdf((x - mean) / sd) / sd; };
  f.cdf = [=](double x) { return num::normal_cdf((x - mean) / sd); };
  f.sf = [=](double x) { return num::normal_sf((x - mean) / sd); };
  f.lo = -kInf;
  f.hi = kInf;
  const double z = -num::normal_quantile(kTailMass);
  f.enum_lo = mean - z * sd;
  f.enum_hi = mean + z * sd;
  f.center = mean;
  f.turning_points = {mean};
  return f;
}

Density1D Density1D::laplace(double location, double scale) {
  if (!(scale > 0.0)) throw ValidationError("laplace scale must be positive");
  Density1D f;
  f.name = "laplace";
  f.pdf = [=](double x) { return 0.5 / scale * std::exp(-std::abs(x - location) / scale); };
  f.cdf = [=](double x) {
    const double z = (x - location) / scale;
    return z <= 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
  };
  f.sf = [=](double x) {
    const double z = (x - location) / scale;
    return z >= 0.0 ? 0.5 * std::exp(-z) : 1.0 - 0.5 * std::exp(z);
  };
  f.lo = -kInf;
  f.hi = kInf;
  const double z = -std::log(2.0 * kTailMass);
  f.enum_lo = location - z * scale;
  f.enum_hi = location + z * scale;
  f.center = location;
  f.turning_points = {location};
  return f;
}

Density1D Density1D::uniform(double a, double b) {
  if (!(b > a)) throw ValidationError("uniform requires a < b");
  Density1D f;
  f.name = "uniform";
  f.pdf = [=](double x) { return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0; };
  f.cdf = [=](double x) { return x <= a ? 0.0 : x >= b ? 1.0 : (x - a) / (b - a); };
  f.sf = [=](double x) { return x <= a ? 1.0 : x >= b ? 0.0 : (b - x) / (b - a); };
  f.lo = f.enum_lo = a;
  f.hi = f.enum_hi = b;
  f.center = 0.5 * (a + b);
  return f;
}

Density1D Density1D::exponential(double rate) {
  if (!(rate > 0.0)) throw ValidationError("exponential rate must be positive");
  Density1D f;
  f.name = "exponential";
  f.pdf = [=](double x) { return x < 0.0 ? 0.0 : rate * std::exp(-rate * x); };
  f.cdf = [=](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); };
  f.sf = [=](double x) { return x <= 0.0 ? 1.0 : std::exp(-rate * x); };
  f.lo = f.enum_lo = 0.0;
  f.hi = kInf;
  f.enum_hi = -std::log(2.0 * kTailMass) / rate;
  f.center = std::log(2.0) / rate;
  return f;
}

double Density1D::mass(double a, double b) const {
  a = std::max(a, lo);
  b = std::min(b, hi);
  if (!(b > a)) return 0.0;
  if (cdf) {
    auto upper = [this](double x) { return sf ? sf(x) : 1.0 - cdf(x); };
    if (b <= center) return cdf(b) - cdf(a);
    if (a >= center) return upper(a) - upper(b);
    return 1.0 - cdf(a) - upper(b);
  }
  return num::integrate(pdf, a, b, 1e-10).value;
}

void validate_density(const Density1D& f) {
  if (!f.pdf) throw ValidationError("density has no pdf");
  if (!(f.enum_hi > f.enum_lo)) throw ValidationError("density enumeration range is empty");
  for (int i = 0; i <= 1000; ++i) {
    const double x = f.enum_lo + (f.enum_hi - f.enum_lo) * i / 1000.0;
    const double v = f.pdf(x);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("pdf of " + f.name + " is negative or non-finite at " +
                            std::to_string(x));
    }
  }
  std::vector<double> cuts{f.lo};
  cuts.insert(cuts.end(), f.turning_points.begin(), f.turning_points.end());
  cuts.push_back(f.hi);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += num::integrate(f.pdf, cuts[i], cuts[i + 1], 1e-9).value;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ValidationError("pdf of " + f.name + " integrates to " + std::to_string(total));
  }
}

long long Partition1D::cell_index(double x) const {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw ValidationError("partition width must be positive and finite");
  }
  return static_cast<long long>(std::ceil((x - anchor) / width));
}

double cell_probability(const Density1D& f, const Partition1D& partition, double x) {
  if (!f.contains(x)) {
    throw ValidationError("point " + std::to_string(x) + " is outside the support of " + f.name);
  }
  const long long i = partition.cell_index(x);
  return f.mass(partition.cell_lower(i), partition.cell_upper(i));
}

double partition_pvalue(const Density1D& f, const Partition1D& partition, double x0) {
  const double p0 = cell_probability(f, partition, x0);
  const double threshold = round_significant(p0);
  const long long first = partition.cell_index(f.enum_lo);
  const long long last = partition.cell_index(f.enum_hi);
  const auto count = static_cast<std::size_t>(last - first + 1);
  if (count > (std::size_t{1} << 28)) {
    throw ValidationError("partition too fine for the enumeration range");
  }

  std::vector<double> qualifying(count, 0.0);
  bool first_qualifies = false;
  bool last_qualifies = false;
  for (std::size_t k = 0; k < count; ++k) {
    const long long i = first + static_cast<long long>(k);
    const double p = f.mass(partition.cell_lower(i), partition.cell_upper(i));
    if (round_significant(p) <= threshold) {
      qualifying[k] = p;
      if (k == 0) first_qualifies = true;
      if (k + 1 == count) last_qualifies = true;
    }
  }
  double total = pairwise_sum(qualifying);
  const double left_tail = f.mass(-std::numeric_limits<double>::infinity(), partition.cell_lower(first));
  const double right_tail = f.mass(partition.cell_upper(last), std::numeric_limits<double>::infinity());
  if (first_qualifies) total += left_tail;
  if (last_qualifies) total += right_tail;
  return std::clamp(total, 0.0, 1.0);
}

double continuous_density_pvalue(const Density1D& f, double x0) {
  if (!f.contains(x0)) {
    throw ValidationError("point " + std::to_string(x0) + " is outside the support of " + f.name);
  }
  const double level = f.pdf(x0);
  if (!std::isfinite(level)) throw NumericalError("pdf is not finite at the observed point");

  std::vector<double> cuts{f.enum_lo};
  for (double t : f.turning_points) {
    if (t > f.enum_lo && t < f.enum_hi) cuts.push_back(t);
  }
  cuts.push_back(f.enum_hi);

  // Region boundaries at the enumeration limits extend to the true support.
  auto outer = [&](double x) {
    if (x == f.enum_lo) return f.lo;
    if (x == f.enum_hi) return f.hi;
    return x;
  };

  auto root = [&](double a, double b, bool increasing) {
    // Invariant: pdf <= level on the "low" end, pdf > level on the other.
    for (int it = 0; it < 400 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      const double v = f.pdf(m);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "failed to bracket level-set root of " << f.name << " near " << m;
        throw NumericalError(msg.str());
      }
      if ((v <= level) == increasing) {
        a = m;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const double fa = f.pdf(a);
    const double fb = f.pdf(b);
    if (!std::isfinite(fa) || !std::isfinite(fb)) {
      throw NumericalError("failed to bracket level-set root: pdf not finite on piece");
    }
    const bool a_in = fa <= level;
    const bool b_in = fb <= level;
    if (a_in && b_in) {
      total += f.mass(outer(a), outer(b));
    } else if (!a_in && !b_in) {
      continue;
    } else if (a_in) {  // rising piece: [a, r]
      total += f.mass(outer(a), root(a, b, true));
    } else {  // falling piece: [r, b]
      total += f.mass(root(a, b, false), outer(b));
    }
  }
  return std::clamp(total, 0.0, 1.0);
}

std::vector<double> halving_widths(int from, int to) {
  std::vector<double> widths;
  for (int k = from; k <= to; ++k) widths.push_back(std::ldexp(1.0, -k));
  return widths;
}

std::vector<ConvergenceRow> convergence_sweep(const Density1D& f, double x0,
                                              const std::vector<double>& widths, double anchor) {
  if (widths.empty()) throw ValidationError("no widths given");
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (!(widths[i] > 0.0)) throw ValidationError("widths must be positive");
    if (i > 0) {
      const double ratio = widths[i - 1] / widths[i];
      if (!(ratio >= 1.5) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
        throw ValidationError("widths must be nested: each an integer divisor of the previous");
      }
    }
  }
  const double p_cont = continuous_density_pvalue(f, x0);
  std::vector<ConvergenceRow> rows;
  rows.reserve(widths.size());
  for (double w : widths) {
    const double p = partition_pvalue(f, Partition1D{w, anchor}, x0);
    rows.push_back({w, p, p_cont, std::abs(p - p_cont)});
  }
  return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "width,p_discrete,p_continuous,gap\n";
  for (const auto& r : rows) {
    out += format_number(r.width) + ',' + format_number(r.p_discrete) + ',' +
           format_number(r.p_continuous) + ',' + format_number(r.gap) + '\n';
  }
  return out;
}

}  // namespace invp
