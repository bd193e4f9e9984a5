#include "invp/sampler.hpp"

#include <cmath>

#include "invp/parallel.hpp"
#include "invp/rng.hpp"

namespace invp {

namespace {

constexpr long double kSnap = 0x1.0p32L;

// Centers and normalizes `v` in place; false when the norm vanishes.
bool center_and_normalize(std::span<long double> v) {
  long double sum = 0.0L;
  for (long double e : v) sum += e;
  const long double mean = sum / static_cast<long double>(v.size());
  long double ss = 0.0L;
  for (long double& e : v) {
    e -= mean;
    ss += e * e;
  }
  if (!(ss > 0.0L)) return false;
  const long double norm = std::sqrt(ss);
  for (long double& e : v) e /= norm;
  return true;
}

}  // namespace

UnitResidual UnitResidual::from_unit(std::vector<double> d) {
  double sum = 0.0;
  double ss = 0.0;
  for (double e : d) {
    sum += e;
    ss += e * e;
  }
  if (std::abs(sum) > 1e-12 || std::abs(std::sqrt(ss) - 1.0) > 1e-12) {
    throw ValidationError("vector is not on the centered unit sphere");
  }
  return UnitResidual(std::move(d));
}

bool standardize_into(std::span<const double> x, std::span<double> out) {
  const std::size_t n = x.size();
  long double buf_small[64];
  std::vector<long double> buf_large;
  std::span<long double> v;
  if (n <= 64) {
    v = {buf_small, n};
  } else {
    buf_large.resize(n);
    v = buf_large;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = x[i];
  if (!center_and_normalize(v)) return false;
  for (long double& e : v) e = std::nearbyint(e * kSnap) / kSnap;
  if (!center_and_normalize(v)) return false;
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(v[i]);
  return true;
}

bool unit_direction(std::span<const double> x, std::span<double> out) {
  const std::size_t n = x.size();
  double sum = 0.0;
  for (double e : x) sum += e;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x[i] - mean;
    ss += out[i] * out[i];
  }
  if (!(ss > 0.0)) return false;
  const double norm = std::sqrt(ss);
  for (std::size_t i = 0; i < n; ++i) out[i] /= norm;
  return true;
}

UnitResidual standardize(const Sample& x) {
  if (x.size() < 3) throw ValidationError("standardization needs at least 3 observations");
  std::vector<double> d(x.size());
  if (x.is_constant() || !standardize_into(x.values(), d)) {
    throw ValidationError("degenerate sample: all observations are equal");
  }
  return UnitResidual(std::move(d));
}

ResidualBatch draw_directions(std::size_t n, const MonteCarloConfig& config) {
  if (n < 3) throw ValidationError("directions need dimension n >= 3");
  config.validate();
  ResidualBatch batch(n, config.n_sim);
  const std::size_t chunks = (config.n_sim + config.chunk_size - 1) / config.chunk_size;
  parallel_for(chunks, config.resolved_workers(), [&](std::size_t c) {
    StreamRng rng(config.seed, c);
    std::vector<double> z(n);
    const std::size_t begin = c * config.chunk_size;
    const std::size_t end = std::min(config.n_sim, begin + config.chunk_size);
    for (std::size_t j = begin; j < end; ++j) {
      // A degenerate normal vector has probability zero; redraw if it occurs.
      do {
        for (double& e : z) e = rng.normal();
      } while (!standardize_into(z, batch.row(j)));
    }
  });
  return batch;
}

}  // namespace invp
