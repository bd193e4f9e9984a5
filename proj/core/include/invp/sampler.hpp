#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "invp/core.hpp"

namespace invp {

/// A point d on the centered unit sphere {d : sum d_i = 0, |d| = 1}.
class UnitResidual {
 public:
  [[nodiscard]] std::span<const double> values() const noexcept { return d_; }
  [[nodiscard]] std::size_t size() const noexcept { return d_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return d_[i]; }

  friend bool operator==(const UnitResidual&, const UnitResidual&) = default;

  /// Wraps an already-standardized vector. Throws ValidationError unless the
  /// sum is 0 and the norm is 1, both within 1e-12.
  static UnitResidual from_unit(std::vector<double> d);

 private:
  explicit UnitResidual(std::vector<double> d) : d_(std::move(d)) {}
  std::vector<double> d_;

  friend UnitResidual standardize(const Sample& x);
};

/// d(x) = (x - mean) / |x - mean|.
///
/// Computed in extended precision and snapped to a 2^-32 lattice before a
/// final recentering and renormalization. The snap makes the result
/// bit-identical for x and a + c x (c > 0) unless a coordinate lies within
/// rounding noise of a lattice midpoint, so reports built on d repeat exactly
/// under affine re-expression of the data.
[[nodiscard]] UnitResidual standardize(const Sample& x);

/// Same computation as standardize() on raw storage. Returns false for a
/// degenerate (constant) input, leaving `out` unspecified.
bool standardize_into(std::span<const double> x, std::span<double> out);

/// Plain floating-point d(x) without snapping: smooth in x, which is what the
/// finite-difference differential of a composed map T(d(x)) needs.
bool unit_direction(std::span<const double> x, std::span<double> out);

/// Row-major batch of directions of common dimension n.
class ResidualBatch {
 public:
  ResidualBatch(std::size_t n, std::size_t count) : n_(n), count_(count), data_(n * count) {}

  [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * n_, n_};
  }
  [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
  [[nodiscard]] const std::vector<double>& raw() const noexcept { return data_; }

  friend bool operator==(const ResidualBatch&, const ResidualBatch&) = default;

 private:
  std::size_t n_;
  std::size_t count_;
  std::vector<double> data_;
};

/// n_sim directions uniform on the centered unit sphere in R^n, each the
/// standardization of n independent N(0, 1) variates.
///
/// Draw j belongs to chunk j / chunk_size; chunk c is generated from
/// substream (seed, c), so the batch is identical for every worker count.
[[nodiscard]] ResidualBatch draw_directions(std::size_t n, const MonteCarloConfig& config);

}  // namespace invp
