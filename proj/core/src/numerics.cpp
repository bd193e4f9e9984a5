#include "invp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "invp/core.hpp"

namespace invp::num {

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double chisq_cdf(double k, double t) {
  if (t <= 0.0) return 0.0;
  return boost::math::gamma_p(0.5 * k, 0.5 * t);
}

double chisq_sf(double k, double t) {
  if (t <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * k, 0.5 * t);
}

double chisq_upper_quantile(double k, double alpha) {
  return boost::math::quantile(
      boost::math::complement(boost::math::chi_squared_distribution<double>(k), alpha));
}

namespace {

struct Piece {
  double a, b, value, error;
};

// One 31-point Gauss-Kronrod pass on [a, b]. The rule is applied on [-1, 1]
// with the Jacobian folded into the integrand, so the error estimate is in
// the units of the integral.
Piece kronrod_piece(const std::function<double(double)>& f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double error = 0.0;
  const double value = gauss_kronrod<double, 31>::integrate(
      [&](double t) { return half * f(mid + half * t); }, -1.0, 1.0, 0, 0.0, &error);
  return {a, b, value, error};
}

}  // namespace

Integral integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                   double abs_tol) {
  if (std::isnan(a) || std::isnan(b)) throw ValidationError("integration bounds must not be NaN");
  if (a == b) return {0.0, 0.0};
  if (a > b) {
    const Integral r = integrate(f, b, a, rel_tol, abs_tol);
    return {-r.value, r.error};
  }
  // Infinite ranges: x = a + t/(1-t) on [a, inf), x = b - t/(1-t) on (-inf, b].
  if (std::isinf(a) && std::isinf(b)) {
    const Integral l = integrate(f, -INFINITY, 0.0, rel_tol, 0.5 * abs_tol);
    const Integral r = integrate(f, 0.0, INFINITY, rel_tol, 0.5 * abs_tol);
    return {l.value + r.value, l.error + r.error};
  }
  if (std::isinf(b)) {
    auto g = [&](double t) {
      const double s = 1.0 - t;
      return s > 0.0 ? f(a + t / s) / (s * s) : 0.0;
    };
    return integrate(g, 0.0, 1.0, rel_tol, abs_tol);
  }
  if (std::isinf(a)) {
    auto g = [&](double t) {
      const double s = 1.0 - t;
      return s > 0.0 ? f(b - t / s) / (s * s) : 0.0;
    };
    return integrate(g, 0.0, 1.0, rel_tol, abs_tol);
  }

  constexpr std::size_t kMaxPieces = 4000;
  auto worse = [](const Piece& x, const Piece& y) { return x.error < y.error; };
  std::vector<Piece> heap{kronrod_piece(f, a, b)};
  double value = heap.front().value;
  double error = heap.front().error;
  auto target = [&] { return std::max(abs_tol, rel_tol * std::abs(value)); };
  while (error > target() && heap.size() < kMaxPieces) {
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Piece worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), worse);
      break;
    }
    const Piece left = kronrod_piece(f, worst.a, mid);
    const Piece right = kronrod_piece(f, mid, worst.b);
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
    // Re-sum from scratch to keep the totals free of drift.
    value = 0.0;
    error = 0.0;
    for (const Piece& p : heap) {
      value += p.value;
      error += p.error;
    }
  }
  if (!std::isfinite(value) || error > target()) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b << "]: value " << value
        << ", achieved error " << error;
    throw NumericalError(msg.str());
  }
  return {value, error};
}

}  // namespace invp::num
