#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "walshgraph/common.hpp"
#include "walshgraph/piecewise.hpp"

namespace walshgraph {

// =============================================================================
// Test functions on a star and the reflected-motion resolvent
// =============================================================================

/// Continuous function on a bundle of rays, polynomial piecewise on each ray
/// and C^2 across piece joins. Feeds the martingale statistics: the
/// generator is A phi = a phi' + sigma^2 phi'' / 2 on each ray and the vertex
/// flux is sum_r p_r (phi^r)'(0).
struct TestFunction {
  std::vector<PiecewisePolynomial> rays;

  static TestFunction constant(std::size_t ray_count, Real c) {
    TestFunction f;
    f.rays.assign(ray_count, PiecewisePolynomial::constant(c));
    return f;
  }

  /// phi^r(x) = slope_r * x. Flux equals sum p_r slope_r.
  static TestFunction linear(const std::vector<Real>& slopes) {
    TestFunction f;
    for (Real s : slopes) f.rays.push_back(PiecewisePolynomial::single(Polynomial({0.0, s})));
    return f;
  }

  std::size_t ray_count() const { return rays.size(); }

  Real value(std::size_t ray, Real x) const { return rays[ray](x); }

  /// Vertex flux Delta_O(phi) = sum_r p_r (phi^r)'(0).
  Real flux(std::span<const Real> weights) const {
    if (weights.size() != rays.size())
      throw ValidationError("flux-weights", "test function", "weight count mismatch");
    Real d = 0.0;
    for (std::size_t r = 0; r < rays.size(); ++r) d += weights[r] * rays[r].derivative_at(0.0);
    return d;
  }

  /// A phi on ray r at x for the given edge coefficients.
  Real generator(std::size_t ray, Real x, const CoefficientSpec& coeffs) const {
    const Real sigma = coeffs.diffusion(x);
    return coeffs.drift(x) * rays[ray].derivative_at(x) +
           0.5 * sigma * sigma * rays[ray].second_derivative_at(x);
  }

  /// Continuity at the vertex and C^2 joins inside each ray.
  void validate() const {
    if (rays.empty()) throw ValidationError("testfn-rays", "test function", "no rays");
    const Real v0 = rays.front()(0.0);
    for (const auto& r : rays)
      if (std::abs(r(0.0) - v0) > 1e-12 * std::max(Real(1), std::abs(v0)))
        throw ValidationError("testfn-vertex-continuity", "test function",
                              "ray values at the vertex differ");
    for (const auto& r : rays) {
      const auto& starts = r.piece_starts();
      for (std::size_t k = 1; k < starts.size(); ++k) {
        const Real x = starts[k];
        const Real eps = 1e-9 * std::max(Real(1), x);
        const Real jumps[3] = {r(x) - r(x - eps) - eps * r.derivative_at(x - eps),
                               r.derivative_at(x) - r.derivative_at(x - eps),
                               r.second_derivative_at(x) - r.second_derivative_at(x - eps)};
        for (Real j : jumps)
          if (std::abs(j) > 1e-6)
            throw ValidationError("testfn-smoothness", "test function",
                                  "piece join is not C^2 at x = " + std::to_string(x));
      }
    }
  }
};

namespace detail {

/// I_n(s, width) = int_0^width u^n e^{-s u} du, width possibly infinite.
/// Upward recurrence for moderate s*width, series for small s*width.
inline Real exp_poly_moment(int n, Real s, Real width) {
  if (!std::isfinite(width)) {
    Real v = 1.0 / s;  // n = 0
    for (int k = 1; k <= n; ++k) v *= Real(k) / s;
    return v;
  }
  const Real sw = s * width;
  if (sw < 0.5) {
    // I_n = width^{n+1} sum_j (-sw)^j / (j! (n+j+1))
    Real term = 1.0;
    Real sum = 1.0 / Real(n + 1);
    for (int j = 1; j < 40; ++j) {
      term *= -sw / Real(j);
      const Real add = term / Real(n + j + 1);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return std::pow(width, n + 1) * sum;
  }
  const Real e = std::exp(-sw);
  Real v = -std::expm1(-sw) / s;  // I_0
  Real wn = 1.0;                  // width^k
  for (int k = 1; k <= n; ++k) {
    wn *= width;
    v = (Real(k) * v - wn * e) / s;
  }
  return v;
}

}  // namespace detail

/// Resolvent at the vertex of the reflected motion applied to a one-ray
/// observable:
///
///   Phi(lambda) = int_0^inf phi(y) sqrt(2/lambda) e^{-sqrt(2 lambda) y} dy.
///
/// Polynomial pieces integrate in closed form, so the value is exact up to
/// rounding; phi == 1 gives 1/lambda.
inline Real reflected_resolvent(Real lambda, const PiecewisePolynomial& phi) {
  if (!(lambda > 0.0)) throw Error("reflected_resolvent: lambda must be positive");
  const Real s = std::sqrt(2.0 * lambda);
  const auto& starts = phi.piece_starts();
  const auto& pieces = phi.pieces();
  Real total = 0.0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const Real a = starts[k];
    const Real width = (k + 1 < starts.size()) ? starts[k + 1] - a : kInfinity;
    const auto& c = pieces[k].coefficients();
    Real piece = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n)
      if (c[n] != 0.0) piece += c[n] * detail::exp_poly_moment(static_cast<int>(n), s, width);
    total += std::exp(-s * a) * piece;
  }
  return std::sqrt(2.0 / lambda) * total;
}

}  // namespace walshgraph
