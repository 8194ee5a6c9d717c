#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <vector>

#include "walshgraph/common.hpp"
#include "walshgraph/piecewise.hpp"

namespace walshgraph {

// =============================================================================
// Quadrature
// =============================================================================

namespace detail {

template <class F>
Real simpson(const F& f, Real a, Real fa, Real b, Real fb, Real fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
Real adaptive_simpson_rec(const F& f, Real a, Real fa, Real b, Real fb, Real m, Real fm,
                          Real whole, Real tol, int depth) {
  const Real lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const Real flm = f(lm), frm = f(rm);
  const Real left = simpson(f, a, fa, m, fm, flm);
  const Real right = simpson(f, m, fm, b, fb, frm);
  const Real delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || (b - a) < 1e-14)
    return left + right + delta / 15.0;
  if (depth <= 0) throw QuadratureFailure("adaptive Simpson: depth exhausted");
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
template <class F>
Real adaptive_simpson(const F& f, Real a, Real b, Real tol, int max_depth = 48) {
  if (a == b) return 0.0;
  const Real m = 0.5 * (a + b);
  const Real fa = f(a), fb = f(b), fm = f(m);
  const Real whole = detail::simpson(f, a, fa, b, fb, fm);
  return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// =============================================================================
// Scale transform
// =============================================================================
//
// The drift-removing change of coordinate
//
//   S(x) = int_0^x exp(-int_0^y 2 a(z) / sigma(z)^2 dz) dy,
//
// so S(0) = 0 and S'(0) = 1. In the new coordinate the motion is in natural
// scale and vertex gluing happens isometrically across rays. We tabulate the
// inner exponent g and S on a grid (table breakpoints included), interpolate
// both with cubic Hermite pieces whose slopes are known exactly
// (g' = 2a/sigma^2, S' = exp(-g)), and accept the map only if halving the
// grid moves S by less than 1e-8 relative.

class ScaleMap {
 public:
  /// Identity map (zero drift).
  static ScaleMap identity(Real x_max) {
    ScaleMap m;
    m.identity_ = true;
    m.x_max_ = x_max;
    return m;
  }

  static ScaleMap tabulated(std::vector<Real> x, std::vector<Real> g, std::vector<Real> gp) {
    ScaleMap m;
    m.identity_ = false;
    m.x_ = std::move(x);
    m.g_ = std::move(g);
    m.gp_ = std::move(gp);
    m.x_max_ = m.x_.back();
    m.s_.assign(m.x_.size(), 0.0);
    m.sp_.assign(m.x_.size(), 0.0);
    for (std::size_t i = 0; i < m.x_.size(); ++i) m.sp_[i] = std::exp(-m.g_[i]);
    for (std::size_t i = 1; i < m.x_.size(); ++i) {
      const Real a = m.x_[i - 1], b = m.x_[i];
      const Real integral = adaptive_simpson(
          [&](Real y) { return std::exp(-m.hermite(m.g_, m.gp_, y)); }, a, b, 1e-13);
      m.s_[i] = m.s_[i - 1] + integral;
    }
    return m;
  }

  bool is_identity() const { return identity_; }
  Real x_max() const { return x_max_; }
  Real s_max() const { return identity_ ? x_max_ : s_.back(); }

  /// S(x); x must lie in [0, x_max].
  Real forward(Real x) const {
    if (identity_) return x;
    check_domain(x);
    return hermite(s_, sp_, x);
  }

  /// S'(x) = exp(-g(x)).
  Real derivative(Real x) const {
    if (identity_) return 1.0;
    check_domain(x);
    return std::exp(-hermite(g_, gp_, x));
  }

  /// S^{-1}(s) by bracketed Newton on the monotone interpolant.
  Real inverse(Real s) const {
    if (identity_) return s;
    if (s <= 0.0) return 0.0;
    if (s >= s_.back()) return x_.back();
    std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(s_.begin(), s_.end(), s) - s_.begin());
    std::size_t lo = hi - 1;
    Real a = x_[lo], b = x_[hi];
    Real x = a + (b - a) * (s - s_[lo]) / (s_[hi] - s_[lo]);
    for (int it = 0; it < 100; ++it) {
      const Real fx = hermite(s_, sp_, x) - s;
      if (std::abs(fx) < 1e-14 * std::max(Real(1), std::abs(s))) break;
      if (fx > 0.0)
        b = x;
      else
        a = x;
      const Real dfx = std::exp(-hermite(g_, gp_, x));
      Real next = x - fx / dfx;
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      x = next;
    }
    return x;
  }

 private:
  void check_domain(Real x) const {
    if (x < -1e-12 || x > x_max_ * (1.0 + 1e-12) + 1e-12)
      throw Error("ScaleMap: coordinate " + std::to_string(x) + " outside [0, " +
                  std::to_string(x_max_) + "]");
  }

  /// Cubic Hermite evaluation of the table (v, dv) at x.
  Real hermite(const std::vector<Real>& v, const std::vector<Real>& dv, Real x) const {
    if (x <= x_.front()) return v.front();
    if (x >= x_.back()) return v.back();
    const std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
    const std::size_t lo = hi - 1;
    const Real h = x_[hi] - x_[lo];
    const Real t = (x - x_[lo]) / h;
    const Real t2 = t * t, t3 = t2 * t;
    return v[lo] * (2 * t3 - 3 * t2 + 1) + h * dv[lo] * (t3 - 2 * t2 + t) +
           v[hi] * (-2 * t3 + 3 * t2) + h * dv[hi] * (t3 - t2);
  }

  bool identity_ = true;
  Real x_max_ = 0.0;
  std::vector<Real> x_, g_, gp_, s_, sp_;
};

/// Builds the scale map of a coefficient pair on [0, x_max]. Starting from
/// the given grid step, the step is halved until two consecutive grids agree
/// to 1e-8 relative everywhere; QuadratureFailure is raised if agreement is
/// not reached before the refinement cap.
inline ScaleMap make_scale_map(const CoefficientSpec& coeffs, Real x_max, Real grid_step) {
  if (!(x_max > 0.0) || !std::isfinite(x_max))
    throw Error("make_scale_map: x_max must be positive and finite");
  if (!(grid_step > 0.0)) throw Error("make_scale_map: grid step must be positive");
  if (coeffs.drift.is_constant_equal(0.0)) return ScaleMap::identity(x_max);

  const auto h_fn = [&](Real z) {
    const Real sigma = coeffs.diffusion(z);
    return 2.0 * coeffs.drift(z) / (sigma * sigma);
  };

  const auto build = [&](Real step) {
    std::set<Real> nodes{0.0, x_max};
    const int cells = std::max(1, static_cast<int>(std::ceil(x_max / step)));
    for (int i = 1; i < cells; ++i) nodes.insert(x_max * Real(i) / Real(cells));
    const auto add_breaks = [&](const Coefficient& c) {
      if (!c.is_constant())
        for (Real b : c.table().breakpoints())
          if (b > 0.0 && b < x_max) nodes.insert(b);
    };
    add_breaks(coeffs.drift);
    add_breaks(coeffs.diffusion);

    std::vector<Real> x(nodes.begin(), nodes.end());
    std::vector<Real> g(x.size(), 0.0), gp(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) gp[i] = h_fn(x[i]);
    for (std::size_t i = 1; i < x.size(); ++i)
      g[i] = g[i - 1] + adaptive_simpson(h_fn, x[i - 1], x[i], 1e-13);
    return ScaleMap::tabulated(std::move(x), std::move(g), std::move(gp));
  };

  const auto agree = [&](const ScaleMap& coarse, const ScaleMap& fine) {
    const int probes = 257;
    for (int i = 0; i <= probes; ++i) {
      const Real x = x_max * Real(i) / Real(probes);
      const Real a = coarse.forward(x), b = fine.forward(x);
      if (std::abs(a - b) > 1e-8 * std::max(Real(1), std::abs(b))) return false;
    }
    return true;
  };

  ScaleMap coarse = build(grid_step);
  Real step = 0.5 * grid_step;
  for (int level = 0; level < 14; ++level, step *= 0.5) {
    ScaleMap fine = build(step);
    if (agree(coarse, fine)) return fine;
    coarse = std::move(fine);
  }
  throw QuadratureFailure("make_scale_map: 1e-8 refinement agreement not reached");
}

// =============================================================================
// Clock
// =============================================================================

/// Discretized additive-functional clock: theta maps intrinsic (Brownian)
/// time to process time and is nondecreasing; tau is its generalized
/// inverse. Built by appending per-step increments.
class Clock {
 public:
  Clock() : u_{0.0}, theta_{0.0} {}

  void append(Real du, Real dtheta) {
    if (du < 0.0 || dtheta < 0.0) throw Error("Clock: increments must be nonnegative");
    u_.push_back(u_.back() + du);
    theta_.push_back(theta_.back() + dtheta);
  }

  Real total_u() const { return u_.back(); }
  Real total_theta() const { return theta_.back(); }

  /// theta(u) by linear interpolation.
  Real theta_at(Real u) const { return interp(u_, theta_, u); }

  /// tau(t) = inf{u : theta(u) >= t}.
  Real inverse_at(Real t) const {
    if (t <= 0.0) return 0.0;
    if (t >= theta_.back()) return u_.back();
    const auto it = std::lower_bound(theta_.begin(), theta_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - theta_.begin());
    const std::size_t lo = hi - 1;
    if (theta_[hi] == theta_[lo]) return u_[lo];
    const Real w = (t - theta_[lo]) / (theta_[hi] - theta_[lo]);
    return u_[lo] + w * (u_[hi] - u_[lo]);
  }

 private:
  static Real interp(const std::vector<Real>& xs, const std::vector<Real>& ys, Real x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const Real w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
  }

  std::vector<Real> u_;
  std::vector<Real> theta_;
};

}  // namespace walshgraph
