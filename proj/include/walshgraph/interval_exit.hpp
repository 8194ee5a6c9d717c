#pragma once

#include <cmath>
#include <numbers>

#include "walshgraph/common.hpp"
#include "walshgraph/rng.hpp"

namespace walshgraph {

// =============================================================================
// Exact two-sided interval exit
// =============================================================================
//
// Joint sampling of (exit side, exit time) for a driftless unit-diffusion
// motion on (0, length) started at x, absorbed at both ends. Edges much
// shorter than the step resolution are traversed with one O(1) draw from
// this law instead of thousands of biased Euler steps.
//
// On the unit interval the sub-distribution of exiting at the upper end is
// available through two complementary series:
//
//   image (small t):    F1(t;x) = sum_{k>=0} erfc((1-x+2k)/sqrt(2t))
//                                        - erfc((1+x+2k)/sqrt(2t))
//   spectral (large t): F1(t;x) = x - sum_{n>=1} (-1)^{n+1} (2/(n pi))
//                                        sin(n pi x) e^{-n^2 pi^2 t / 2}
//
// both truncated at 1e-16; they overlap near t = 0.25 where either converges
// in a handful of terms. Times are drawn by inverting the sub-CDF with
// bracketed Newton; total mass F1(inf;x) = x recovers the classical hit
// probability.

namespace detail {

inline constexpr Real kSeriesSwitchTime = 0.25;

/// Sub-CDF F1(t; x) = P(tau <= t, exit at 1) on the unit interval.
inline Real upper_exit_cdf_unit(Real t, Real x) {
  if (t <= 0.0) return 0.0;
  if (t < kSeriesSwitchTime) {
    const Real inv = 1.0 / std::sqrt(2.0 * t);
    Real sum = 0.0;
    for (int k = 0; k < 16; ++k) {
      const Real lo = (1.0 - x + 2.0 * k) * inv;
      const Real hi = (1.0 + x + 2.0 * k) * inv;
      const Real term = std::erfc(lo) - std::erfc(hi);
      sum += term;
      if (term < 1e-17 && k > 0) break;
    }
    return sum;
  }
  const Real pi = std::numbers::pi_v<Real>;
  Real sum = x;
  Real sign = 1.0;
  for (int n = 1; n < 64; ++n, sign = -sign) {
    const Real rate = 0.5 * Real(n) * Real(n) * pi * pi;
    const Real term = sign * (2.0 / (Real(n) * pi)) * std::sin(n * pi * x) * std::exp(-rate * t);
    sum -= term;
    if (std::abs(term) < 1e-17 && n > 2) break;
  }
  return std::min(std::max(sum, Real(0)), x);
}

/// Sub-density d/dt F1(t; x).
inline Real upper_exit_density_unit(Real t, Real x) {
  if (t <= 0.0) return 0.0;
  if (t < kSeriesSwitchTime) {
    const Real norm = 1.0 / std::sqrt(2.0 * std::numbers::pi_v<Real> * t * t * t);
    Real sum = 0.0;
    for (int k = 0; k < 16; ++k) {
      const Real dlo = 1.0 - x + 2.0 * k;
      const Real dhi = 1.0 + x + 2.0 * k;
      const Real term = dlo * std::exp(-dlo * dlo / (2.0 * t)) - dhi * std::exp(-dhi * dhi / (2.0 * t));
      sum += term;
      if (std::abs(term) < 1e-17 && k > 0) break;
    }
    return std::max(sum * norm, Real(0));
  }
  const Real pi = std::numbers::pi_v<Real>;
  Real sum = 0.0;
  Real sign = 1.0;
  for (int n = 1; n < 64; ++n, sign = -sign) {
    const Real rate = 0.5 * Real(n) * Real(n) * pi * pi;
    const Real term = sign * Real(n) * pi * std::sin(n * pi * x) * std::exp(-rate * t);
    sum += term;
    if (std::abs(term) < 1e-17 && n > 2) break;
  }
  return std::max(sum, Real(0));
}

/// Solve F1(t; x) = target for t by bisection with Newton polish.
inline Real invert_upper_exit_cdf(Real target, Real x) {
  Real lo = 0.0, hi = 1.0;
  while (upper_exit_cdf_unit(hi, x) < target && hi < 512.0) hi *= 2.0;
  Real t = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    const Real f = upper_exit_cdf_unit(t, x) - target;
    if (f > 0.0)
      hi = t;
    else
      lo = t;
    if (hi - lo < 1e-14 * std::max(Real(1), hi)) break;
    const Real d = upper_exit_density_unit(t, x);
    Real next = d > 0.0 ? t - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

}  // namespace detail

struct IntervalExit {
  bool hit_upper = false;  // true: exited at `length`, false: exited at 0
  Real time = 0.0;         // exit time in intrinsic (unit-diffusion) units
};

/// Draws (side, time) of the first exit of a driftless unit-diffusion path
/// from (0, length), started at x in (0, length). Exact in distribution up
/// to series truncation at 1e-16 and CDF inversion at 1e-14.
inline IntervalExit sample_interval_exit(Real x, Real length, RngStream& rng) {
  if (!(length > 0.0) || !(x > 0.0) || !(x < length))
    throw Error("sample_interval_exit: need 0 < x < length");
  const Real xu = x / length;
  IntervalExit out;
  out.hit_upper = rng.uniform() < xu;
  const Real v = rng.uniform_pos();
  // Invert the sub-CDF of the drawn side; by reflection the lower-side
  // sub-law from x equals the upper-side sub-law from 1-x.
  const Real start = out.hit_upper ? xu : 1.0 - xu;
  const Real target = v * start;
  const Real t_unit = detail::invert_upper_exit_cdf(target, start);
  out.time = t_unit * length * length;
  return out;
}

/// P(exit at `length` before 0 | start x): the classical ratio x / length.
inline Real upper_exit_probability(Real x, Real length) { return x / length; }

}  // namespace walshgraph
