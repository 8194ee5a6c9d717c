#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "walshgraph/common.hpp"
#include "walshgraph/hyperbolic.hpp"

namespace walshgraph {

// =============================================================================
// Star graphs and first-passage transforms
// =============================================================================
//
// A star is a bundle of half-lines with excursion weights p_1..p_M. Rays
// 0..m-1 carry a marked point at distance mark[k] from the vertex; a Walsh
// motion started at the vertex runs until it first hits a mark. The two
// closed forms below are the Laplace transforms of (a) the occupation
// functional of an unmarked ray before that hit and (b) the hit itself,
// both driftless with unit diffusion. They share the denominator
//
//   D(lambda) = sum_{k marked} p_k coth(mark_k sqrt(2 lambda)) + sum_{k unmarked} p_k.

struct StarGraph {
  std::vector<Real> weights;  // p_1..p_M, nonnegative, sum 1
  std::vector<Real> marks;    // distances for rays 0..m-1; m <= M

  std::size_t ray_count() const { return weights.size(); }
  std::size_t mark_count() const { return marks.size(); }
  bool marked(std::size_t ray) const { return ray < marks.size(); }

  /// Checks the structural invariants (weight simplex, positive marks).
  void validate() const {
    if (weights.empty()) throw ValidationError("star-rays", "star graph", "no rays");
    if (marks.size() > weights.size())
      throw ValidationError("star-marks", "star graph", "more marks than rays");
    Real sum = 0.0;
    for (Real p : weights) {
      if (p < 0.0 || p > 1.0)
        throw ValidationError("star-weights", "star graph", "weight outside [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kWeightTol)
      throw ValidationError("star-weight-sum", "star graph",
                            "weights sum to " + std::to_string(sum));
    for (Real l : marks)
      if (!(l > 0.0) || !std::isfinite(l))
        throw ValidationError("star-mark-distance", "star graph", "mark distance must be positive");
  }
};

namespace detail {

inline Real star_denominator(const StarGraph& star, Real sqrt_two_lambda) {
  Real d = 0.0;
  for (std::size_t k = 0; k < star.ray_count(); ++k) {
    if (star.marked(k))
      d += star.weights[k] * coth_stable(star.marks[k] * sqrt_two_lambda);
    else
      d += star.weights[k];
  }
  return d;
}

}  // namespace detail

/// Laplace transform of the occupation functional of unmarked ray `k` before
/// the first mark hit: value p_k * phi_transform / D(lambda). `phi_transform`
/// is the reflected-motion resolvent of the observable (1/lambda for the
/// indicator observable).
inline Real star_occupation_transform(const StarGraph& star, Real lambda, std::size_t k,
                                      Real phi_transform) {
  star.validate();
  if (!(lambda > 0.0)) throw Error("star_occupation_transform: lambda must be positive");
  if (k >= star.ray_count() || star.marked(k))
    throw Error("star_occupation_transform: ray must exist and be unmarked");
  const Real s = std::sqrt(2.0 * lambda);
  return star.weights[k] * phi_transform / detail::star_denominator(star, s);
}

/// Laplace transform E[e^{-lambda tau}; hit mark k first] for marked ray `k`.
/// At lambda = 0 returns the analytic limit, the probability of hitting mark
/// k first: (p_k / l_k) / sum_{j marked} (p_j / l_j). The limit is evaluated
/// in closed form (coth x -> 1/x, 1/sinh x -> 1/x) rather than by shrinking
/// lambda numerically.
inline Real star_exit_transform(const StarGraph& star, Real lambda, std::size_t k) {
  star.validate();
  if (k >= star.mark_count()) throw Error("star_exit_transform: ray must carry a mark");
  if (lambda < 0.0) throw Error("star_exit_transform: lambda must be nonnegative");
  if (lambda == 0.0) {
    Real denom = 0.0;
    for (std::size_t j = 0; j < star.mark_count(); ++j) denom += star.weights[j] / star.marks[j];
    if (!(denom > 0.0)) throw Error("star_exit_transform: no positive-weight marked ray");
    return (star.weights[k] / star.marks[k]) / denom;
  }
  const Real s = std::sqrt(2.0 * lambda);
  return star.weights[k] * inv_sinh_stable(star.marks[k] * s) / detail::star_denominator(star, s);
}

}  // namespace walshgraph
