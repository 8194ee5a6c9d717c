#pragma once

#include <cmath>

#include "walshgraph/common.hpp"

namespace walshgraph {

// =============================================================================
// Stable hyperbolic evaluations
// =============================================================================
//
// The hitting-time transforms evaluate coth and 1/sinh at arguments ranging
// from ~1e-5 (contracted edges) to hundreds (stiff lambdas). Below x = 1e-4
// the direct quotients lose digits to cancellation, so we switch to the
// leading series; above x = 350 we switch to exp forms that cannot overflow.

/// coth(x) for x > 0.
inline Real coth_stable(Real x) {
  if (x < 1e-4) {
    // coth x = 1/x + x/3 - x^3/45 + ...; the dropped term is < 2e-17/x here.
    return 1.0 / x + x / 3.0;
  }
  if (x > 350.0) return 1.0;
  return 1.0 / std::tanh(x);
}

/// 1/sinh(x) for x > 0.
inline Real inv_sinh_stable(Real x) {
  if (x < 1e-4) {
    // 1/sinh x = 1/x - x/6 + 7x^3/360 - ...
    return 1.0 / x - x / 6.0;
  }
  if (x > 350.0) {
    // 2 e^{-x} / (1 - e^{-2x}); for x > 350 the denominator is 1 exactly.
    return 2.0 * std::exp(-x);
  }
  return 1.0 / std::sinh(x);
}

/// Inverse hyperbolic tangent on (-1, 1).
inline Real artanh(Real q) { return std::atanh(q); }

}  // namespace walshgraph
