#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace walshgraph {

using Real = double;
using VertexId = int;
using EdgeId = int;

inline constexpr Real kInfinity = std::numeric_limits<Real>::infinity();

/// Tolerance for structural identities (weight sums, stochastic rows,
/// stationarity residuals).
inline constexpr Real kWeightTol = 1e-12;

/// Default RNG seed. Fixed so that reports are reproducible by default;
/// never derived from the wall clock.
inline constexpr std::uint64_t kDefaultSeed = 42;

// =============================================================================
// Error types
// =============================================================================

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input document cannot be parsed or is missing required fields.
struct SchemaError : Error {
  using Error::Error;
};

/// Structurally well-formed input violating a graph invariant. Carries the
/// rule name and the offending vertex/edge for diagnostics.
struct ValidationError : Error {
  ValidationError(std::string rule_, std::string where_, const std::string& detail)
      : Error("validation rule '" + rule_ + "' failed at " + where_ + ": " + detail),
        rule(std::move(rule_)),
        where(std::move(where_)) {}
  std::string rule;
  std::string where;
};

/// Contracting-edge reachability between vertices is one-way; the limit can
/// have discontinuous trajectories, so no contraction is attempted.
struct SymmetryViolation : Error {
  SymmetryViolation(VertexId from_, VertexId to_)
      : Error("asymmetric contracting reachability: vertex " + std::to_string(from_) +
              " reaches vertex " + std::to_string(to_) + " but not conversely"),
        from(from_),
        to(to_) {}
  VertexId from;
  VertexId to;
};

/// A knot whose internal edges do not share a single contraction rate.
struct HomogeneityViolation : Error {
  HomogeneityViolation(VertexId knot_, std::vector<EdgeId> edges_, const std::string& detail)
      : Error("knot " + std::to_string(knot_) + " is not homogeneous: " + detail),
        knot(knot_),
        edges(std::move(edges_)) {}
  VertexId knot;
  std::vector<EdgeId> edges;
};

/// Linear system without a usable solution (chain not ergodic, or a
/// renewal matrix that cannot be inverted).
struct SingularSystem : Error {
  using Error::Error;
};

/// Every surviving edge of a knot carries zero limit weight; the limiting
/// asymmetry normalizer is undefined.
struct DegenerateKnot : Error {
  using Error::Error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
struct QuadratureFailure : Error {
  using Error::Error;
};

/// Graph is not in the reduced single-knot-plus-rays form the renewal
/// system requires.
struct ReductionUnsupported : Error {
  using Error::Error;
};

/// A conditional sample is too small for a meaningful distance estimate.
struct InsufficientSample : Error {
  using Error::Error;
};

}  // namespace walshgraph
