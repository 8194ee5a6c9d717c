#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "walshgraph/common.hpp"
#include "walshgraph/contraction.hpp"
#include "walshgraph/graph.hpp"
#include "walshgraph/linalg.hpp"
#include "walshgraph/star.hpp"
#include "walshgraph/testfn.hpp"

namespace walshgraph {

// =============================================================================
// Renewal system for Laplace-transformed ray occupation
// =============================================================================
//
// In the reduced setting (driftless unit coefficients, every vertex in one
// knot, every finite edge contracting) the Laplace transform of the expected
// observable on a chosen ray, as a function of the start vertex, satisfies
// the linear system U = V + C U built from the per-vertex first-passage
// transforms:
//
//   V_i  = [i == source] * p_ray * Phi(lambda) / D_i(lambda)
//   C_ik = sum over contracting edges i->k of the exit transform at lambda.
//
// Solving at a concrete scale and comparing with Phi(lambda) * p_hat of the
// contracted graph verifies the contraction limit deterministically: the gap
// closes at first order in the scale.

struct RenewalSystem {
  Real lambda = 1.0;
  Real eps = 1.0;
  VertexId source = 0;    // the vertex whose star carries the target ray
  EdgeId target_ray = 0;  // the observed ray
  std::vector<VertexId> vertices;
  std::vector<Real> V;
  Matrix C;
  Real phi_transform = 0.0;  // Phi(lambda)
};

/// Builds the renewal system for the family instantiated at `eps`.
/// Throws ReductionUnsupported if the graph is not a single knot plus rays
/// with driftless unit coefficients, or if the target is not a ray leaving
/// `source`.
inline RenewalSystem renewal_build(const GraphFamily& family, Real eps, Real lambda,
                                   VertexId source, EdgeId target_ray,
                                   const PiecewisePolynomial& phi = PiecewisePolynomial::constant(1.0)) {
  if (!(lambda > 0.0)) throw Error("renewal_build: lambda must be positive");
  const MetricGraph graph = instantiate(family, eps);

  for (const Edge& e : family.edges) {
    if (!e.coefficients.is_driftless_unit())
      throw ReductionUnsupported("edge " + std::to_string(e.id) +
                                 ": reduced setting needs zero drift and unit diffusion");
    if (!e.is_ray() && !e.scaling.is_contracting())
      throw ReductionUnsupported("edge " + std::to_string(e.id) +
                                 ": finite edges must contract in the reduced setting");
  }
  const KnotPartition partition = find_knots(family);
  if (partition.knots.size() != 1)
    throw ReductionUnsupported("all vertices must form a single knot");
  check_homogeneity(family, partition).raise();

  const Edge& ray = family.edge(target_ray);
  if (!ray.is_ray() || ray.origin != source)
    throw ReductionUnsupported("target must be a ray leaving the source vertex");

  RenewalSystem sys;
  sys.lambda = lambda;
  sys.eps = eps;
  sys.source = source;
  sys.target_ray = target_ray;
  sys.vertices = family.vertices;
  sys.phi_transform = reflected_resolvent(lambda, phi);

  const std::size_t n = family.vertices.size();
  std::map<VertexId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[family.vertices[i]] = i;

  sys.V.assign(n, 0.0);
  sys.C = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId v = family.vertices[i];
    const VertexStar vs = star_of(graph, v);
    for (std::size_t k = 0; k < vs.ray_edges.size(); ++k) {
      const Edge& e = family.edge(vs.ray_edges[k]);
      if (vs.star.marked(k)) {
        const Real transform = star_exit_transform(vs.star, lambda, k);
        if (!(transform >= 0.0 && transform < 1.0))
          throw SingularSystem("renewal_build: exit transform outside [0,1)");
        sys.C(i, index.at(e.target)) += transform;
      } else if (v == source && e.id == target_ray) {
        sys.V[i] = star_occupation_transform(vs.star, lambda, k, sys.phi_transform);
      }
    }
    Real row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += sys.C(i, j);
    if (!(row < 1.0))
      throw SingularSystem("renewal_build: row " + std::to_string(i) +
                           " of C is not strictly defective");
  }
  return sys;
}

/// Solves U = (I - C)^{-1} V and verifies the residual
/// ||(I - C) U - V||_inf <= 1e-12.
inline std::vector<Real> renewal_solve(const RenewalSystem& sys) {
  const std::size_t n = sys.vertices.size();
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j ? 1.0 : 0.0) - sys.C(i, j);
  const std::vector<Real> u = solve_dense(m, sys.V);
  const std::vector<Real> mu = matrix_times_col(m, u);
  Real residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(mu[i] - sys.V[i]));
  if (residual > 1e-12)
    throw SingularSystem("renewal_solve: residual " + std::to_string(residual));
  return u;
}

/// The contraction limit of the same transform: Phi(lambda) * p_hat of the
/// target ray. Valid whenever the ray survives contraction.
inline Real renewal_limit(const GraphFamily& family, VertexId source, EdgeId target_ray,
                          Real lambda,
                          const PiecewisePolynomial& phi = PiecewisePolynomial::constant(1.0)) {
  if (!(lambda > 0.0)) throw Error("renewal_limit: lambda must be positive");
  const Edge& ray = family.edge(target_ray);
  if (!ray.is_ray() || ray.origin != source)
    throw Error("renewal_limit: target must be a ray leaving the source vertex");
  const ContractedGraph c = contract(family);
  const VertexId knot = c.partition.knot_of.at(source);
  return reflected_resolvent(lambda, phi) * c.analysis_for(knot).p_hat.at(target_ray);
}

}  // namespace walshgraph
