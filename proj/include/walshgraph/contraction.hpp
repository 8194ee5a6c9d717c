#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "walshgraph/common.hpp"
#include "walshgraph/graph.hpp"
#include "walshgraph/hyperbolic.hpp"
#include "walshgraph/linalg.hpp"

namespace walshgraph {

// =============================================================================
// Knot contraction
// =============================================================================
//
// When groups of vertices are joined by contracting edges, each group (knot)
// collapses to a single vertex of the limit graph. The limiting asymmetry
// weight of a surviving edge leaving member i is proportional to
// (pi_i / beta_i) * p_edge, where pi is the stationary distribution of the
// knot's jump chain A_{ij} = alpha_{ij} / beta_i and
// alpha_{ij} = sum over contracting edges i->j of (limit weight / base length).

/// Partition of the vertices into knots. A knot id is the smallest member id.
struct KnotPartition {
  std::map<VertexId, VertexId> knot_of;
  /// Knot ids in increasing order, members sorted within each knot.
  std::vector<std::vector<VertexId>> knots;

  VertexId knot_id(VertexId v) const { return knot_of.at(v); }
};

/// Per-knot analysis: the jump chain, its stationary distribution, the
/// normalizer, and the limiting asymmetry weights of the surviving edges.
struct KnotAnalysis {
  VertexId knot = 0;
  std::vector<VertexId> members;
  std::map<std::pair<VertexId, VertexId>, Real> alpha;
  std::map<VertexId, Real> beta;
  Matrix transition;          // A, row-stochastic over members
  std::vector<Real> pi;       // stationary distribution, aligned with members
  Real normalizer = 1.0;      // P
  std::map<EdgeId, Real> p_hat;  // surviving outgoing edge -> limiting weight
};

struct HomogeneityReport {
  struct Violation {
    VertexId knot;
    std::vector<EdgeId> edges;
    std::string reason;
  };
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void raise() const {
    if (!violations.empty())
      throw HomogeneityViolation(violations.front().knot, violations.front().edges,
                                 violations.front().reason);
  }
};

/// The contracted family: vertices are knots, edges are the surviving edges
/// with the limiting weights installed.
struct ContractedGraph {
  GraphFamily quotient;
  KnotPartition partition;
  std::vector<KnotAnalysis> analyses;

  const KnotAnalysis& analysis_for(VertexId knot) const {
    for (const KnotAnalysis& k : analyses)
      if (k.knot == knot) return k;
    throw ValidationError("knot-exists", "knot " + std::to_string(knot), "no analysis");
  }
};

// -----------------------------------------------------------------------------
// find_knots
// -----------------------------------------------------------------------------

/// Groups vertices into knots: the classes of mutual reachability through
/// contracting edges whose limit weight is positive (exactly zero limit
/// weights contribute no arrow). Throws SymmetryViolation when reachability
/// is one-way, since the limit could then have discontinuous trajectories.
inline KnotPartition find_knots(const GraphFamily& family,
                                const std::map<EdgeId, Real>& limit_weights) {
  family.validate();
  const std::size_t n = family.vertices.size();
  std::map<VertexId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[family.vertices[i]] = i;

  std::vector<std::vector<std::size_t>> arcs(n);
  for (const Edge& e : family.edges) {
    if (!e.scaling.is_contracting()) continue;
    const auto it = limit_weights.find(e.id);
    const Real p = it != limit_weights.end() ? it->second : family.limit_weight_of(e.origin, e);
    if (p > 0.0) arcs[index.at(e.origin)].push_back(index.at(e.target));
  }

  // Transitive closure by BFS from every vertex; graphs here are small.
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> stack{s};
    std::vector<bool> seen(n, false);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t w : arcs[u]) {
        if (!seen[w]) {
          seen[w] = true;
          reach[s][w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (reach[i][j] != reach[j][i])
        throw SymmetryViolation(family.vertices[reach[i][j] ? i : j],
                                family.vertices[reach[i][j] ? j : i]);

  // Under the symmetry condition, classes of {i=j or mutual reachability}.
  KnotPartition part;
  std::vector<bool> assigned(n, false);
  std::vector<std::vector<VertexId>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    if (assigned[i]) continue;
    std::vector<VertexId> members{family.vertices[i]};
    assigned[i] = true;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!assigned[j] && reach[i][j] && reach[j][i]) {
        members.push_back(family.vertices[j]);
        assigned[j] = true;
      }
    }
    std::sort(members.begin(), members.end());
    groups.push_back(std::move(members));
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (auto& g : groups) {
    for (VertexId v : g) part.knot_of[v] = g.front();
    part.knots.push_back(std::move(g));
  }
  return part;
}

inline KnotPartition find_knots(const GraphFamily& family) { return find_knots(family, {}); }

// -----------------------------------------------------------------------------
// check_homogeneity
// -----------------------------------------------------------------------------

/// A knot is homogeneous when all edges between its members contract at one
/// shared rate. Reports every offending edge set; singleton knots pass
/// trivially.
inline HomogeneityReport check_homogeneity(const GraphFamily& family,
                                           const KnotPartition& partition) {
  HomogeneityReport report;
  for (const auto& members : partition.knots) {
    if (members.size() < 2) continue;
    const VertexId knot = members.front();
    const std::set<VertexId> member_set(members.begin(), members.end());
    std::map<std::string, std::vector<EdgeId>> tags;
    std::vector<EdgeId> fixed_internal;
    for (const Edge& e : family.edges) {
      if (e.is_ray()) continue;
      if (member_set.count(e.origin) == 0 || member_set.count(e.target) == 0) continue;
      if (e.scaling.is_contracting())
        tags[e.scaling.knot_rate_tag].push_back(e.id);
      else
        fixed_internal.push_back(e.id);
    }
    if (!fixed_internal.empty())
      report.violations.push_back(
          {knot, fixed_internal, "fixed-length edge between knot members cannot contract"});
    if (tags.size() > 1) {
      std::vector<EdgeId> all;
      std::string reason = "knot mixes rate tags:";
      for (const auto& [tag, ids] : tags) {
        reason += " " + tag;
        all.insert(all.end(), ids.begin(), ids.end());
      }
      report.violations.push_back({knot, std::move(all), reason});
    }
  }
  return report;
}

// -----------------------------------------------------------------------------
// invariant_distribution
// -----------------------------------------------------------------------------

/// Stationary distribution of a row-stochastic matrix with a single class of
/// essential states: solves pi A = pi, sum pi = 1 by a dense solve with the
/// normalization replacing one equation. Residual must come out <= 1e-12.
inline std::vector<Real> invariant_distribution(const Matrix& a) {
  const std::size_t n = a.rows();
  if (n == 0 || a.cols() != n)
    throw ValidationError("row-stochastic", "transition matrix", "matrix must be square");
  for (std::size_t i = 0; i < n; ++i) {
    Real sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (a(i, j) < 0.0)
        throw ValidationError("row-stochastic", "transition matrix", "negative entry");
      sum += a(i, j);
    }
    if (std::abs(sum - 1.0) > kWeightTol)
      throw ValidationError("row-stochastic", "transition matrix",
                            "row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }

  // (A^T - I) pi = 0 with the last equation replaced by sum pi = 1. For an
  // ergodic chain the rows of A^T - I sum to zero, so dropping any one row
  // keeps full rank and the bordered system is nonsingular.
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = a(j, i) - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) m(n - 1, j) = 1.0;
  std::vector<Real> b(n, 0.0);
  b[n - 1] = 1.0;

  std::vector<Real> pi;
  try {
    pi = solve_dense(m, b);
  } catch (const SingularSystem&) {
    throw SingularSystem("invariant_distribution: chain has no unique essential class");
  }
  Real sum = 0.0;
  for (Real& x : pi) {
    if (x < -kWeightTol)
      throw SingularSystem("invariant_distribution: negative stationary mass");
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  for (Real& x : pi) x /= sum;
  const auto pia = row_times_matrix(pi, a);
  Real residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(pia[i] - pi[i]));
  if (residual > kWeightTol)
    throw SingularSystem("invariant_distribution: stationarity residual " +
                         std::to_string(residual));
  return pi;
}

// -----------------------------------------------------------------------------
// limiting_asymmetry
// -----------------------------------------------------------------------------

namespace detail {

/// Surviving outgoing edges of a knot: non-contracting edges from a member
/// to outside the knot (or to infinity), ordered by edge id.
inline std::vector<const Edge*> surviving_edges(const GraphFamily& family,
                                                const KnotPartition& partition, VertexId knot) {
  std::vector<const Edge*> out;
  for (const Edge& e : family.edges) {
    if (partition.knot_of.at(e.origin) != knot) continue;
    if (e.scaling.is_contracting()) continue;
    if (!e.is_ray() && partition.knot_of.at(e.target) == knot) continue;  // internal, not surviving
    out.push_back(&e);
  }
  std::sort(out.begin(), out.end(), [](const Edge* a, const Edge* b) { return a->id < b->id; });
  return out;
}

}  // namespace detail

/// Limiting asymmetry analysis for every knot. Preconditions: find_knots
/// succeeded and the homogeneity check passed for `partition`.
inline std::vector<KnotAnalysis> limiting_asymmetry(const GraphFamily& family,
                                                    const KnotPartition& partition) {
  std::vector<KnotAnalysis> result;
  for (const auto& members : partition.knots) {
    KnotAnalysis ka;
    ka.knot = members.front();
    ka.members = members;
    const std::size_t n = members.size();
    std::map<VertexId, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[members[i]] = i;

    if (n == 1) {
      // Nothing contracts at a singleton: the chain is trivial and the
      // limiting weights are the (limit) weights of the outgoing edges.
      ka.transition = Matrix::identity(1);
      ka.pi = {1.0};
    } else {
      Matrix alpha_mat(n, n, 0.0);
      for (const Edge& e : family.edges) {
        if (!e.scaling.is_contracting()) continue;
        const auto oi = index.find(e.origin);
        const auto ti = index.find(e.target);
        if (oi == index.end() || ti == index.end()) continue;
        const Real p = family.limit_weight_of(e.origin, e);
        if (p <= 0.0) continue;
        const Real a = p / e.length;
        alpha_mat(oi->second, ti->second) += a;
        ka.alpha[{e.origin, e.target}] += a;
      }
      ka.transition = Matrix(n, n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        Real beta = 0.0;
        for (std::size_t j = 0; j < n; ++j) beta += alpha_mat(i, j);
        if (!(beta > 0.0))
          throw SingularSystem("limiting_asymmetry: member " + std::to_string(members[i]) +
                               " has no internal contracting edge");
        ka.beta[members[i]] = beta;
        for (std::size_t j = 0; j < n; ++j) ka.transition(i, j) = alpha_mat(i, j) / beta;
      }
      ka.pi = invariant_distribution(ka.transition);
    }

    const auto surviving = detail::surviving_edges(family, partition, ka.knot);
    Real total = 0.0;
    std::map<EdgeId, Real> raw;
    for (const Edge* e : surviving) {
      const Real p = family.limit_weight_of(e->origin, *e);
      const std::size_t i = index.at(e->origin);
      const Real contribution =
          n == 1 ? p : ka.pi[i] / ka.beta.at(e->origin) * p;
      raw[e->id] = contribution;
      total += contribution;
    }
    if (!(total > 0.0))
      throw DegenerateKnot("knot " + std::to_string(ka.knot) +
                           ": all surviving edges carry zero limit weight");
    ka.normalizer = 1.0 / total;
    for (const auto& [id, w] : raw) ka.p_hat[id] = w * ka.normalizer;

    result.push_back(std::move(ka));
  }
  return result;
}

// -----------------------------------------------------------------------------
// contract
// -----------------------------------------------------------------------------

/// Full pipeline: knots, homogeneity, limiting weights, quotient family.
inline ContractedGraph contract(const GraphFamily& family) {
  ContractedGraph out;
  out.partition = find_knots(family);
  check_homogeneity(family, out.partition).raise();
  for (const Edge& e : family.edges) {
    if (e.scaling.is_contracting() &&
        out.partition.knot_of.at(e.origin) != out.partition.knot_of.at(e.target))
      throw ValidationError("cross-knot-contracting", "edge " + std::to_string(e.id),
                            "contracting edge between different knots has no limit image");
  }
  out.analyses = limiting_asymmetry(family, out.partition);

  GraphFamily q;
  for (const auto& ka : out.analyses) q.vertices.push_back(ka.knot);
  for (const auto& ka : out.analyses) {
    std::map<EdgeId, Real> weights;
    for (const Edge& e : family.edges) {
      const auto it = ka.p_hat.find(e.id);
      if (it == ka.p_hat.end()) continue;
      Edge copy = e;
      copy.origin = ka.knot;
      if (!e.is_ray()) copy.target = out.partition.knot_of.at(e.target);
      copy.limit_weight.reset();
      q.edges.push_back(std::move(copy));
      weights[e.id] = it->second;
    }
    q.asymmetry[ka.knot] = std::move(weights);
  }
  std::sort(q.edges.begin(), q.edges.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
  q.validate();
  out.quotient = std::move(q);
  return out;
}

// -----------------------------------------------------------------------------
// Buffer-zone skew parameter
// -----------------------------------------------------------------------------

/// Skew parameter of the limit when two buffer zones of lengths theta and
/// kappa with skew parameters q1 and q2 contract to a point:
/// (1+q)/(1-q) = (theta/kappa) * (1+q1)/(1-q1) * (1-q2)/(1+q2),
/// evaluated as q = tanh(log(theta/kappa)/2 + artanh q1 - artanh q2) to stay
/// stable for q near +-1.
inline Real buffer_skew_parameter(Real theta, Real kappa, Real q1, Real q2) {
  if (!(theta > 0.0) || !(kappa > 0.0))
    throw ValidationError("buffer-lengths", "buffer_skew_parameter", "lengths must be positive");
  if (!(q1 > -1.0 && q1 < 1.0 && q2 > -1.0 && q2 < 1.0))
    throw ValidationError("skew-range", "buffer_skew_parameter", "q must lie in (-1,1)");
  return std::tanh(0.5 * std::log(theta / kappa) + artanh(q1) - artanh(q2));
}

}  // namespace walshgraph
