#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "walshgraph/common.hpp"
#include "walshgraph/piecewise.hpp"
#include "walshgraph/star.hpp"

namespace walshgraph {

// =============================================================================
// Oriented metric graphs with a scaling family
// =============================================================================
//
// Edges are oriented: a walker enters an edge only through its origin. An
// undirected segment is stored as two oriented copies with swapped endpoints
// and equal length (declared via `paired_with`); copies with unequal lengths
// are distinct physical edges, which is exactly how buffer-zone graphs are
// built. Rays point at the INFINITY pseudo-target.

inline constexpr VertexId kInfinityVertex = -1;

enum class ScalingKind { Fixed, Contracting };

/// Which family member an edge length belongs to: fixed across the family or
/// contracting like base_length * epsilon. Contracting edges in one knot must
/// share a rate tag (one contraction rate per knot).
struct ScalingClass {
  ScalingKind kind = ScalingKind::Fixed;
  std::string knot_rate_tag;  // contracting only

  static ScalingClass fixed() { return {}; }
  static ScalingClass contracting(std::string tag) {
    return {ScalingKind::Contracting, std::move(tag)};
  }
  bool is_contracting() const { return kind == ScalingKind::Contracting; }
};

struct Edge {
  EdgeId id = 0;
  VertexId origin = 0;
  VertexId target = kInfinityVertex;
  /// Fixed edges: the length (+inf for rays). Contracting edges: the base
  /// length, i.e. the limit ratio of the vanishing length to the knot rate.
  Real length = kInfinity;
  ScalingClass scaling;
  CoefficientSpec coefficients;
  /// Limit of the asymmetry weight when it differs from the stated weight
  /// (models weights that vanish along the family).
  std::optional<Real> limit_weight;
  /// The oriented twin when this edge is one chart of an undirected segment.
  std::optional<EdgeId> paired_with;

  bool is_ray() const { return target == kInfinityVertex; }
};

/// An oriented metric graph plus per-edge scaling classes and per-vertex
/// asymmetry weights; represents the whole family of graphs indexed by the
/// contraction scale. Immutable after validate(); safe to share across
/// threads.
struct GraphFamily {
  std::vector<VertexId> vertices;
  std::vector<Edge> edges;
  /// vertex -> (outgoing edge id -> weight); weights per vertex sum to 1.
  std::map<VertexId, std::map<EdgeId, Real>> asymmetry;

  const Edge& edge(EdgeId id) const {
    for (const Edge& e : edges)
      if (e.id == id) return e;
    throw ValidationError("edge-exists", "edge " + std::to_string(id), "no such edge");
  }

  bool has_vertex(VertexId v) const {
    return std::find(vertices.begin(), vertices.end(), v) != vertices.end();
  }

  /// Indices into `edges` of the outgoing edges of v, ordered by edge id.
  std::vector<std::size_t> outgoing(VertexId v) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].origin == v) out.push_back(i);
    std::sort(out.begin(), out.end(),
              [&](std::size_t a, std::size_t b) { return edges[a].id < edges[b].id; });
    return out;
  }

  Real weight_of(VertexId v, EdgeId e) const {
    const auto vit = asymmetry.find(v);
    if (vit == asymmetry.end())
      throw ValidationError("weights-cover", "vertex " + std::to_string(v), "no asymmetry entry");
    const auto eit = vit->second.find(e);
    if (eit == vit->second.end())
      throw ValidationError("weights-cover", "edge " + std::to_string(e), "no weight entry");
    return eit->second;
  }

  /// Weight limit used by contraction analysis: the stated weight unless the
  /// edge carries an explicit override.
  Real limit_weight_of(VertexId v, const Edge& e) const {
    return e.limit_weight ? *e.limit_weight : weight_of(v, e.id);
  }

  void validate() const;
};

/// A family member at a concrete scale: contracting edges have length
/// base_length * epsilon. Lengths are indexed parallel to family.edges.
struct MetricGraph {
  GraphFamily family;
  Real epsilon = 1.0;
  std::vector<Real> lengths;

  const Edge& edge(EdgeId id) const { return family.edge(id); }

  Real length_of(EdgeId id) const {
    for (std::size_t i = 0; i < family.edges.size(); ++i)
      if (family.edges[i].id == id) return lengths[i];
    throw ValidationError("edge-exists", "edge " + std::to_string(id), "no such edge");
  }
};

// -----------------------------------------------------------------------------
// Validation
// -----------------------------------------------------------------------------

inline void GraphFamily::validate() const {
  if (vertices.empty())
    throw ValidationError("vertices-nonempty", "graph", "no vertices");
  {
    std::set<VertexId> seen;
    for (VertexId v : vertices) {
      if (v < 0)
        throw ValidationError("vertex-id-range", "vertex " + std::to_string(v),
                              "ids must be nonnegative");
      if (!seen.insert(v).second)
        throw ValidationError("unique-vertex-ids", "vertex " + std::to_string(v), "duplicate id");
    }
  }
  {
    std::set<EdgeId> seen;
    for (const Edge& e : edges)
      if (!seen.insert(e.id).second)
        throw ValidationError("unique-edge-ids", "edge " + std::to_string(e.id), "duplicate id");
  }
  for (const Edge& e : edges) {
    const std::string where = "edge " + std::to_string(e.id);
    if (!has_vertex(e.origin)) throw ValidationError("origin-exists", where, "unknown origin");
    if (e.target != kInfinityVertex && !has_vertex(e.target))
      throw ValidationError("target-exists", where, "unknown target");
    if (e.target == e.origin) throw ValidationError("no-self-loop", where, "origin equals target");
    if (e.is_ray()) {
      if (std::isfinite(e.length))
        throw ValidationError("ray-length", where, "infinity target requires infinite length");
      if (e.scaling.is_contracting())
        throw ValidationError("contracting-finite-target", where, "a ray cannot contract");
    } else {
      if (!(e.length > 0.0) || !std::isfinite(e.length))
        throw ValidationError("length-positive", where, "length must be positive and finite");
    }
    if (e.scaling.is_contracting() && e.scaling.knot_rate_tag.empty())
      throw ValidationError("knot-rate-tag", where, "contracting edge needs a rate tag");
    if (!(e.coefficients.diffusion.min_value() > 0.0))
      throw ValidationError("sigma-positive", where, "diffusion must be positive everywhere");
    if (e.limit_weight && (*e.limit_weight < 0.0 || *e.limit_weight > 1.0))
      throw ValidationError("limit-weight-range", where, "limit weight outside [0,1]");
    if (e.paired_with) {
      const Edge& twin = edge(*e.paired_with);
      if (twin.origin != e.target || twin.target != e.origin)
        throw ValidationError("paired-orientation", where, "pair must swap origin and target");
      if (twin.length != e.length)
        throw ValidationError("paired-length", where, "oriented copies must agree on length");
      if (!twin.paired_with || *twin.paired_with != e.id)
        throw ValidationError("paired-mutual", where, "pairing must be mutual");
    }
  }
  for (VertexId v : vertices) {
    const std::string where = "vertex " + std::to_string(v);
    const auto out = outgoing(v);
    if (out.empty()) throw ValidationError("outgoing-edge", where, "vertex has no outgoing edge");
    const auto vit = asymmetry.find(v);
    if (vit == asymmetry.end())
      throw ValidationError("weights-cover", where, "no asymmetry weights");
    if (vit->second.size() != out.size())
      throw ValidationError("weights-cover", where, "weights must cover exactly the outgoing edges");
    Real sum = 0.0;
    for (std::size_t idx : out) {
      const auto eit = vit->second.find(edges[idx].id);
      if (eit == vit->second.end())
        throw ValidationError("weights-cover", where,
                              "missing weight for edge " + std::to_string(edges[idx].id));
      if (eit->second < 0.0 || eit->second > 1.0)
        throw ValidationError("weight-range", where, "weight outside [0,1]");
      sum += eit->second;
    }
    if (std::abs(sum - 1.0) > kWeightTol)
      throw ValidationError("weights-sum", where, "weights sum to " + std::to_string(sum));
  }
  for (const auto& [v, wmap] : asymmetry)
    if (!has_vertex(v))
      throw ValidationError("weights-cover", "vertex " + std::to_string(v),
                            "asymmetry entry for unknown vertex");
  // Weak connectivity over finite endpoints.
  if (!vertices.empty()) {
    std::set<VertexId> reached{vertices.front()};
    bool grew = true;
    while (grew) {
      grew = false;
      for (const Edge& e : edges) {
        if (e.is_ray()) continue;
        const bool has_o = reached.count(e.origin) > 0;
        const bool has_t = reached.count(e.target) > 0;
        if (has_o != has_t) {
          reached.insert(has_o ? e.target : e.origin);
          grew = true;
        }
      }
    }
    if (reached.size() != vertices.size())
      throw ValidationError("connected", "graph", "graph is not connected");
  }
}

// -----------------------------------------------------------------------------
// Operations
// -----------------------------------------------------------------------------

/// Family member at scale eps > 0: contracting lengths become
/// base_length * eps (exact floating multiplication), fixed edges unchanged.
inline MetricGraph instantiate(const GraphFamily& family, Real eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw ValidationError("epsilon-positive", "instantiate", "scale must be positive and finite");
  family.validate();
  MetricGraph g;
  g.family = family;
  g.epsilon = eps;
  g.lengths.reserve(family.edges.size());
  for (const Edge& e : family.edges)
    g.lengths.push_back(e.scaling.is_contracting() ? e.length * eps : e.length);
  return g;
}

/// A vertex star: the bundle of outgoing edges as half-lines. Finite edges
/// come first and carry marks at their instantiated lengths (the neighboring
/// vertices); rays follow unmarked. ray_edges[k] is the edge id behind ray k.
struct VertexStar {
  StarGraph star;
  std::vector<EdgeId> ray_edges;
};

inline VertexStar star_of(const MetricGraph& graph, VertexId v) {
  if (!graph.family.has_vertex(v))
    throw ValidationError("vertex-exists", "vertex " + std::to_string(v), "no such vertex");
  VertexStar out;
  const auto idxs = graph.family.outgoing(v);
  std::vector<std::size_t> finite, infinite;
  for (std::size_t i : idxs)
    (graph.family.edges[i].is_ray() ? infinite : finite).push_back(i);
  for (std::size_t i : finite) {
    out.star.weights.push_back(graph.family.weight_of(v, graph.family.edges[i].id));
    out.star.marks.push_back(graph.lengths[i]);
    out.ray_edges.push_back(graph.family.edges[i].id);
  }
  for (std::size_t i : infinite) {
    out.star.weights.push_back(graph.family.weight_of(v, graph.family.edges[i].id));
    out.ray_edges.push_back(graph.family.edges[i].id);
  }
  return out;
}

}  // namespace walshgraph
