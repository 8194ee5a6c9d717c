#pragma once

#include <map>
#include <string>
#include <vector>

#include "walshgraph/graph.hpp"

namespace walshgraph::fixtures {

/// Two vertices, two rays, two contracting buffer segments of base lengths
/// theta (1->2) and kappa (2->1); ray weights (1+q)/2 per vertex. The limit
/// is a skew motion on two rays.
inline GraphFamily buffer_pair(Real theta, Real kappa, Real q1, Real q2) {
  GraphFamily f;
  f.vertices = {1, 2};
  Edge ray1;
  ray1.id = 1;
  ray1.origin = 1;
  Edge ray2;
  ray2.id = 2;
  ray2.origin = 2;
  Edge seg12;
  seg12.id = 3;
  seg12.origin = 1;
  seg12.target = 2;
  seg12.length = theta;
  seg12.scaling = ScalingClass::contracting("knot");
  Edge seg21;
  seg21.id = 4;
  seg21.origin = 2;
  seg21.target = 1;
  seg21.length = kappa;
  seg21.scaling = ScalingClass::contracting("knot");
  f.edges = {ray1, ray2, seg12, seg21};
  f.asymmetry[1] = {{1, (1.0 + q1) / 2.0}, {3, (1.0 - q1) / 2.0}};
  f.asymmetry[2] = {{2, (1.0 + q2) / 2.0}, {4, (1.0 - q2) / 2.0}};
  return f;
}

/// Cycle of m vertices, one ray and one contracting segment (to the next
/// vertex) each, weights 1/2 and 1/2, segment base lengths p[i]. Contracts
/// to a Walsh star with weights p. Ray of vertex i has id i, the segment
/// i -> i+1 has id m + i.
inline GraphFamily untwisted_cycle(const std::vector<Real>& p) {
  const int m = static_cast<int>(p.size());
  GraphFamily f;
  for (int i = 1; i <= m; ++i) f.vertices.push_back(i);
  for (int i = 1; i <= m; ++i) {
    Edge ray;
    ray.id = i;
    ray.origin = i;
    f.edges.push_back(ray);
    Edge seg;
    seg.id = m + i;
    seg.origin = i;
    seg.target = (i % m) + 1;
    seg.length = p[static_cast<std::size_t>(i - 1)];
    seg.scaling = ScalingClass::contracting("cycle");
    f.edges.push_back(seg);
    f.asymmetry[i] = {{i, 0.5}, {m + i, 0.5}};
  }
  return f;
}

/// Single vertex with M rays (ids 1..M) carrying the given weights.
inline GraphFamily walsh_star(const std::vector<Real>& weights) {
  GraphFamily f;
  f.vertices = {1};
  std::map<EdgeId, Real> w;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    Edge ray;
    ray.id = static_cast<EdgeId>(k + 1);
    ray.origin = 1;
    f.edges.push_back(ray);
    w[ray.id] = weights[k];
  }
  f.asymmetry[1] = w;
  return f;
}

/// One contracting edge 1->2 with positive weight and no contracting path
/// back: violates the symmetry condition by construction.
inline GraphFamily one_way_pair() {
  GraphFamily f;
  f.vertices = {1, 2};
  Edge ray1;
  ray1.id = 1;
  ray1.origin = 1;
  Edge ray2;
  ray2.id = 2;
  ray2.origin = 2;
  Edge seg;
  seg.id = 3;
  seg.origin = 1;
  seg.target = 2;
  seg.length = 1.0;
  seg.scaling = ScalingClass::contracting("k");
  f.edges = {ray1, ray2, seg};
  f.asymmetry[1] = {{1, 0.5}, {3, 0.5}};
  f.asymmetry[2] = {{2, 1.0}};
  return f;
}

/// Two knots {1,2} and {3,4} joined by a surviving undirected segment
/// between 2 and 3; rays at 1 and 4.
inline GraphFamily two_knots() {
  GraphFamily f;
  f.vertices = {1, 2, 3, 4};
  auto ray = [](EdgeId id, VertexId v) {
    Edge e;
    e.id = id;
    e.origin = v;
    return e;
  };
  auto seg = [](EdgeId id, VertexId o, VertexId t, Real len, const char* tag) {
    Edge e;
    e.id = id;
    e.origin = o;
    e.target = t;
    e.length = len;
    e.scaling = ScalingClass::contracting(tag);
    return e;
  };
  f.edges.push_back(ray(1, 1));
  f.edges.push_back(ray(2, 4));
  f.edges.push_back(seg(3, 1, 2, 1.0, "kA"));
  f.edges.push_back(seg(4, 2, 1, 2.0, "kA"));
  f.edges.push_back(seg(5, 3, 4, 1.5, "kB"));
  f.edges.push_back(seg(6, 4, 3, 0.5, "kB"));
  Edge link23;
  link23.id = 7;
  link23.origin = 2;
  link23.target = 3;
  link23.length = 1.0;
  link23.paired_with = 8;
  Edge link32;
  link32.id = 8;
  link32.origin = 3;
  link32.target = 2;
  link32.length = 1.0;
  link32.paired_with = 7;
  f.edges.push_back(link23);
  f.edges.push_back(link32);
  f.asymmetry[1] = {{1, 0.6}, {3, 0.4}};
  f.asymmetry[2] = {{4, 0.5}, {7, 0.5}};
  f.asymmetry[3] = {{5, 0.7}, {8, 0.3}};
  f.asymmetry[4] = {{2, 0.5}, {6, 0.5}};
  return f;
}

}  // namespace walshgraph::fixtures
