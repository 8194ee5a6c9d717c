#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "walshgraph/common.hpp"
#include "walshgraph/contraction.hpp"
#include "walshgraph/graph.hpp"

namespace walshgraph {

// =============================================================================
// Graph-spec documents
// =============================================================================
//
// JSON surface syntax:
//
//   {
//     "vertices": [1, 2],
//     "edges": [
//       {"id": 1, "origin": 1, "target": "infinity", "class": "fixed",
//        "drift": 0.0, "diffusion": 1.0},
//       {"id": 3, "origin": 1, "target": 2, "class": "contracting",
//        "base_length": 2.0, "knot_rate_tag": "k0"}
//     ],
//     "asymmetry": {"1": {"1": 0.5, "3": 0.5}, "2": {...}}
//   }
//
// Fixed finite edges carry "length"; rays use target "infinity" and no
// length. Drift/diffusion are numbers or {"x": [...], "y": [...]} tables and
// default to 0 and 1. Optional per-edge fields: "limit_weight" (weight limit
// override for contraction analysis) and "paired_with" (oriented twin of an
// undirected segment; twins must swap endpoints and agree on length).

namespace detail {

inline Coefficient parse_coefficient(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return Coefficient(j.get<Real>());
  if (j.is_object() && j.contains("x") && j.contains("y")) {
    try {
      return Coefficient(
          PiecewiseLinear(j.at("x").get<std::vector<Real>>(), j.at("y").get<std::vector<Real>>()));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(where + ": bad coefficient table: " + e.what());
    }
  }
  throw SchemaError(where + ": coefficient must be a number or an {x, y} table");
}

inline nlohmann::json coefficient_to_json(const Coefficient& c) {
  if (c.is_constant()) return c.constant_value();
  return nlohmann::json{{"x", c.table().breakpoints()}, {"y", c.table().values()}};
}

}  // namespace detail

/// Parses and validates a graph-spec document.
/// Throws SchemaError for malformed documents, ValidationError for invariant
/// violations (with the offending vertex/edge and rule name).
inline GraphFamily parse_graph(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("top level must be an object");
  for (const char* key : {"vertices", "edges", "asymmetry"})
    if (!doc.contains(key)) throw SchemaError(std::string("missing section '") + key + "'");

  GraphFamily family;
  try {
    family.vertices = doc.at("vertices").get<std::vector<VertexId>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("'vertices' must be a list of integer ids: ") + e.what());
  }

  if (!doc.at("edges").is_array()) throw SchemaError("'edges' must be a list");
  for (const auto& je : doc.at("edges")) {
    if (!je.is_object()) throw SchemaError("each edge must be an object");
    Edge e;
    try {
      e.id = je.at("id").get<EdgeId>();
      e.origin = je.at("origin").get<VertexId>();
    } catch (const nlohmann::json::exception& ex) {
      throw SchemaError(std::string("edge needs integer 'id' and 'origin': ") + ex.what());
    }
    const std::string where = "edge " + std::to_string(e.id);

    const auto& jt = je.at("target");
    if (jt.is_string() && jt.get<std::string>() == "infinity")
      e.target = kInfinityVertex;
    else if (jt.is_number_integer())
      e.target = jt.get<VertexId>();
    else
      throw SchemaError(where + ": 'target' must be a vertex id or \"infinity\"");

    if (!je.contains("class") || !je.at("class").is_string())
      throw SchemaError(where + ": 'class' must be \"fixed\" or \"contracting\"");
    const std::string cls = je.at("class").get<std::string>();
    if (cls == "fixed") {
      e.scaling = ScalingClass::fixed();
      if (e.target == kInfinityVertex) {
        if (je.contains("length")) throw SchemaError(where + ": a ray does not take a length");
        e.length = kInfinity;
      } else {
        if (!je.contains("length") || !je.at("length").is_number())
          throw SchemaError(where + ": fixed finite edge needs a numeric 'length'");
        e.length = je.at("length").get<Real>();
      }
    } else if (cls == "contracting") {
      if (!je.contains("base_length") || !je.at("base_length").is_number())
        throw SchemaError(where + ": contracting edge needs a numeric 'base_length'");
      if (!je.contains("knot_rate_tag") || !je.at("knot_rate_tag").is_string())
        throw SchemaError(where + ": contracting edge needs a 'knot_rate_tag'");
      e.scaling = ScalingClass::contracting(je.at("knot_rate_tag").get<std::string>());
      e.length = je.at("base_length").get<Real>();
    } else {
      throw SchemaError(where + ": unknown class '" + cls + "'");
    }

    if (je.contains("drift")) e.coefficients.drift = detail::parse_coefficient(je.at("drift"), where);
    if (je.contains("diffusion"))
      e.coefficients.diffusion = detail::parse_coefficient(je.at("diffusion"), where);
    if (je.contains("limit_weight")) {
      if (!je.at("limit_weight").is_number())
        throw SchemaError(where + ": 'limit_weight' must be a number");
      e.limit_weight = je.at("limit_weight").get<Real>();
    }
    if (je.contains("paired_with")) {
      if (!je.at("paired_with").is_number_integer())
        throw SchemaError(where + ": 'paired_with' must be an edge id");
      e.paired_with = je.at("paired_with").get<EdgeId>();
    }
    family.edges.push_back(std::move(e));
  }

  if (!doc.at("asymmetry").is_object())
    throw SchemaError("'asymmetry' must map vertex ids to weight tables");
  for (const auto& [vkey, wtable] : doc.at("asymmetry").items()) {
    VertexId v;
    try {
      v = std::stoi(vkey);
    } catch (...) {
      throw SchemaError("asymmetry key '" + vkey + "' is not a vertex id");
    }
    if (!wtable.is_object())
      throw SchemaError("asymmetry for vertex " + vkey + " must map edge ids to weights");
    std::map<EdgeId, Real> weights;
    for (const auto& [ekey, w] : wtable.items()) {
      EdgeId eid;
      try {
        eid = std::stoi(ekey);
      } catch (...) {
        throw SchemaError("asymmetry edge key '" + ekey + "' is not an edge id");
      }
      if (!w.is_number())
        throw SchemaError("weight of edge " + ekey + " at vertex " + vkey + " must be a number");
      weights[eid] = w.get<Real>();
    }
    family.asymmetry[v] = std::move(weights);
  }

  family.validate();
  return family;
}

/// Serializes a family back into the graph-spec schema.
inline nlohmann::json graph_to_json(const GraphFamily& family) {
  nlohmann::json doc;
  doc["vertices"] = family.vertices;
  doc["edges"] = nlohmann::json::array();
  for (const Edge& e : family.edges) {
    nlohmann::json je;
    je["id"] = e.id;
    je["origin"] = e.origin;
    if (e.is_ray())
      je["target"] = "infinity";
    else
      je["target"] = e.target;
    if (e.scaling.is_contracting()) {
      je["class"] = "contracting";
      je["base_length"] = e.length;
      je["knot_rate_tag"] = e.scaling.knot_rate_tag;
    } else {
      je["class"] = "fixed";
      if (!e.is_ray()) je["length"] = e.length;
    }
    je["drift"] = detail::coefficient_to_json(e.coefficients.drift);
    je["diffusion"] = detail::coefficient_to_json(e.coefficients.diffusion);
    if (e.limit_weight) je["limit_weight"] = *e.limit_weight;
    if (e.paired_with) je["paired_with"] = *e.paired_with;
    doc["edges"].push_back(std::move(je));
  }
  doc["asymmetry"] = nlohmann::json::object();
  for (const auto& [v, weights] : family.asymmetry) {
    nlohmann::json row = nlohmann::json::object();
    for (const auto& [eid, w] : weights) row[std::to_string(eid)] = w;
    doc["asymmetry"][std::to_string(v)] = std::move(row);
  }
  return doc;
}

/// Knot report: members, transition matrix, stationary distribution,
/// normalizer, limiting weights, and the contracted family.
inline nlohmann::json contraction_report_json(const ContractedGraph& contracted) {
  nlohmann::json doc;
  doc["knots"] = nlohmann::json::array();
  for (const KnotAnalysis& ka : contracted.analyses) {
    nlohmann::json jk;
    jk["knot"] = ka.knot;
    jk["members"] = ka.members;
    nlohmann::json alpha = nlohmann::json::object();
    for (const auto& [pair, a] : ka.alpha)
      alpha[std::to_string(pair.first) + "->" + std::to_string(pair.second)] = a;
    jk["alpha"] = std::move(alpha);
    nlohmann::json beta = nlohmann::json::object();
    for (const auto& [v, b] : ka.beta) beta[std::to_string(v)] = b;
    jk["beta"] = std::move(beta);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < ka.transition.rows(); ++i) rows.push_back(ka.transition.row(i));
    jk["transition_matrix"] = std::move(rows);
    jk["pi"] = ka.pi;
    jk["normalizer"] = ka.normalizer;
    nlohmann::json phat = nlohmann::json::object();
    for (const auto& [eid, w] : ka.p_hat) phat[std::to_string(eid)] = w;
    jk["p_hat"] = std::move(phat);
    doc["knots"].push_back(std::move(jk));
  }
  doc["contracted_graph"] = graph_to_json(contracted.quotient);
  return doc;
}

}  // namespace walshgraph
