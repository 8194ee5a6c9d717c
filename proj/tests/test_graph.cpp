#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "walshgraph/graph.hpp"
#include "walshgraph/parse.hpp"

using namespace walshgraph;

namespace {

const char* kExample1Doc = R"json({
  "vertices": [1, 2],
  "edges": [
    {"id": 1, "origin": 1, "target": "infinity", "class": "fixed"},
    {"id": 2, "origin": 2, "target": "infinity", "class": "fixed"},
    {"id": 3, "origin": 1, "target": 2, "class": "contracting",
     "base_length": 2.0, "knot_rate_tag": "knot"},
    {"id": 4, "origin": 2, "target": 1, "class": "contracting",
     "base_length": 1.0, "knot_rate_tag": "knot"}
  ],
  "asymmetry": {
    "1": {"1": 0.5, "3": 0.5},
    "2": {"2": 0.5, "4": 0.5}
  }
})json";

}  // namespace

TEST_CASE("parse: buffer-pair document") {
  const GraphFamily f = parse_graph(kExample1Doc);
  CHECK(f.vertices.size() == 2);
  CHECK(f.edges.size() == 4);
  CHECK(f.edge(3).scaling.is_contracting());
  CHECK(f.edge(3).length == 2.0);
  CHECK(f.edge(1).is_ray());
  CHECK(f.weight_of(1, 3) == 0.5);
}

TEST_CASE("parse: trivial single-ray family") {
  const GraphFamily f = parse_graph(R"({
    "vertices": [1],
    "edges": [{"id": 1, "origin": 1, "target": "infinity", "class": "fixed"}],
    "asymmetry": {"1": {"1": 1.0}}
  })");
  CHECK(f.vertices.size() == 1);
  CHECK(f.edges.size() == 1);
}

TEST_CASE("parse: weight sum violation names the vertex") {
  const char* doc = R"({
    "vertices": [1],
    "edges": [
      {"id": 1, "origin": 1, "target": "infinity", "class": "fixed"},
      {"id": 2, "origin": 1, "target": "infinity", "class": "fixed"}
    ],
    "asymmetry": {"1": {"1": 0.5, "2": 0.4}}
  })";
  try {
    parse_graph(doc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.rule == "weights-sum");
    CHECK(e.where == "vertex 1");
  }
}

TEST_CASE("parse: malformed documents raise SchemaError") {
  CHECK_THROWS_AS(parse_graph("{"), SchemaError);
  CHECK_THROWS_AS(parse_graph("[1,2]"), SchemaError);
  CHECK_THROWS_AS(parse_graph(R"({"vertices": [1], "edges": []})"), SchemaError);
  CHECK_THROWS_AS(parse_graph(R"({
    "vertices": [1],
    "edges": [{"id": 1, "origin": 1, "target": "infinity", "class": "elastic"}],
    "asymmetry": {"1": {"1": 1.0}}
  })"), SchemaError);
}

TEST_CASE("parse/serialize round trip preserves the document") {
  const GraphFamily f = parse_graph(kExample1Doc);
  const GraphFamily g = parse_graph(graph_to_json(f).dump());
  CHECK(graph_to_json(f) == graph_to_json(g));
}

TEST_CASE("validation: paired copies must agree on length") {
  GraphFamily f = fixtures::two_knots();
  CHECK_NOTHROW(f.validate());
  for (Edge& e : f.edges)
    if (e.id == 8) e.length = 1.25;
  try {
    f.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.rule == "paired-length");
  }
}

TEST_CASE("validation: diffusion must stay positive") {
  GraphFamily f = fixtures::walsh_star({1.0});
  f.edges[0].coefficients.diffusion = Coefficient(PiecewiseLinear({0.0, 1.0}, {1.0, 0.0}));
  CHECK_THROWS_AS(f.validate(), ValidationError);
}

TEST_CASE("instantiate scales contracting edges only") {
  const GraphFamily f = fixtures::buffer_pair(2.0, 1.0, 0.0, 0.0);

  SUBCASE("eps = 1/n gives lengths theta/n, kappa/n") {
    const Real eps = 1.0 / 64.0;
    const MetricGraph g = instantiate(f, eps);
    CHECK(g.length_of(3) == 2.0 * eps);  // exact floating multiplication
    CHECK(g.length_of(4) == 1.0 * eps);
    CHECK(std::isinf(g.length_of(1)));
  }
  SUBCASE("eps = 1 is the identity scale") {
    const MetricGraph g = instantiate(f, 1.0);
    CHECK(g.length_of(3) == 2.0);
    CHECK(g.length_of(4) == 1.0);
  }
  SUBCASE("family without contracting edges is untouched") {
    const GraphFamily star = fixtures::walsh_star({0.5, 0.5});
    const MetricGraph g = instantiate(star, 0.01);
    CHECK(std::isinf(g.length_of(1)));
    CHECK(std::isinf(g.length_of(2)));
  }
  SUBCASE("eps must be positive") {
    CHECK_THROWS_AS(instantiate(f, 0.0), ValidationError);
    CHECK_THROWS_AS(instantiate(f, -1.0), ValidationError);
  }
}

TEST_CASE("star_of bundles outgoing edges with marks at neighbor distances") {
  SUBCASE("buffer pair, vertex 1") {
    const Real eps = 0.125;
    const MetricGraph g = instantiate(fixtures::buffer_pair(2.0, 1.0, 0.0, 0.0), eps);
    const VertexStar vs = star_of(g, 1);
    REQUIRE(vs.star.ray_count() == 2);
    REQUIRE(vs.star.mark_count() == 1);
    CHECK(vs.ray_edges[0] == 3);  // finite (marked) ray first
    CHECK(vs.ray_edges[1] == 1);
    CHECK(vs.star.marks[0] == 2.0 * eps);
    CHECK(vs.star.weights[0] == 0.5);
    CHECK_NOTHROW(vs.star.validate());
  }
  SUBCASE("single-ray vertex gives one unmarked ray") {
    const MetricGraph g = instantiate(fixtures::walsh_star({1.0}), 1.0);
    const VertexStar vs = star_of(g, 1);
    CHECK(vs.star.ray_count() == 1);
    CHECK(vs.star.mark_count() == 0);
  }
  SUBCASE("untwisted cycle vertex i has mark at p_i * eps") {
    const std::vector<Real> p{0.5, 0.3, 0.2};
    const Real eps = 0.01;
    const MetricGraph g = instantiate(fixtures::untwisted_cycle(p), eps);
    for (int i = 1; i <= 3; ++i) {
      const VertexStar vs = star_of(g, i);
      REQUIRE(vs.star.mark_count() == 1);
      CHECK(vs.star.marks[0] == doctest::Approx(p[i - 1] * eps).epsilon(1e-15));
    }
  }
}
