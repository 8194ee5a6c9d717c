#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "fixtures.hpp"
#include "walshgraph/ensemble.hpp"
#include "walshgraph/sim.hpp"
#include "walshgraph/stats.hpp"

using namespace walshgraph;

namespace {

/// Stops when the walker arrives at the given vertex; keeps the arrival time.
struct AbsorbSink {
  VertexId absorb;
  Real hit_time = -1.0;
  bool step(const StepInfo& info) {
    if (info.vertex_hit == absorb) {
      hit_time = info.t1;
      return false;
    }
    return true;
  }
};

/// Single finite edge of length 1 from vertex 1 to vertex 2 plus a
/// continuation ray at 2: reflected motion on [0, 1] absorbed at 1 when the
/// path is stopped on arrival at vertex 2.
GraphFamily segment_with_leaf() {
  GraphFamily f;
  f.vertices = {1, 2};
  Edge seg;
  seg.id = 1;
  seg.origin = 1;
  seg.target = 2;
  seg.length = 1.0;
  Edge ray;
  ray.id = 2;
  ray.origin = 2;
  f.edges = {seg, ray};
  f.asymmetry[1] = {{1, 1.0}};
  f.asymmetry[2] = {{2, 1.0}};
  return f;
}

}  // namespace

TEST_CASE("step_edge moment check") {
  CoefficientSpec cs;
  cs.drift = Coefficient(0.8);
  cs.diffusion = Coefficient(1.3);
  const Real dt = 1e-3;
  RngStream rng(1001, 0);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Real d = step_edge(2.0, cs, dt, rng) - 2.0;
    sum += d;
    sum_sq += d * d;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean - 0.8 * dt) < 5.0 * 1.3 * std::sqrt(dt) / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.3 * 1.3 * dt) < 5.0 * 1.3 * 1.3 * dt * std::sqrt(2.0 / n));
}

TEST_CASE("step_edge near-deterministic drift limit") {
  CoefficientSpec cs;
  cs.drift = Coefficient(1.0);
  cs.diffusion = Coefficient(1e-6);
  RngStream rng(7, 0);
  const Real dt = 0.01;
  for (int i = 0; i < 100; ++i)
    CHECK(step_edge(0.5, cs, dt, rng) == doctest::Approx(0.5 + dt).epsilon(1e-3));
}

TEST_CASE("step_vertex ray law") {
  SUBCASE("degenerate weights always exit to ray 0") {
    StarGraph star{{1.0, 0.0, 0.0}, {}};
    RngStream rng(3, 0);
    for (int i = 0; i < 1000; ++i) CHECK(step_vertex(star, 1e-4, rng).ray == 0);
  }
  SUBCASE("frequencies match the weights") {
    StarGraph star{{0.5, 0.3, 0.2}, {}};
    RngStream rng(4, 0);
    const int n = 100000;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n; ++i) ++counts[step_vertex(star, 1e-4, rng).ray];
    for (std::size_t r = 0; r < 3; ++r) {
      const Real f = Real(counts[r]) / n;
      CHECK(std::abs(f - star.weights[r]) <= binomial_band(star.weights[r], n, 3.0));
    }
  }
  SUBCASE("radius is |xi| sqrt(dt)") {
    StarGraph star{{1.0}, {}};
    RngStream rng(5, 0);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += step_vertex(star, 1e-2, rng).radius;
    // E |N(0, dt)| = sqrt(2 dt / pi)
    const double expected = std::sqrt(2.0 * 1e-2 / M_PI);
    CHECK(std::abs(sum / n - expected) < 5.0 * std::sqrt(1e-2 / n));
  }
}

TEST_CASE("T = 0 trajectory is the start point") {
  const MetricGraph g = instantiate(fixtures::buffer_pair(2.0, 1.0, 0.0, 0.0), 1.0);
  SimConfig cfg;
  const Trajectory traj = simulate(g, Position::at_vertex(1), 0.0, cfg);
  REQUIRE(traj.times.size() == 1);
  CHECK(traj.positions[0] == Position::at_vertex(1));
}

TEST_CASE("walsh star occupation fractions and radial law") {
  const std::vector<Real> p{0.5, 0.3, 0.2};
  const MetricGraph g = instantiate(fixtures::walsh_star(p), 1.0);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.seed = 99;
  cfg.record_dt = 1.0;  // record the endpoint only
  const std::size_t n = 20000;
  const Ensemble ens = batch(g, Position::at_vertex(1), 1.0, cfg, n);

  std::vector<int> counts(3, 0);
  std::vector<Real> radial;
  radial.reserve(n);
  for (const Trajectory& tr : ens.trajectories) {
    const Position& fin = tr.positions.back();
    REQUIRE_FALSE(fin.is_vertex());
    ++counts[static_cast<std::size_t>(fin.edge - 1)];
    radial.push_back(fin.coordinate);
  }
  for (std::size_t r = 0; r < 3; ++r) {
    const Real f = Real(counts[r]) / Real(n);
    CHECK(std::abs(f - p[r]) <= binomial_band(p[r], n, 3.5));
  }
  const Real ks = ks_against_cdf(radial, [](Real x) { return half_normal_cdf(x, 1.0); });
  CHECK(ks <= 0.02);
}

TEST_CASE("first passage transform on a unit segment (fast variant)") {
  // E e^{-lambda tau} for reflected motion from 0 hitting level 1 equals
  // 1 / cosh(sqrt(2 lambda)); the acceptance suite runs the full-size check.
  const MetricGraph g = instantiate(segment_with_leaf(), 1.0);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.seed = 12345;
  const SimGraph sg(g, cfg);
  const Real lambda = 1.0;
  const std::size_t n = 20000;
  std::vector<Real> weights(n, 0.0);
  for_each_trajectory(n, cfg.seed, [&](std::size_t i, RngStream& rng) {
    AbsorbSink sink{2};
    run_path(sg, Position::at_vertex(1), 1e9, rng, sink);
    REQUIRE(sink.hit_time >= 0.0);
    weights[i] = std::exp(-lambda * sink.hit_time);
  });
  const MeanSe ms = mean_and_se(weights);
  const Real expected = 1.0 / std::cosh(std::sqrt(2.0));
  CHECK(std::abs(ms.mean - expected) < 5.0 * ms.se);
}

TEST_CASE("batch determinism") {
  const MetricGraph g = instantiate(fixtures::buffer_pair(2.0, 1.0, 0.0, 0.0), 1.0 / 8.0);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.seed = 2024;
  cfg.record_dt = 0.25;

  SUBCASE("identical spec gives bit-identical ensembles across thread counts") {
    setenv("WALSHGRAPH_THREADS", "1", 1);
    const Ensemble a = batch(g, Position::at_vertex(1), 1.0, cfg, 64);
    setenv("WALSHGRAPH_THREADS", "2", 1);
    const Ensemble b = batch(g, Position::at_vertex(1), 1.0, cfg, 64);
    unsetenv("WALSHGRAPH_THREADS");
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
      CHECK(a.trajectories[i].times == b.trajectories[i].times);
      CHECK(a.trajectories[i].positions == b.trajectories[i].positions);
    }
  }
  SUBCASE("N = 1 batch equals simulate") {
    const Ensemble one = batch(g, Position::at_vertex(1), 1.0, cfg, 1);
    const Trajectory solo = simulate(g, Position::at_vertex(1), 1.0, cfg);
    CHECK(one.trajectories[0].positions == solo.positions);
  }
  SUBCASE("trajectory i does not depend on the batch size") {
    const Ensemble big = batch(g, Position::at_vertex(1), 1.0, cfg, 16);
    const Ensemble small = batch(g, Position::at_vertex(1), 1.0, cfg, 4);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(big.trajectories[i].positions == small.trajectories[i].positions);
  }
  SUBCASE("different seeds differ") {
    const Ensemble a = batch(g, Position::at_vertex(1), 1.0, cfg, 8);
    SimConfig other = cfg;
    other.seed = 2025;
    const Ensemble b = batch(g, Position::at_vertex(1), 1.0, other, 8);
    bool any_difference = false;
    for (std::size_t i = 0; i < 8 && !any_difference; ++i)
      any_difference = !(a.trajectories[i].positions == b.trajectories[i].positions);
    CHECK(any_difference);
  }
}

TEST_CASE("projection onto the contracted graph") {
  const GraphFamily f = fixtures::buffer_pair(2.0, 1.0, 0.0, 0.0);
  const ContractedGraph c = contract(f);

  CHECK(project(Position::on_edge(1, 3.7), c, f) == Position::on_edge(1, 3.7));
  CHECK(project(Position::on_edge(3, 0.01), c, f) == Position::at_vertex(1));
  CHECK(project(Position::on_edge(4, 0.005), c, f) == Position::at_vertex(1));
  CHECK(project(Position::at_vertex(2), c, f) == Position::at_vertex(1));

  Trajectory traj;
  traj.times = {0.0, 0.5, 1.0};
  traj.positions = {Position::at_vertex(1), Position::on_edge(3, 0.01), Position::on_edge(2, 1.5)};
  const Trajectory proj = project(traj, c, f);
  CHECK(proj.times == traj.times);  // time grid preserved exactly
  CHECK(proj.positions[0] == Position::at_vertex(1));
  CHECK(proj.positions[1] == Position::at_vertex(1));
  CHECK(proj.positions[2] == Position::on_edge(2, 1.5));
}

TEST_CASE("buffer-pair trajectories stay on the graph") {
  const Real eps = 1.0 / 16.0;
  const GraphFamily f = fixtures::buffer_pair(2.0, 1.0, 0.0, 0.0);
  const MetricGraph g = instantiate(f, eps);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.seed = 31;
  cfg.record_dt = 0.05;
  const Trajectory traj = simulate(g, Position::at_vertex(1), 1.0, cfg);
  for (const Position& p : traj.positions) {
    if (p.is_vertex()) {
      CHECK((p.vertex == 1 || p.vertex == 2));
    } else {
      const Real len = g.length_of(p.edge);
      CHECK(p.coordinate >= 0.0);
      CHECK(p.coordinate <= len);
    }
  }
}
