#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "walshgraph/common.hpp"
#include "walshgraph/contraction.hpp"
#include "walshgraph/ensemble.hpp"
#include "walshgraph/graph.hpp"
#include "walshgraph/sim.hpp"
#include "walshgraph/star.hpp"
#include "walshgraph/stats.hpp"
#include "walshgraph/testfn.hpp"

namespace walshgraph {

// =============================================================================
// Statistical harness
// =============================================================================
//
// Ties the closed forms to Monte Carlo: occupation fractions against the
// limiting weights, per-edge marginal distances against a reference, the
// first-passage transforms against sampled paths, and the martingale
// characterization with a zero-flux test function (plus a nonzero-flux
// negative control that must be flagged).

struct ExperimentSpec {
  GraphFamily family;
  std::vector<Real> eps_schedule;  // strictly decreasing
  Real horizon = 1.0;
  std::vector<Real> observation_times;
  std::size_t ensemble_size = 100000;
  std::uint64_t seed = kDefaultSeed;
  enum class Reference { ClosedForm, SimulatedLimit };
  Reference reference = Reference::SimulatedLimit;
  SimConfig sim;
  Position start = Position::at_vertex(0);

  void validate() const {
    if (eps_schedule.empty())
      throw ValidationError("eps-schedule", "experiment spec", "empty scale schedule");
    for (std::size_t i = 1; i < eps_schedule.size(); ++i)
      if (!(eps_schedule[i] < eps_schedule[i - 1]))
        throw ValidationError("eps-schedule", "experiment spec",
                              "schedule must be strictly decreasing");
    if (ensemble_size < 1000)
      throw ValidationError("ensemble-size", "experiment spec", "need at least 1000 trajectories");
    if (observation_times.empty())
      throw ValidationError("observation-times", "experiment spec", "no observation times");
    for (std::size_t i = 0; i < observation_times.size(); ++i) {
      if (observation_times[i] <= 0.0 || observation_times[i] > horizon)
        throw ValidationError("observation-times", "experiment spec",
                              "times must lie in (0, horizon]");
      if (i > 0 && observation_times[i] <= observation_times[i - 1])
        throw ValidationError("observation-times", "experiment spec",
                              "times must be strictly increasing");
    }
    sim.validate();
  }
};

struct OccupationCheck {
  Real eps = 0.0;
  Real t = 0.0;
  std::map<EdgeId, Real> fraction;
  std::map<EdgeId, Real> expected;
  std::map<EdgeId, Real> band;  // 3 sigma binomial half-width
  Real vertex_fraction = 0.0;
  std::size_t n = 0;
  bool pass = false;
};

struct MarginalDistance {
  Real eps = 0.0;
  Real t = 0.0;
  std::map<EdgeId, Real> ks;
  std::map<EdgeId, std::size_t> count;
  Real tolerance = 0.0;
  bool pass = false;
};

struct MartingaleRecord {
  Real flux = 0.0;
  Real mean = 0.0;
  Real se = 0.0;
  std::size_t n = 0;
  bool flagged = false;  // |mean| > 4 se
};

struct LaplaceMcRecord {
  Real lambda = 0.0;
  struct Entry {
    std::size_t ray = 0;
    Real estimate = 0.0;
    Real se = 0.0;
    Real expected = 0.0;
    Real z = 0.0;
  };
  std::vector<Entry> exits;       // marked rays: E[e^{-lambda tau}; hit mark]
  std::vector<Entry> occupations; // unmarked rays: integral transforms
  std::size_t n = 0;
  bool pass = false;  // all |z| <= 4
};

struct StatReport {
  std::vector<OccupationCheck> occupations;
  std::vector<MarginalDistance> marginals;
  bool pass = false;
};

// -----------------------------------------------------------------------------
// Ensemble observables
// -----------------------------------------------------------------------------

namespace detail {

inline std::size_t grid_index(const Trajectory& traj, Real t) {
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    if (std::abs(traj.times[i] - t) <= 1e-12 * std::max(Real(1), std::abs(t))) return i;
  throw Error("no grid point at t = " + std::to_string(t));
}

}  // namespace detail

/// Edge-occupation fractions of a projected ensemble at time t against the
/// expected limiting weights, with 3-sigma binomial bands.
inline OccupationCheck occupation_check(const Ensemble& projected, Real t,
                                        const std::map<EdgeId, Real>& expected) {
  if (projected.trajectories.empty()) throw InsufficientSample("occupation_check: empty ensemble");
  OccupationCheck oc;
  oc.t = t;
  oc.n = projected.trajectories.size();
  oc.expected = expected;
  const std::size_t idx = detail::grid_index(projected.trajectories.front(), t);
  std::map<EdgeId, std::size_t> counts;
  std::size_t at_vertex = 0;
  for (const Trajectory& traj : projected.trajectories) {
    const Position& p = traj.positions[idx];
    if (p.is_vertex())
      ++at_vertex;
    else
      ++counts[p.edge];
  }
  oc.vertex_fraction = Real(at_vertex) / Real(oc.n);
  oc.pass = true;
  for (const auto& [edge, p] : expected) {
    const Real f = Real(counts[edge]) / Real(oc.n);
    oc.fraction[edge] = f;
    oc.band[edge] = binomial_band(p, oc.n, 3.0);
    if (std::abs(f - p) > oc.band[edge] + oc.vertex_fraction) oc.pass = false;
  }
  for (const auto& [edge, c] : counts)
    if (!expected.count(edge) && c > 0) oc.pass = false;  // mass on an unexpected edge
  return oc;
}

/// Per-edge Kolmogorov-Smirnov distances between the conditional coordinate
/// samples of two projected ensembles at matched time t. Throws
/// InsufficientSample when a conditional sample has fewer than 100 points.
inline MarginalDistance marginal_distance(const Ensemble& projected, const Ensemble& reference,
                                          Real t, Real tolerance) {
  MarginalDistance md;
  md.t = t;
  md.tolerance = tolerance;
  const std::size_t ia = detail::grid_index(projected.trajectories.front(), t);
  const std::size_t ib = detail::grid_index(reference.trajectories.front(), t);
  std::map<EdgeId, std::vector<Real>> sa, sb;
  for (const Trajectory& traj : projected.trajectories) {
    const Position& p = traj.positions[ia];
    if (!p.is_vertex()) sa[p.edge].push_back(p.coordinate);
  }
  for (const Trajectory& traj : reference.trajectories) {
    const Position& p = traj.positions[ib];
    if (!p.is_vertex()) sb[p.edge].push_back(p.coordinate);
  }
  md.pass = true;
  for (auto& [edge, sample] : sa) {
    const auto it = sb.find(edge);
    if (sample.size() < 100 || it == sb.end() || it->second.size() < 100)
      throw InsufficientSample("marginal_distance: conditional sample below 100 on edge " +
                               std::to_string(edge));
    md.ks[edge] = ks_two_sample(sample, it->second);
    md.count[edge] = sample.size();
    if (md.ks[edge] > tolerance) md.pass = false;
  }
  return md;
}

/// Same, against a per-edge closed-form CDF.
inline MarginalDistance marginal_distance(const Ensemble& projected,
                                          const std::function<Real(EdgeId, Real)>& cdf, Real t,
                                          Real tolerance) {
  MarginalDistance md;
  md.t = t;
  md.tolerance = tolerance;
  const std::size_t ia = detail::grid_index(projected.trajectories.front(), t);
  std::map<EdgeId, std::vector<Real>> sa;
  for (const Trajectory& traj : projected.trajectories) {
    const Position& p = traj.positions[ia];
    if (!p.is_vertex()) sa[p.edge].push_back(p.coordinate);
  }
  md.pass = true;
  for (auto& [edge, sample] : sa) {
    if (sample.size() < 100)
      throw InsufficientSample("marginal_distance: conditional sample below 100 on edge " +
                               std::to_string(edge));
    md.ks[edge] = ks_against_cdf(sample, [&, e = edge](Real x) { return cdf(e, x); });
    md.count[edge] = sample.size();
    if (md.ks[edge] > tolerance) md.pass = false;
  }
  return md;
}

// -----------------------------------------------------------------------------
// First-passage Monte Carlo against the closed transforms
// -----------------------------------------------------------------------------

namespace detail {

/// Star with marks realized as a metric graph: marked rays become fixed
/// edges to leaf vertices (each with a continuation ray so the family stays
/// valid); unmarked rays stay rays.
struct StarFixture {
  GraphFamily family;
  std::map<VertexId, std::size_t> mark_of_leaf;  // leaf vertex -> marked ray index
  std::map<EdgeId, std::size_t> ray_of_edge;     // star edge id -> ray index
};

inline StarFixture star_fixture(const StarGraph& star) {
  star.validate();
  StarFixture fx;
  fx.family.vertices.push_back(0);
  std::map<EdgeId, Real> weights;
  for (std::size_t k = 0; k < star.ray_count(); ++k) {
    Edge e;
    e.id = static_cast<EdgeId>(10 + k);
    e.origin = 0;
    if (star.marked(k)) {
      const VertexId leaf = static_cast<VertexId>(1 + k);
      e.target = leaf;
      e.length = star.marks[k];
      fx.family.vertices.push_back(leaf);
      Edge cont;
      cont.id = static_cast<EdgeId>(100 + k);
      cont.origin = leaf;
      fx.family.edges.push_back(cont);
      fx.family.asymmetry[leaf] = {{cont.id, 1.0}};
      fx.mark_of_leaf[leaf] = k;
    }
    fx.ray_of_edge[e.id] = k;
    weights[e.id] = star.weights[k];
    fx.family.edges.push_back(e);
  }
  fx.family.asymmetry[0] = weights;
  std::sort(fx.family.edges.begin(), fx.family.edges.end(),
            [](const Edge& a, const Edge& b) { return a.id < b.id; });
  return fx;
}

struct LaplacePathSink {
  Real lambda = 1.0;
  Real t_cut = 0.0;
  const StarFixture* fx = nullptr;
  std::vector<Real>* occupation = nullptr;  // per star ray, this trajectory
  std::size_t hit_mark = static_cast<std::size_t>(-1);
  Real hit_time = -1.0;

  bool step(const StepInfo& info) {
    if (info.edge0 != kAtVertexEdge) {
      const auto it = fx->ray_of_edge.find(info.edge0);
      if (it != fx->ray_of_edge.end()) {
        const Real a = std::min(info.t0, t_cut);
        const Real b = std::min(info.t1, t_cut);
        if (b > a)
          (*occupation)[it->second] += (std::exp(-lambda * a) - std::exp(-lambda * b)) / lambda;
      }
    }
    if (info.vertex_hit != kNoVertex) {
      const auto mk = fx->mark_of_leaf.find(info.vertex_hit);
      if (mk != fx->mark_of_leaf.end()) {
        hit_mark = mk->second;
        hit_time = info.t1;
        return false;
      }
    }
    return info.t1 < t_cut;
  }
};

}  // namespace detail

/// Monte Carlo cross-check of the first-passage transforms on a star:
/// sampled E[e^{-lambda tau}; hit mark k] against the exit transform and
/// sampled occupation integrals (indicator observable) against the
/// occupation transform, with z-scores. Paths truncate where
/// e^{-lambda t} < 1e-4.
inline LaplaceMcRecord laplace_mc_check(const StarGraph& star, Real lambda, std::size_t n,
                                        const SimConfig& config) {
  if (!(lambda > 0.0)) throw Error("laplace_mc_check: lambda must be positive");
  const detail::StarFixture fx = detail::star_fixture(star);
  const SimGraph sg(instantiate(fx.family, 1.0), config);
  const Real t_cut = std::log(1e4) / lambda;  // e^{-lambda t_cut} = 1e-4

  const std::size_t rays = star.ray_count();
  std::vector<std::vector<Real>> occupations(n);
  std::vector<std::size_t> hit(n, static_cast<std::size_t>(-1));
  std::vector<Real> hit_time(n, -1.0);
  for_each_trajectory(n, config.seed, [&](std::size_t i, RngStream& rng) {
    std::vector<Real> occ(rays, 0.0);
    detail::LaplacePathSink sink;
    sink.lambda = lambda;
    sink.t_cut = t_cut;
    sink.fx = &fx;
    sink.occupation = &occ;
    run_path(sg, Position::at_vertex(0), t_cut * 2.0, rng, sink);
    occupations[i] = std::move(occ);
    hit[i] = sink.hit_mark;
    hit_time[i] = sink.hit_time;
  });

  LaplaceMcRecord rec;
  rec.lambda = lambda;
  rec.n = n;
  rec.pass = true;
  for (std::size_t k = 0; k < rays; ++k) {
    LaplaceMcRecord::Entry entry;
    entry.ray = k;
    std::vector<Real> values(n, 0.0);
    if (star.marked(k)) {
      for (std::size_t i = 0; i < n; ++i)
        values[i] = (hit[i] == k) ? std::exp(-lambda * hit_time[i]) : 0.0;
      entry.expected = star_exit_transform(star, lambda, k);
      const MeanSe ms = mean_and_se(values);
      entry.estimate = ms.mean;
      entry.se = ms.se;
      entry.z = entry.se > 0.0 ? (entry.estimate - entry.expected) / entry.se : 0.0;
      rec.exits.push_back(entry);
    } else {
      for (std::size_t i = 0; i < n; ++i) values[i] = occupations[i][k];
      entry.expected = star_occupation_transform(star, lambda, k, 1.0 / lambda);
      const MeanSe ms = mean_and_se(values);
      entry.estimate = ms.mean;
      entry.se = ms.se;
      entry.z = entry.se > 0.0 ? (entry.estimate - entry.expected) / entry.se : 0.0;
      rec.occupations.push_back(entry);
    }
  }
  for (const auto& e : rec.exits)
    if (std::abs(e.z) > 4.0) rec.pass = false;
  for (const auto& e : rec.occupations)
    if (std::abs(e.z) > 4.0) rec.pass = false;
  return rec;
}

// -----------------------------------------------------------------------------
// Martingale statistics
// -----------------------------------------------------------------------------

namespace detail {

struct MartingaleSink {
  const TestFunction* phi = nullptr;
  const std::map<EdgeId, std::size_t>* ray_of_edge = nullptr;
  const GraphFamily* family = nullptr;
  Real horizon = 0.0;
  Real integral = 0.0;

  bool step(const StepInfo& info) {
    if (info.edge0 != kAtVertexEdge) {
      const std::size_t ray = ray_of_edge->at(info.edge0);
      const Real dt_eff = std::min(info.t1, horizon) - std::min(info.t0, horizon);
      if (dt_eff > 0.0)
        integral +=
            phi->generator(ray, info.x0, family->edge(info.edge0).coefficients) * dt_eff;
    }
    return true;  // run_path stops at the horizon
  }
};

}  // namespace detail

/// Ensemble statistic phi(X_T) - phi(X_0) - sum A phi(X_t) dt on a star
/// graph. Zero-flux test functions must come out within 4 SE of zero; the
/// record carries the flag either way, so nonzero-flux negative controls
/// assert `flagged`.
inline MartingaleRecord martingale_test(const MetricGraph& star_graph, const Position& x0, Real T,
                                        const SimConfig& config, std::size_t n,
                                        const TestFunction& phi) {
  if (star_graph.family.vertices.size() != 1)
    throw ValidationError("martingale-star", "martingale_test",
                          "statistic is defined on a single-vertex star");
  phi.validate();
  const VertexId center = star_graph.family.vertices.front();
  const VertexStar vs = star_of(star_graph, center);
  if (phi.ray_count() != vs.ray_edges.size())
    throw ValidationError("martingale-rays", "martingale_test",
                          "test function must cover every ray");
  std::map<EdgeId, std::size_t> ray_of_edge;
  for (std::size_t k = 0; k < vs.ray_edges.size(); ++k) ray_of_edge[vs.ray_edges[k]] = k;

  const auto value_at = [&](const Position& p) -> Real {
    if (p.is_vertex()) return phi.value(0, 0.0);
    return phi.value(ray_of_edge.at(p.edge), p.coordinate);
  };

  const SimGraph sg(star_graph, config);
  std::vector<Real> stats(n, 0.0);
  for_each_trajectory(n, config.seed, [&](std::size_t i, RngStream& rng) {
    detail::MartingaleSink sink;
    sink.phi = &phi;
    sink.ray_of_edge = &ray_of_edge;
    sink.family = &star_graph.family;
    sink.horizon = T;
    const auto [t_end, p_end] = run_path(sg, x0, T, rng, sink);
    (void)t_end;
    stats[i] = value_at(p_end) - value_at(x0) - sink.integral;
  });
  const MeanSe ms = mean_and_se(stats);
  MartingaleRecord rec;
  rec.flux = phi.flux(vs.star.weights);
  rec.mean = ms.mean;
  rec.se = ms.se;
  rec.n = n;
  rec.flagged = std::abs(rec.mean) > 4.0 * rec.se;
  return rec;
}

// -----------------------------------------------------------------------------
// Convergence study
// -----------------------------------------------------------------------------

/// Runs occupation and marginal checks across the scale schedule against the
/// contraction limit. The reference is the contracted-graph diffusion
/// simulated with the same engine (general coefficients), or the half-normal
/// closed form when the contracted star is driftless with unit diffusion.
/// `family_at` lets coefficient families vary with the scale; the default
/// uses the spec family unchanged.
inline StatReport convergence_study(
    const ExperimentSpec& spec,
    const std::function<GraphFamily(Real)>& family_at = {}) {
  spec.validate();
  const ContractedGraph contraction = contract(spec.family);

  std::vector<Real> grid{0.0};
  for (Real t : spec.observation_times) grid.push_back(t);

  const Position start_proj = project(spec.start, contraction, spec.family);
  const std::map<EdgeId, Real>* expected = nullptr;
  if (start_proj.is_vertex())
    expected = &contraction.quotient.asymmetry.at(start_proj.vertex);

  // Reference ensemble on the limit graph (offset stream namespace so the
  // reference does not reuse the pre-limit draws).
  SimConfig ref_cfg = spec.sim;
  ref_cfg.seed = spec.seed + 1;
  Ensemble reference;
  bool closed_form = spec.reference == ExperimentSpec::Reference::ClosedForm;
  if (!closed_form) {
    const SimGraph ref_graph(instantiate(contraction.quotient, 1.0), ref_cfg);
    reference = batch(ref_graph, start_proj, spec.horizon, spec.ensemble_size, grid);
  } else {
    for (const Edge& e : contraction.quotient.edges)
      if (!e.coefficients.is_driftless_unit() || !e.is_ray() || !start_proj.is_vertex())
        throw ValidationError("closed-form-reference", "experiment spec",
                              "closed form needs a driftless unit star started at the knot");
  }

  StatReport report;
  report.pass = true;
  for (Real eps : spec.eps_schedule) {
    const GraphFamily family = family_at ? family_at(eps) : spec.family;
    SimConfig cfg = spec.sim;
    cfg.seed = spec.seed;
    const SimGraph sg(instantiate(family, eps), cfg);
    const Ensemble pre = batch(sg, spec.start, spec.horizon, spec.ensemble_size, grid);
    Ensemble proj;
    proj.config = pre.config;
    proj.trajectories.reserve(pre.trajectories.size());
    for (const Trajectory& tr : pre.trajectories)
      proj.trajectories.push_back(project(tr, contraction, family));

    for (Real t : spec.observation_times) {
      if (expected) {
        OccupationCheck oc = occupation_check(proj, t, *expected);
        oc.eps = eps;
        if (!oc.pass) report.pass = false;
        report.occupations.push_back(std::move(oc));
      }
      const Real tolerance = 0.02;
      MarginalDistance md =
          closed_form
              ? marginal_distance(
                    proj, [&](EdgeId, Real x) { return half_normal_cdf(x, t); }, t, tolerance)
              : marginal_distance(proj, reference, t, tolerance);
      md.eps = eps;
      if (!md.pass) report.pass = false;
      report.marginals.push_back(std::move(md));
    }
  }
  return report;
}

}  // namespace walshgraph
