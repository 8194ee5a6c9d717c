#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "walshgraph/common.hpp"
#include "walshgraph/contraction.hpp"
#include "walshgraph/graph.hpp"
#include "walshgraph/interval_exit.hpp"
#include "walshgraph/rng.hpp"
#include "walshgraph/scale.hpp"
#include "walshgraph/star.hpp"

namespace walshgraph {

// =============================================================================
// Trajectory generation
// =============================================================================
//
// The walker is always attached to a home vertex and lives on that vertex's
// outgoing edges (orientation: an edge is entered through its origin only;
// hitting the far endpoint switches the home). Four regimes:
//
//   Vertex   — at the home vertex; each substep samples a ray by the
//              asymmetry weights and moves a reflected-normal radius.
//   Shell    — within the shell around the home vertex, in the natural-scale
//              coordinate of the current ray; a substep that touches zero
//              (detected by the bridge crossing probability) resamples the
//              ray, which realizes the excursion law without enumerating
//              excursions.
//   Short    — on a contracting edge shorter than the shell diameter; exit
//              side and time are drawn exactly from the two-sided interval
//              law instead of stepping.
//   Interior — beyond the shell, plain Euler-Maruyama in the original edge
//              coordinate; hits of the far endpoint are detected with the
//              Brownian-bridge crossing probability, which removes the
//              sqrt(dt) first-passage bias.
//
// With drift, the star is first straightened by the per-edge scale map; the
// process clock then advances by du / (sigma(x) S'(x))^2 per natural-time
// substep du. Driftless unit edges skip all conversions.

inline constexpr EdgeId kAtVertexEdge = -1;
inline constexpr VertexId kNoVertex = -2;

struct Position {
  EdgeId edge = kAtVertexEdge;  // kAtVertexEdge: at `vertex`
  Real coordinate = 0.0;        // along `edge` from its origin
  VertexId vertex = kNoVertex;

  static Position on_edge(EdgeId e, Real x) { return {e, x, kNoVertex}; }
  static Position at_vertex(VertexId v) { return {kAtVertexEdge, 0.0, v}; }
  bool is_vertex() const { return edge == kAtVertexEdge; }

  bool operator==(const Position&) const = default;
};

struct SimConfig {
  Real dt = 1e-4;         // base step, process-time units
  Real shell = 0.0;       // vertex-shell radius, length units; 0 = 3 sqrt(dt) max sigma
  int substeps = 4;       // shell refinement: du = dt / substeps
  std::uint64_t seed = kDefaultSeed;
  Real record_dt = 0.0;   // trajectory grid spacing; 0 = T / 1024

  void validate() const {
    if (!(dt > 0.0)) throw ValidationError("dt-positive", "sim config", "dt must be positive");
    if (shell < 0.0) throw ValidationError("shell-radius", "sim config", "shell must be >= 0");
    if (substeps < 1) throw ValidationError("substeps", "sim config", "substeps must be >= 1");
  }
};

struct Trajectory {
  std::vector<Real> times;
  std::vector<Position> positions;
};

struct Ensemble {
  SimConfig config;
  std::vector<Trajectory> trajectories;
};

// -----------------------------------------------------------------------------
// Step primitives
// -----------------------------------------------------------------------------

/// One Euler-Maruyama step in the original edge coordinate.
inline Real step_edge(Real x, const CoefficientSpec& coeffs, Real dt, RngStream& rng) {
  const Real sigma = coeffs.diffusion(x);
  return x + coeffs.drift(x) * dt + sigma * std::sqrt(dt) * rng.normal();
}

struct VertexStep {
  std::size_t ray = 0;
  Real radius = 0.0;
};

/// One from-the-vertex substep: ray sampled by the weights, radius a
/// reflected-normal increment.
inline VertexStep step_vertex(const StarGraph& star, Real dt, RngStream& rng) {
  VertexStep s;
  s.ray = rng.categorical(star.weights);
  s.radius = std::abs(rng.normal()) * std::sqrt(dt);
  return s;
}

// -----------------------------------------------------------------------------
// Prepared simulation graph
// -----------------------------------------------------------------------------

namespace detail {

struct RayContext {
  EdgeId edge_id = 0;
  VertexId far = kInfinityVertex;
  Real length = kInfinity;      // instantiated, original units
  bool short_edge = false;      // length <= shell diameter: exact interval exit
  bool unit = true;             // driftless unit diffusion: identity fast path
  ScaleMap scale;               // anchored at the home vertex
  Real nat_length = kInfinity;  // S(length) for finite edges within map range
  Real shell_exit_nat = 0.0;    // S(min(shell, length/2)): leave-shell radius
  Real x_shell = 0.0;           // original-units shell entry threshold
  const CoefficientSpec* coeffs = nullptr;
  Real weight = 0.0;
};

struct StarContext {
  VertexId vertex = 0;
  std::vector<RayContext> rays;
  std::vector<Real> weights;
};

}  // namespace detail

/// Immutable precomputed context shared by all trajectories of an ensemble.
class SimGraph {
 public:
  SimGraph(MetricGraph graph, SimConfig config) : graph_(std::move(graph)), config_(config) {
    config_.validate();
    Real sigma_max = 0.0;
    for (const Edge& e : graph_.family.edges)
      sigma_max = std::max(sigma_max, e.coefficients.diffusion.max_value());
    shell_ = config_.shell > 0.0 ? config_.shell : 3.0 * std::sqrt(config_.dt) * sigma_max;
    du_ = config_.dt / config_.substeps;

    for (VertexId v : graph_.family.vertices) {
      detail::StarContext star;
      star.vertex = v;
      for (std::size_t idx : graph_.family.outgoing(v)) {
        const Edge& e = graph_.family.edges[idx];
        detail::RayContext ray;
        ray.edge_id = e.id;
        ray.far = e.target;
        ray.length = graph_.lengths[idx];
        ray.coeffs = &e.coefficients;
        ray.weight = graph_.family.weight_of(v, e.id);
        ray.unit = e.coefficients.is_driftless_unit();
        ray.short_edge = std::isfinite(ray.length) && ray.length <= 2.0 * shell_;
        const Real cover = std::isfinite(ray.length)
                               ? ray.length
                               : std::max(4.0 * shell_, 16.0 * std::sqrt(config_.dt) *
                                                            (sigma_max > 0 ? sigma_max : 1.0));
        if (e.coefficients.drift.is_constant_equal(0.0)) {
          ray.scale = ScaleMap::identity(cover);
        } else {
          ray.scale = make_scale_map(e.coefficients, cover,
                                     std::max(cover / 256.0, 1e-6));
        }
        if (std::isfinite(ray.length))
          ray.nat_length = ray.scale.forward(std::min(ray.length, ray.scale.x_max()));
        ray.x_shell = std::min(shell_, 0.5 * ray.length);
        ray.shell_exit_nat = ray.scale.forward(std::min(ray.x_shell, ray.scale.x_max()));
        star.weights.push_back(ray.weight);
        star.rays.push_back(std::move(ray));
      }
      stars_[v] = std::move(star);
    }
  }

  const MetricGraph& graph() const { return graph_; }
  const SimConfig& config() const { return config_; }
  Real shell_radius() const { return shell_; }
  Real du() const { return du_; }

  const detail::StarContext& star(VertexId v) const {
    const auto it = stars_.find(v);
    if (it == stars_.end())
      throw ValidationError("vertex-exists", "vertex " + std::to_string(v), "no such vertex");
    return it->second;
  }

  /// (home vertex, ray index) of an edge id.
  std::pair<VertexId, std::size_t> locate_edge(EdgeId id) const {
    const Edge& e = graph_.family.edge(id);
    const detail::StarContext& s = star(e.origin);
    for (std::size_t k = 0; k < s.rays.size(); ++k)
      if (s.rays[k].edge_id == id) return {e.origin, k};
    throw ValidationError("edge-exists", "edge " + std::to_string(id), "edge not in its star");
  }

 private:
  MetricGraph graph_;
  SimConfig config_;
  Real shell_ = 0.0;
  Real du_ = 0.0;
  std::map<VertexId, detail::StarContext> stars_;
};

// -----------------------------------------------------------------------------
// Path runner
// -----------------------------------------------------------------------------

/// Per-step record handed to sinks. The walker occupies `edge0` (or the home
/// vertex when edge0 == kAtVertexEdge) during (t0, t1); `edge1`/`x1` is the
/// end-of-step position; `vertex_hit` reports a vertex arrival at t1.
struct StepInfo {
  Real t0 = 0.0, t1 = 0.0;
  EdgeId edge0 = kAtVertexEdge;
  Real x0 = 0.0;
  EdgeId edge1 = kAtVertexEdge;
  Real x1 = 0.0;
  VertexId home = 0;
  VertexId vertex_hit = kNoVertex;

  Position end_position() const {
    return edge1 == kAtVertexEdge ? Position::at_vertex(vertex_hit != kNoVertex ? vertex_hit : home)
                                  : Position::on_edge(edge1, x1);
  }
};

namespace detail {

enum class Mode { Vertex, Shell, Short, Interior };

struct PathState {
  Real t = 0.0;
  Mode mode = Mode::Vertex;
  const StarContext* star = nullptr;
  std::size_t ray = 0;   // valid unless Vertex
  Real y_nat = 0.0;      // Shell/Short: natural-scale radius
  Real x = 0.0;          // Interior: original coordinate
};

/// Probability that a Brownian path from a to b over time window `dt`
/// (variance sigma^2 dt) crossed the level `level` (requires a, b on the
/// same side of the level).
inline Real bridge_crossing_probability(Real a, Real b, Real level, Real var_dt) {
  const Real da = level - a, db = level - b;
  const Real expo = 2.0 * da * db / var_dt;
  if (expo > 40.0) return 0.0;
  return std::exp(-expo);
}

inline Real clamp01(Real x) { return std::min(std::max(x, Real(0)), Real(1)); }

}  // namespace detail

/// Runs one trajectory from `start` until process time T or until the sink
/// stops it. The sink sees every step through `bool step(const StepInfo&)`;
/// returning false stops the path. Returns the final StepInfo-consistent
/// position and time.
template <class Sink>
std::pair<Real, Position> run_path(const SimGraph& sg, const Position& start, Real T,
                                   RngStream& rng, Sink&& sink) {
  using detail::Mode;
  const Real dt = sg.config().dt;
  const Real du = sg.du();

  detail::PathState st;
  st.t = 0.0;
  // Initial placement.
  if (start.is_vertex()) {
    st.mode = Mode::Vertex;
    st.star = &sg.star(start.vertex);
  } else {
    const auto [home, ray_idx] = sg.locate_edge(start.edge);
    st.star = &sg.star(home);
    st.ray = ray_idx;
    const detail::RayContext& rc = st.star->rays[ray_idx];
    if (start.coordinate < 0.0 || start.coordinate > rc.length)
      throw ValidationError("position-range", "edge " + std::to_string(start.edge),
                            "coordinate outside [0, length]");
    if (start.coordinate == 0.0) {
      st.mode = Mode::Vertex;
    } else if (std::isfinite(rc.length) && start.coordinate == rc.length) {
      st.mode = Mode::Vertex;
      st.star = &sg.star(rc.far);
    } else if (rc.short_edge) {
      st.mode = Mode::Short;
      st.y_nat = rc.scale.forward(start.coordinate);
    } else if (start.coordinate < rc.x_shell) {
      st.mode = Mode::Shell;
      st.y_nat = rc.scale.forward(start.coordinate);
    } else {
      st.mode = Mode::Interior;
      st.x = start.coordinate;
    }
  }

  const auto position_of = [&](const detail::PathState& s) -> Position {
    switch (s.mode) {
      case Mode::Vertex:
        return Position::at_vertex(s.star->vertex);
      case Mode::Shell:
      case Mode::Short: {
        const detail::RayContext& rc = s.star->rays[s.ray];
        return Position::on_edge(rc.edge_id, rc.unit ? s.y_nat : rc.scale.inverse(s.y_nat));
      }
      case Mode::Interior:
      default:
        return Position::on_edge(s.star->rays[s.ray].edge_id, s.x);
    }
  };

  if (T <= 0.0) return {0.0, position_of(st)};

  // Inverse squared time-change factor at natural radius y on a ray:
  // process-time per unit natural time.
  const auto time_factor = [&](const detail::RayContext& rc, Real y) -> Real {
    if (rc.unit) return 1.0;
    const Real x = rc.scale.inverse(y);
    const Real g = rc.coeffs->diffusion(x) * rc.scale.derivative(x);
    return 1.0 / (g * g);
  };

  bool running = true;
  while (running && st.t < T) {
    StepInfo info;
    info.t0 = st.t;
    info.home = st.star->vertex;
    const Position p0 = position_of(st);
    info.edge0 = p0.edge;
    info.x0 = p0.coordinate;

    switch (st.mode) {
      case Mode::Vertex: {
        const std::size_t k = rng.categorical(st.star->weights);
        const detail::RayContext& rc = st.star->rays[k];
        st.ray = k;
        info.edge0 = rc.edge_id;  // the substep is spent on the sampled ray
        info.x0 = 0.0;
        Real step_du = du;
        if (rc.short_edge) {
          const Real quarter = 0.25 * rc.nat_length;
          step_du = std::min(du, quarter * quarter);
        }
        const Real y = std::abs(rng.normal()) * std::sqrt(step_du);
        st.t += step_du * time_factor(rc, 0.0);
        if (rc.short_edge) {
          bool crossed = y >= rc.nat_length;
          if (!crossed) {
            // Within-substep crossing of the far end by the reflected path:
            // first two images of the bridge maximum.
            const Real p_up = detail::bridge_crossing_probability(y, 0.0, rc.nat_length, step_du);
            const Real p_up2 =
                detail::bridge_crossing_probability(-y, 0.0, rc.nat_length, step_du);
            crossed = rng.uniform() < detail::clamp01(p_up + p_up2);
          }
          if (crossed) {
            st.mode = Mode::Vertex;
            st.star = &sg.star(rc.far);
            info.vertex_hit = rc.far;
            info.edge1 = kAtVertexEdge;
            break;
          }
          st.mode = Mode::Short;
          st.y_nat = y;
        } else if (y > rc.shell_exit_nat) {
          st.mode = Mode::Interior;
          st.x = rc.unit ? y : rc.scale.inverse(y);
        } else {
          st.mode = Mode::Shell;
          st.y_nat = y;
        }
        const Position p1 = position_of(st);
        info.edge1 = p1.edge;
        info.x1 = p1.coordinate;
        break;
      }

      case Mode::Short: {
        const detail::RayContext& rc = st.star->rays[st.ray];
        const IntervalExit exit = sample_interval_exit(st.y_nat, rc.nat_length, rng);
        st.t += exit.time * time_factor(rc, 0.5 * rc.nat_length);
        if (exit.hit_upper) {
          st.star = &sg.star(rc.far);
          info.vertex_hit = rc.far;
        } else {
          info.vertex_hit = st.star->vertex;
        }
        st.mode = Mode::Vertex;
        info.edge1 = kAtVertexEdge;
        break;
      }

      case Mode::Shell: {
        const detail::RayContext& rc = st.star->rays[st.ray];
        const Real y0 = st.y_nat;
        st.t += du * time_factor(rc, y0);
        const Real y1 = y0 + rng.normal() * std::sqrt(du);
        bool touched_zero = y1 <= 0.0;
        if (!touched_zero) {
          const Real p0x = detail::bridge_crossing_probability(y0, y1, 0.0, du);
          touched_zero = p0x > 0.0 && rng.uniform() < p0x;
        }
        Real radius = std::abs(y1);
        if (touched_zero) {
          const std::size_t k = rng.categorical(st.star->weights);
          st.ray = k;
          const detail::RayContext& nrc = st.star->rays[k];
          if (nrc.short_edge) {
            bool crossed = radius >= nrc.nat_length;
            if (!crossed) {
              const Real p_up =
                  detail::bridge_crossing_probability(radius, 0.0, nrc.nat_length, du);
              const Real p_up2 =
                  detail::bridge_crossing_probability(-radius, 0.0, nrc.nat_length, du);
              crossed = rng.uniform() < detail::clamp01(p_up + p_up2);
            }
            if (crossed) {
              st.mode = Mode::Vertex;
              st.star = &sg.star(nrc.far);
              info.vertex_hit = nrc.far;
              info.edge1 = kAtVertexEdge;
              break;
            }
            st.mode = Mode::Short;
            st.y_nat = radius;
            const Position p1 = position_of(st);
            info.edge1 = p1.edge;
            info.x1 = p1.coordinate;
            break;
          }
          st.y_nat = radius;
          if (radius > nrc.shell_exit_nat) {
            st.mode = Mode::Interior;
            st.x = nrc.unit ? radius : nrc.scale.inverse(radius);
          }
        } else {
          st.y_nat = radius;
          if (radius > rc.shell_exit_nat) {
            st.mode = Mode::Interior;
            st.x = rc.unit ? radius : rc.scale.inverse(radius);
          }
        }
        const Position p1 = position_of(st);
        info.edge1 = p1.edge;
        info.x1 = p1.coordinate;
        break;
      }

      case Mode::Interior:
      default: {
        const detail::RayContext& rc = st.star->rays[st.ray];
        const Real x0 = st.x;
        const Real sigma = rc.coeffs->diffusion(x0);
        const Real var_dt = sigma * sigma * dt;
        const Real x1 = x0 + rc.coeffs->drift(x0) * dt + sigma * std::sqrt(dt) * rng.normal();
        st.t += dt;
        bool hit_far = false;
        if (std::isfinite(rc.length)) {
          if (x1 >= rc.length)
            hit_far = true;
          else if (x0 < rc.length && x1 < rc.length) {
            const Real p = detail::bridge_crossing_probability(x0, x1, rc.length, var_dt);
            if (p > 0.0 && rng.uniform() < p) hit_far = true;
          }
        }
        if (hit_far) {
          st.mode = Mode::Vertex;
          st.star = &sg.star(rc.far);
          info.vertex_hit = rc.far;
          info.edge1 = kAtVertexEdge;
          break;
        }
        if (x1 <= 0.0) {
          st.mode = Mode::Vertex;
          info.vertex_hit = st.star->vertex;
          info.edge1 = kAtVertexEdge;
          break;
        }
        if (x1 < rc.x_shell) {
          st.mode = Mode::Shell;
          st.y_nat = rc.unit ? x1 : rc.scale.forward(x1);
        } else {
          st.x = x1;
        }
        const Position p1 = position_of(st);
        info.edge1 = p1.edge;
        info.x1 = p1.coordinate;
        break;
      }
    }

    info.t1 = st.t;
    running = sink.step(info);
  }
  return {st.t, position_of(st)};
}

// -----------------------------------------------------------------------------
// Recording sinks and public operations
// -----------------------------------------------------------------------------

namespace detail {

/// Fills a trajectory on a fixed time grid with end-of-step positions.
class GridRecorder {
 public:
  GridRecorder(std::vector<Real> grid, Trajectory& out) : grid_(std::move(grid)), out_(out) {
    out_.times = grid_;
    out_.positions.assign(grid_.size(), Position{});
  }

  void record_initial(const Position& p) {
    while (next_ < grid_.size() && grid_[next_] <= 0.0) out_.positions[next_++] = p;
  }

  bool step(const StepInfo& info) {
    const Position p = info.end_position();
    while (next_ < grid_.size() && grid_[next_] <= info.t1) out_.positions[next_++] = p;
    return next_ < grid_.size();
  }

  void finish(const Position& p) {
    while (next_ < grid_.size()) out_.positions[next_++] = p;
  }

 private:
  std::vector<Real> grid_;
  Trajectory& out_;
  std::size_t next_ = 0;
};

inline std::vector<Real> default_grid(Real T, Real record_dt) {
  std::vector<Real> grid;
  const Real step = record_dt > 0.0 ? record_dt : T / 1024.0;
  if (T <= 0.0 || step <= 0.0) {
    grid.push_back(0.0);
    return grid;
  }
  for (Real t = 0.0; t < T; t += step) grid.push_back(t);
  grid.push_back(T);
  return grid;
}

}  // namespace detail

/// One trajectory on [0, T], recorded on the config grid. Uses the stream
/// (seed, 0), so it coincides with the first member of a batch.
inline Trajectory simulate(const SimGraph& sg, const Position& x0, Real T) {
  Trajectory traj;
  detail::GridRecorder rec(detail::default_grid(T, sg.config().record_dt), traj);
  RngStream rng(sg.config().seed, 0);
  rec.record_initial(x0);
  const auto [t_end, p_end] = run_path(sg, x0, T, rng, rec);
  (void)t_end;
  rec.finish(p_end);
  return traj;
}

inline Trajectory simulate(const MetricGraph& graph, const Position& x0, Real T,
                           const SimConfig& config) {
  return simulate(SimGraph(graph, config), x0, T);
}

/// Projection onto the contracted graph: surviving edges keep their
/// coordinate, contracting edges collapse to their knot, vertices map to
/// their knot.
inline Position project(const Position& p, const ContractedGraph& contraction,
                        const GraphFamily& original) {
  if (p.is_vertex()) return Position::at_vertex(contraction.partition.knot_of.at(p.vertex));
  const Edge& e = original.edge(p.edge);
  if (e.scaling.is_contracting())
    return Position::at_vertex(contraction.partition.knot_of.at(e.origin));
  return p;
}

inline Trajectory project(const Trajectory& traj, const ContractedGraph& contraction,
                          const GraphFamily& original) {
  Trajectory out;
  out.times = traj.times;
  out.positions.reserve(traj.positions.size());
  for (const Position& p : traj.positions) out.positions.push_back(project(p, contraction, original));
  return out;
}

}  // namespace walshgraph
