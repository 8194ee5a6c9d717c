#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "walshgraph/common.hpp"
#include "walshgraph/rng.hpp"
#include "walshgraph/sim.hpp"

namespace walshgraph {

// =============================================================================
// Ensembles
// =============================================================================
//
// Trajectory i always runs on the stream (seed, i), so results are identical
// whether it runs alone, in a batch, or on any number of threads; reductions
// happen in index order after the parallel fill.

namespace detail {

inline unsigned thread_count() {
  if (const char* env = std::getenv("WALSHGRAPH_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace detail

/// Runs body(index, rng) for index 0..n-1 on a worker pool, each index with
/// its own derived stream. The body must only write to index-owned slots.
template <class Body>
void for_each_trajectory(std::size_t n, std::uint64_t seed, Body&& body) {
  const unsigned workers = std::min<std::size_t>(detail::thread_count(), n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      RngStream rng(seed, i);
      body(i, rng);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          RngStream rng(seed, i);
          body(i, rng);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// N independent trajectories with per-index derived seeds, recorded on an
/// explicit time grid. batch(...,1) reproduces simulate() exactly.
inline Ensemble batch(const SimGraph& sg, const Position& x0, Real T, std::size_t n,
                      const std::vector<Real>& grid) {
  if (n < 1) throw ValidationError("ensemble-size", "batch", "need at least one trajectory");
  Ensemble ens;
  ens.config = sg.config();
  ens.trajectories.assign(n, Trajectory{});
  for_each_trajectory(n, sg.config().seed, [&](std::size_t i, RngStream& rng) {
    Trajectory traj;
    detail::GridRecorder rec(grid, traj);
    rec.record_initial(x0);
    const auto [t_end, p_end] = run_path(sg, x0, T, rng, rec);
    (void)t_end;
    rec.finish(p_end);
    ens.trajectories[i] = std::move(traj);
  });
  return ens;
}

inline Ensemble batch(const SimGraph& sg, const Position& x0, Real T, std::size_t n) {
  return batch(sg, x0, T, n, detail::default_grid(T, sg.config().record_dt));
}

inline Ensemble batch(const MetricGraph& graph, const Position& x0, Real T,
                      const SimConfig& config, std::size_t n) {
  return batch(SimGraph(graph, config), x0, T, n);
}

}  // namespace walshgraph
