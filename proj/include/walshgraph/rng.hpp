#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "walshgraph/common.hpp"

namespace walshgraph {

// =============================================================================
// Deterministic random streams
// =============================================================================
//
// Ensembles need one independent stream per trajectory, derived from
// (master seed, trajectory index) so that trajectory i is identical whether
// it is run alone or inside a batch, on any thread schedule. We use
// splitmix64 to expand the (seed, index) pair into xoshiro256++ state and
// keep the normal/categorical samplers here so that output does not depend
// on a standard-library distribution implementation.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256++ stream with deterministic (seed, index) derivation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) { reseed(seed, 0); }
  RngStream(std::uint64_t seed, std::uint64_t stream_index) { reseed(seed, stream_index); }

  void reseed(std::uint64_t seed, std::uint64_t stream_index) {
    // Mix the index in through two splitmix rounds so neighboring indices
    // land in unrelated regions of the state space.
    std::uint64_t s = seed;
    std::uint64_t a = detail::splitmix64(s);
    s ^= 0x6a09e667f3bcc909ULL + stream_index;
    std::uint64_t b = detail::splitmix64(s);
    s += stream_index * 0x9e3779b97f4a7c15ULL;
    state_[0] = detail::splitmix64(s) ^ a;
    state_[1] = detail::splitmix64(s);
    state_[2] = detail::splitmix64(s) ^ b;
    state_[3] = detail::splitmix64(s);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    have_cached_normal_ = false;
    cached_normal_ = 0.0;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  Real uniform() { return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1): never returns 0, safe for logs.
  Real uniform_pos() {
    Real u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  /// Standard normal via Box-Muller (pair cached).
  Real normal() {
    if (have_cached_normal_) {
      have_cached_normal_ = false;
      return cached_normal_;
    }
    const Real u1 = uniform_pos();
    const Real u2 = uniform();
    const Real r = std::sqrt(-2.0 * std::log(u1));
    const Real angle = 2.0 * std::numbers::pi_v<Real> * u2;
    cached_normal_ = r * std::sin(angle);
    have_cached_normal_ = true;
    return r * std::cos(angle);
  }

  /// Index into `weights` (nonnegative, summing to ~1). Zero-weight entries
  /// are never selected; if rounding pushes the cumulative sum below the
  /// drawn uniform, the last positive entry is returned.
  std::size_t categorical(std::span<const Real> weights) {
    const Real u = uniform();
    Real acc = 0.0;
    std::size_t last_positive = weights.size() - 1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) {
        last_positive = i;
        acc += weights[i];
        if (u < acc) return i;
      }
    }
    return last_positive;
  }

 private:
  std::uint64_t state_[4]{};
  bool have_cached_normal_ = false;
  Real cached_normal_ = 0.0;
};

}  // namespace walshgraph
