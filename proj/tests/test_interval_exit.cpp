#include <doctest.h>

#include <cmath>

#include "walshgraph/interval_exit.hpp"

using namespace walshgraph;

namespace {

/// Closed-form oracle from the one-dimensional first-passage transforms:
/// E[e^{-lambda tau}; exit at l | start x] = sinh(x s) / sinh(l s),
/// E[e^{-lambda tau}; exit at 0 | start x] = sinh((l - x) s) / sinh(l s),
/// with s = sqrt(2 lambda).
Real exit_transform_upper(Real lambda, Real x, Real l) {
  const Real s = std::sqrt(2.0 * lambda);
  return std::sinh(x * s) / std::sinh(l * s);
}
Real exit_transform_lower(Real lambda, Real x, Real l) {
  const Real s = std::sqrt(2.0 * lambda);
  return std::sinh((l - x) * s) / std::sinh(l * s);
}

}  // namespace

TEST_CASE("image and spectral branches agree around the switch point") {
  for (Real x : {0.1, 0.37, 0.5, 0.82})
    for (Real t : {0.18, 0.22, 0.25, 0.28, 0.35}) {
      const Real c = detail::upper_exit_cdf_unit(t, x);
      const Real image = [&] {
        const Real inv = 1.0 / std::sqrt(2.0 * t);
        Real sum = 0.0;
        for (int k = 0; k < 24; ++k)
          sum += std::erfc((1.0 - x + 2.0 * k) * inv) - std::erfc((1.0 + x + 2.0 * k) * inv);
        return sum;
      }();
      CHECK(c == doctest::Approx(image).epsilon(1e-12));
    }
}

TEST_CASE("sub-CDF saturates at the hit probability") {
  for (Real x : {0.2, 0.5, 0.9})
    CHECK(detail::upper_exit_cdf_unit(200.0, x) == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("exit side frequency matches x / length") {
  RngStream rng(77, 0);
  const Real x = 0.3, l = 1.5;
  const int n = 200000;
  int upper = 0;
  for (int i = 0; i < n; ++i)
    if (sample_interval_exit(x, l, rng).hit_upper) ++upper;
  const Real f = Real(upper) / n;
  const Real p = x / l;
  CHECK(std::abs(f - p) < 4.0 * std::sqrt(p * (1.0 - p) / n));
}

TEST_CASE("sampled exit times reproduce the Laplace transforms") {
  RngStream rng(2718, 0);
  const Real x = 0.6, l = 2.0;
  const int n = 200000;
  const Real lambda = 0.8;
  double sum_upper = 0.0, sum_lower = 0.0, sum_sq_u = 0.0, sum_sq_l = 0.0;
  for (int i = 0; i < n; ++i) {
    const IntervalExit e = sample_interval_exit(x, l, rng);
    const double w = std::exp(-lambda * e.time);
    if (e.hit_upper) {
      sum_upper += w;
      sum_sq_u += w * w;
    } else {
      sum_lower += w;
      sum_sq_l += w * w;
    }
  }
  const auto check = [&](double sum, double sum_sq, Real expected) {
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean - expected) < 4.0 * se);
  };
  check(sum_upper, sum_sq_u, exit_transform_upper(lambda, x, l));
  check(sum_lower, sum_sq_l, exit_transform_lower(lambda, x, l));
}

TEST_CASE("sampled mean exit time matches x (l - x)") {
  RngStream rng(99, 1);
  const Real x = 0.25, l = 1.0;
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Real t = sample_interval_exit(x, l, rng).time;
    sum += t;
    sum_sq += t * t;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - x * (l - x)) < 4.0 * se);
}

TEST_CASE("interval exit argument validation") {
  RngStream rng(1, 0);
  CHECK_THROWS_AS(sample_interval_exit(0.0, 1.0, rng), Error);
  CHECK_THROWS_AS(sample_interval_exit(1.0, 1.0, rng), Error);
  CHECK_THROWS_AS(sample_interval_exit(0.5, -1.0, rng), Error);
}
