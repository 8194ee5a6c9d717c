#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "walshgraph/renewal.hpp"
#include "walshgraph/stats.hpp"

using namespace walshgraph;

TEST_CASE("trivial reduced graph: no contracting edges, U = V") {
  const GraphFamily f = fixtures::walsh_star({0.6, 0.4});
  const RenewalSystem sys = renewal_build(f, 1.0, 1.25, 1, 1);
  REQUIRE(sys.vertices.size() == 1);
  CHECK(sys.C(0, 0) == 0.0);
  const auto u = renewal_solve(sys);
  CHECK(u[0] == doctest::Approx(sys.V[0]).epsilon(1e-15));
  // Braces reduce to sum of ray weights = 1, so U = p * Phi = 0.6 / lambda.
  CHECK(u[0] == doctest::Approx(0.6 / 1.25).epsilon(1e-13));
  CHECK(u[0] == doctest::Approx(renewal_limit(f, 1, 1, 1.25)).epsilon(1e-13));
}

TEST_CASE("symmetric buffer pair solves exactly to Phi/2 from vertex 1") {
  // With theta = kappa and q = 0 the exit transform is e^{-s} and the
  // occupation numerator telescopes, making U_1 = Phi(lambda)/2 for every
  // scale, not just in the limit.
  const GraphFamily f = fixtures::buffer_pair(1.0, 1.0, 0.0, 0.0);
  for (Real eps : {1e-1, 1e-3}) {
    const RenewalSystem sys = renewal_build(f, eps, 1.0, 1, 1);
    const auto u = renewal_solve(sys);
    CHECK(u[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("renewal system structure for the buffer pair") {
  const GraphFamily f = fixtures::buffer_pair(2.0, 1.0, 0.0, 0.0);
  const RenewalSystem sys = renewal_build(f, 1e-2, 1.0, 1, 1);
  REQUIRE(sys.vertices.size() == 2);
  CHECK(sys.V[0] > 0.0);
  CHECK(sys.V[1] == 0.0);
  // C entries in (0,1), strictly defective rows, and C -> A as eps -> 0.
  for (Real lambda : {0.5, 1.0, 2.0, 10.0}) {
    const RenewalSystem s2 = renewal_build(f, 1e-3, lambda, 1, 1);
    Real row0 = 0.0, row1 = 0.0;
    for (int j = 0; j < 2; ++j) {
      row0 += s2.C(0, j);
      row1 += s2.C(1, j);
    }
    CHECK(row0 < 1.0);
    CHECK(row1 < 1.0);
    CHECK(s2.C(0, 1) > 0.0);
    CHECK(s2.C(0, 1) < 1.0);
  }
  CHECK(sys.C(0, 1) == doctest::Approx(1.0).epsilon(0.05));  // near A_{12} = 1
}

TEST_CASE("renewal solution converges to the contraction limit at first order") {
  const std::vector<Real> eps_grid{1e-2, 1e-3, 1e-4, 1e-5};

  const auto check_family = [&](const GraphFamily& f, VertexId source, EdgeId ray) {
    for (Real lambda : {0.5, 1.0, 2.0}) {
      const Real limit = renewal_limit(f, source, ray, lambda);
      std::vector<Real> errors;
      for (Real eps : eps_grid) {
        const auto u = renewal_solve(renewal_build(f, eps, lambda, source, ray));
        Real worst = 0.0;
        for (Real ui : u) worst = std::max(worst, std::abs(ui - limit));
        errors.push_back(worst);
      }
      for (std::size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] < errors[i - 1]);
      CHECK(fit_log_log_slope(eps_grid, errors) >= 0.9);
      CHECK(errors.back() <= 1e-3 * std::abs(limit));
    }
  };

  check_family(fixtures::buffer_pair(2.0, 1.0, 0.0, 0.0), 1, 1);
  check_family(fixtures::untwisted_cycle({0.5, 0.3, 0.2}), 2, 2);
}

TEST_CASE("untwisted cycle limit: U tends to Phi * p_r from every start") {
  const std::vector<Real> p{0.5, 0.3, 0.2};
  const GraphFamily f = fixtures::untwisted_cycle(p);
  const Real lambda = 1.0;
  const auto u = renewal_solve(renewal_build(f, 1e-4, lambda, 2, 2));
  const Real expected = p[1] / lambda;
  for (Real ui : u) CHECK(ui == doctest::Approx(expected).epsilon(2e-3));
  CHECK(renewal_limit(f, 2, 2, lambda) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("general observable: phi enters through its resolvent") {
  const GraphFamily f = fixtures::buffer_pair(2.0, 1.0, 0.0, 0.0);
  const auto phi = PiecewisePolynomial::single(Polynomial({0.0, 1.0}));  // phi(y) = y
  const Real lambda = 2.0;
  const Real limit = renewal_limit(f, 1, 1, lambda, phi);
  CHECK(limit == doctest::Approx(0.25 * (2.0 / 3.0)).epsilon(1e-12));
  const auto u = renewal_solve(renewal_build(f, 1e-5, lambda, 1, 1, phi));
  CHECK(u[0] == doctest::Approx(limit).epsilon(1e-3));
}

TEST_CASE("reduction preconditions") {
  SUBCASE("drift breaks the reduced setting") {
    GraphFamily f = fixtures::buffer_pair(1.0, 1.0, 0.0, 0.0);
    f.edges[0].coefficients.drift = Coefficient(1.0);
    CHECK_THROWS_AS(renewal_build(f, 1e-2, 1.0, 1, 1), ReductionUnsupported);
  }
  SUBCASE("surviving finite edges break the reduced setting") {
    CHECK_THROWS_AS(renewal_build(fixtures::two_knots(), 1e-2, 1.0, 1, 1),
                    ReductionUnsupported);
  }
  SUBCASE("target must be a ray at the source") {
    const GraphFamily f = fixtures::buffer_pair(1.0, 1.0, 0.0, 0.0);
    CHECK_THROWS_AS(renewal_build(f, 1e-2, 1.0, 1, 2), ReductionUnsupported);
    CHECK_THROWS_AS(renewal_build(f, 1e-2, 1.0, 1, 3), ReductionUnsupported);
  }
}
