#include <doctest.h>

#include <cmath>
#include <vector>

#include "walshgraph/hyperbolic.hpp"
#include "walshgraph/star.hpp"

using namespace walshgraph;

TEST_CASE("stable hyperbolic helpers match the naive forms") {
  for (Real x : {1e-3, 1e-2, 0.5, 1.0, 3.0, 20.0, 200.0}) {
    CHECK(coth_stable(x) == doctest::Approx(std::cosh(x) / std::sinh(x)).epsilon(1e-13));
    CHECK(inv_sinh_stable(x) == doctest::Approx(1.0 / std::sinh(x)).epsilon(1e-13));
  }
  // Below the series switch the quotients would lose digits; the series value
  // must still agree with long-double evaluation.
  for (Real x : {1e-8, 1e-6, 5e-5}) {
    const long double lx = x;
    CHECK(coth_stable(x) ==
          doctest::Approx(double(std::cosh(lx) / std::sinh(lx))).epsilon(1e-13));
    CHECK(inv_sinh_stable(x) == doctest::Approx(double(1.0L / std::sinh(lx))).epsilon(1e-13));
  }
  // No overflow for huge arguments.
  CHECK(coth_stable(1000.0) == 1.0);
  CHECK(inv_sinh_stable(1000.0) == 0.0);
}

TEST_CASE("occupation transform") {
  SUBCASE("no marks: total mass p_k / lambda") {
    StarGraph star{{0.5, 0.3, 0.2}, {}};
    const Real lambda = 1.7;
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(star_occupation_transform(star, lambda, k, 1.0 / lambda) ==
            doctest::Approx(star.weights[k] / lambda).epsilon(1e-14));
  }
  SUBCASE("one marked, one free ray: direct evaluation") {
    StarGraph star{{0.5, 0.5}, {1.0}};
    const Real lambda = 0.5;
    const Real phi = 1.0 / lambda;
    const Real s = std::sqrt(2.0 * lambda);  // = 1
    const Real expected = 0.5 * phi / (0.5 * (std::cosh(s) / std::sinh(s)) + 0.5);
    CHECK(star_occupation_transform(star, lambda, 1, phi) ==
          doctest::Approx(expected).epsilon(1e-13));
  }
  SUBCASE("contracting marks reproduce the small-length expansion") {
    // With the mark at distance l -> 0 the braces grow like
    // p_marked / (l sqrt(2 lambda)), so the transform behaves like
    // phi * sqrt(2 lambda) * l * p_k / p_marked + O(l^2).
    const Real lambda = 1.0;
    const Real phi = 1.0;
    for (Real l : {1e-3, 1e-4, 1e-5}) {
      StarGraph star{{0.5, 0.5}, {l}};
      const Real value = star_occupation_transform(star, lambda, 1, phi);
      const Real leading = 0.5 * phi * std::sqrt(2.0 * lambda) * l / 0.5;
      CHECK(std::abs(value - leading) < 10.0 * l * l);
    }
  }
  SUBCASE("argument checking") {
    StarGraph star{{0.5, 0.5}, {1.0}};
    CHECK_THROWS(star_occupation_transform(star, 0.0, 1, 1.0));
    CHECK_THROWS(star_occupation_transform(star, 1.0, 0, 1.0));  // marked ray
  }
}

TEST_CASE("exit transform") {
  SUBCASE("single fully-weighted marked ray: 1/cosh(l sqrt(2 lambda))") {
    for (Real l : {0.5, 1.0, 2.0})
      for (Real lambda : {0.25, 1.0, 4.0}) {
        StarGraph star{{1.0}, {l}};
        CHECK(star_exit_transform(star, lambda, 0) ==
              doctest::Approx(1.0 / std::cosh(l * std::sqrt(2.0 * lambda))).epsilon(1e-13));
      }
  }
  SUBCASE("lambda -> 0 limit: hit probabilities weighted by p/l") {
    StarGraph star{{0.5, 0.5}, {1.0, 2.0}};
    CHECK(star_exit_transform(star, 0.0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(star_exit_transform(star, 0.0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    // The analytic limit must agree with a tiny positive lambda.
    CHECK(star_exit_transform(star, 1e-12, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-5));
  }
  SUBCASE("exit probabilities sum to one at lambda = 0") {
    // All rays marked.
    StarGraph all{{0.2, 0.3, 0.5}, {1.0, 0.5, 2.5}};
    Real sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) sum += star_exit_transform(all, 0.0, k);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    // Unmarked rays present: excursions into them return, so the hit is
    // still certain and the marked-ray probabilities still sum to one.
    StarGraph some{{0.2, 0.3, 0.5}, {1.0, 0.5}};
    sum = 0.0;
    for (std::size_t k = 0; k < 2; ++k) sum += star_exit_transform(some, 0.0, k);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("monotone decreasing in lambda") {
    StarGraph star{{0.4, 0.35, 0.25}, {1.0, 0.3}};
    for (std::size_t k = 0; k < 2; ++k) {
      Real prev = star_exit_transform(star, 0.0, k);
      for (Real lambda : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        const Real value = star_exit_transform(star, lambda, k);
        CHECK(value < prev);
        prev = value;
      }
    }
  }
  SUBCASE("argument checking") {
    StarGraph star{{0.5, 0.5}, {1.0}};
    CHECK_THROWS(star_exit_transform(star, 1.0, 1));   // unmarked ray
    CHECK_THROWS(star_exit_transform(star, -1.0, 0));  // negative lambda
  }
}

TEST_CASE("star validation") {
  StarGraph bad_sum{{0.5, 0.4}, {}};
  CHECK_THROWS_AS(bad_sum.validate(), ValidationError);
  StarGraph bad_mark{{0.5, 0.5}, {0.0}};
  CHECK_THROWS_AS(bad_mark.validate(), ValidationError);
  StarGraph too_many_marks{{1.0}, {1.0, 2.0}};
  CHECK_THROWS_AS(too_many_marks.validate(), ValidationError);
}
