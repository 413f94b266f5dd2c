#include <doctest.h>

#include <cmath>

#include "fldelay/numerics.hpp"
#include "fldelay/rng.hpp"
#include "oracles.hpp"

using namespace fldelay;

TEST_SUITE("numerics") {

TEST_CASE("interval validates its bracket") {
  CHECK_THROWS_AS(numerics::Interval(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(numerics::Interval(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(numerics::Interval(0.0, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
  const numerics::Interval iv(0.0, 2.0);
  CHECK(iv.mid() == 1.0);
  CHECK(iv.width() == 2.0);
}

TEST_CASE("lambert_w_m1 branch point and exact products") {
  CHECK(numerics::lambert_w_m1(-std::exp(-1.0)) == -1.0);
  // w = -2 gives w*e^w = -2 e^{-2}
  CHECK(numerics::lambert_w_m1(-2.0 * std::exp(-2.0)) ==
        doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("lambert_w_m1(-0.1) against a bisection oracle") {
  const double expected = oracles::plain_bisect(
      [](double w) { return w * std::exp(w) + 0.1; }, -50.0, -1.0);
  CHECK(expected == doctest::Approx(-3.577152).epsilon(1e-6));
  CHECK(numerics::lambert_w_m1(-0.1) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lambert_w_m1 domain errors") {
  CHECK_THROWS_AS(numerics::lambert_w_m1(-0.5), std::domain_error);
  CHECK_THROWS_AS(numerics::lambert_w_m1(0.0), std::domain_error);
  CHECK_THROWS_AS(numerics::lambert_w_m1(0.1), std::domain_error);
  CHECK_THROWS_AS(numerics::lambert_w_m1(std::nan("")), std::domain_error);
}

TEST_CASE("lambert_w_m1 round trip over [-50, -1]") {
  Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double w = rng.uniform(-50.0, -1.0);
    const double back = numerics::lambert_w_m1(w * std::exp(w));
    worst = std::max(worst, std::abs(back - w) / std::abs(w));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("lambert_w_m1 residual near the domain edges") {
  for (const double x : {-0.3678, -0.367879, -1e-3, -1e-10, -1e-300}) {
    const double w = numerics::lambert_w_m1(x);
    CHECK(w <= -1.0);
    CHECK(std::abs(w * std::exp(w) - x) <= 1e-12 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("bisect_root on simple functions") {
  CHECK(numerics::bisect_root([](double x) { return x - 3.0; },
                              numerics::Interval(0.0, 10.0), 1e-9) ==
        doctest::Approx(3.0).epsilon(1e-9));
  // cube root of 2, against the closed form
  CHECK(numerics::bisect_root([](double x) { return x * x * x - 2.0; },
                              numerics::Interval(0.0, 2.0), 1e-12) ==
        doctest::Approx(std::cbrt(2.0)).epsilon(1e-11));
  CHECK(numerics::bisect_root([](double x) { return x; },
                              numerics::Interval(-1.0, 1.0), 1e-12) ==
        doctest::Approx(0.0).epsilon(1e-11));
}

TEST_CASE("bisect_root rejects a sign-preserving bracket") {
  CHECK_THROWS_AS(numerics::bisect_root([](double x) { return x + 5.0; },
                                        numerics::Interval(0.0, 1.0), 1e-9),
                  std::invalid_argument);
}

TEST_CASE("bisect_threshold locates a step") {
  const double t = numerics::bisect_threshold([](double x) { return x >= 5.0; },
                                              numerics::Interval(0.0, 10.0),
                                              1e-6);
  CHECK(t == doctest::Approx(5.0).epsilon(2e-6));
  CHECK(t >= 5.0);  // returned point satisfies the predicate
}

TEST_CASE("bisect_threshold against the closed form sqrt(2)") {
  const double t = numerics::bisect_threshold(
      [](double x) { return x * x >= 2.0; }, numerics::Interval(0.0, 2.0),
      1e-8);
  CHECK(t == doctest::Approx(std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("bisect_threshold degenerate and error cases") {
  CHECK(numerics::bisect_threshold([](double) { return true; },
                                   numerics::Interval(2.0, 3.0)) == 2.0);
  CHECK_THROWS_AS(numerics::bisect_threshold([](double) { return false; },
                                             numerics::Interval(0.0, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("bisect_threshold bracketing property") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const double step = rng.uniform(0.5, 9.5);
    const double rel = 1e-7;
    auto pred = [step](double x) { return x >= step; };
    const auto res = numerics::bisect_threshold_full(
        pred, numerics::Interval(0.0, 10.0), rel);
    CHECK(pred(res.value * (1.0 + rel)));
    CHECK_FALSE(pred(res.value * (1.0 - rel)));
  }
}

TEST_CASE("minimize_convex_1d recovers quadratic vertices") {
  const auto res = numerics::minimize_convex_1d(
      [](double x) { return (x - 1.0) * (x - 1.0); },
      numerics::Interval(0.0, 3.0), 1e-10);
  CHECK(res.x == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_FALSE(res.flat);

  Rng rng(13);
  for (int i = 0; i < 30; ++i) {
    const double v = rng.uniform(-2.0, 2.0);
    const double c = rng.uniform(0.1, 10.0);
    const auto r = numerics::minimize_convex_1d(
        [&](double x) { return c * (x - v) * (x - v); },
        numerics::Interval(-3.0, 3.0), 1e-10);
    CHECK(std::abs(r.x - v) <= 1e-8);
  }
}

TEST_CASE("minimize_convex_1d against an analytic stationary point") {
  // d/dx (e^x + e^{-2x}) = 0  =>  x = ln(2)/3
  const auto res = numerics::minimize_convex_1d(
      [](double x) { return std::exp(x) + std::exp(-2.0 * x); },
      numerics::Interval(-2.0, 2.0), 1e-10);
  CHECK(res.x == doctest::Approx(std::log(2.0) / 3.0).epsilon(1e-7));
}

TEST_CASE("minimize_convex_1d flags a flat objective") {
  const auto res = numerics::minimize_convex_1d(
      [](double) { return 4.2; }, numerics::Interval(1.0, 2.0), 1e-10);
  CHECK(res.flat);
  CHECK(res.x == doctest::Approx(1.5));
  CHECK(res.value == 4.2);
}

TEST_CASE("minimize_convex_1d rejects non-finite objectives") {
  CHECK_THROWS_AS(numerics::minimize_convex_1d(
                      [](double) { return std::nan(""); },
                      numerics::Interval(0.0, 1.0), 1e-8),
                  std::logic_error);
}

}  // TEST_SUITE
