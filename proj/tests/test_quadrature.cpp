#include "doctest.h"

#include <cmath>

#include "ptq/quadrature.hpp"

using namespace ptq;

TEST_CASE("trapezoid is exact on affine integrands") {
  auto f = [](double x) { return 3.0 * x + 2.0; };
  CHECK(trapezoid(f, 0.0, 2.0, 2) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(trapezoid(f, 0.0, 2.0, 57) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("trapezoid converges at second order") {
  auto f = [](double x) { return std::exp(-x); };
  const double exact = 1.0 - std::exp(-1.0);
  const double e100 = std::abs(trapezoid(f, 0.0, 1.0, 101) - exact);
  const double e1000 = std::abs(trapezoid(f, 0.0, 1.0, 1001) - exact);
  CHECK(e100 < 1e-5);
  CHECK(e1000 < e100 / 50.0);  // ~100x for a second-order rule
}

TEST_CASE("trapezoid argument validation") {
  auto f = [](double) { return 1.0; };
  CHECK(trapezoid(f, 1.0, 1.0, 2) == 0.0);
  CHECK_THROWS_AS(trapezoid(f, 1.0, 0.0, 2), InvalidInterval);
  CHECK_THROWS_AS(trapezoid(f, 0.0, 1.0, 1), BadArgument);
  auto bad = [](double x) { return x < 0.5 ? 1.0 : std::nan(""); };
  CHECK_THROWS_AS(trapezoid(bad, 0.0, 1.0, 11), NonFiniteIntegrand);
}

TEST_CASE("OnlineAccumulator matches batch trapezoid on the same abscissae") {
  auto f = [](double x) { return std::sin(x) + 1.5; };
  const int n = 501;
  const double a = 0.2, b = 3.0;
  OnlineAccumulator acc;
  acc.start(a, f(a));
  for (int i = 1; i < n; ++i) {
    const double t = a + (b - a) * i / (n - 1);
    acc.step(t, f(t));
  }
  const double batch = trapezoid(f, a, b, n);
  CHECK(acc.integral() == doctest::Approx(batch).epsilon(1e-13));
  CHECK(acc.exp_factor() == doctest::Approx(std::exp(-batch)).epsilon(1e-13));
  CHECK(acc.last_time() == b);
}

TEST_CASE("OnlineAccumulator guards its contract") {
  OnlineAccumulator acc;
  CHECK_FALSE(acc.started());
  acc.start(0.0, 1.0);
  CHECK(acc.started());
  CHECK_THROWS_AS(acc.step(-0.5, 1.0), NonMonotonicTime);
  acc.step(0.0, 2.0);  // zero-length step is a no-op
  CHECK(acc.integral() == 0.0);
  CHECK_THROWS_AS(acc.step(1.0, std::nan("")), NonFiniteIntegrand);
}
