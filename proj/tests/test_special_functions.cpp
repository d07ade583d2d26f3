#include <doctest.h>

#include <phiclosure/special_functions.hpp>

#include <cmath>

#include "oracles.hpp"

using namespace phiclosure;

namespace {

// Gamma(s, x) by direct integration: int_x^inf t^(s-1) e^(-t) dt with the
// tail truncated where the integrand is below 1e-25 of its peak.
double gamma_by_quadrature(int s, double x) {
  const double hi = std::max(x, 0.0) + 80.0 + 10.0 * s;
  return oracle::integrate(
      [&](double t) { return std::pow(t, s - 1) * std::exp(-t); }, x, hi);
}

}  // namespace

TEST_CASE("incomplete gamma matches quadrature") {
  for (int s : {1, 2, 3, 7, 14}) {
    for (double x : {-8.0, -3.0, -1.0, 0.0, 0.5, 2.0, 10.0}) {
      if (s == 1 && x < -0.5) continue;  // integrand not peaked; covered below
      const double want = gamma_by_quadrature(s, x);
      const double got = upper_incomplete_gamma(s, x);
      CHECK(got == doctest::Approx(want).epsilon(1e-11));
    }
  }
  // s = 1 closed form for all x: Gamma(1, x) = e^(-x)
  for (double x : {-8.0, -1.0, 0.0, 3.0})
    CHECK(upper_incomplete_gamma(1, x) ==
          doctest::Approx(std::exp(-x)).epsilon(1e-15));
}

TEST_CASE("incomplete gamma recurrence") {
  for (int s : {1, 2, 5, 12}) {
    for (double x : {-6.0, -0.5, 1.5, 9.0}) {
      const double lhs = upper_incomplete_gamma(s + 1, x);
      const double rhs =
          s * upper_incomplete_gamma(s, x) + std::pow(x, s) * std::exp(-x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("incomplete gamma rejects bad arguments") {
  CHECK_THROWS_AS(upper_incomplete_gamma(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(upper_incomplete_gamma(-2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(upper_incomplete_gamma(3, -800.0), std::overflow_error);
}

TEST_CASE("polylog closed forms and series") {
  // Li_1(z) = -log(1 - z)
  for (double z : {0.1, 0.5, 0.9, 0.999})
    CHECK(polylog(1, z) == doctest::Approx(-std::log1p(-z)).epsilon(1e-15));
  // Li_2(1/2) = pi^2/12 - log(2)^2/2
  const double li2_half =
      M_PI * M_PI / 12.0 - 0.5 * std::log(2.0) * std::log(2.0);
  CHECK(polylog(2, 0.5) == doctest::Approx(li2_half).epsilon(1e-14));
  // higher orders against a direct partial sum with a fixed huge term count
  for (int s : {2, 3, 5, 8}) {
    for (double z : {0.05, 0.4, 0.8}) {
      double want = 0.0;
      for (int n = 400; n >= 1; --n) want += std::pow(z, n) / std::pow(n, s);
      CHECK(polylog(s, z) == doctest::Approx(want).epsilon(1e-13));
    }
  }
}

TEST_CASE("polylog rejects bad arguments") {
  CHECK_THROWS_AS(polylog(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(polylog(2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(polylog(2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(polylog(2, -0.3), std::invalid_argument);
}
