#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace phiclosure {

/// Upper incomplete gamma Gamma(s, x) = int_x^inf t^(s-1) e^(-t) dt for
/// integer order s >= 1 and any real x, via the closed finite sum
///   Gamma(s, x) = (s-1)! e^(-x) sum_{k=0}^{s-1} x^k / k!.
/// No series truncation is involved, so the result is exact up to roundoff.
///
/// Throws std::invalid_argument for s < 1 and std::overflow_error when
/// e^(-x) is not representable (x below roughly -log(max)).
template <typename Scalar = double>
Scalar upper_incomplete_gamma(int s, Scalar x) {
  if (s < 1)
    throw std::invalid_argument(
        "upper_incomplete_gamma: order must be a positive integer");
  if (-x >= std::log(std::numeric_limits<Scalar>::max()))
    throw std::overflow_error(
        "upper_incomplete_gamma: e^(-x) overflows for this x");
  // sum_{k=0}^{s-1} x^k/k!, then scale by (s-1)! e^(-x) incrementally so the
  // factorial never appears on its own.
  Scalar sum(1);
  Scalar term(1);
  for (int k = 1; k < s; ++k) {
    term *= x / Scalar(k);
    sum += term;
  }
  Scalar factorial(1);
  for (int k = 2; k < s; ++k) factorial *= Scalar(k);
  return factorial * std::exp(-x) * sum;
}

/// Polylogarithm Li_s(z) = sum_{n>=1} z^n / n^s for integer s >= 1 and
/// z in (0, 1). Li_1 uses the closed form -log(1-z); higher orders sum the
/// series until the next term falls below 1e-16 of the partial sum
/// (z < 1 gives geometric decay; a 1e5-term cap guards z near 1).
template <typename Scalar = double>
Scalar polylog(int s, Scalar z) {
  if (s < 1)
    throw std::invalid_argument("polylog: order must be a positive integer");
  if (!(z > Scalar(0) && z < Scalar(1)))
    throw std::invalid_argument("polylog: argument must lie in (0, 1)");
  if (s == 1) return -std::log1p(-z);
  constexpr int kMaxTerms = 100000;
  Scalar sum = z;
  Scalar zn = z;
  for (int n = 2; n <= kMaxTerms; ++n) {
    zn *= z;
    const Scalar term = zn / std::pow(Scalar(n), Scalar(s));
    sum += term;
    if (term < Scalar(1e-16) * sum) break;
  }
  return sum;
}

}  // namespace phiclosure
