#include "phiclosure/renorm.hpp"

#include <cmath>

#include "phiclosure/quadrature1d.hpp"

namespace phiclosure {

double target_value(Target target, double x) {
  switch (target) {
    case Target::BoltzmannShannon:
      return std::exp(x);
    case Target::BoseEinstein:
      if (x >= 0.0)
        throw std::invalid_argument(
            "target_value: Planckian is defined on x < 0 only");
      return 1.0 / std::expm1(-x);
  }
  throw std::logic_error("target_value: unknown target");
}

double target_derivative(Target target, double x) {
  switch (target) {
    case Target::BoltzmannShannon:
      return std::exp(x);
    case Target::BoseEinstein: {
      const double u = target_value(Target::BoseEinstein, x);
      return (1.0 + u) * u;
    }
  }
  throw std::logic_error("target_derivative: unknown target");
}

double target_kth_derivative(Target target, int k, double x0) {
  if (k < 0) throw std::invalid_argument("target_kth_derivative: k >= 0");
  switch (target) {
    case Target::BoltzmannShannon:
      return std::exp(x0);
    case Target::BoseEinstein: {
      const double u = target_value(Target::BoseEinstein, x0);
      return planck_derivative_polynomial(k)(u);
    }
  }
  throw std::logic_error("target_kth_derivative: unknown target");
}

namespace {

// Roundoff envelope of Horner evaluation: sum_k |c_k| |x|^k.
double horner_envelope(const Polynomial& p, double x) {
  const double ax = std::abs(x);
  double r = std::abs(p.coeffs[p.coeffs.size() - 1]);
  for (Eigen::Index k = p.coeffs.size() - 2; k >= 0; --k)
    r = r * ax + std::abs(p.coeffs[k]);
  return r;
}

}  // namespace

void certify_monotone(const RenormalizationMap& map) {
  constexpr int kGridPoints = 2001;
  const auto check = [&](double lo, double hi, bool scale_aware) {
    for (int i = 0; i < kGridPoints; ++i) {
      const double x = lo + (hi - lo) * i / (kGridPoints - 1);
      const double v = map.dp(x);
      const double floor =
          scale_aware ? -1e-12 * std::max(1.0, horner_envelope(map.dp, x))
                      : -1e-12;
      if (!(v >= floor))
        throw MonotonicityError(
            "certify_monotone: derivative negative on certification grid", x,
            v);
    }
  };
  check(map.domain_lo, map.domain_hi, false);
  check(-50.0, 50.0, true);
}

RenormalizationMap phi_divergence_map(int K) {
  if (K < 1 || K % 2 == 0)
    throw std::invalid_argument("phi_divergence_map: K must be odd and >= 1");
  // (1 + x/K)^K by binomial expansion: c_j = C(K, j) / K^j.
  Eigen::VectorXd c(K + 1);
  double binom = 1.0;
  double scale = 1.0;
  for (int j = 0; j <= K; ++j) {
    c[j] = binom * scale;
    binom *= double(K - j) / double(j + 1);
    scale /= double(K);
  }
  RenormalizationMap map;
  map.p = Polynomial(std::move(c));
  map.dp = derivative(map.p);
  map.family = MapFamily::PhiDivergence;
  map.target = Target::BoltzmannShannon;
  map.params.order = K;
  map.domain_lo = -double(K);
  map.domain_hi = double(K);
  certify_monotone(map);
  return map;
}

double phi_divergence_entropy(int K, double density) {
  if (K < 1 || K % 2 == 0)
    throw std::invalid_argument(
        "phi_divergence_entropy: K must be odd and >= 1");
  if (!(density > 0.0))
    throw std::invalid_argument("phi_divergence_entropy: density must be > 0");
  const double root = std::pow(density, 1.0 / K);
  return K * density * (double(K) / (K + 1) * root - 1.0);
}

Polynomial planck_derivative_polynomial(int n) {
  if (n < 0)
    throw std::invalid_argument("planck_derivative_polynomial: n >= 0");
  Polynomial p{0.0, 1.0};  // P_0(u) = u
  const Polynomial uu1{0.0, 1.0, 1.0};  // u (1 + u)
  for (int k = 0; k < n; ++k) p = derivative(p) * uu1;
  return p;
}

RenormalizationMap taylor_map(Target target, int K, double x0) {
  if (K < 0) throw std::invalid_argument("taylor_map: K must be >= 0");
  if (target == Target::BoseEinstein && x0 >= 0.0)
    throw std::invalid_argument(
        "taylor_map: BoseEinstein requires expansion point x0 < 0");
  const int degree = 2 * K + 1;
  Eigen::VectorXd alpha(degree + 1);
  double kfact = 1.0;
  for (int k = 0; k <= degree; ++k) {
    if (k > 0) kfact *= k;
    alpha[k] = target_kth_derivative(target, k, x0) / kfact;
  }
  RenormalizationMap map;
  map.p = from_taylor_coefficients(alpha, x0);
  map.dp = derivative(map.p);
  map.family = MapFamily::Taylor;
  map.target = target;
  map.params.order = K;
  map.params.x0 = x0;
  map.domain_lo = x0 - 5.0;
  map.domain_hi = x0 + 5.0;
  certify_monotone(map);
  return map;
}

double eval_map(const RenormalizationMap& map, double x) { return map.p(x); }

double eval_map_derivative(const RenormalizationMap& map, double x) {
  return map.dp(x);
}

double target_l2_error(const Polynomial& p, Target target, double lo,
                       double hi) {
  // Fixed high-order rule: the integrand is analytic, and its absolute
  // evaluation noise (about |p - target| times machine epsilon from the
  // cancellation in the difference) puts an adaptive tolerance below reach
  // for accurate fits.
  static const GaussLegendre rule = gauss_legendre(400);
  const double sq = integrate(rule, lo, hi, [&](double x) {
    const double d = p(x) - target_value(target, x);
    return d * d;
  });
  return std::sqrt(std::max(sq, 0.0));
}

}  // namespace phiclosure
