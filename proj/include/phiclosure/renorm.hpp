#pragma once

#include <stdexcept>
#include <string>

#include "phiclosure/polynomial.hpp"

namespace phiclosure {

/// Entropy family the renormalization map is dual to. BoltzmannShannon maps
/// approximate the exponential on all of R; BoseEinstein maps approximate the
/// Planckian x -> 1/(e^(-x) - 1), defined and increasing on x < 0.
enum class Target { BoltzmannShannon, BoseEinstein };

double target_value(Target target, double x);
double target_derivative(Target target, double x);

/// k-th derivative of the target at x0 (k >= 0). For the Planckian this uses
/// the derivative polynomials from planck_derivative_polynomial.
double target_kth_derivative(Target target, int k, double x0);

enum class MapFamily { PhiDivergence, Taylor, Optimized };

struct MapParams {
  int order = 0;            // K in the family naming; polynomial degree is
                            // K (phi-divergence) or 2K+1 (taylor, optimized)
  double x0 = 0.0;          // taylor expansion point
  double interval_lo = 0.0; // optimized fit interval
  double interval_hi = 0.0;
  double objective = 0.0;   // optimized: achieved least-squares objective
};

/// A monotone polynomial renormalization map together with its exact
/// derivative polynomial and construction provenance. Instances are certified
/// monotone on a 2001-point grid over [domain_lo, domain_hi] plus wide
/// sampling of [-50, 50] at construction; they are immutable afterwards.
struct RenormalizationMap {
  Polynomial p;
  Polynomial dp;            // derivative(p), stored explicitly
  MapFamily family = MapFamily::PhiDivergence;
  Target target = Target::BoltzmannShannon;
  MapParams params;
  double domain_lo = -5.0;  // declared validity interval (certification grid)
  double domain_hi = 5.0;

  double operator()(double x) const { return p(x); }
};

struct MonotonicityError : std::runtime_error {
  MonotonicityError(const std::string& what, double where, double value)
      : std::runtime_error(what), x(where), dp_value(value) {}
  double x;
  double dp_value;
};

/// Grid certification of dp >= 0: 2001 uniform points on the declared
/// interval checked against -1e-12, plus 2001 uniform points on [-50, 50]
/// checked against a roundoff envelope. Throws MonotonicityError on failure.
void certify_monotone(const RenormalizationMap& map);

/// phi-divergence map beta_K(x) = (1 + x/K)^K for odd K >= 1, expanded into
/// monomial coefficients. Monotonically increasing on all of R.
RenormalizationMap phi_divergence_map(int K);

/// Entropy density eta_K(I) = K I ((K/(K+1)) I^(1/K) - 1) for I > 0; its
/// derivative is the functional inverse of beta_K.
double phi_divergence_entropy(int K, double density);

/// Polynomial P_n with P_0(u) = u and P_{n+1}(u) = P_n'(u) u (1 + u), so that
/// the n-th derivative of the Planckian equals P_n evaluated at its value.
/// All coefficients are nonnegative integers.
Polynomial planck_derivative_polynomial(int n);

/// Odd-degree Taylor map T_{2K+1}(x) = sum_k beta^(k)(x0)/k! (x - x0)^k,
/// re-expanded in the monomial basis. Monotone on all of R because every
/// target derivative at x0 is nonnegative. BoseEinstein requires x0 < 0.
RenormalizationMap taylor_map(Target target, int K, double x0);

double eval_map(const RenormalizationMap& map, double x);
double eval_map_derivative(const RenormalizationMap& map, double x);

/// L2 distance between the map polynomial and the target on [lo, hi],
/// computed by adaptive quadrature of the squared pointwise difference.
double target_l2_error(const Polynomial& p, Target target, double lo,
                       double hi);

}  // namespace phiclosure
