#pragma once

#include <Eigen/Core>

#include <functional>

namespace phiclosure {

/// n-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree
/// <= 2n - 1.
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussLegendre gauss_legendre(int n);

/// Integrates f over [a, b] with the given rule mapped affinely.
double integrate(const GaussLegendre& rule, double a, double b,
                 const std::function<double(double)>& f);

/// Adaptive Simpson quadrature of f over [a, b]. Bisects until the local
/// Richardson error estimate meets the tolerance budget; rel_tol is applied
/// against the running magnitude of the integral.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol = 1e-12, int max_depth = 48);

}  // namespace phiclosure
