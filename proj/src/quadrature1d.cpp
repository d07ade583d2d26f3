#include "phiclosure/quadrature1d.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phiclosure {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);

  // Legendre three-term recurrence for P_n(z) and its derivative.
  const auto legendre = [n](double z, double& value, double& slope) {
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    value = p1;
    slope = n * (z * p1 - p2) / (z * z - 1.0);
  };

  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-based initial guess for the i-th positive root of P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      legendre(z, p, pp);
      const double dz = p / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    // refresh the derivative at the converged node; reusing the value from
    // the step before costs several ulp in the weight
    legendre(z, p, pp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double integrate(const GaussLegendre& rule, double a, double b,
                 const std::function<double(double)>& f) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

namespace {

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a,
                     double b, double fa, double fm, double fb, double whole,
                     double abs_tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * abs_tol)
    return left + right + delta / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * abs_tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * abs_tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, int max_depth) {
  if (!(a < b)) {
    if (a == b) return 0.0;
    return -adaptive_simpson(f, b, a, rel_tol, max_depth);
  }
  // Pin the magnitude the relative tolerance refers to with a fixed
  // high-order rule, then refine adaptively against the absolute budget.
  static const GaussLegendre pilot = gauss_legendre(50);
  const double scale = std::max(std::abs(integrate(pilot, a, b, f)), 1e-300);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = simpson(fa, fm, fb, b - a);
  return adaptive_step(f, a, b, fa, fm, fb, whole, rel_tol * scale, max_depth);
}

}  // namespace phiclosure
