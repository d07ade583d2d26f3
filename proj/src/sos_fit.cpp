#include "phiclosure/sos_fit.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "phiclosure/quadrature1d.hpp"
#include "phiclosure/special_functions.hpp"

namespace phiclosure {
namespace {

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// The Newton path is instantiated twice: in double for the multistart sweep
// and in long double for the final polish, where the monomial Gram matrix is
// too ill-conditioned for double to resolve the optimum at small intervals.

template <typename Scalar>
VecX<Scalar> alpha_impl(const VecX<Scalar>& w, int K) {
  VecX<Scalar> conv = VecX<Scalar>::Zero(2 * K + 1);
  for (int i = 0; i <= K; ++i)
    for (int j = 0; j <= K; ++j) conv[i + j] += w[1 + i] * w[1 + j];
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) conv[i + j] += w[2 + K + i] * w[2 + K + j];
  VecX<Scalar> alpha(2 * K + 2);
  alpha[0] = w[0];
  for (int n = 1; n <= 2 * K + 1; ++n) alpha[n] = conv[n - 1] / Scalar(n);
  return alpha;
}

template <typename Scalar>
MatX<Scalar> jacobian_impl(const VecX<Scalar>& w, int K) {
  const int dim = 2 * K + 2;
  MatX<Scalar> J = MatX<Scalar>::Zero(dim, dim);
  J(0, 0) = Scalar(1);
  for (int n = 1; n <= 2 * K + 1; ++n) {
    for (int i = 0; i <= K; ++i) {
      const int j = n - 1 - i;
      if (j >= 0 && j <= K) J(n, 1 + i) = Scalar(2) * w[1 + j] / Scalar(n);
    }
    for (int i = 0; i < K; ++i) {
      const int j = n - 1 - i;
      if (j >= 0 && j < K)
        J(n, 2 + K + i) = Scalar(2) * w[2 + K + j] / Scalar(n);
    }
  }
  return J;
}

// sum_n r_n d^2 alpha_n / dw^2: constant in w, block diagonal over the a and
// b segments with entries 2 r_{i+j+1} / (i+j+1).
template <typename Scalar>
MatX<Scalar> curvature_impl(const VecX<Scalar>& r, int K) {
  const int dim = 2 * K + 2;
  MatX<Scalar> T = MatX<Scalar>::Zero(dim, dim);
  for (int i = 0; i <= K; ++i)
    for (int j = 0; j <= K; ++j)
      T(1 + i, 1 + j) = Scalar(2) * r[i + j + 1] / Scalar(i + j + 1);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      T(2 + K + i, 2 + K + j) = Scalar(2) * r[i + j + 1] / Scalar(i + j + 1);
  return T;
}

template <typename Scalar>
MatX<Scalar> gram_impl(int K, Scalar lo, Scalar hi) {
  const int dim = 2 * K + 2;
  VecX<Scalar> plo(2 * dim), phi(2 * dim);  // x^(k+1) for k = 0..2dim-1
  plo[0] = lo;
  phi[0] = hi;
  for (int k = 1; k < 2 * dim; ++k) {
    plo[k] = plo[k - 1] * lo;
    phi[k] = phi[k - 1] * hi;
  }
  MatX<Scalar> M(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      M(i, j) = (phi[i + j] - plo[i + j]) / Scalar(i + j + 1);
  return M;
}

// The gamma difference Gamma(j+1,-hi) - Gamma(j+1,-lo) cancels
// catastrophically on small intervals at large j (both terms near j! while
// the integral is O(1)), so for moderate endpoints the moment is summed as
// the exponential series of int x^j e^x dx instead, whose largest term is
// comparable to the result. Both routes run in long double; the gamma route
// is kept for wide intervals where one endpoint dominates.
long double bs_moment_ld(int j, long double lo, long double hi) {
  using LD = long double;
  if (std::max(std::abs(lo), std::abs(hi)) <= LD(8)) {
    LD sum = 0, prev = 0, nf = 1;
    LD plo = std::pow(lo, LD(j + 1)), phi = std::pow(hi, LD(j + 1));
    for (int n = 0; n < 400; ++n) {
      if (n > 0) nf *= n;
      const LD term = (phi - plo) / (nf * LD(j + n + 1));
      sum += term;
      if (n > 2 && std::abs(term) + std::abs(prev) <
                       std::numeric_limits<LD>::epsilon() * std::abs(sum))
        break;
      prev = term;
      plo *= lo;
      phi *= hi;
    }
    return sum;
  }
  const LD sign = (j % 2 == 0) ? LD(1) : LD(-1);
  return sign * (upper_incomplete_gamma<LD>(j + 1, -hi) -
                 upper_incomplete_gamma<LD>(j + 1, -lo));
}

VecX<long double> moments_ld(Target target, int dim, long double lo,
                             long double hi) {
  using LD = long double;
  VecX<LD> beta(dim);
  if (target == Target::BoltzmannShannon) {
    for (int j = 0; j < dim; ++j) beta[j] = bs_moment_ld(j, lo, hi);
  } else {
    const LD za = std::exp(lo);
    const LD zb = std::exp(hi);
    VecX<LD> factorial(dim);
    factorial[0] = LD(1);
    for (int k = 1; k < dim; ++k) factorial[k] = factorial[k - 1] * LD(k);
    for (int j = 0; j < dim; ++j) {
      LD sum(0);
      LD lo_k(1), hi_k(1);  // lo^k, hi^k
      for (int k = 0; k <= j; ++k) {
        const LD sign = ((j + k) % 2 == 0) ? LD(1) : LD(-1);
        const LD coef = sign * factorial[j] / factorial[k];
        sum += coef * (hi_k * polylog<LD>(j + 1 - k, zb) -
                       lo_k * polylog<LD>(j + 1 - k, za));
        lo_k *= lo;
        hi_k *= hi;
      }
      beta[j] = sum;
    }
  }
  return beta;
}

template <typename Scalar>
VecX<Scalar> moments_impl(Target target, int K, Scalar lo, Scalar hi) {
  return moments_ld(target, 2 * K + 2, static_cast<long double>(lo),
                    static_cast<long double>(hi))
      .cast<Scalar>();
}

template <typename Scalar>
struct NewtonOutcome {
  VecX<Scalar> w;
  Scalar grad_norm = std::numeric_limits<Scalar>::infinity();
  bool converged = false;
  int iterations = 0;
};

// Damped Newton for J(w)^T (M alpha(w) - beta) = 0. The analytic Hessian
// J^T M J + curvature is used when positive definite; otherwise the
// Gauss-Newton part (ridged if singular). Backtracking halves the step on
// the squared gradient norm; when that merit rejects every halving the step
// is retried against objective decrease, since both direction choices
// descend the objective but Gauss-Newton directions need not descend the
// gradient norm far from stationarity.
template <typename Scalar>
NewtonOutcome<Scalar> newton_stationary(const MatX<Scalar>& M,
                                        const VecX<Scalar>& beta, int K,
                                        VecX<Scalar> w, Scalar tol,
                                        int max_iterations,
                                        int max_backtracks) {
  NewtonOutcome<Scalar> out;
  const auto eval_grad = [&](const VecX<Scalar>& wv, VecX<Scalar>& r,
                             MatX<Scalar>& J) {
    const VecX<Scalar> alpha = alpha_impl(wv, K);
    r = M * alpha - beta;
    J = jacobian_impl(wv, K);
    return VecX<Scalar>(J.transpose() * r);
  };
  const auto objective = [&](const VecX<Scalar>& wv) {
    const VecX<Scalar> alpha = alpha_impl(wv, K);
    return Scalar(Scalar(0.5) * alpha.dot(M * alpha) - beta.dot(alpha));
  };

  VecX<Scalar> r;
  MatX<Scalar> J;
  VecX<Scalar> g = eval_grad(w, r, J);
  Scalar gn = g.norm();
  for (int iter = 0; iter < max_iterations; ++iter) {
    if (!std::isfinite(gn)) break;
    if (gn <= tol) {
      out.converged = true;
      break;
    }
    const MatX<Scalar> gauss_newton = J.transpose() * M * J;
    MatX<Scalar> H = gauss_newton + curvature_impl(r, K);
    Eigen::LLT<MatX<Scalar>> llt(H);
    VecX<Scalar> d;
    if (llt.info() == Eigen::Success) {
      d = llt.solve(-g);
    }
    if (llt.info() != Eigen::Success || !d.allFinite()) {
      Eigen::LLT<MatX<Scalar>> gn_llt(gauss_newton);
      if (gn_llt.info() == Eigen::Success) {
        d = gn_llt.solve(-g);
      } else {
        MatX<Scalar> damped = gauss_newton;
        damped.diagonal().array() +=
            Scalar(1e-8) * (gauss_newton.trace() + Scalar(1));
        d = damped.ldlt().solve(-g);
      }
      if (!d.allFinite()) break;
    }
    Scalar step(1);
    bool accepted = false;
    for (int bt = 0; bt <= max_backtracks; ++bt) {
      const VecX<Scalar> w_trial = w + step * d;
      VecX<Scalar> r_trial;
      MatX<Scalar> J_trial;
      const VecX<Scalar> g_trial = eval_grad(w_trial, r_trial, J_trial);
      const Scalar gn_trial = g_trial.norm();
      if (std::isfinite(gn_trial) &&
          gn_trial * gn_trial <= (Scalar(1) - Scalar(1e-4) * step) * gn * gn) {
        w = w_trial;
        g = g_trial;
        gn = gn_trial;
        r = r_trial;
        J = J_trial;
        accepted = true;
        break;
      }
      step /= Scalar(2);
    }
    if (!accepted) {
      const Scalar slope = g.dot(d);
      if (slope < Scalar(0)) {
        const Scalar f0 = objective(w);
        step = Scalar(1);
        for (int bt = 0; bt <= max_backtracks; ++bt) {
          const VecX<Scalar> w_trial = w + step * d;
          const Scalar f_trial = objective(w_trial);
          if (std::isfinite(f_trial) &&
              f_trial <= f0 + Scalar(1e-4) * step * slope) {
            w = w_trial;
            g = eval_grad(w, r, J);
            gn = g.norm();
            accepted = true;
            break;
          }
          step /= Scalar(2);
        }
      }
    }
    out.iterations = iter + 1;
    if (!accepted) break;  // stalled; report best point reached
  }
  out.w = std::move(w);
  out.grad_norm = gn;
  return out;
}

// Objective-monotone Levenberg refinement used to polish the multistart
// winner. The damping makes the model Hessian positive definite whether or
// not the true Hessian is (far from stationarity it often is not), every
// accepted step strictly decreases the objective, and the gradient norm is
// only the stopping test. Long double instantiation keeps the objective and
// gradient evaluable near the optimum.
template <typename Scalar>
NewtonOutcome<Scalar> levenberg_stationary(const MatX<Scalar>& M,
                                           const VecX<Scalar>& beta, int K,
                                           VecX<Scalar> w, Scalar tol,
                                           int max_iterations) {
  NewtonOutcome<Scalar> out;
  const auto eval_grad = [&](const VecX<Scalar>& wv, VecX<Scalar>& r,
                             MatX<Scalar>& J) {
    const VecX<Scalar> alpha = alpha_impl(wv, K);
    r = M * alpha - beta;
    J = jacobian_impl(wv, K);
    return VecX<Scalar>(J.transpose() * r);
  };
  const auto objective = [&](const VecX<Scalar>& wv) {
    const VecX<Scalar> alpha = alpha_impl(wv, K);
    return Scalar(Scalar(0.5) * alpha.dot(M * alpha) - beta.dot(alpha));
  };

  VecX<Scalar> r;
  MatX<Scalar> J;
  VecX<Scalar> g = eval_grad(w, r, J);
  Scalar gn = g.norm();
  Scalar f = objective(w);
  Scalar lambda(1e-10);
  for (int iter = 0; iter < max_iterations; ++iter) {
    if (!std::isfinite(gn) || !std::isfinite(f)) break;
    if (gn <= tol) {
      out.converged = true;
      break;
    }
    const MatX<Scalar> H =
        MatX<Scalar>(J.transpose() * M * J) + curvature_impl(r, K);
    const Scalar scale = H.trace() / Scalar(H.rows()) + Scalar(1e-30);
    bool accepted = false;
    for (int attempt = 0; attempt < 80; ++attempt) {
      MatX<Scalar> damped = H;
      damped.diagonal().array() += lambda * scale;
      const Eigen::LDLT<MatX<Scalar>> ldlt(damped);
      const VecX<Scalar> d = ldlt.solve(-g);
      if (d.allFinite()) {
        const VecX<Scalar> w_trial = w + d;
        const Scalar f_trial = objective(w_trial);
        if (std::isfinite(f_trial) && f_trial < f) {
          w = w_trial;
          f = f_trial;
          g = eval_grad(w, r, J);
          gn = g.norm();
          lambda = std::max(lambda / Scalar(4), Scalar(1e-14));
          accepted = true;
          break;
        }
      }
      lambda *= Scalar(4);
      if (lambda > Scalar(1e12)) break;
    }
    out.iterations = iter + 1;
    if (!accepted) break;  // objective at its evaluation floor
  }
  out.w = std::move(w);
  out.grad_norm = gn;
  return out;
}

// Exact interior construction. When the unconstrained minimizer
// alpha = M^{-1} beta already has a nonnegative derivative polynomial, the
// fit reduces to a linear solve: the derivative, strictly positive on the
// real line, factors over its conjugate root pairs as |h|^2 with h the
// product of the upper half plane factors scaled by the square root of the
// leading coefficient, so A = Re h, B = Im h. Newton iteration in w has a
// near-singular Hessian in exactly this regime (the residual vanishes at
// the optimum, and a small leading coefficient of A leaves the rotation
// gauge of (A, B) nearly unbroken), so the direct construction replaces a
// crawl along a curved valley. Returns false when the unconstrained
// minimizer is infeasible (real roots present: the constraint is active).
template <typename Scalar>
bool interior_exact(const MatX<Scalar>& M, const VecX<Scalar>& beta, int K,
                    VecX<Scalar>& w_out) {
  const Eigen::LLT<MatX<Scalar>> llt(M);
  if (llt.info() != Eigen::Success) return false;
  VecX<Scalar> alpha = llt.solve(beta);
  for (int it = 0; it < 4; ++it)
    alpha += llt.solve(VecX<Scalar>(beta - M * alpha));
  if (!alpha.allFinite()) return false;

  const int qd = 2 * K;  // degree of q = derivative of the fitted polynomial
  VecX<Scalar> q(qd + 1);
  for (int n = 0; n <= qd; ++n) q[n] = Scalar(n + 1) * alpha[n + 1];
  if (!(q[qd] > Scalar(0))) return false;

  std::vector<std::complex<Scalar>> h{std::sqrt(q[qd])};
  if (K > 0) {
    MatX<Scalar> comp = MatX<Scalar>::Zero(qd, qd);
    for (int i = 1; i < qd; ++i) comp(i, i - 1) = Scalar(1);
    for (int i = 0; i < qd; ++i) comp(i, qd - 1) = -q[i] / q[qd];
    const Eigen::EigenSolver<MatX<Scalar>> es(comp);
    if (es.info() != Eigen::Success) return false;
    for (int i = 0; i < qd; ++i) {
      // Real Schur form yields exact conjugate pairs; real eigenvalues
      // (infeasible alpha) fail the size check below.
      const std::complex<Scalar> z(es.eigenvalues()[i].real(),
                                   es.eigenvalues()[i].imag());
      if (!(z.imag() > Scalar(0))) continue;
      std::vector<std::complex<Scalar>> next(h.size() + 1,
                                             std::complex<Scalar>(0));
      for (std::size_t k = 0; k < h.size(); ++k) {
        next[k] -= z * h[k];
        next[k + 1] += h[k];
      }
      h = std::move(next);
    }
  }
  if (static_cast<int>(h.size()) != K + 1) return false;

  VecX<Scalar> w(2 * K + 2);
  w[0] = alpha[0];
  for (int i = 0; i <= K; ++i) w[1 + i] = h[i].real();
  for (int i = 0; i < K; ++i) w[2 + K + i] = h[i].imag();
  w_out = std::move(w);
  return true;
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Start distribution: a and b components uniform on [-1, 1] scaled to the
// square root of the target's mean slope over the interval, C set to the
// target value at the interval midpoint.
VecX<double> random_start(int K, double slope_scale, double offset,
                          std::uint64_t seed, int index) {
  std::mt19937_64 rng(mix64(seed + 0x9e3779b97f4a7c15ull *
                                       static_cast<std::uint64_t>(index + 1)));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  VecX<double> w(2 * K + 2);
  for (int i = 1; i < w.size(); ++i) w[i] = slope_scale * uniform(rng);
  w[0] = offset;
  return w;
}

// Long double Gauss-Legendre nodes on [-1, 1], Newton-refined from the
// Chebyshev initial guesses.
void ld_gauss_legendre(int n, VecX<long double>& nodes,
                       VecX<long double>& weights) {
  using LD = long double;
  nodes.resize(n);
  weights.resize(n);
  const LD pi = LD(3.14159265358979323846264338327950288L);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    LD z = std::cos(pi * (LD(i) + 0.75L) / (LD(n) + 0.5L));
    LD pp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      LD p1 = 1, p2 = 0;
      for (int j = 1; j <= n; ++j) {
        const LD p3 = p2;
        p2 = p1;
        p1 = ((2 * LD(j) - 1) * z * p2 - (LD(j) - 1) * p3) / LD(j);
      }
      pp = LD(n) * (z * p1 - p2) / (z * z - 1);
      const LD dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < LD(1e-19)) break;
    }
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = LD(2) / ((LD(1) - z * z) * pp * pp);
    weights[n - 1 - i] = weights[i];
  }
  if (n % 2 == 1) nodes[n / 2] = 0;
}

// Moments of the standardized instance y = (x - mid) / half in [-1, 1]:
// beta~_n = int_{-1}^{1} y^n target(mid + half y) dy, by fixed long double
// Gauss-Legendre. The integrand is analytic on [-1, 1] (the Planckian pole
// sits at y = -mid / half, outside the interval), so the rule converges
// geometrically and 200 nodes leave only long double roundoff.
VecX<long double> standardized_moments(Target target, int dim,
                                       long double mid, long double half) {
  using LD = long double;
  static VecX<LD> nodes, weights;
  if (nodes.size() == 0) ld_gauss_legendre(200, nodes, weights);
  VecX<LD> vals(nodes.size());
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    const LD x = mid + half * nodes[i];
    vals[i] = target == Target::BoltzmannShannon
                  ? std::exp(x)
                  : LD(1) / std::expm1(-x);
  }
  VecX<LD> beta(dim);
  for (int n = 0; n < dim; ++n) {
    LD sum = 0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i)
      sum += weights[i] * vals[i];
    beta[n] = sum;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) vals[i] *= nodes[i];
  }
  return beta;
}

// Coefficients in x of v((x - mid) / half) by Horner composition.
VecX<long double> compose_affine(const VecX<long double>& v, long double mid,
                                 long double half) {
  using LD = long double;
  const LD inv = LD(1) / half;
  VecX<LD> r = VecX<LD>::Zero(v.size());
  r[0] = v[v.size() - 1];
  int deg = 0;
  for (Eigen::Index k = v.size() - 2; k >= 0; --k) {
    VecX<LD> nr = VecX<LD>::Zero(v.size());
    for (int i = 0; i <= deg; ++i) {
      nr[i + 1] += r[i] * inv;
      nr[i] -= r[i] * inv * mid;
    }
    ++deg;
    nr[0] += v[k];
    r = std::move(nr);
  }
  return r;
}

// Map the standardized solution back to raw coordinates. The standardized
// squares satisfy A~(y)^2 + B~(y)^2 = dp~/dy = half dp/dx, so
// A(x) = A~((x - mid) / half) / sqrt(half).
VecX<long double> unscale_w(const VecX<long double>& ws, int K,
                            long double mid, long double half) {
  using LD = long double;
  const LD root = std::sqrt(half);
  const VecX<LD> a =
      compose_affine(ws.segment(1, K + 1), mid, half) / root;
  VecX<LD> w = VecX<LD>::Zero(ws.size());
  w.segment(1, K + 1) = a;
  if (K > 0) {
    VecX<LD> bt = VecX<LD>::Zero(K + 1);
    bt.head(K) = ws.segment(2 + K, K);
    const VecX<LD> b = compose_affine(bt, mid, half) / root;
    w.segment(2 + K, K) = b.head(K);
  }
  // C is alpha_0 of the raw polynomial: evaluate the composed primitive.
  w[0] = compose_affine(alpha_impl<LD>(ws, K), mid, half)[0];
  return w;
}

}  // namespace

Eigen::VectorXd SosParameters::stacked() const {
  Eigen::VectorXd w(size());
  w[0] = C;
  w.segment(1, a.size()) = a;
  w.segment(1 + a.size(), b.size()) = b;
  return w;
}

SosParameters SosParameters::from_stacked(const Eigen::VectorXd& w) {
  if (w.size() < 2 || w.size() % 2 != 0)
    throw std::invalid_argument(
        "SosParameters::from_stacked: length must be 2K+2 for some K >= 0");
  const int K = static_cast<int>(w.size() / 2) - 1;
  SosParameters p;
  p.C = w[0];
  p.a = w.segment(1, K + 1);
  p.b = w.segment(K + 2, K);
  return p;
}

Eigen::VectorXd alpha_from_w(const SosParameters& w) {
  return alpha_impl<double>(w.stacked(), w.order());
}

Eigen::MatrixXd jacobian_alpha(const SosParameters& w) {
  return jacobian_impl<double>(w.stacked(), w.order());
}

FitProblem build_fit_problem(Target target, int K, double lo, double hi) {
  if (K < 0) throw std::invalid_argument("build_fit_problem: K must be >= 0");
  if (!(lo < hi))
    throw std::invalid_argument("build_fit_problem: need lo < hi");
  if (target == Target::BoseEinstein && hi >= 0.0)
    throw std::invalid_argument(
        "build_fit_problem: Planckian fit interval must satisfy hi < 0");
  FitProblem problem;
  problem.target = target;
  problem.K = K;
  problem.lo = lo;
  problem.hi = hi;
  problem.gram = gram_impl<double>(K, lo, hi);
  problem.moments = moments_impl<double>(target, K, lo, hi);

  // Cross-check the closed-form moments against adaptive quadrature.
  double worst = 0.0;
  for (int j = 0; j < problem.moments.size(); ++j) {
    const double reference = adaptive_simpson(
        [&](double x) {
          return std::pow(x, j) * target_value(target, x);
        },
        lo, hi, 1e-10);
    const double rel = std::abs(problem.moments[j] - reference) /
                       std::max(std::abs(reference), 1e-12);
    worst = std::max(worst, rel);
  }
  problem.moment_check_error = worst;
  if (worst > 1e-8)
    throw std::runtime_error(
        "build_fit_problem: closed-form moments disagree with quadrature");
  return problem;
}

double objective_value(const FitProblem& problem,
                       const Eigen::VectorXd& alpha) {
  return 0.5 * alpha.dot(problem.gram * alpha) -
         problem.moments.dot(alpha);
}

double objective_value(const FitProblem& problem, const SosParameters& w) {
  return objective_value(problem, alpha_from_w(w));
}

Eigen::VectorXd objective_gradient(const FitProblem& problem,
                                   const SosParameters& w) {
  const Eigen::VectorXd alpha = alpha_from_w(w);
  const Eigen::VectorXd residual = problem.gram * alpha - problem.moments;
  return jacobian_alpha(w).transpose() * residual;
}

FitResult fit(const FitProblem& problem, const FitOptions& options) {
  if (options.starts < 1)
    throw std::invalid_argument("fit: need at least one start");
  using LD = long double;
  const int K = problem.K;
  const int dim = 2 * K + 2;

  // The solver runs on the standardized instance y = (x - mid) / half with
  // y in [-1, 1]. Monomial bases on raw intervals that are wide or far from
  // the origin give Gram matrices and objective evaluations too
  // ill-conditioned even for long double; on [-1, 1] the Gram is merely
  // Hilbert-like and the optimal coefficients are O(1). The solution maps
  // back to raw coefficients by composition with the affine change of
  // variable.
  const LD mid = LD(0.5) * (LD(problem.lo) + LD(problem.hi));
  const LD half = LD(0.5) * (LD(problem.hi) - LD(problem.lo));
  const MatX<double> gram_s = gram_impl<double>(K, -1.0, 1.0);
  const VecX<LD> beta_ld =
      standardized_moments(problem.target, dim, mid, half);
  const VecX<double> beta_s = beta_ld.cast<double>();
  const double tol = options.gradient_tolerance * (1.0 + beta_s.norm());

  const double slope_s =
      0.5 * (target_value(problem.target, problem.hi) -
             target_value(problem.target, problem.lo));
  const double start_scale = std::sqrt(std::max(slope_s, 1e-8));
  const double start_offset =
      target_value(problem.target, static_cast<double>(mid));

  struct StartOutcome {
    bool converged = false;  // met the strict tolerance in double
    double objective = std::numeric_limits<double>::infinity();
    double grad_norm = std::numeric_limits<double>::infinity();
    VecX<double> w;
  };
  std::vector<StartOutcome> outcomes(options.starts);

  const auto run_range = [&](int begin, int end) {
    for (int s = begin; s < end; ++s) {
      const VecX<double> w0 =
          random_start(K, start_scale, start_offset, options.seed, s);
      const auto nr = newton_stationary<double>(
          gram_s, beta_s, K, w0, tol, options.max_iterations,
          options.max_backtracks);
      StartOutcome& o = outcomes[s];
      o.converged = nr.converged;
      o.grad_norm = nr.grad_norm;
      o.w = nr.w;
      if (o.w.allFinite()) {
        const VecX<double> alpha = alpha_impl<double>(o.w, K);
        const double f = 0.5 * alpha.dot(gram_s * alpha) - beta_s.dot(alpha);
        if (std::isfinite(f)) o.objective = f;
      }
    }
  };

  int n_threads = options.threads > 0
                      ? options.threads
                      : static_cast<int>(
                            std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min(n_threads, options.starts);
  if (n_threads <= 1) {
    run_range(0, options.starts);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (options.starts + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(options.starts, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  // Deterministic merge: keep the least objective over all finite
  // endpoints, stalled or not. The objective is strictly convex in alpha
  // (f - f* = ||alpha - alpha*||_M^2 / 2), so the least objective endpoint
  // is the closest to the optimum and the right seed for the polish even
  // when double precision stalled short of stationarity.
  int converged_starts = 0;
  int best = -1;
  for (int s = 0; s < options.starts; ++s) {
    if (outcomes[s].converged) ++converged_starts;
    if (!std::isfinite(outcomes[s].objective)) continue;
    if (best < 0 || outcomes[s].objective < outcomes[best].objective) best = s;
  }

  if (best < 0) {
    int least_bad = 0;
    for (int s = 1; s < options.starts; ++s)
      if (outcomes[s].grad_norm < outcomes[least_bad].grad_norm) least_bad = s;
    throw FitFailure(
        "fit: no start converged",
        SosParameters::from_stacked(
            unscale_w(outcomes[least_bad].w.cast<LD>(), K, mid, half)
                .cast<double>()
                .eval()),
        outcomes[least_bad].grad_norm);
  }

  // Extended-precision polish: the exact interior construction when the
  // monotonicity constraint is inactive, Levenberg refinement of the
  // multistart winner otherwise; the result must reach the gradient
  // tolerance for the fit to count as converged.
  const MatX<LD> gram_ld = gram_impl<LD>(K, LD(-1), LD(1));
  const LD tol_ld =
      LD(options.gradient_tolerance) * (LD(1) + beta_ld.norm());
  NewtonOutcome<LD> polished;
  VecX<LD> w_interior;
  if (interior_exact<LD>(gram_ld, beta_ld, K, w_interior))
    polished =
        levenberg_stationary<LD>(gram_ld, beta_ld, K, w_interior, tol_ld, 200);
  if (!polished.converged)
    polished = levenberg_stationary<LD>(
        gram_ld, beta_ld, K, outcomes[best].w.cast<LD>(), tol_ld, 2000);
  if (!polished.converged)
    throw FitFailure(
        "fit: polish did not reach gradient tolerance",
        SosParameters::from_stacked(
            unscale_w(polished.w, K, mid, half).cast<double>().eval()),
        static_cast<double>(polished.grad_norm));

  const VecX<LD> w_raw = unscale_w(polished.w, K, mid, half);
  const VecX<LD> alpha_raw = alpha_impl<LD>(w_raw, K);
  const VecX<LD> alpha_s = alpha_impl<LD>(polished.w, K);
  const LD objective_ld =
      half * (LD(0.5) * alpha_s.dot(gram_ld * alpha_s) -
              beta_ld.dot(alpha_s));

  FitResult result;
  result.w = SosParameters::from_stacked(w_raw.cast<double>());
  result.objective = static_cast<double>(objective_ld);
  result.starts_tried = options.starts;
  result.converged_starts = converged_starts;
  result.seed = options.seed;

  result.map.p = Polynomial(alpha_raw.cast<double>().eval());
  result.map.dp = derivative(result.map.p);
  result.map.family = MapFamily::Optimized;
  result.map.target = problem.target;
  result.map.params.order = K;
  result.map.params.interval_lo = problem.lo;
  result.map.params.interval_hi = problem.hi;
  result.map.params.objective = result.objective;
  result.map.domain_lo = problem.lo;
  result.map.domain_hi = problem.hi;
  certify_monotone(result.map);
  return result;
}

}  // namespace phiclosure
