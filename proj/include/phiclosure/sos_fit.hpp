#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

#include "phiclosure/renorm.hpp"

namespace phiclosure {

/// Parameters w = (C, a_0..a_K, b_0..b_{K-1}) of an admissible monotone
/// polynomial of degree 2K+1: with A(x) = sum_i a_i x^i and
/// B(x) = sum_i b_i x^i (b_K fixed at zero),
///   p(x) = C + int_0^x A(t)^2 + B(t)^2 dt,
/// so p' is a sum of two squares and p is increasing by construction.
struct SosParameters {
  double C = 0.0;
  Eigen::VectorXd a;  // length K+1
  Eigen::VectorXd b;  // length K

  int order() const { return static_cast<int>(a.size()) - 1; }
  Eigen::Index size() const { return 1 + a.size() + b.size(); }

  /// Flat vector (C, a, b) of length 2K+2.
  Eigen::VectorXd stacked() const;
  static SosParameters from_stacked(const Eigen::VectorXd& w);
};

/// Monomial coefficients alpha of the polynomial parameterized by w:
/// alpha_0 = C and alpha_n = (1/n) sum_i (a_i a_{n-1-i} + b_i b_{n-1-i}).
Eigen::VectorXd alpha_from_w(const SosParameters& w);

/// Jacobian d alpha / d w, a (2K+2) x (2K+2) matrix. Row 0 is e_0; the rest
/// is the banded block [0 | 2A | 2B] with entries a_{n-1-i}/n resp.
/// b_{n-1-i}/n scaled by 2.
Eigen::MatrixXd jacobian_alpha(const SosParameters& w);

/// Least-squares fit setup on [lo, hi]: Gram matrix of monomials and the
/// target moment vector beta_j = int_lo^hi x^j beta(x) dx from closed forms
/// (incomplete gamma for the exponential, polylogarithms for the Planckian).
/// Construction cross-checks the closed-form moments against adaptive
/// quadrature at relative 1e-8 and records the observed deviation.
struct FitProblem {
  Target target = Target::BoltzmannShannon;
  int K = 0;
  double lo = 0.0;
  double hi = 1.0;
  Eigen::MatrixXd gram;
  Eigen::VectorXd moments;
  double moment_check_error = 0.0;
};

FitProblem build_fit_problem(Target target, int K, double lo, double hi);

/// f(alpha) = 1/2 alpha^T M alpha - beta^T alpha. The constant
/// 1/2 int beta^2 of the underlying L2 distance is omitted throughout.
double objective_value(const FitProblem& problem,
                       const Eigen::VectorXd& alpha);
double objective_value(const FitProblem& problem, const SosParameters& w);

/// Gradient of w -> f(alpha(w)): J(w)^T (M alpha(w) - beta).
Eigen::VectorXd objective_gradient(const FitProblem& problem,
                                   const SosParameters& w);

struct FitOptions {
  int starts = 500;
  std::uint64_t seed = 0;
  int max_iterations = 200;
  int max_backtracks = 30;
  double gradient_tolerance = 1e-10;  // scaled by (1 + ||moments||)
  int threads = 0;                    // 0: one per hardware thread
};

struct FitResult {
  RenormalizationMap map;
  SosParameters w;
  double objective = 0.0;
  int starts_tried = 0;
  int converged_starts = 0;
  std::uint64_t seed = 0;
};

/// Thrown by fit() when no start converges; carries the best iterate seen.
struct FitFailure : std::runtime_error {
  FitFailure(const std::string& what, SosParameters best, double grad_norm)
      : std::runtime_error(what),
        best_w(std::move(best)),
        best_gradient_norm(grad_norm) {}
  SosParameters best_w;
  double best_gradient_norm;
};

/// Multistart damped Newton on the stationarity system J^T (M alpha - beta)
/// = 0. Each start draws w from (seed, start_index) so results do not depend
/// on scheduling; converged stationary points are deduplicated in alpha
/// space and the one with the least objective wins. The winner is polished
/// in extended precision before the map is assembled.
FitResult fit(const FitProblem& problem, const FitOptions& options = {});

}  // namespace phiclosure
