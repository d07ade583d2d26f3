#include "phiclosure/closure.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace phiclosure {
namespace {

constexpr double kFourPi = 4.0 * M_PI;

void check_rule(const RenormalizationMap& map, const SphericalBasis& basis,
                const SphericalQuadrature& rule, int extra,
                const char* caller) {
  const int needed = basis.N * (map_degree(map) + 1) + extra;
  if (rule.exactness < needed)
    throw std::invalid_argument(std::string(caller) +
                                ": rule exactness " +
                                std::to_string(rule.exactness) +
                                " below required " + std::to_string(needed));
}

Eigen::VectorXd apply_map(const RenormalizationMap& map,
                          const Eigen::VectorXd& g) {
  Eigen::VectorXd out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = map.p(g[i]);
  return out;
}

Eigen::VectorXd apply_map_derivative(const RenormalizationMap& map,
                                     const Eigen::VectorXd& g) {
  Eigen::VectorXd out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = map.dp(g[i]);
  return out;
}

}  // namespace

int map_degree(const RenormalizationMap& map) {
  return static_cast<int>(trim_exact_zeros(map.p).degree());
}

int required_exactness(int N, int degree) { return N * (degree + 1) + 2; }

MomentVector moments_of(const RenormalizationMap& map,
                        const EntropicVariables& lambda,
                        const SphericalBasis& basis,
                        const SphericalQuadrature& rule) {
  check_rule(map, basis, rule, 0, "moments_of");
  if (lambda.size() != basis.size())
    throw std::invalid_argument("moments_of: lambda length mismatch");
  const Eigen::MatrixXd phi = evaluate_basis(basis, rule);
  const Eigen::VectorXd values = apply_map(map, phi * lambda);
  return phi.transpose() * (rule.weights.cwiseProduct(values));
}

FluxAndCollision flux_and_collision_moments(const RenormalizationMap& map,
                                            const EntropicVariables& lambda,
                                            const SphericalBasis& basis,
                                            const SphericalQuadrature& rule,
                                            double sigma) {
  check_rule(map, basis, rule, 1, "flux_and_collision_moments");
  if (sigma < 0.0)
    throw std::invalid_argument(
        "flux_and_collision_moments: sigma must be >= 0");
  const Eigen::MatrixXd phi = evaluate_basis(basis, rule);
  const Eigen::VectorXd values = apply_map(map, phi * lambda);
  const Eigen::VectorXd weighted = rule.weights.cwiseProduct(values);

  FluxAndCollision out;
  out.flux.resize(basis.size(), 3);
  for (int d = 0; d < 3; ++d)
    out.flux.col(d) =
        phi.transpose() *
        (weighted.cwiseProduct(rule.nodes.row(d).transpose()));

  // L[I] = sigma ((1/4pi) integral I - I); its moments follow by quadrature
  // of m_i against that expression.
  const double mean = weighted.sum() / kFourPi;
  const Eigen::VectorXd deviation =
      rule.weights.cwiseProduct((mean - values.array()).matrix());
  out.collision = sigma * (phi.transpose() * deviation);
  return out;
}

Eigen::MatrixXd inversion_jacobian(const RenormalizationMap& map,
                                   const EntropicVariables& lambda,
                                   const SphericalBasis& basis,
                                   const SphericalQuadrature& rule) {
  check_rule(map, basis, rule, 0, "inversion_jacobian");
  const Eigen::MatrixXd phi = evaluate_basis(basis, rule);
  const Eigen::VectorXd slope = apply_map_derivative(map, phi * lambda);
  return phi.transpose() *
         rule.weights.cwiseProduct(slope).asDiagonal() * phi;
}

double map_inverse(const RenormalizationMap& map, double y) {
  if (!std::isfinite(y))
    throw std::domain_error("map_inverse: non-finite value");
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && map.p(lo) > y; ++i) lo *= 2.0;
  for (int i = 0; i < 200 && map.p(hi) < y; ++i) hi *= 2.0;
  if (!(map.p(lo) <= y && y <= map.p(hi)))
    throw std::domain_error("map_inverse: value outside the map's range");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (map.p(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

InversionReport invert(const RenormalizationMap& map,
                       const MomentVector& U_target,
                       const SphericalBasis& basis,
                       const SphericalQuadrature& rule,
                       const InversionOptions& options,
                       const EntropicVariables& lambda0) {
  check_rule(map, basis, rule, 0, "invert");
  if (U_target.size() != basis.size())
    throw std::invalid_argument("invert: moment length mismatch");
  if (!U_target.allFinite())
    throw std::invalid_argument("invert: non-finite target moments");

  InversionReport report;
  EntropicVariables lambda;
  if (lambda0.size() == basis.size()) {
    lambda = lambda0;
  } else if (lambda0.size() != 0) {
    throw std::invalid_argument("invert: lambda0 length mismatch");
  } else {
    // Isotropic start: lambda = sqrt(4 pi) beta^{-1}(U_0 / sqrt(4 pi)) e_0
    // reproduces the zeroth moment exactly.
    lambda = EntropicVariables::Zero(basis.size());
    try {
      lambda[0] =
          std::sqrt(kFourPi) * map_inverse(map, U_target[0] / std::sqrt(kFourPi));
    } catch (const std::domain_error&) {
      report.lambda = lambda;
      report.status = InversionStatus::TargetOutOfRange;
      report.residual_norm = std::numeric_limits<double>::infinity();
      return report;
    }
  }

  const Eigen::MatrixXd phi = evaluate_basis(basis, rule);
  const auto residual = [&](const EntropicVariables& l) {
    return Eigen::VectorXd(
        phi.transpose() * rule.weights.cwiseProduct(apply_map(map, phi * l)) -
        U_target);
  };

  const double tol = options.tolerance * (1.0 + U_target.norm());
  Eigen::VectorXd r = residual(lambda);
  double rn = r.norm();
  Eigen::MatrixXd jacobian;
  report.status = InversionStatus::MaxIterationsReached;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (!std::isfinite(rn)) break;
    if (rn <= tol) {
      report.status = InversionStatus::Converged;
      break;
    }
    const Eigen::VectorXd slope = apply_map_derivative(map, phi * lambda);
    jacobian =
        phi.transpose() * rule.weights.cwiseProduct(slope).asDiagonal() * phi;
    Eigen::VectorXd step = jacobian.ldlt().solve(-r);
    if (!step.allFinite() ||
        (jacobian * step + r).norm() > 1e-6 * (rn + 1.0)) {
      Eigen::MatrixXd shifted = jacobian;
      shifted.diagonal().array() += 1e-12 * jacobian.trace();
      step = shifted.ldlt().solve(-r);
      if (!step.allFinite()) {
        report.status = InversionStatus::SingularJacobian;
        break;
      }
    }
    double s = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h) {
      const Eigen::VectorXd trial = lambda + s * step;
      const Eigen::VectorXd r_trial = residual(trial);
      const double rn_trial = r_trial.norm();
      if (std::isfinite(rn_trial) && rn_trial <= (1.0 - 1e-4 * s) * rn) {
        lambda = trial;
        r = r_trial;
        rn = rn_trial;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    report.iterations = iter + 1;
    if (!accepted) break;  // stalled line search; final status decided below
  }

  if (report.status == InversionStatus::MaxIterationsReached && rn <= tol)
    report.status = InversionStatus::Converged;
  report.lambda = lambda;
  report.residual_norm = rn;
  report.converged = report.status == InversionStatus::Converged;
  {
    const Eigen::VectorXd slope = apply_map_derivative(map, phi * lambda);
    const Eigen::MatrixXd j_final =
        phi.transpose() * rule.weights.cwiseProduct(slope).asDiagonal() * phi;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(
        j_final, Eigen::EigenvaluesOnly);
    report.jacobian_min_eigenvalue_estimate = eigs.eigenvalues().minCoeff();
  }
  return report;
}

std::function<double(const Eigen::Vector3d&)> reconstruct(
    const RenormalizationMap& map, const EntropicVariables& lambda,
    const SphericalBasis& basis) {
  if (lambda.size() != basis.size())
    throw std::invalid_argument("reconstruct: lambda length mismatch");
  const Polynomial p = map.p;
  return [p, lambda, basis](const Eigen::Vector3d& omega) {
    return p(lambda.dot(basis(omega)));
  };
}

double sphere_l2_distance(
    const std::function<double(const Eigen::Vector3d&)>& f,
    const std::function<double(const Eigen::Vector3d&)>& g,
    const SphericalQuadrature& rule) {
  double sum = 0.0;
  for (Eigen::Index q = 0; q < rule.size(); ++q) {
    const double d = f(rule.nodes.col(q)) - g(rule.nodes.col(q));
    sum += rule.weights[q] * d * d;
  }
  return std::sqrt(sum);
}

}  // namespace phiclosure
