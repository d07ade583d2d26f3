#pragma once

#include <Eigen/Core>

#include <functional>

#include "phiclosure/renorm.hpp"
#include "phiclosure/sphere.hpp"

namespace phiclosure {

/// Coefficient vectors of length (N+1)^2 against the orthonormal harmonic
/// basis: U holds moments of an intensity, lambda the dual variables inside
/// the reconstruction ansatz beta(lambda^T m(omega)). Both are plain vectors;
/// every operation takes the basis explicitly.
using MomentVector = Eigen::VectorXd;
using EntropicVariables = Eigen::VectorXd;

/// Exact degree of the map polynomial (trailing zeros trimmed).
int map_degree(const RenormalizationMap& map);

/// Quadrature degree covering every integrand this module forms for the
/// given basis/map pair: moments m beta(lambda^T m) have degree N + deg*N,
/// the inversion Jacobian m m^T beta'(...) degree 2N + (deg-1)*N, and the
/// flux adds one more; N*(deg+1) + 2 covers all three.
int required_exactness(int N, int degree);

/// U_i = sum_q w_q m_i(Omega_q) beta(lambda^T m(Omega_q)); exact when
/// rule.exactness >= N*(deg+1). Throws if the rule is too weak.
MomentVector moments_of(const RenormalizationMap& map,
                        const EntropicVariables& lambda,
                        const SphericalBasis& basis,
                        const SphericalQuadrature& rule);

struct FluxAndCollision {
  Eigen::Matrix<double, Eigen::Dynamic, 3> flux;  // column d: moments of
                                                  // Omega_d beta(lambda^T m)
  MomentVector collision;                         // moments of the
                                                  // isotropizing operator
};

/// Flux moments and collision moments sigma * (mean * integral(m_i) - U_i),
/// both by quadrature. Energy conservation makes the first collision entry
/// vanish up to roundoff.
FluxAndCollision flux_and_collision_moments(const RenormalizationMap& map,
                                            const EntropicVariables& lambda,
                                            const SphericalBasis& basis,
                                            const SphericalQuadrature& rule,
                                            double sigma);

/// d moments / d lambda = sum_q w_q m m^T beta'(lambda^T m), symmetric
/// positive semidefinite for monotone maps.
Eigen::MatrixXd inversion_jacobian(const RenormalizationMap& map,
                                   const EntropicVariables& lambda,
                                   const SphericalBasis& basis,
                                   const SphericalQuadrature& rule);

/// Preimage of y under the monotone map polynomial by bracketed bisection.
/// Throws std::domain_error if no bracket exists (y outside the range).
double map_inverse(const RenormalizationMap& map, double y);

enum class InversionStatus {
  Converged,
  MaxIterationsReached,
  SingularJacobian,
  TargetOutOfRange,
};

struct InversionOptions {
  double tolerance = 1e-9;  // scaled by (1 + ||U_target||)
  int max_iterations = 100;
  int max_halvings = 40;
};

struct InversionReport {
  EntropicVariables lambda;
  int iterations = 0;
  double residual_norm = 0.0;
  double jacobian_min_eigenvalue_estimate = 0.0;
  bool converged = false;
  InversionStatus status = InversionStatus::MaxIterationsReached;
};

/// Damped Newton on R(lambda) = moments_of(lambda) - U_target with the
/// exactly integrated Jacobian; steps come from a symmetric solve with a
/// Tikhonov shift 1e-12 * trace when the plain factorization is unreliable.
/// Default start is the isotropic state matching U_target[0]; pass a
/// non-empty lambda0 to override. Non-convergence is reported in the status,
/// not thrown.
InversionReport invert(const RenormalizationMap& map,
                       const MomentVector& U_target,
                       const SphericalBasis& basis,
                       const SphericalQuadrature& rule,
                       const InversionOptions& options = {},
                       const EntropicVariables& lambda0 = EntropicVariables());

/// The reconstruction omega -> beta(lambda^T m(omega)).
std::function<double(const Eigen::Vector3d&)> reconstruct(
    const RenormalizationMap& map, const EntropicVariables& lambda,
    const SphericalBasis& basis);

/// Quadrature estimate of the L2(S^2) distance between two functions.
double sphere_l2_distance(const std::function<double(const Eigen::Vector3d&)>& f,
                          const std::function<double(const Eigen::Vector3d&)>& g,
                          const SphericalQuadrature& rule);

}  // namespace phiclosure
