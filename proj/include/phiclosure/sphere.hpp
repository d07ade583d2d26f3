#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>

namespace phiclosure {

/// Real spherical harmonics Y_{l,m} up to degree N, orthonormal on the unit
/// sphere. Ordering is l-major with m ascending from -l to l, so entry
/// l*l + l + m holds Y_{l,m}. The convention is Condon-Shortley-free:
///   Y_{l,0}  = Q_l^0(cos theta)
///   Y_{l,m}  = sqrt(2) Q_l^m(cos theta) cos(m phi)   (m > 0)
///   Y_{l,-m} = sqrt(2) Q_l^m(cos theta) sin(m phi)   (m > 0)
/// with Q_l^m the orthonormalized associated Legendre functions. The first
/// entry is the constant 1/sqrt(4 pi).
struct SphericalBasis {
  int N = 0;

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(N + 1) * (N + 1);
  }
  static Eigen::Index index(int l, int m) {
    return static_cast<Eigen::Index>(l) * l + l + m;
  }

  /// Evaluates the full basis vector m(omega). omega must be unit length.
  Eigen::VectorXd operator()(const Eigen::Vector3d& omega) const;
};

SphericalBasis build_basis(int N);

/// Nodes (columns, unit vectors) and positive weights summing to 4 pi.
/// exactness is the guaranteed algebraic degree: sums reproduce integrals of
/// every polynomial in (x, y, z) of total degree <= exactness exactly.
struct SphericalQuadrature {
  Eigen::Matrix3Xd nodes;
  Eigen::VectorXd weights;
  int exactness = 0;
  std::string provenance;

  Eigen::Index size() const { return weights.size(); }
};

/// Tensor product of Gauss-Legendre in cos(theta) with a uniform rule in
/// azimuth: ceil((d+1)/2) polar nodes and d+1 azimuthal nodes give exactness
/// d for any d >= 0.
SphericalQuadrature product_quadrature(int exactness);

/// Loads a Lebedev rule from the standard distributed text format: one node
/// per line as "theta phi weight", angles in degrees with theta the azimuth
/// and phi the colatitude, weights normalized to sum 1 (rescaled to 4 pi
/// here). The file does not carry the rule's algebraic degree, so the caller
/// declares it; provenance records the source path.
SphericalQuadrature load_lebedev_rule(const std::string& path,
                                      int declared_exactness);

double integrate(const SphericalQuadrature& rule,
                 const std::function<double(const Eigen::Vector3d&)>& f);

/// Rows are m(node)^T: a size(rule) x size(basis) matrix, the discrete
/// evaluation operator shared by all moment computations.
Eigen::MatrixXd evaluate_basis(const SphericalBasis& basis,
                               const SphericalQuadrature& rule);

/// Moments of the rotated function omega -> I(R^T omega) given the moments U
/// of the band-limited I = U^T m. Computed by exact quadrature of degree 2N
/// rather than Wigner matrices. R must be a rotation (orthogonal,
/// determinant +1, checked to 1e-10).
Eigen::VectorXd rotate_basis_moments(const Eigen::VectorXd& U,
                                     const Eigen::Matrix3d& R,
                                     const SphericalBasis& basis);

}  // namespace phiclosure
