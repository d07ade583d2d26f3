#include "phiclosure/sphere.hpp"

#include <Eigen/LU>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "phiclosure/quadrature1d.hpp"

namespace phiclosure {
namespace {

constexpr double kFourPi = 4.0 * M_PI;

}  // namespace

Eigen::VectorXd SphericalBasis::operator()(const Eigen::Vector3d& omega) const {
  const double ct = omega.z();
  const double st = std::hypot(omega.x(), omega.y());
  // Azimuth is undefined at the poles, where every m != 0 harmonic carries a
  // sin(theta)^m factor and vanishes anyway; (cp, sp) = (1, 0) avoids 0/0.
  double cp = 1.0, sp = 0.0;
  if (st > 0.0) {
    cp = omega.x() / st;
    sp = omega.y() / st;
  }

  Eigen::VectorXd out(size());
  const double sqrt2 = std::sqrt(2.0);
  double qmm = 1.0 / std::sqrt(kFourPi);  // Q_m^m, updated per diagonal step
  double cm = 1.0, sm = 0.0;              // cos(m phi), sin(m phi)
  for (int m = 0; m <= N; ++m) {
    if (m > 0) {
      qmm *= st * std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      const double c = cm * cp - sm * sp;
      const double s = sm * cp + cm * sp;
      cm = c;
      sm = s;
    }
    // Ascend in l at fixed m: Q_l^m = a (ct Q_{l-1}^m - b Q_{l-2}^m) with the
    // orthonormal three-term coefficients; b vanishes at l = m + 1.
    double q_prev = 0.0;
    double q = qmm;
    for (int l = m; l <= N; ++l) {
      if (m == 0) {
        out[index(l, 0)] = q;
      } else {
        out[index(l, m)] = sqrt2 * q * cm;
        out[index(l, -m)] = sqrt2 * q * sm;
      }
      const double lp = l + 1.0;
      const double a = std::sqrt((4.0 * lp * lp - 1.0) / (lp * lp - m * m));
      const double b =
          std::sqrt(((lp - 1.0) * (lp - 1.0) - m * m) /
                    (4.0 * (lp - 1.0) * (lp - 1.0) - 1.0));
      const double q_next = a * (ct * q - b * q_prev);
      q_prev = q;
      q = q_next;
    }
  }
  return out;
}

SphericalBasis build_basis(int N) {
  if (N < 0) throw std::invalid_argument("build_basis: N must be >= 0");
  return SphericalBasis{N};
}

SphericalQuadrature product_quadrature(int exactness) {
  if (exactness < 0)
    throw std::invalid_argument("product_quadrature: exactness must be >= 0");
  const int n_theta = (exactness + 2) / 2;  // ceil((d+1)/2)
  const int n_phi = exactness + 1;
  const GaussLegendre polar = gauss_legendre(n_theta);

  SphericalQuadrature rule;
  rule.exactness = exactness;
  rule.nodes.resize(3, static_cast<Eigen::Index>(n_theta) * n_phi);
  rule.weights.resize(static_cast<Eigen::Index>(n_theta) * n_phi);
  const double w_phi = 2.0 * M_PI / n_phi;
  Eigen::Index q = 0;
  for (int i = 0; i < n_theta; ++i) {
    const double ct = polar.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * M_PI * j / n_phi;
      rule.nodes.col(q) =
          Eigen::Vector3d(st * std::cos(phi), st * std::sin(phi), ct);
      rule.weights[q] = polar.weights[i] * w_phi;
      ++q;
    }
  }
  rule.provenance = "product(gauss-legendre " + std::to_string(n_theta) +
                    " x uniform " + std::to_string(n_phi) + ")";
  return rule;
}

SphericalQuadrature load_lebedev_rule(const std::string& path,
                                      int declared_exactness) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("load_lebedev_rule: cannot open " + path);

  std::vector<Eigen::Vector3d> nodes;
  std::vector<double> weights;
  std::string line;
  int line_number = 0;
  const double deg = M_PI / 180.0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double theta, phi, weight;
    if (!(fields >> theta >> phi >> weight))
      throw std::runtime_error("load_lebedev_rule: parse failure at " + path +
                               ":" + std::to_string(line_number));
    const double st = std::sin(phi * deg);
    nodes.emplace_back(st * std::cos(theta * deg), st * std::sin(theta * deg),
                       std::cos(phi * deg));
    weights.push_back(weight);
  }
  if (nodes.empty())
    throw std::runtime_error("load_lebedev_rule: no nodes in " + path);

  double total = 0.0;
  for (double w : weights) total += w;
  if (std::abs(total - 1.0) > 1e-6)
    throw std::runtime_error(
        "load_lebedev_rule: weights sum to " + std::to_string(total) +
        ", expected 1 (file " + path + ")");

  SphericalQuadrature rule;
  rule.exactness = declared_exactness;
  rule.nodes.resize(3, static_cast<Eigen::Index>(nodes.size()));
  rule.weights.resize(static_cast<Eigen::Index>(nodes.size()));
  for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
    rule.nodes.col(q) = nodes[static_cast<std::size_t>(q)];
    rule.weights[q] = weights[static_cast<std::size_t>(q)] * kFourPi / total;
  }
  rule.provenance = "lebedev:" + path;
  return rule;
}

double integrate(const SphericalQuadrature& rule,
                 const std::function<double(const Eigen::Vector3d&)>& f) {
  double sum = 0.0;
  for (Eigen::Index q = 0; q < rule.size(); ++q)
    sum += rule.weights[q] * f(rule.nodes.col(q));
  return sum;
}

Eigen::MatrixXd evaluate_basis(const SphericalBasis& basis,
                               const SphericalQuadrature& rule) {
  Eigen::MatrixXd phi(rule.size(), basis.size());
  for (Eigen::Index q = 0; q < rule.size(); ++q)
    phi.row(q) = basis(rule.nodes.col(q)).transpose();
  return phi;
}

Eigen::VectorXd rotate_basis_moments(const Eigen::VectorXd& U,
                                     const Eigen::Matrix3d& R,
                                     const SphericalBasis& basis) {
  if (U.size() != basis.size())
    throw std::invalid_argument(
        "rotate_basis_moments: moment length does not match basis");
  if ((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() >
          1e-10 ||
      std::abs(R.determinant() - 1.0) > 1e-10)
    throw std::invalid_argument(
        "rotate_basis_moments: R is not a rotation matrix");

  // I = U^T m has degree N, so m_i(omega) I(R^T omega) has degree 2N and the
  // product rule below integrates it exactly.
  const SphericalQuadrature rule = product_quadrature(2 * basis.N);
  Eigen::VectorXd rotated = Eigen::VectorXd::Zero(basis.size());
  for (Eigen::Index q = 0; q < rule.size(); ++q) {
    const Eigen::Vector3d omega = rule.nodes.col(q);
    const double value = U.dot(basis(R.transpose() * omega));
    rotated += rule.weights[q] * value * basis(omega);
  }
  return rotated;
}

}  // namespace phiclosure
