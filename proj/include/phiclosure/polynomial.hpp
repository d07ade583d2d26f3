#pragma once

#include <Eigen/Core>

#include <initializer_list>
#include <utility>

namespace phiclosure {

/// Dense univariate polynomial with coefficients stored in ascending power
/// order: coeffs[k] multiplies x^k. The coefficient vector is never empty;
/// the zero polynomial is represented by a single zero coefficient.
///
/// Trailing zeros are preserved as-is. Code that needs the exact degree calls
/// trim_exact_zeros() itself; nothing here drops coefficients behind the
/// caller's back.
template <typename Scalar>
struct PolynomialT {
  using CoeffVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  CoeffVector coeffs = CoeffVector::Zero(1);

  PolynomialT() = default;

  explicit PolynomialT(CoeffVector c) : coeffs(std::move(c)) {
    if (coeffs.size() == 0) coeffs = CoeffVector::Zero(1);
  }

  PolynomialT(std::initializer_list<Scalar> c) {
    coeffs.resize(c.size() > 0 ? static_cast<Eigen::Index>(c.size()) : 1);
    coeffs.setZero();
    Eigen::Index i = 0;
    for (Scalar v : c) coeffs[i++] = v;
  }

  Eigen::Index degree() const { return coeffs.size() - 1; }

  /// Horner evaluation.
  Scalar operator()(Scalar x) const {
    Scalar r = coeffs[coeffs.size() - 1];
    for (Eigen::Index k = coeffs.size() - 2; k >= 0; --k) r = r * x + coeffs[k];
    return r;
  }

  /// Coefficient of x^k, zero beyond the stored degree.
  Scalar coeff(Eigen::Index k) const {
    return k < coeffs.size() ? coeffs[k] : Scalar(0);
  }
};

using Polynomial = PolynomialT<double>;

template <typename Scalar>
Scalar eval(const PolynomialT<Scalar>& p, Scalar x) {
  return p(x);
}

template <typename Scalar>
PolynomialT<Scalar> derivative(const PolynomialT<Scalar>& p) {
  if (p.coeffs.size() == 1) return PolynomialT<Scalar>{};
  typename PolynomialT<Scalar>::CoeffVector d(p.coeffs.size() - 1);
  for (Eigen::Index k = 1; k < p.coeffs.size(); ++k)
    d[k - 1] = Scalar(k) * p.coeffs[k];
  return PolynomialT<Scalar>(std::move(d));
}

/// Antiderivative with the given value at x = 0.
template <typename Scalar>
PolynomialT<Scalar> antiderivative(const PolynomialT<Scalar>& p,
                                   Scalar constant = Scalar(0)) {
  typename PolynomialT<Scalar>::CoeffVector q(p.coeffs.size() + 1);
  q[0] = constant;
  for (Eigen::Index k = 0; k < p.coeffs.size(); ++k)
    q[k + 1] = p.coeffs[k] / Scalar(k + 1);
  return PolynomialT<Scalar>(std::move(q));
}

template <typename Scalar>
PolynomialT<Scalar> operator+(const PolynomialT<Scalar>& p,
                              const PolynomialT<Scalar>& q) {
  const Eigen::Index n = std::max(p.coeffs.size(), q.coeffs.size());
  typename PolynomialT<Scalar>::CoeffVector r =
      PolynomialT<Scalar>::CoeffVector::Zero(n);
  r.head(p.coeffs.size()) = p.coeffs;
  r.head(q.coeffs.size()) += q.coeffs;
  return PolynomialT<Scalar>(std::move(r));
}

template <typename Scalar>
PolynomialT<Scalar> operator-(const PolynomialT<Scalar>& p,
                              const PolynomialT<Scalar>& q) {
  return p + (Scalar(-1) * q);
}

template <typename Scalar>
PolynomialT<Scalar> operator*(Scalar s, const PolynomialT<Scalar>& p) {
  return PolynomialT<Scalar>(typename PolynomialT<Scalar>::CoeffVector(
      s * p.coeffs));
}

template <typename Scalar>
PolynomialT<Scalar> operator*(const PolynomialT<Scalar>& p, Scalar s) {
  return s * p;
}

/// Full convolution product.
template <typename Scalar>
PolynomialT<Scalar> operator*(const PolynomialT<Scalar>& p,
                              const PolynomialT<Scalar>& q) {
  typename PolynomialT<Scalar>::CoeffVector r =
      PolynomialT<Scalar>::CoeffVector::Zero(p.coeffs.size() +
                                             q.coeffs.size() - 1);
  for (Eigen::Index i = 0; i < p.coeffs.size(); ++i)
    for (Eigen::Index j = 0; j < q.coeffs.size(); ++j)
      r[i + j] += p.coeffs[i] * q.coeffs[j];
  return PolynomialT<Scalar>(std::move(r));
}

/// Drops trailing coefficients that are exactly zero. Threshold is exact by
/// contract; epsilon-trimming would corrupt downstream Jacobian shapes.
template <typename Scalar>
PolynomialT<Scalar> trim_exact_zeros(const PolynomialT<Scalar>& p) {
  Eigen::Index d = p.coeffs.size() - 1;
  while (d > 0 && p.coeffs[d] == Scalar(0)) --d;
  return PolynomialT<Scalar>(
      typename PolynomialT<Scalar>::CoeffVector(p.coeffs.head(d + 1)));
}

/// Re-expands sum_k alpha[k] (x - x0)^k into the monomial basis by synthetic
/// (Horner) composition with x - x0.
template <typename Scalar>
PolynomialT<Scalar> from_taylor_coefficients(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& alpha, Scalar x0) {
  PolynomialT<Scalar> shift{-x0, Scalar(1)};
  PolynomialT<Scalar> r{alpha.size() > 0 ? alpha[alpha.size() - 1] : Scalar(0)};
  for (Eigen::Index k = alpha.size() - 2; k >= 0; --k) {
    r = r * shift;
    r.coeffs[0] += alpha[k];
  }
  return r;
}

}  // namespace phiclosure
