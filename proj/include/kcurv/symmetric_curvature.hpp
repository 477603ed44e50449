#pragma once

// Elementary symmetric functions S_k, the normalized root f = (S_k/C(n,k))^(1/k)
// and membership in the Garding cone Gamma_k = {S_1 > 0, ..., S_k > 0}.

#include "kcurv/core.hpp"

#include <cmath>
#include <string>

namespace kcurv {

using EigenTuple = Eigen::VectorXd;

struct ConeReport {
  int k = 0;
  bool member = false;
  Eigen::VectorXd sigma_values;  // S_1 .. S_k
};

inline double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

inline void check_order(Index n, int k) {
  if (n < 1 || k < 1 || k > n)
    throw DomainError("curvature order k=" + std::to_string(k) + " outside 1.." +
                      std::to_string(n));
}

/// S_0 .. S_k of the entries of `lambda`, by the product recursion on the
/// coefficients of prod_i (1 + lambda_i x).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
elementary_symmetric_all(const Eigen::MatrixBase<Derived>& lambda, int k) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(k + 1);
  e(0) = Scalar(1);
  for (Index i = 0; i < lambda.size(); ++i) {
    const Index top = std::min<Index>(i + 1, k);
    for (Index j = top; j >= 1; --j) e(j) += lambda(i) * e(j - 1);
  }
  return e;
}

template <typename Derived>
typename Derived::Scalar elementary_symmetric(const Eigen::MatrixBase<Derived>& lambda,
                                              int k) {
  check_order(lambda.size(), k);
  return elementary_symmetric_all(lambda, k)(k);
}

/// S_1 .. S_k of the eigenvalues of a square matrix, via Newton's identities on
/// the power sums tr(M^j). Smooth in M even where eigenvalues coincide.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
matrix_symmetric_functions(const Eigen::MatrixBase<Derived>& m, int k) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  check_order(m.rows(), k);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> power_sums(k + 1);
  Mat power = m;
  for (int j = 1; j <= k; ++j) {
    power_sums(j) = power.trace();
    if (j < k) power = (power * m).eval();
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e(k + 1);
  e(0) = Scalar(1);
  for (int q = 1; q <= k; ++q) {
    Scalar acc(0);
    for (int i = 1; i <= q; ++i) {
      const Scalar term = e(q - i) * power_sums(i);
      if (i % 2 == 1)
        acc += term;
      else
        acc -= term;
    }
    e(q) = acc / double(q);
  }
  return e.tail(k);
}

/// Strict membership test; a zero S_j counts as outside the open cone.
inline ConeReport in_gamma_k(const EigenTuple& lambda, int k) {
  check_order(lambda.size(), k);
  ConeReport report;
  report.k = k;
  report.sigma_values = elementary_symmetric_all(lambda, k).tail(k);
  report.member = (report.sigma_values.array() > 0.0).all();
  return report;
}

/// f from precomputed S_1..S_k. Caller guarantees cone membership.
template <typename Scalar>
Scalar normalized_root_from_sigmas(const Scalar& sigma_k, int n, int k) {
  using std::pow;
  const Scalar h = sigma_k / binomial(n, k);
  if (k == 1) return h;
  if (k == 2) {
    using std::sqrt;
    return sqrt(h);
  }
  return pow(h, 1.0 / k);
}

inline double normalized_root(const EigenTuple& lambda, int k) {
  const ConeReport cone = in_gamma_k(lambda, k);
  if (!cone.member) throw AdmissibilityError("eigenvalues outside Gamma_" + std::to_string(k));
  return normalized_root_from_sigmas(cone.sigma_values(k - 1), int(lambda.size()), k);
}

/// Analytic gradient: df/dlambda_i = f^(1-k) S_{k-1}(lambda|i) / (k C(n,k)).
inline EigenTuple grad_f(const EigenTuple& lambda, int k) {
  const double f = normalized_root(lambda, k);
  const Index n = lambda.size();
  const double scale = std::pow(f, 1 - k) / (k * binomial(int(n), k));
  EigenTuple grad(n);
  EigenTuple rest(n - 1);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0, m = 0; j < n; ++j)
      if (j != i) rest(m++) = lambda(j);
    const double s = (k == 1) ? 1.0 : elementary_symmetric_all(rest, k - 1)(k - 1);
    grad(i) = scale * s;
  }
  return grad;
}

}  // namespace kcurv
