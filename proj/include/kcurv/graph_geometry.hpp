#pragma once

// Induced geometry of the graph {Y(u(xi), xi)} with
// Y(r, xi) = sinh(r) E_1 + cosh(r) xi inside de Sitter space.

#include "kcurv/sphere_grid.hpp"
#include "kcurv/symmetric_curvature.hpp"

#include <cmath>
#include <vector>

namespace kcurv {

/// Nodes with cosh^2(u) - |grad u|^2 <= kSpacelikeGuard * cosh^2(u) count as
/// not spacelike.
inline constexpr double kSpacelikeGuard = 1e-8;

template <typename Scalar>
struct PointGeometry {
  bool spacelike = false;
  Scalar tau;
  Scalar eta;
  SmallMat<Scalar> g;
  SmallMat<Scalar> g_inv;
  SmallMat<Scalar> A;
};

/// Geometry at one node from u, its partials and its covariant Hessian.
/// When the node is not spacelike only `g` and `eta` are filled.
template <typename Scalar>
PointGeometry<Scalar> point_geometry(const Scalar& u, const SmallVec<Scalar>& du,
                                     const SmallMat<Scalar>& hess,
                                     const SmallMat<double>& sigma,
                                     const SmallMat<double>& sigma_inv) {
  using std::cosh;
  using std::sinh;
  using std::sqrt;
  const Index n = du.size();
  PointGeometry<Scalar> out;
  const Scalar ch = cosh(u);
  const Scalar sh = sinh(u);
  const Scalar ch2 = ch * ch;
  const SmallVec<Scalar> raised = sigma_inv.template cast<Scalar>() * du;
  const Scalar grad_sq = du.dot(raised);
  const Scalar gap = ch2 - grad_sq;

  out.eta = sh;
  out.g = ch2 * sigma.template cast<Scalar>() - du * du.transpose();
  out.spacelike = value_of(gap) > kSpacelikeGuard * value_of(ch2);
  if (!out.spacelike) return out;

  out.tau = ch2 / sqrt(gap);
  const Scalar ch4 = ch2 * ch2;
  out.g_inv = (sigma_inv.template cast<Scalar>() +
               (out.tau * out.tau / ch4) * (raised * raised.transpose())) / ch2;
  const Scalar th = sh / ch;
  SmallMat<Scalar> bracket(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      bracket(i, j) = hess(i, j) - 2.0 * th * du(i) * du(j) + sh * ch * sigma(i, j);
  out.A = (out.tau / ch) * bracket;
  return out;
}

struct InducedGeometry {
  std::vector<SmallMat<double>> g;
  std::vector<SmallMat<double>> g_inv;
  std::vector<SmallMat<double>> A;
  Eigen::VectorXd tau;
  Eigen::VectorXd eta;
  std::vector<EigenTuple> shape_eigs;
  bool spacelike = true;
  std::vector<Index> non_spacelike;
};

struct MetricResult {
  std::vector<SmallMat<double>> g;
  std::vector<SmallMat<double>> g_inv;
  bool spacelike = true;
  std::vector<Index> non_spacelike;
};

/// Full geometry bundle. Non-spacelike nodes get NaN tilt and empty eigenvalues.
InducedGeometry compute_geometry(const Field<double>& u, const SphereGrid& grid);

MetricResult induced_metric(const Field<double>& u, const SphereGrid& grid);

struct TiltHeight {
  Eigen::VectorXd tau;
  Eigen::VectorXd eta;
};
/// Throws SpacelikeError naming the offending nodes.
TiltHeight tilt_and_height(const Field<double>& u, const SphereGrid& grid);

std::vector<SmallMat<double>> second_fundamental_form(const Field<double>& u,
                                                      const SphereGrid& grid);

/// L^-1 A L^-T where g = L L^T.
SmallMat<double> symmetrized_shape(const SmallMat<double>& A, const SmallMat<double>& g);

/// Principal curvatures in ascending order.
EigenTuple shape_eigenvalues(const SmallMat<double>& A, const SmallMat<double>& g);

}  // namespace kcurv
