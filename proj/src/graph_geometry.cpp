#include "kcurv/graph_geometry.hpp"

#include <limits>

namespace kcurv {

namespace {

PointGeometry<double> geometry_at(const Field<double>& u, const SphereGrid& grid, Index node) {
  const NodeJet<double> jet = grid.jet(u, node);
  return point_geometry(jet.value, jet.d, grid.covariant_hessian_at(node, jet),
                        grid.sigma(node), grid.sigma_inv(node));
}

[[noreturn]] void throw_non_spacelike(const std::vector<Index>& nodes) {
  throw SpacelikeError("graph is not spacelike at " + std::to_string(nodes.size()) + " node(s)",
                       nodes);
}

}  // namespace

InducedGeometry compute_geometry(const Field<double>& u, const SphereGrid& grid) {
  const Index n = grid.size();
  InducedGeometry geom;
  geom.g.resize(n);
  geom.g_inv.resize(n);
  geom.A.resize(n);
  geom.shape_eigs.resize(n);
  geom.tau.resize(n);
  geom.eta.resize(n);
  for (Index i = 0; i < n; ++i) {
    PointGeometry<double> pg = geometry_at(u, grid, i);
    geom.g[i] = pg.g;
    geom.eta(i) = pg.eta;
    if (!pg.spacelike) {
      geom.spacelike = false;
      geom.non_spacelike.push_back(i);
      geom.tau(i) = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    geom.g_inv[i] = pg.g_inv;
    geom.A[i] = pg.A;
    geom.tau(i) = pg.tau;
    geom.shape_eigs[i] = shape_eigenvalues(pg.A, pg.g);
  }
  return geom;
}

MetricResult induced_metric(const Field<double>& u, const SphereGrid& grid) {
  MetricResult out;
  out.g.resize(grid.size());
  out.g_inv.resize(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    PointGeometry<double> pg = geometry_at(u, grid, i);
    out.g[i] = pg.g;
    if (pg.spacelike) {
      out.g_inv[i] = pg.g_inv;
    } else {
      out.spacelike = false;
      out.non_spacelike.push_back(i);
    }
  }
  return out;
}

TiltHeight tilt_and_height(const Field<double>& u, const SphereGrid& grid) {
  TiltHeight out{Eigen::VectorXd(grid.size()), Eigen::VectorXd(grid.size())};
  std::vector<Index> bad;
  for (Index i = 0; i < grid.size(); ++i) {
    PointGeometry<double> pg = geometry_at(u, grid, i);
    if (!pg.spacelike) {
      bad.push_back(i);
      continue;
    }
    out.tau(i) = pg.tau;
    out.eta(i) = pg.eta;
  }
  if (!bad.empty()) throw_non_spacelike(bad);
  return out;
}

std::vector<SmallMat<double>> second_fundamental_form(const Field<double>& u,
                                                      const SphereGrid& grid) {
  std::vector<SmallMat<double>> out(grid.size());
  std::vector<Index> bad;
  for (Index i = 0; i < grid.size(); ++i) {
    PointGeometry<double> pg = geometry_at(u, grid, i);
    if (!pg.spacelike)
      bad.push_back(i);
    else
      out[i] = pg.A;
  }
  if (!bad.empty()) throw_non_spacelike(bad);
  return out;
}

SmallMat<double> symmetrized_shape(const SmallMat<double>& A, const SmallMat<double>& g) {
  Eigen::LLT<SmallMat<double>> llt(g);
  if (llt.info() != Eigen::Success) throw SpacelikeError("metric is not positive definite");
  const SmallMat<double> L = llt.matrixL();
  // L^-1 A L^-T, symmetrized against round-off.
  SmallMat<double> left = L.triangularView<Eigen::Lower>().solve(A);
  SmallMat<double> m = L.triangularView<Eigen::Lower>().solve(left.transpose());
  return 0.5 * (m + m.transpose());
}

EigenTuple shape_eigenvalues(const SmallMat<double>& A, const SmallMat<double>& g) {
  const SmallMat<double> m = symmetrized_shape(A, g);
  if (m.rows() == 1) return EigenTuple::Constant(1, m(0, 0));
  Eigen::SelfAdjointEigenSolver<SmallMat<double>> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace kcurv
