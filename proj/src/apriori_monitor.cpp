#include "kcurv/apriori_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kcurv {

BoundReport check_bounds(const InducedGeometry& geom, const Field<double>& u,
                         const Barriers& barriers, double C_tau, double C_A, int k) {
  BoundReport report;
  report.R1 = barriers.R1;
  report.R2 = barriers.R2;
  report.C_tau = C_tau;
  report.C_A = C_A;
  report.min_u = u.minCoeff();
  report.max_u = u.maxCoeff();
  report.min_cone_margin = std::numeric_limits<double>::infinity();

  for (Index i = 0; i < u.size(); ++i) {
    if (u(i) < barriers.R1 || u(i) > barriers.R2) report.c0_violations.push_back(i);

    const double tau = geom.tau(i);
    if (!(tau <= C_tau)) report.tilt_violations.push_back(i);
    if (std::isfinite(tau)) report.max_tau = std::max(report.max_tau, tau);

    const EigenTuple& lambda = geom.shape_eigs[i];
    if (lambda.size() == 0) {
      report.curv_violations.push_back(i);
      report.min_cone_margin = -std::numeric_limits<double>::infinity();
      continue;
    }
    const ConeReport cone = in_gamma_k(lambda, k);
    const double norm_A = lambda.norm();
    report.max_A = std::max(report.max_A, norm_A);
    report.min_cone_margin = std::min(report.min_cone_margin, cone.sigma_values.minCoeff());
    if (!cone.member || !(norm_A <= C_A)) report.curv_violations.push_back(i);
  }
  report.c0_ok = report.c0_violations.empty();
  report.tilt_ok = report.tilt_violations.empty();
  report.curv_ok = report.curv_violations.empty();
  return report;
}

namespace {

using Mat = SmallMat<double>;

// Residuals are measured by their largest coordinate component. The
// orthonormal-frame norm divides theta components by powers of sin(phi) and
// is only first order on the pole rings of the latitude-longitude grid.
template <typename Derived>
double max_component(const Eigen::MatrixBase<Derived>& t) {
  return t.cwiseAbs().maxCoeff();
}

// Per-node partials d_k T_ij of a symmetric tensor field stored by component.
struct TensorPartials {
  // d[k](i, j)
  std::vector<std::array<Mat, 2>> d;
};

// Components are differenced in the orthonormal frame (d_phi, d_theta / sin phi)
// and mapped back with the product rule. Coordinate components such as T_theta_theta
// vanish like sin^2(phi) at the poles, and differencing them directly loses an
// order of accuracy on the pole rings. Frame components are even through the pole.
TensorPartials tensor_partials(const std::vector<Mat>& field, const SphereGrid& grid) {
  const int n = grid.dim();
  const Index size = grid.size();
  std::vector<SmallVec<double>> scale(size, SmallVec<double>::Ones(n));
  std::vector<SmallVec<double>> d_phi_scale(size, SmallVec<double>::Zero(n));
  if (n == 2)
    for (Index node = 0; node < size; ++node) {
      const double phi = grid.coordinates(node)(0);
      scale[node](1) = std::sin(phi);
      d_phi_scale[node](1) = std::cos(phi);
    }

  TensorPartials out;
  out.d.assign(size, {Mat::Zero(n, n), Mat::Zero(n, n)});
  Field<double> component(size);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      for (Index node = 0; node < size; ++node)
        component(node) = field[node](i, j) / (scale[node](i) * scale[node](j));
      for (Index node = 0; node < size; ++node) {
        const NodeJet<double> jet = grid.jet(component, node);
        const double s = scale[node](i) * scale[node](j);
        const double ds_phi =
            d_phi_scale[node](i) * scale[node](j) + scale[node](i) * d_phi_scale[node](j);
        for (int k = 0; k < n; ++k) {
          double v = s * jet.d(k);
          if (k == 0) v += ds_phi * jet.value;
          out.d[node][k](i, j) = v;
          out.d[node][k](j, i) = v;
        }
      }
    }
  return out;
}

}  // namespace

IdentityResiduals identity_residuals(const Field<double>& u, const SphereGrid& grid) {
  const InducedGeometry geom = compute_geometry(u, grid);
  if (!geom.spacelike)
    throw SpacelikeError("identity residuals need a spacelike graph", geom.non_spacelike);

  const int n = grid.dim();
  const Index size = grid.size();
  const TensorPartials dg = tensor_partials(geom.g, grid);
  const TensorPartials dA = tensor_partials(geom.A, grid);

  IdentityResiduals out;
  out.h = grid.spacing();
  for (Index node = 0; node < size; ++node) {
    const Mat& g = geom.g[node];
    const Mat& g_inv = geom.g_inv[node];
    const Mat& A = geom.A[node];
    const double tau = geom.tau(node);
    const double eta = geom.eta(node);

    // Gamma^k_ij of the induced metric.
    std::array<Mat, 2> gamma{Mat::Zero(n, n), Mat::Zero(n, n)};
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          for (int l = 0; l < n; ++l)
            v += 0.5 * g_inv(k, l) *
                 (dg.d[node][i](j, l) + dg.d[node][j](i, l) - dg.d[node][l](i, j));
          gamma[k](i, j) = v;
        }
    auto hessian = [&](const NodeJet<double>& jet) {
      Mat h = jet.dd;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) h(i, j) -= gamma[k](i, j) * jet.d(k);
      return h;
    };

    const NodeJet<double> eta_jet = grid.jet(geom.eta, node);
    const NodeJet<double> tau_jet = grid.jet(geom.tau, node);
    const SmallVec<double> grad_eta_up = g_inv * eta_jet.d;

    const Mat t_eta = hessian(eta_jet) - (tau * A - eta * g);
    out.r_eta = std::max(out.r_eta, max_component(t_eta));

    const SmallVec<double> t_tau1 = tau_jet.d - A * grad_eta_up;
    out.r_tau1 = std::max(out.r_tau1, max_component(t_tau1));

    // nabla_k A_ij
    std::array<Mat, 2> nabla_A{Mat::Zero(n, n), Mat::Zero(n, n)};
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = dA.d[node][k](i, j);
          for (int l = 0; l < n; ++l) v -= gamma[l](k, i) * A(l, j) + gamma[l](k, j) * A(i, l);
          nabla_A[k](i, j) = v;
        }
    Mat grad_A_eta = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k) grad_A_eta += nabla_A[k] * grad_eta_up(k);
    const Mat t_tau2 = hessian(tau_jet) - (grad_A_eta + tau * A * g_inv * A - eta * A);
    out.r_tau2 = std::max(out.r_tau2, max_component(t_tau2));

    // Codazzi: nabla_k A_ij is symmetric in all three indices.
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        out.codazzi = std::max(out.codazzi, max_component(nabla_A[a].row(b) - nabla_A[b].row(a)));
  }
  return out;
}

double maclaurin_monitor(const InducedGeometry& geom, int k) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < geom.shape_eigs.size(); ++i) {
    const EigenTuple& lambda = geom.shape_eigs[i];
    if (lambda.size() == 0 || !in_gamma_k(lambda, k).member)
      throw AdmissibilityError("node outside Gamma_" + std::to_string(k), {Index(i)});
    const double f = normalized_root(lambda, k);
    const EigenTuple grad = grad_f(lambda, k);
    worst = std::min(worst, grad.dot(lambda.cwiseAbs2()) - f * f);
  }
  return worst;
}

}  // namespace kcurv
