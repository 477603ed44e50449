#pragma once

// Runtime checks of the a priori bounds (C^0, tilt, curvature and cone
// membership) and discrete residuals of the height/tilt identities
//   Hess eta = tau A - eta g,
//   grad tau = A(grad eta),
//   Hess tau = (nabla A)(grad eta) + tau A^2 - eta A,
// plus the Codazzi symmetry of nabla A, all taken with the Levi-Civita
// connection of the induced metric.

#include "kcurv/graph_geometry.hpp"
#include "kcurv/prescription.hpp"

#include <vector>

namespace kcurv {

struct BoundReport {
  bool c0_ok = true;
  double min_u = 0.0;
  double max_u = 0.0;
  double R1 = 0.0;
  double R2 = 0.0;

  bool tilt_ok = true;
  double max_tau = 0.0;
  double C_tau = 0.0;

  bool curv_ok = true;
  double max_A = 0.0;
  double C_A = 0.0;
  double min_cone_margin = 0.0;  // min over nodes and j <= k of S_j

  std::vector<Index> c0_violations;
  std::vector<Index> tilt_violations;
  std::vector<Index> curv_violations;

  bool all_ok() const { return c0_ok && tilt_ok && curv_ok; }
};

BoundReport check_bounds(const InducedGeometry& geom, const Field<double>& u,
                         const Barriers& barriers, double C_tau, double C_A, int k);

struct IdentityResiduals {
  double r_eta = 0.0;
  double r_tau1 = 0.0;
  double r_tau2 = 0.0;
  double codazzi = 0.0;
  double h = 0.0;
};

/// Sup-norms over nodes of the largest coordinate component of each residual.
/// Throws SpacelikeError when the graph is not spacelike.
IdentityResiduals identity_residuals(const Field<double>& u, const SphereGrid& grid);

/// min over nodes of sum_i f_i lambda_i^2 - f^2; throws AdmissibilityError if
/// some node is outside Gamma_k.
double maclaurin_monitor(const InducedGeometry& geom, int k);

}  // namespace kcurv
