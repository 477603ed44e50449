#pragma once

// Discrete residual Phi(u, t) = H_k^(1/k)(lambda[A(u)]) - psi_t(xi, u, tau(u)),
// its sparse Jacobian, damped Newton, and continuation in t from the umbilic
// start u = lambda with lambda cosh^p(lambda) = 1.

#include "kcurv/apriori_monitor.hpp"
#include "kcurv/graph_geometry.hpp"
#include "kcurv/prescription.hpp"
#include "kcurv/sphere_grid.hpp"

#include <Eigen/Sparse>

#include <optional>
#include <stdexcept>
#include <vector>

namespace kcurv {

struct SolverConfig {
  int k = 2;
  double p = 2.0;
  double tol_newton = 1e-10;
  int max_newton = 30;
  double dt_init = 0.1;
  double dt_min = 1e-3;
  double dt_max = 0.5;
  double dt_grow = 1.5;
  int fast_iterations = 4;  // grow dt when Newton needs at most this many steps
  double backtrack = 0.5;
  double min_step = 1e-4;
  double C_tau = 50.0;
  double C_A = 50.0;
  int jacobian_check_every = 10;

  /// Throws DomainError on inconsistent settings.
  void validate() const;
};

/// Newton-step rejection reasons are carried per node.
struct ResidualEval {
  Field<double> values;
  std::vector<Index> non_spacelike;
  std::vector<Index> inadmissible;
  std::vector<Index> non_positive;
  bool ok() const { return non_spacelike.empty() && inadmissible.empty() && non_positive.empty(); }
  double sup_norm() const { return values.cwiseAbs().maxCoeff(); }
};

struct LinearizedOperator {
  Eigen::SparseMatrix<double> matrix;
  /// Smallest eigenvalue of the principal coefficient a^ij over admissible nodes.
  double min_ellipticity = 0.0;
};

/// Pointwise operator F = H_k^(1/k) of the shape operator and its admissibility.
template <typename Scalar>
struct NodeOperator {
  bool spacelike = false;
  bool admissible = false;
  Scalar value;
  Scalar tau;
};

template <typename Scalar>
NodeOperator<Scalar> node_operator(const Scalar& u, const SmallVec<Scalar>& du,
                                   const SmallMat<Scalar>& hess, const SmallMat<double>& sigma,
                                   const SmallMat<double>& sigma_inv, int k) {
  NodeOperator<Scalar> out;
  const PointGeometry<Scalar> pg = point_geometry(u, du, hess, sigma, sigma_inv);
  out.spacelike = pg.spacelike;
  if (!pg.spacelike) return out;
  out.tau = pg.tau;
  const SmallMat<Scalar> shape = pg.g_inv * pg.A;
  const auto sigmas = matrix_symmetric_functions(shape, k);
  out.admissible = true;
  for (Index j = 0; j < sigmas.size(); ++j)
    if (!(value_of(sigmas(j)) > 0.0)) out.admissible = false;
  if (!out.admissible) return out;
  out.value = normalized_root_from_sigmas(Scalar(sigmas(k - 1)), int(du.size()), k);
  return out;
}

/// The discretized equation on a fixed grid for a fixed target prescription.
class CurvatureProblem {
 public:
  CurvatureProblem(SphereGrid grid, int k, PrescriptionPtr target, double p);

  const SphereGrid& grid() const { return grid_; }
  int k() const { return k_; }
  double p() const { return p_; }
  const PrescriptionPtr& target() const { return target_; }
  HomotopyPrescription family(double t) const { return {target_, p_, t}; }

  /// Never throws on inadmissible states; rejected nodes are listed.
  ResidualEval evaluate(const Field<double>& u, double t) const;

  /// Residual field; throws SpacelikeError, AdmissibilityError or DomainError
  /// on a rejected state.
  Field<double> residual(const Field<double>& u, double t) const;

  /// Exact Jacobian of the discrete residual, assembled by forward-mode
  /// differentiation over a column coloring of the stencil footprint.
  LinearizedOperator jacobian(const Field<double>& u, double t) const;

  /// Principal coefficient a^ij = dF / d(Hess u)_ij at one node.
  SmallMat<double> principal_coefficient(const Field<double>& u, Index node) const;

  int color_count() const { return color_count_; }
  const std::vector<std::vector<Index>>& stencils() const { return stencils_; }

 private:
  template <typename Scalar>
  bool node_residual(const Field<Scalar>& u, Index node, const HomotopyPrescription& psi,
                     Scalar& out, int& failure) const;

  SphereGrid grid_;
  int k_;
  PrescriptionPtr target_;
  double p_;
  std::vector<Eigen::VectorXd> points_;
  std::vector<std::vector<Index>> stencils_;
  std::vector<int> color_;
  int color_count_ = 0;
};

/// Unique lambda in (0, 1) with lambda cosh^p(lambda) = 1, by bisection.
double initial_constant(double p);

/// Zeroth-order coefficient of the linearization at the umbilic start:
///   c = cosh^-2(u) - cosh^p(u) tanh(u) - u cosh^(p-2)(u)
///       - p cosh^(p-1)(u) u tanh(u) sinh(u),   u = initial_constant(p).
/// Throws std::logic_error if c >= 0.
double zeroth_coefficient_at_start(double p);

struct NewtonResult {
  Field<double> u;
  int iterations = 0;
  double residual_norm = 0.0;
  std::vector<double> history;  // residual sup-norm per iterate, starting with u0
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, NewtonResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const NewtonResult& best() const { return best_; }

 private:
  NewtonResult best_;
};

/// Damped Newton at fixed t. Trial iterates must be spacelike, admissible and
/// strictly reduce the residual sup-norm.
NewtonResult newton_solve(const CurvatureProblem& problem, const Field<double>& u0, double t,
                          const SolverConfig& config);

struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  double max_tau = 0.0;
  double max_A = 0.0;
};

struct HomotopyState {
  Field<double> u;
  double t = 0.0;
  double residual_norm = 0.0;
  int newton_iters = 0;
  BoundReport monitor;
  std::vector<StepRecord> step_history;
  std::vector<BoundReport> monitor_history;  // one per accepted step
  double max_jacobian_error = 0.0;           // worst periodic directional check
  int jacobian_checks = 0;
};

class ContinuationFailure : public std::runtime_error {
 public:
  ContinuationFailure(const std::string& what, HomotopyState partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const HomotopyState& partial() const { return partial_; }

 private:
  HomotopyState partial_;
};

/// Relative error of J v against a central difference of the residual.
double directional_jacobian_error(const CurvatureProblem& problem, const Field<double>& u,
                                  double t, const Field<double>& v, double eps = 1e-6);

/// Follows t from 0 to `t_end`. Every accepted state is checked against the
/// bound monitors; a violation counts as a failed step.
HomotopyState run_homotopy(const CurvatureProblem& problem, const SolverConfig& config,
                           const Barriers& barriers, double t_end = 1.0);

}  // namespace kcurv
