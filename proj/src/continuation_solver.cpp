#include "kcurv/continuation_solver.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace kcurv {

namespace {

enum Failure { kOk = 0, kNotSpacelike = 1, kInadmissible = 2, kNonPositive = 3 };

/// Smooth, non-symmetric probe direction used by the periodic Jacobian check.
Field<double> smooth_probe(const SphereGrid& grid) {
  Field<double> v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd x = grid.point(i);
    v(i) = 1.0 + 0.7 * x(0) + 0.4 * x(0) * x(x.size() - 1);
  }
  return v;
}

}  // namespace

void SolverConfig::validate() const {
  if (k < 1) throw DomainError("k must be >= 1");
  if (!(p >= 1.0)) throw DomainError("reference power p must be >= 1");
  if (!(tol_newton > 0.0)) throw DomainError("tol_newton must be positive");
  if (max_newton < 1) throw DomainError("max_newton must be >= 1");
  if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max && dt_max <= 1.0))
    throw DomainError("need 0 < dt_min <= dt_init <= dt_max <= 1");
  if (!(dt_grow >= 1.0)) throw DomainError("dt_grow must be >= 1");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw DomainError("backtrack must lie in (0, 1)");
  if (!(min_step > 0.0 && min_step <= 1.0)) throw DomainError("min_step must lie in (0, 1]");
  if (!(C_tau >= 1.0)) throw DomainError("C_tau must be >= 1");
  if (!(C_A > 0.0)) throw DomainError("C_A must be positive");
  if (jacobian_check_every < 0) throw DomainError("jacobian_check_every must be >= 0");
}

CurvatureProblem::CurvatureProblem(SphereGrid grid, int k, PrescriptionPtr target, double p)
    : grid_(std::move(grid)), k_(k), target_(std::move(target)), p_(p) {
  check_order(grid_.dim(), k_);
  if (!target_) throw DomainError("missing target prescription");
  if (!(p_ >= 1.0)) throw DomainError("reference power p must be >= 1");

  const Index n = grid_.size();
  points_.reserve(n);
  stencils_.reserve(n);
  for (Index i = 0; i < n; ++i) {
    points_.push_back(grid_.point(i));
    stencils_.push_back(grid_.stencil(i));
  }

  // Greedy distance-2 coloring: columns sharing a row get distinct colors.
  std::vector<std::vector<Index>> rows_of(n);
  for (Index row = 0; row < n; ++row)
    for (Index col : stencils_[row]) rows_of[col].push_back(row);
  color_.assign(n, -1);
  std::vector<int> seen;
  for (Index col = 0; col < n; ++col) {
    seen.assign(color_count_ + 1, 0);
    for (Index row : rows_of[col])
      for (Index other : stencils_[row])
        if (color_[other] >= 0) seen[color_[other]] = 1;
    int c = 0;
    while (seen[c]) ++c;
    color_[col] = c;
    color_count_ = std::max(color_count_, c + 1);
  }
}

template <typename Scalar>
bool CurvatureProblem::node_residual(const Field<Scalar>& u, Index node,
                                     const HomotopyPrescription& psi, Scalar& out,
                                     int& failure) const {
  const NodeJet<Scalar> jet = grid_.jet(u, node);
  const SmallMat<Scalar> hess = grid_.covariant_hessian_at(node, jet);
  const NodeOperator<Scalar> op =
      node_operator(jet.value, jet.d, hess, grid_.sigma(node), grid_.sigma_inv(node), k_);
  if (!op.spacelike) {
    failure = kNotSpacelike;
    return false;
  }
  if (!op.admissible) {
    failure = kInadmissible;
    return false;
  }
  const double u_value = value_of(jet.value);
  if (!(u_value > 0.0)) {
    failure = kNonPositive;
    return false;
  }
  const PsiJet pj = psi.eval(points_[node], u_value, value_of(op.tau));
  out = op.value - chain(pj.value, pj.d_r, pj.d_tau, jet.value, op.tau);
  failure = kOk;
  return true;
}

ResidualEval CurvatureProblem::evaluate(const Field<double>& u, double t) const {
  const HomotopyPrescription psi = family(t);
  ResidualEval eval;
  eval.values.resize(grid_.size());
  for (Index i = 0; i < grid_.size(); ++i) {
    double r = 0.0;
    int failure = kOk;
    if (node_residual(u, i, psi, r, failure)) {
      eval.values(i) = r;
      continue;
    }
    eval.values(i) = std::numeric_limits<double>::quiet_NaN();
    if (failure == kNotSpacelike) eval.non_spacelike.push_back(i);
    if (failure == kInadmissible) eval.inadmissible.push_back(i);
    if (failure == kNonPositive) eval.non_positive.push_back(i);
  }
  return eval;
}

Field<double> CurvatureProblem::residual(const Field<double>& u, double t) const {
  ResidualEval eval = evaluate(u, t);
  if (!eval.non_positive.empty())
    throw DomainError("graph function must be positive (" +
                      std::to_string(eval.non_positive.size()) + " node(s) violate u > 0)");
  if (!eval.non_spacelike.empty())
    throw SpacelikeError("graph is not spacelike", eval.non_spacelike);
  if (!eval.inadmissible.empty())
    throw AdmissibilityError("shape operator leaves Gamma_" + std::to_string(k_),
                             eval.inadmissible);
  return std::move(eval.values);
}

SmallMat<double> CurvatureProblem::principal_coefficient(const Field<double>& u,
                                                         Index node) const {
  const int n = grid_.dim();
  const NodeJet<double> jet = grid_.jet(u, node);
  const SmallMat<double> hess = grid_.covariant_hessian_at(node, jet);
  const Dual u_d(jet.value, Eigen::Matrix<double, 1, 1>::Zero());
  SmallVec<Dual> du_d(n);
  for (int i = 0; i < n; ++i) du_d(i) = Dual(jet.d(i), Eigen::Matrix<double, 1, 1>::Zero());

  SmallMat<double> a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      SmallMat<Dual> hess_d(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          const double seed = ((r == i && c == j) || (r == j && c == i)) ? 1.0 : 0.0;
          hess_d(r, c) = Dual(hess(r, c), Eigen::Matrix<double, 1, 1>::Constant(seed));
        }
      const NodeOperator<Dual> op =
          node_operator(u_d, du_d, hess_d, grid_.sigma(node), grid_.sigma_inv(node), k_);
      if (!op.spacelike || !op.admissible)
        throw AdmissibilityError("principal coefficient needs an admissible node", {node});
      const double d = op.value.derivatives()(0);
      a(i, j) = (i == j) ? d : 0.5 * d;
      a(j, i) = a(i, j);
    }
  return a;
}

LinearizedOperator CurvatureProblem::jacobian(const Field<double>& u, double t) const {
  const HomotopyPrescription psi = family(t);
  const Index n = grid_.size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n * 9);

  Field<Dual> seeded(n);
  for (int c = 0; c < color_count_; ++c) {
    for (Index i = 0; i < n; ++i)
      seeded(i) = Dual(u(i), Eigen::Matrix<double, 1, 1>::Constant(color_[i] == c ? 1.0 : 0.0));
    for (Index row = 0; row < n; ++row) {
      Index col = -1;
      for (Index m : stencils_[row])
        if (color_[m] == c) col = m;
      if (col < 0) continue;
      Dual r;
      int failure = kOk;
      if (!node_residual(seeded, row, psi, r, failure))
        throw AdmissibilityError("Jacobian requested at a rejected state", {row});
      triplets.emplace_back(row, col, r.derivatives()(0));
    }
  }

  LinearizedOperator op;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();

  op.min_ellipticity = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const SmallMat<double> a = principal_coefficient(u, i);
    Eigen::SelfAdjointEigenSolver<SmallMat<double>> eig(a, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().minCoeff();
    if (!(smallest > 0.0))
      throw std::logic_error("principal coefficient not elliptic at admissible node " +
                             std::to_string(i));
    op.min_ellipticity = std::min(op.min_ellipticity, smallest);
  }
  return op;
}

double initial_constant(double p) {
  if (!(p >= 1.0)) throw DomainError("initial_constant needs p >= 1");
  auto phi = [p](double x) { return x * std::pow(std::cosh(x), p) - 1.0; };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (phi(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::abs(phi(lo)) < std::abs(phi(hi)) ? lo : hi;
}

double zeroth_coefficient_at_start(double p) {
  const double u = initial_constant(p);
  const double ch = std::cosh(u);
  const double sh = std::sinh(u);
  const double th = std::tanh(u);
  const double c = 1.0 / (ch * ch) - std::pow(ch, p) * th - u * std::pow(ch, p - 2.0) -
                   p * std::pow(ch, p - 1.0) * u * th * sh;
  if (!(c < 0.0))
    throw std::logic_error("zeroth-order coefficient at the umbilic start is not negative");
  return c;
}

NewtonResult newton_solve(const CurvatureProblem& problem, const Field<double>& u0, double t,
                          const SolverConfig& config) {
  NewtonResult result;
  result.u = u0;
  ResidualEval current = problem.evaluate(u0, t);
  if (!current.ok()) {
    result.residual_norm = std::numeric_limits<double>::infinity();
    throw NonConvergence("Newton start is not an admissible spacelike graph", result);
  }
  double norm = current.sup_norm();
  result.residual_norm = norm;
  result.history.push_back(norm);

  while (norm > config.tol_newton) {
    if (result.iterations >= config.max_newton)
      throw NonConvergence("Newton iteration cap reached", result);

    const LinearizedOperator jac = problem.jacobian(result.u, t);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(jac.matrix);
    if (lu.info() != Eigen::Success) throw NonConvergence("singular Jacobian", result);
    const Field<double> delta = lu.solve(-current.values);
    if (lu.info() != Eigen::Success || !delta.allFinite())
      throw NonConvergence("linear solve failed", result);

    bool accepted = false;
    for (double alpha = 1.0; alpha >= config.min_step; alpha *= config.backtrack) {
      Field<double> trial = result.u + alpha * delta;
      ResidualEval eval = problem.evaluate(trial, t);
      if (eval.ok() && eval.sup_norm() < norm) {
        result.u = std::move(trial);
        current = std::move(eval);
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NonConvergence("line search stalled", result);
    norm = current.sup_norm();
    ++result.iterations;
    result.residual_norm = norm;
    result.history.push_back(norm);
  }
  return result;
}

double directional_jacobian_error(const CurvatureProblem& problem, const Field<double>& u,
                                  double t, const Field<double>& v, double eps) {
  const Field<double> jv = problem.jacobian(u, t).matrix * v;
  const Field<double> fd =
      (problem.residual(u + eps * v, t) - problem.residual(u - eps * v, t)) / (2.0 * eps);
  const double scale = std::max(jv.cwiseAbs().maxCoeff(), 1e-300);
  return (jv - fd).cwiseAbs().maxCoeff() / scale;
}

namespace {

StepRecord make_record(double t, double dt, int iterations, double residual,
                       const BoundReport& report) {
  StepRecord rec;
  rec.t = t;
  rec.dt = dt;
  rec.iterations = iterations;
  rec.residual = residual;
  rec.min_u = report.min_u;
  rec.max_u = report.max_u;
  rec.max_tau = report.max_tau;
  rec.max_A = report.max_A;
  return rec;
}

std::string describe(const BoundReport& report) {
  std::string out;
  if (!report.c0_ok) out += " C0 bound violated;";
  if (!report.tilt_ok) out += " tilt bound violated;";
  if (!report.curv_ok) out += " curvature/cone bound violated;";
  return out;
}

}  // namespace

HomotopyState run_homotopy(const CurvatureProblem& problem, const SolverConfig& config,
                           const Barriers& barriers, double t_end) {
  config.validate();
  if (!(t_end >= 0.0 && t_end <= 1.0)) throw DomainError("t_end must lie in [0, 1]");
  const SphereGrid& grid = problem.grid();
  const Field<double> probe = smooth_probe(grid);

  HomotopyState state;
  state.u = Field<double>::Constant(grid.size(), initial_constant(config.p));

  auto accept = [&](NewtonResult&& res, double t, double dt) {
    const InducedGeometry geom = compute_geometry(res.u, grid);
    BoundReport report = check_bounds(geom, res.u, barriers, config.C_tau, config.C_A, config.k);
    if (!report.all_ok()) return report;
    state.u = std::move(res.u);
    state.t = t;
    state.residual_norm = res.residual_norm;
    state.newton_iters = res.iterations;
    state.monitor = report;
    state.step_history.push_back(make_record(t, dt, res.iterations, res.residual_norm, report));
    state.monitor_history.push_back(report);
    return report;
  };

  // t = 0: the constant start solves the discrete problem up to round-off.
  {
    NewtonResult start;
    try {
      start = newton_solve(problem, state.u, 0.0, config);
    } catch (const NonConvergence& e) {
      throw ContinuationFailure(std::string("umbilic start did not converge: ") + e.what(), state);
    }
    const BoundReport report = accept(std::move(start), 0.0, 0.0);
    if (!report.all_ok())
      throw ContinuationFailure("umbilic start violates the bound monitors:" + describe(report),
                                state);
  }

  double dt = config.dt_init;
  int accepted_steps = 0;
  std::string last_failure;
  while (state.t < t_end) {
    double t_next = state.t + dt;
    if (t_next >= t_end - 1e-14) t_next = t_end;
    bool ok = false;
    try {
      NewtonResult res = newton_solve(problem, state.u, t_next, config);
      const int iterations = res.iterations;
      const BoundReport report = accept(std::move(res), t_next, t_next - state.t);
      if (report.all_ok()) {
        ok = true;
        if (iterations <= config.fast_iterations)
          dt = std::min(dt * config.dt_grow, config.dt_max);
      } else {
        last_failure = "bound monitor:" + describe(report);
      }
    } catch (const NonConvergence& e) {
      last_failure = e.what();
    } catch (const DomainError& e) {
      last_failure = e.what();
    }
    if (!ok) {
      dt *= 0.5;
      if (dt < config.dt_min)
        throw ContinuationFailure("continuation stalled at t = " + std::to_string(state.t) +
                                      " (" + last_failure + ")",
                                  state);
      continue;
    }
    ++accepted_steps;
    if (config.jacobian_check_every > 0 && accepted_steps % config.jacobian_check_every == 0) {
      state.max_jacobian_error = std::max(
          state.max_jacobian_error, directional_jacobian_error(problem, state.u, state.t, probe));
      ++state.jacobian_checks;
    }
  }
  return state;
}

}  // namespace kcurv
