#include <doctest.h>

#include "kcurv/continuation_solver.hpp"

#include <cmath>

using namespace kcurv;

namespace {

const double kRStar = std::log(1.0 + std::sqrt(2.0));

CurvatureProblem model_problem(const SphereGrid& grid, int k, double modulation = 0.0) {
  return CurvatureProblem(grid, k,
                          make_prescription("model", {{"amplitude", 0.5}, {"modulation", modulation}}),
                          2.0);
}

Field<double> smooth_bump(const SphereGrid& grid) {
  Field<double> v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd x = grid.point(i);
    v(i) = x(0) + 0.5 * x(1) * x(x.size() - 1);
  }
  return v;
}

double closed_form_c(double p) {
  const double u = initial_constant(p);
  const double ch = std::cosh(u), sh = std::sinh(u), th = std::tanh(u);
  return 1 / (ch * ch) - std::pow(ch, p) * th - u * std::pow(ch, p - 2) -
         p * std::pow(ch, p - 1) * u * th * sh;
}

}  // namespace

TEST_CASE("initial constant solves lambda cosh^p lambda = 1") {
  const double l2 = initial_constant(2.0);
  CHECK(std::abs(l2 * std::cosh(l2) * std::cosh(l2) - 1.0) <= 1e-14);
  CHECK(l2 == doctest::Approx(0.6632).epsilon(1e-3));
  const double l1 = initial_constant(1.0);
  CHECK(std::abs(l1 * std::cosh(l1) - 1.0) <= 1e-14);
  CHECK(l1 == doctest::Approx(0.765).epsilon(1e-3));
}

TEST_CASE("constant states reduce to the slice equation") {
  const SphereGrid grid = SphereGrid::sphere(16, 32);
  const CurvatureProblem problem = model_problem(grid, 2);
  const double lambda = initial_constant(2.0);
  CHECK(problem.residual(Field<double>::Constant(grid.size(), lambda), 0.0).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(problem.residual(Field<double>::Constant(grid.size(), kRStar), 1.0).cwiseAbs().maxCoeff() <= 1e-12);
  for (double c : {0.4, 0.7, 1.1}) {
    const Field<double> r = problem.residual(Field<double>::Constant(grid.size(), c), 1.0);
    const double slice = std::tanh(c) - 0.5 * std::tanh(c) * std::cosh(c) * std::cosh(c);
    CHECK(r.cwiseAbs().maxCoeff() > 0.0);
    CHECK((r.array() - slice).abs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("rejected states throw and are listed") {
  const SphereGrid grid = SphereGrid::circle(64);
  const CurvatureProblem problem = model_problem(grid, 1);
  Field<double> steep(grid.size());
  for (Index i = 0; i < grid.size(); ++i) steep(i) = 1.0 + 3.0 * std::sin(grid.coordinates(i)(0));
  CHECK_FALSE(problem.evaluate(steep, 0.5).ok());
  CHECK_THROWS(problem.residual(steep, 0.5));
  CHECK_THROWS_AS(problem.residual(Field<double>::Constant(grid.size(), -0.2), 0.5), AdmissibilityError);
  CHECK_THROWS_AS(CurvatureProblem(grid, 2, make_prescription("model", {}), 2.0), DomainError);
}

TEST_CASE("Jacobian passes the Taylor test") {
  for (const SphereGrid& grid : {SphereGrid::circle(64), SphereGrid::sphere(16, 32)}) {
    const CurvatureProblem problem = model_problem(grid, grid.dim(), 0.1);
    const Field<double> u = Field<double>::Constant(grid.size(), 0.8) + 0.02 * smooth_bump(grid);
    const Field<double> v = smooth_bump(grid);
    const double t = 0.6;
    const Field<double> r0 = problem.residual(u, t);
    const Field<double> jv = problem.jacobian(u, t).matrix * v;
    double prev = 0;
    for (double eps : {1e-2, 5e-3, 2.5e-3}) {
      const double rem = (problem.residual(u + eps * v, t) - r0 - eps * jv).cwiseAbs().maxCoeff();
      if (prev > 0) CHECK(prev / rem == doctest::Approx(4.0).epsilon(0.1));
      prev = rem;
    }
    CHECK(directional_jacobian_error(problem, u, t, v) <= 1e-5);
  }
}

TEST_CASE("Jacobian is linear and the operator is elliptic") {
  const SphereGrid grid = SphereGrid::sphere(16, 32);
  const CurvatureProblem problem = model_problem(grid, 2, 0.1);
  const Field<double> u = Field<double>::Constant(grid.size(), 0.8) + 0.02 * smooth_bump(grid);
  const LinearizedOperator op = problem.jacobian(u, 0.3);
  const Field<double> a = smooth_bump(grid), b = Field<double>::Ones(grid.size());
  CHECK((op.matrix * (2 * a - 3 * b) - (2 * (op.matrix * a) - 3 * (op.matrix * b))).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(op.min_ellipticity > 0.0);
  CHECK(problem.color_count() <= 25);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Eigen::Matrix2d(problem.principal_coefficient(u, 7)));
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("zeroth-order coefficient at the start is negative") {
  CHECK(zeroth_coefficient_at_start(2.0) == doctest::Approx(-1.55).epsilon(0.01 / 1.55));
  CHECK(zeroth_coefficient_at_start(2.0) == doctest::Approx(closed_form_c(2.0)).epsilon(1e-14));
  for (double p : {1.0, 1.5, 2.0, 3.0}) CHECK(zeroth_coefficient_at_start(p) < 0.0);
}

TEST_CASE("constant-mode Jacobian at the start equals c") {
  for (const SphereGrid& grid : {SphereGrid::circle(64), SphereGrid::sphere(16, 32)}) {
    const CurvatureProblem problem = model_problem(grid, grid.dim());
    const Field<double> u = Field<double>::Constant(grid.size(), initial_constant(2.0));
    const Field<double> j1 = problem.jacobian(u, 0.0).matrix * Field<double>::Ones(grid.size());
    CHECK((j1.array() - zeroth_coefficient_at_start(2.0)).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("Newton recovers the constant from a perturbed start") {
  SolverConfig cfg;
  for (const SphereGrid& grid : {SphereGrid::circle(64), SphereGrid::sphere(16, 32)}) {
    cfg.k = grid.dim();
    const CurvatureProblem problem = model_problem(grid, cfg.k);
    const double lambda = initial_constant(2.0);
    const Field<double> bump = smooth_bump(grid);
    const Field<double> u0 = Field<double>::Constant(grid.size(), lambda) + 0.05 * bump / bump.cwiseAbs().maxCoeff();
    const NewtonResult res = newton_solve(problem, u0, 0.0, cfg);
    CHECK(res.iterations <= 15);
    CHECK((res.u.array() - lambda).abs().maxCoeff() <= 1e-8);
    // quadratic tail: e_{j+1} <= C e_j^2 once e_j is small
    for (std::size_t j = 1; j + 1 < res.history.size(); ++j)
      if (res.history[j] < 1e-3 && res.history[j + 1] > 1e-13)
        CHECK(res.history[j + 1] <= 10.0 * res.history[j] * res.history[j]);

    const NewtonResult again = newton_solve(problem, res.u, 0.0, cfg);
    CHECK(again.iterations <= 1);
  }
}

TEST_CASE("frozen continuation returns the umbilic start") {
  const SphereGrid grid = SphereGrid::circle(64);
  SolverConfig cfg;
  cfg.k = 1;
  const CurvatureProblem problem = model_problem(grid, 1);
  const Barriers b = scan_family_barriers(*problem.target(), 2.0, grid, {}).barriers();
  const HomotopyState state = run_homotopy(problem, cfg, b, 0.0);
  CHECK(state.t == 0.0);
  CHECK((state.u.array() - initial_constant(2.0)).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("continuation reaches the closed-form solution deterministically") {
  const SphereGrid grid = SphereGrid::circle(128);
  SolverConfig cfg;
  cfg.k = 1;
  cfg.jacobian_check_every = 1;
  const CurvatureProblem problem = model_problem(grid, 1);
  const Barriers b = scan_family_barriers(*problem.target(), 2.0, grid, {}).barriers();
  const HomotopyState first = run_homotopy(problem, cfg, b);
  const HomotopyState second = run_homotopy(problem, cfg, b);
  CHECK(first.t == 1.0);
  CHECK((first.u.array() - kRStar).abs().maxCoeff() <= 1e-8);
  CHECK((first.u.array() - first.u.mean()).abs().maxCoeff() <= 10 * cfg.tol_newton);
  CHECK(first.jacobian_checks > 0);
  CHECK(first.max_jacobian_error <= 1e-5);
  REQUIRE(first.step_history.size() == second.step_history.size());
  for (std::size_t i = 0; i < first.step_history.size(); ++i) {
    CHECK(first.step_history[i].t == second.step_history[i].t);
    CHECK(first.step_history[i].residual == second.step_history[i].residual);
  }
  CHECK(first.u == second.u);
  for (const BoundReport& m : first.monitor_history) CHECK(m.all_ok());
}

TEST_CASE("bad solver settings are rejected") {
  SolverConfig cfg;
  cfg.dt_min = 0.5;
  cfg.dt_init = 0.1;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  SolverConfig low_p;
  low_p.p = 0.5;
  CHECK_THROWS_AS(low_p.validate(), DomainError);
}
