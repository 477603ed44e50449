#include <doctest.h>

#include "kcurv/apriori_monitor.hpp"

#include <cmath>

using namespace kcurv;

namespace {

const double kRStar = std::log(1.0 + std::sqrt(2.0));

Barriers model_barriers(const SphereGrid& grid) {
  return scan_barriers(*make_prescription("model", {{"amplitude", 0.5}}), grid, {}).barriers();
}

Field<double> zonal_profile(const SphereGrid& grid) {
  Field<double> u(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinates(i)(0);
    if (grid.dim() == 1) {
      u(i) = 0.8 + 0.1 * std::cos(x);
    } else {
      const double c = std::cos(x);
      u(i) = 0.8 + 0.1 * 0.5 * (3 * c * c - 1);
    }
  }
  return u;
}

}  // namespace

TEST_CASE("umbilic slice at the crossing passes every bound") {
  const SphereGrid grid = SphereGrid::sphere(16, 32);
  const Field<double> u = Field<double>::Constant(grid.size(), 0.8814);
  const BoundReport report = check_bounds(compute_geometry(u, grid), u, model_barriers(grid), 50, 50, 2);
  CHECK(report.all_ok());
  CHECK(report.max_tau == doctest::Approx(std::cosh(0.8814)));
  CHECK(report.max_A == doctest::Approx(std::sqrt(2.0) * std::tanh(0.8814)));
}

TEST_CASE("C0 violation above the upper barrier") {
  const SphereGrid grid = SphereGrid::sphere(16, 32);
  const Barriers b = model_barriers(grid);
  const Field<double> u = Field<double>::Constant(grid.size(), b.R2 + 0.1);
  const BoundReport report = check_bounds(compute_geometry(u, grid), u, b, 50, 50, 2);
  CHECK_FALSE(report.c0_ok);
  CHECK(report.c0_violations.size() == std::size_t(grid.size()));
  CHECK(report.tilt_ok);
}

TEST_CASE("curvature monitor flags a tuple outside Gamma_2") {
  const SphereGrid grid = SphereGrid::sphere(8, 16);
  const Field<double> u = Field<double>::Constant(grid.size(), kRStar);
  InducedGeometry geom = compute_geometry(u, grid);
  EigenTuple bad(2);
  bad << 2.0, -1.0;
  geom.shape_eigs[5] = bad;
  const BoundReport report = check_bounds(geom, u, model_barriers(grid), 50, 50, 2);
  CHECK_FALSE(report.curv_ok);
  REQUIRE(report.curv_violations.size() == 1);
  CHECK(report.curv_violations[0] == 5);
  CHECK(report.min_cone_margin == doctest::Approx(-2.0));
  CHECK_THROWS_AS(maclaurin_monitor(geom, 2), AdmissibilityError);
}

TEST_CASE("tilt and curvature caps") {
  const SphereGrid grid = SphereGrid::circle(32);
  const Field<double> u = Field<double>::Constant(grid.size(), kRStar);
  const InducedGeometry geom = compute_geometry(u, grid);
  const BoundReport report = check_bounds(geom, u, model_barriers(grid), 1.2, 0.5, 1);
  CHECK_FALSE(report.tilt_ok);
  CHECK_FALSE(report.curv_ok);
}

TEST_CASE("monitors are pure") {
  const SphereGrid grid = SphereGrid::sphere(16, 32);
  const Field<double> u = zonal_profile(grid);
  const Field<double> copy = u;
  const InducedGeometry geom = compute_geometry(u, grid);
  const Barriers b = model_barriers(grid);
  const BoundReport a = check_bounds(geom, u, b, 50, 50, 2);
  const BoundReport c = check_bounds(geom, u, b, 50, 50, 2);
  CHECK(a.max_tau == c.max_tau);
  CHECK(a.max_A == c.max_A);
  CHECK(a.min_cone_margin == c.min_cone_margin);
  CHECK(u == copy);
  const IdentityResiduals r1 = identity_residuals(u, grid), r2 = identity_residuals(u, grid);
  CHECK(r1.r_tau2 == r2.r_tau2);
  CHECK(r1.codazzi == r2.codazzi);
}

TEST_CASE("identity residuals vanish on umbilic slices") {
  for (const SphereGrid& grid : {SphereGrid::circle(64), SphereGrid::sphere(32, 64)})
    for (double r : {0.3, 0.8, 1.2}) {
      const IdentityResiduals res = identity_residuals(Field<double>::Constant(grid.size(), r), grid);
      CHECK(res.r_eta <= 1e-12);
      CHECK(res.r_tau1 <= 1e-12);
      CHECK(res.r_tau2 <= 1e-12);
      CHECK(res.codazzi <= 1e-12);
    }
}

TEST_CASE("printed plus sign would leave 2 sinh cosh^2 sigma on umbilic slices") {
  const SphereGrid grid = SphereGrid::sphere(16, 32);
  const double r = 0.8;
  const InducedGeometry geom = compute_geometry(Field<double>::Constant(grid.size(), r), grid);
  for (Index i = 0; i < grid.size(); i += 37) {
    // Hess eta vanishes for constant u.
    const SmallMat<double> corrected = -(geom.tau(i) * geom.A[i] - geom.eta(i) * geom.g[i]);
    const SmallMat<double> printed = -(geom.tau(i) * geom.A[i] + geom.eta(i) * geom.g[i]);
    CHECK(corrected.cwiseAbs().maxCoeff() <= 1e-14);
    const SmallMat<double> expected = -2 * std::sinh(r) * std::cosh(r) * std::cosh(r) * grid.sigma(i);
    CHECK((printed - expected).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(printed.cwiseAbs().maxCoeff() > 0.1);
  }
}

TEST_CASE("identity residuals converge at second order") {
  auto check_ratios = [](const SphereGrid& coarse) {
    const IdentityResiduals a = identity_residuals(zonal_profile(coarse), coarse);
    const SphereGrid fine = coarse.refined();
    const IdentityResiduals b = identity_residuals(zonal_profile(fine), fine);
    CHECK(a.h / b.h == doctest::Approx(2.0));
    for (auto [x, y] : {std::pair{a.r_eta, b.r_eta}, {a.r_tau1, b.r_tau1}, {a.r_tau2, b.r_tau2}}) {
      CHECK(x / y >= 3.4);
      CHECK(x / y <= 4.6);
    }
    return std::pair{a, b};
  };
  const auto [c1, f1] = check_ratios(SphereGrid::circle(64));
  CHECK(c1.codazzi <= 1e-12);  // a single direction has nothing to commute
  const auto [c2, f2] = check_ratios(SphereGrid::sphere(32, 64));
  CHECK(c2.codazzi / f2.codazzi >= 3.4);
  CHECK(c2.codazzi / f2.codazzi <= 4.6);
}

TEST_CASE("Maclaurin margin is nonnegative on admissible states") {
  const SphereGrid grid = SphereGrid::sphere(16, 32);
  const InducedGeometry geom = compute_geometry(zonal_profile(grid), grid);
  CHECK(maclaurin_monitor(geom, 2) >= -1e-10);
  CHECK(maclaurin_monitor(geom, 1) >= -1e-10);
}
