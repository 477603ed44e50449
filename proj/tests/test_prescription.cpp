#include <doctest.h>

#include "kcurv/prescription.hpp"

#include <cmath>
#include <random>

using namespace kcurv;

namespace {

const double kRStar = std::log(1.0 + std::sqrt(2.0));

Eigen::VectorXd xi3(double phi, double theta) {
  Eigen::VectorXd xi(3);
  xi << std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi);
  return xi;
}

// Tangential projection of a small displacement of xi along the sphere.
Eigen::VectorXd move_on_sphere(const Eigen::VectorXd& xi, const Eigen::VectorXd& dir, double h) {
  Eigen::VectorXd t = dir - dir.dot(xi) * xi;
  return (xi + h * t).normalized();
}

}  // namespace

TEST_CASE("registry builds each prescription and rejects unknown names") {
  for (const std::string& name : prescription_names()) CHECK(make_prescription(name, {})->name() == name);
  CHECK_THROWS_AS(make_prescription("nope", {}), std::invalid_argument);
  CHECK_THROWS_AS(make_prescription("model", {{"bogus", 1.0}}), std::invalid_argument);
  const auto model = make_prescription("model", {{"amplitude", 0.3}});
  CHECK(model->parameters().at("amplitude") == 0.3);
  CHECK(model->parameters().at("power") == 2.0);
}

TEST_CASE("reported partials match central differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> r_dist(0.1, 2.0), tau_dist(1.0, 20.0), ang(0.2, 3.0);
  const std::vector<PrescriptionPtr> all = {
      make_prescription("model", {{"amplitude", 0.5}, {"modulation", 0.1}, {"power", 2.5}}),
      make_prescription("tau_power", {{"exponent", 0.5}}),
      make_prescription("tau_concave", {}),
      make_prescription("constant", {})};
  for (const auto& psi : all)
    for (int trial = 0; trial < 200; ++trial) {
      const double r = r_dist(rng), tau = tau_dist(rng);
      const Eigen::VectorXd xi = xi3(ang(rng), 2 * ang(rng));
      const PsiJet jet = psi->eval(r, xi, tau);
      const double h = 1e-5;
      auto close = [](double fd, double exact) {
        return std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact));
      };
      CHECK(close((psi->eval(r + h, xi, tau).value - psi->eval(r - h, xi, tau).value) / (2 * h), jet.d_r));
      const double ht = 1e-5 * tau;
      CHECK(close((psi->eval(r, xi, tau + ht).value - psi->eval(r, xi, tau - ht).value) / (2 * ht),
                  jet.d_tau));
      CHECK(close((psi->eval(r, xi, tau + ht).d_tau - psi->eval(r, xi, tau - ht).d_tau) / (2 * ht),
                  jet.d_tautau));
      for (int a = 0; a < 3; ++a) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(3, a);
        const double fd = (psi->eval(r, move_on_sphere(xi, e, h), tau).value -
                           psi->eval(r, move_on_sphere(xi, e, -h), tau).value) /
                          (2 * h);
        const Eigen::VectorXd t = e - e.dot(xi) * xi;
        CHECK(close(fd, jet.d_xi.dot(t)));
      }
    }
}

TEST_CASE("audit passes the model family") {
  const SphereGrid xi = SphereGrid::sphere(8, 16);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto psi = make_prescription("model", {{"amplitude", 0.5}, {"power", p}});
    const StructuralAudit audit = audit_structural(*psi, {}, xi);
    CHECK(audit.structural_ok());
    CHECK(audit.pass_A);
    CHECK(audit.min_B_gap >= -1e-12);
    CHECK(audit.min_B_ratio == doctest::Approx(p).epsilon(1e-10));
    CHECK(audit.witnesses.empty());
  }
}

TEST_CASE("audit catches each engineered violator") {
  const SphereGrid xi = SphereGrid::sphere(8, 16);
  auto has_witness = [](const StructuralAudit& a, const std::string& cond) {
    for (const auto& w : a.witnesses)
      if (w.condition == cond) return true;
    return false;
  };
  const StructuralAudit sqrt_tau = audit_structural(*make_prescription("tau_power", {{"exponent", 0.5}}), {}, xi);
  CHECK_FALSE(sqrt_tau.pass_B);
  CHECK(sqrt_tau.min_B_ratio == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(has_witness(sqrt_tau, "B"));

  const StructuralAudit concave = audit_structural(*make_prescription("tau_concave", {}), {}, xi);
  CHECK_FALSE(concave.pass_E);
  CHECK(has_witness(concave, "E"));
  for (const auto& w : concave.witnesses)
    if (w.condition == "E") CHECK(w.tau > 2.0);

  const StructuralAudit constant = audit_structural(*make_prescription("constant", {}), {}, xi);
  CHECK_FALSE(constant.pass_A);
  CHECK_FALSE(constant.barriers.ok());
  CHECK_FALSE(constant.barriers.R1.has_value());
  CHECK(has_witness(constant, "A"));
}

TEST_CASE("barrier scan brackets the closed-form crossing") {
  const SphereGrid xi = SphereGrid::sphere(8, 16);
  const BarrierScanOptions opts;
  const BarrierScan scan = scan_barriers(*make_prescription("model", {{"amplitude", 0.5}}), xi, opts);
  REQUIRE(scan.ok());
  const double step = (opts.r_max - opts.r_min) / (opts.samples - 1);
  CHECK(*scan.R1 < kRStar);
  CHECK(*scan.R2 > kRStar);
  CHECK(*scan.R2 - kRStar <= step * (1 + 1e-9));
  CHECK(kRStar - *scan.R1 <= step * (1 + 1e-9));
}

TEST_CASE("reference slice x cosh^p x has barriers in (0, 1]") {
  const SphereGrid xi = SphereGrid::circle(16);
  const BarrierScan scan = scan_barriers(
      [](double r, const Eigen::VectorXd&) {
        return reference_psi(2.0, r, std::cosh(r), 2).value;
      },
      xi, {});
  REQUIRE(scan.ok());
  CHECK(*scan.R1 > 0.0);
  CHECK(*scan.R2 <= 1.0);
}

TEST_CASE("constant prescription has no lower barrier") {
  const BarrierScan scan = scan_barriers(*make_prescription("constant", {{"value", 0.2}}),
                                         SphereGrid::circle(16), {});
  CHECK_FALSE(scan.ok());
  CHECK_FALSE(scan.R1.has_value());
  CHECK_FALSE(scan.failure.empty());
}

TEST_CASE("homotopy endpoints, midpoint and linearity in t") {
  const auto target = make_prescription("model", {{"amplitude", 0.5}});
  Eigen::VectorXd xi(2);
  xi << 1.0, 0.0;
  const double u = 0.8, tau = 1.4;
  const HomotopyPrescription h0(target, 2.0, 0.0), h1(target, 2.0, 1.0), hm(target, 2.0, 0.5);
  CHECK(h0.eval(xi, u, tau).value == reference_psi(2.0, u, tau, 2).value);
  CHECK(h1.eval(xi, u, tau).value == target->eval(u, xi, tau).value);
  const double by_hand = 0.5 * (0.5 * std::tanh(0.8) * 1.96) + 0.5 * (1.96 * 0.8 * std::tanh(0.8));
  CHECK(hm.eval(xi, u, tau).value == doctest::Approx(by_hand).epsilon(1e-14));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = unit(rng), b = unit(rng), c = unit(rng);
    const double va = h0.at(a).eval(xi, u, tau).value, vb = h0.at(b).eval(xi, u, tau).value,
                 vc = h0.at(c).eval(xi, u, tau).value;
    CHECK(std::abs((vb - va) * (c - a) - (vc - va) * (b - a)) <= 1e-13);
    const double slope = h0.d_t(xi, u, tau);
    if (std::abs(b - a) > 1e-3) CHECK((vb - va) / (b - a) == doctest::Approx(slope).epsilon(1e-9));
  }
  CHECK_THROWS_AS(h0.eval(xi, 0.0, tau), DomainError);
}
