#include "kcurv/prescription.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kcurv {

namespace {

Eigen::VectorXd zero_gradient(const Eigen::VectorXd& xi) { return Eigen::VectorXd::Zero(xi.size()); }

void require_finite(const std::string& what, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument(what + " must be finite");
}

}  // namespace

ModelPrescription::ModelPrescription(double amplitude, double modulation, double power)
    : amplitude_(amplitude), modulation_(modulation), power_(power) {
  require_finite("amplitude", amplitude);
  require_finite("modulation", modulation);
  require_finite("power", power);
}

PsiJet ModelPrescription::eval(double r, const Eigen::VectorXd& xi, double tau) const {
  const Index last = xi.size() - 1;
  const double a = amplitude_ + modulation_ * xi(last);
  const double th = std::tanh(r);
  const double sech = 1.0 / std::cosh(r);
  const double tp = std::pow(tau, power_);
  PsiJet jet;
  jet.value = a * th * tp;
  jet.d_r = a * sech * sech * tp;
  jet.d_tau = a * th * power_ * std::pow(tau, power_ - 1.0);
  jet.d_tautau = a * th * power_ * (power_ - 1.0) * std::pow(tau, power_ - 2.0);
  // Tangential gradient of xi_last on the unit sphere: e_last - xi_last * xi.
  Eigen::VectorXd e = Eigen::VectorXd::Unit(xi.size(), last);
  jet.d_xi = modulation_ * (e - xi(last) * xi) * th * tp;
  return jet;
}

std::map<std::string, double> ModelPrescription::parameters() const {
  return {{"amplitude", amplitude_}, {"modulation", modulation_}, {"power", power_}};
}

TauPowerPrescription::TauPowerPrescription(double scale, double exponent)
    : scale_(scale), exponent_(exponent) {
  require_finite("scale", scale);
  require_finite("exponent", exponent);
}

PsiJet TauPowerPrescription::eval(double, const Eigen::VectorXd& xi, double tau) const {
  PsiJet jet;
  jet.value = scale_ * std::pow(tau, exponent_);
  jet.d_tau = scale_ * exponent_ * std::pow(tau, exponent_ - 1.0);
  jet.d_tautau = scale_ * exponent_ * (exponent_ - 1.0) * std::pow(tau, exponent_ - 2.0);
  jet.d_xi = zero_gradient(xi);
  return jet;
}

std::map<std::string, double> TauPowerPrescription::parameters() const {
  return {{"scale", scale_}, {"exponent", exponent_}};
}

TauConcavePrescription::TauConcavePrescription(double scale) : scale_(scale) {
  require_finite("scale", scale);
}

PsiJet TauConcavePrescription::eval(double, const Eigen::VectorXd& xi, double tau) const {
  const double decay = std::exp(-tau);
  PsiJet jet;
  jet.value = scale_ * tau * (2.0 - decay);
  jet.d_tau = scale_ * (2.0 - decay + tau * decay);
  jet.d_tautau = scale_ * (2.0 - tau) * decay;
  jet.d_xi = zero_gradient(xi);
  return jet;
}

std::map<std::string, double> TauConcavePrescription::parameters() const {
  return {{"scale", scale_}};
}

ConstantPrescription::ConstantPrescription(double value) : value_(value) {
  require_finite("value", value);
}

PsiJet ConstantPrescription::eval(double, const Eigen::VectorXd& xi, double) const {
  PsiJet jet;
  jet.value = value_;
  jet.d_xi = zero_gradient(xi);
  return jet;
}

std::map<std::string, double> ConstantPrescription::parameters() const {
  return {{"value", value_}};
}

std::vector<std::string> prescription_names() {
  return {"model", "tau_power", "tau_concave", "constant"};
}

PrescriptionPtr make_prescription(const std::string& name,
                                  const std::map<std::string, double>& params) {
  std::map<std::string, double> defaults;
  if (name == "model")
    defaults = {{"amplitude", 0.5}, {"modulation", 0.0}, {"power", 2.0}};
  else if (name == "tau_power")
    defaults = {{"scale", 1.0}, {"exponent", 0.5}};
  else if (name == "tau_concave")
    defaults = {{"scale", 1.0}};
  else if (name == "constant")
    defaults = {{"value", 0.2}};
  else
    throw std::invalid_argument("unknown prescription '" + name + "'");

  for (const auto& [key, value] : params) {
    auto it = defaults.find(key);
    if (it == defaults.end())
      throw std::invalid_argument("prescription '" + name + "' has no parameter '" + key + "'");
    it->second = value;
  }
  const auto& p = defaults;
  if (name == "model")
    return std::make_shared<ModelPrescription>(p.at("amplitude"), p.at("modulation"), p.at("power"));
  if (name == "tau_power")
    return std::make_shared<TauPowerPrescription>(p.at("scale"), p.at("exponent"));
  if (name == "tau_concave") return std::make_shared<TauConcavePrescription>(p.at("scale"));
  return std::make_shared<ConstantPrescription>(p.at("value"));
}

// ---------------------------------------------------------------------------

Barriers BarrierScan::barriers() const {
  if (!ok()) throw DomainError("barrier scan failed: " + failure);
  return {*R1, *R2};
}

BarrierScan scan_barriers(const std::function<double(double, const Eigen::VectorXd&)>& slice,
                          const SphereGrid& xi_samples, const BarrierScanOptions& options) {
  if (!(options.r_min > 0.0) || !(options.r_max > options.r_min) || options.samples < 2)
    throw DomainError("barrier scan range must satisfy 0 < r_min < r_max");
  std::vector<Eigen::VectorXd> points;
  points.reserve(xi_samples.size());
  for (Index i = 0; i < xi_samples.size(); ++i) points.push_back(xi_samples.point(i));

  BarrierScan scan;
  const double dr = (options.r_max - options.r_min) / (options.samples - 1);
  for (int m = 0; m < options.samples; ++m) {
    const double r = options.r_min + m * dr;
    const double th = std::tanh(r);
    bool all_above = true;
    bool all_below = true;
    for (const auto& xi : points) {
      const double s = th - slice(r, xi);
      all_above = all_above && s > 0.0;
      all_below = all_below && s < 0.0;
    }
    scan.radii.push_back(r);
    scan.sign_pattern.push_back(all_above ? 1 : (all_below ? -1 : 0));
  }

  const auto& sign = scan.sign_pattern;
  const int count = int(sign.size());
  int lower = -1;
  while (lower + 1 < count && sign[lower + 1] == 1) ++lower;
  int upper = count;
  while (upper - 1 >= 0 && sign[upper - 1] == -1) --upper;

  if (lower >= 0) scan.R1 = scan.radii[lower];
  if (upper < count) scan.R2 = scan.radii[upper];
  if (!scan.R1)
    scan.failure = "no lower barrier: tanh(r) - psi(r, xi, cosh r) is not positive at r = " +
                   std::to_string(options.r_min);
  else if (!scan.R2)
    scan.failure = "no upper barrier: tanh(r) - psi(r, xi, cosh r) is not negative at r = " +
                   std::to_string(options.r_max);
  return scan;
}

BarrierScan scan_barriers(const Prescription& psi, const SphereGrid& xi_samples,
                          const BarrierScanOptions& options) {
  return scan_barriers(
      [&psi](double r, const Eigen::VectorXd& xi) { return psi.eval(r, xi, std::cosh(r)).value; },
      xi_samples, options);
}

BarrierScan scan_family_barriers(const Prescription& target, double p,
                                 const SphereGrid& xi_samples,
                                 const BarrierScanOptions& options) {
  BarrierScan scan = scan_barriers(target, xi_samples, options);
  const BarrierScan reference = scan_barriers(
      [p](double r, const Eigen::VectorXd&) {
        return std::pow(std::cosh(r), p) * r * std::tanh(r);
      },
      xi_samples, options);
  if (!scan.ok()) return scan;
  if (!reference.ok()) {
    BarrierScan failed = reference;
    failed.failure = "reference family: " + reference.failure;
    return failed;
  }
  scan.R1 = std::min(*scan.R1, *reference.R1);
  scan.R2 = std::max(*scan.R2, *reference.R2);
  return scan;
}

// ---------------------------------------------------------------------------

StructuralAudit audit_structural(const Prescription& psi, const AuditBox& box,
                                 const SphereGrid& xi_samples, const BarrierScanOptions& scan) {
  if (!(box.r_lo > 0.0) || !(box.r_hi > box.r_lo))
    throw DomainError("audit box needs 0 < r_lo < r_hi");
  if (!(box.tau_max >= 2.0)) throw DomainError("audit box needs tau_max >= 2");
  if (box.r_samples < 2 || box.tau_samples < 3)
    throw DomainError("audit box needs at least 2 radial and 3 tilt samples");

  constexpr std::size_t kMaxWitnesses = 4;
  StructuralAudit audit;
  audit.box = box;
  audit.min_B_gap = std::numeric_limits<double>::infinity();
  audit.min_B_ratio = std::numeric_limits<double>::infinity();
  audit.min_psi_tautau = std::numeric_limits<double>::infinity();
  std::map<std::string, std::size_t> witness_count;
  auto witness = [&](const std::string& cond, double r, const Eigen::VectorXd& xi, double tau,
                     double value) {
    if (witness_count[cond]++ < kMaxWitnesses) audit.witnesses.push_back({cond, r, xi, tau, value});
  };

  bool ok_B = true, ok_C = true, ok_E = true;
  double constant_D = 0.0;
  const double dr = (box.r_hi - box.r_lo) / (box.r_samples - 1);
  const double dtau = (box.tau_max - 1.0) / (box.tau_samples - 1);
  for (Index node = 0; node < xi_samples.size(); ++node) {
    const Eigen::VectorXd xi = xi_samples.point(node);
    for (int a = 0; a < box.r_samples; ++a) {
      const double r = box.r_lo + a * dr;
      double prev_ratio = -std::numeric_limits<double>::infinity();
      double last_slope = 0.0;
      bool monotone = true;
      for (int b = 0; b < box.tau_samples; ++b) {
        const double tau = 1.0 + b * dtau;
        const PsiJet jet = psi.eval(r, xi, tau);
        if (!(jet.value > 0.0)) {
          audit.positive = false;
          witness("positivity", r, xi, tau, jet.value);
          continue;
        }
        const double gap = jet.d_tau * tau - jet.value;
        audit.min_B_gap = std::min(audit.min_B_gap, gap);
        audit.min_B_ratio = std::min(audit.min_B_ratio, jet.d_tau * tau / jet.value);
        if (gap < -1e-12) {
          ok_B = false;
          witness("B", r, xi, tau, gap);
        }
        audit.min_psi_tautau = std::min(audit.min_psi_tautau, jet.d_tautau);
        if (jet.d_tautau < -1e-12) {
          ok_E = false;
          witness("E", r, xi, tau, jet.d_tautau);
        }
        const double grad = std::max(std::abs(jet.d_r), jet.d_xi.norm());
        constant_D = std::max(constant_D, grad / jet.value);

        const double ratio = jet.value / tau;
        if (b > 0) {
          last_slope = ratio - prev_ratio;
          if (last_slope < -1e-12 * std::abs(ratio)) monotone = false;
        }
        prev_ratio = ratio;
      }
      if (!monotone || !(last_slope > 0.0)) {
        ok_C = false;
        witness("C", r, xi, box.tau_max, last_slope);
      }
    }
  }
  audit.pass_B = ok_B && audit.positive;
  audit.pass_C = ok_C && audit.positive;
  audit.pass_E = ok_E && audit.positive;
  audit.constant_D = constant_D;
  audit.pass_D = audit.positive && std::isfinite(constant_D);
  if (!audit.pass_D) witness("D", box.r_lo, xi_samples.point(0), 1.0, constant_D);

  audit.barriers = scan_barriers(psi, xi_samples, scan);
  audit.pass_A = audit.barriers.ok();
  if (!audit.pass_A) {
    // Witness: the first radius whose sign pattern breaks the barrier shape.
    const auto& sign = audit.barriers.sign_pattern;
    const bool lower_missing = !audit.barriers.R1;
    for (std::size_t m = 0; m < sign.size(); ++m) {
      const std::size_t idx = lower_missing ? m : sign.size() - 1 - m;
      if (sign[idx] != (lower_missing ? 1 : -1)) {
        const double r = audit.barriers.radii[idx];
        const Eigen::VectorXd xi = xi_samples.point(0);
        witness("A", r, xi, std::cosh(r), std::tanh(r) - psi.eval(r, xi, std::cosh(r)).value);
        break;
      }
    }
  }
  return audit;
}

// ---------------------------------------------------------------------------

HomotopyPrescription::HomotopyPrescription(PrescriptionPtr target, double p, double t)
    : target_(std::move(target)), p_(p), t_(t) {
  if (!target_) throw DomainError("homotopy needs a target prescription");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("homotopy parameter outside [0, 1]");
  if (!(p >= 1.0)) throw DomainError("reference power must be >= 1");
}

PsiJet reference_psi(double p, double u, double tau, Index xi_dim) {
  const double th = std::tanh(u);
  const double sech = 1.0 / std::cosh(u);
  const double tp = std::pow(tau, p);
  PsiJet jet;
  jet.value = tp * u * th;
  jet.d_r = tp * (th + u * sech * sech);
  jet.d_tau = p * std::pow(tau, p - 1.0) * u * th;
  jet.d_tautau = p * (p - 1.0) * std::pow(tau, p - 2.0) * u * th;
  jet.d_xi = Eigen::VectorXd::Zero(xi_dim);
  return jet;
}

PsiJet HomotopyPrescription::eval(const Eigen::VectorXd& xi, double u, double tau) const {
  if (!(u > 0.0)) throw DomainError("homotopy prescription needs u > 0");
  const PsiJet ref = reference_psi(p_, u, tau, xi.size());
  if (t_ == 0.0) return ref;
  const PsiJet tgt = target_->eval(u, xi, tau);
  if (t_ == 1.0) return tgt;
  const double s = 1.0 - t_;
  PsiJet jet;
  jet.value = t_ * tgt.value + s * ref.value;
  jet.d_r = t_ * tgt.d_r + s * ref.d_r;
  jet.d_tau = t_ * tgt.d_tau + s * ref.d_tau;
  jet.d_tautau = t_ * tgt.d_tautau + s * ref.d_tautau;
  jet.d_xi = t_ * tgt.d_xi + s * ref.d_xi;
  return jet;
}

double HomotopyPrescription::d_t(const Eigen::VectorXd& xi, double u, double tau) const {
  if (!(u > 0.0)) throw DomainError("homotopy prescription needs u > 0");
  return target_->eval(u, xi, tau).value - reference_psi(p_, u, tau, xi.size()).value;
}

PsiJet homotopy_eval(const HomotopyPrescription& h, const Eigen::VectorXd& xi, double u,
                     double tau) {
  return h.eval(xi, u, tau);
}

}  // namespace kcurv
