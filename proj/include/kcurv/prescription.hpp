#pragma once

// Prescription functions psi(r, xi, tau) on de Sitter space times the tilt
// half-line, their structural audit, the barrier scan and the homotopy family
// psi_t = t psi + (1 - t) tau^p u tanh(u).

#include "kcurv/core.hpp"
#include "kcurv/sphere_grid.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kcurv {

/// psi with the partials the audit and the solver use. `d_xi` is the
/// tangential gradient on the unit sphere, in embedding coordinates.
struct PsiJet {
  double value = 0.0;
  double d_r = 0.0;
  double d_tau = 0.0;
  double d_tautau = 0.0;
  Eigen::VectorXd d_xi;
};

class Prescription {
 public:
  virtual ~Prescription() = default;
  virtual PsiJet eval(double r, const Eigen::VectorXd& xi, double tau) const = 0;
  virtual std::string name() const = 0;
  virtual std::map<std::string, double> parameters() const = 0;
};

using PrescriptionPtr = std::shared_ptr<const Prescription>;

/// psi = a(xi) tanh(r) tau^p with a(xi) = amplitude + modulation * xi_{n+1}
/// (on S^2, xi_3 = cos(phi)).
class ModelPrescription final : public Prescription {
 public:
  ModelPrescription(double amplitude, double modulation, double power);
  PsiJet eval(double r, const Eigen::VectorXd& xi, double tau) const override;
  std::string name() const override { return "model"; }
  std::map<std::string, double> parameters() const override;

 private:
  double amplitude_;
  double modulation_;
  double power_;
};

/// psi = scale * tau^exponent.
class TauPowerPrescription final : public Prescription {
 public:
  TauPowerPrescription(double scale, double exponent);
  PsiJet eval(double r, const Eigen::VectorXd& xi, double tau) const override;
  std::string name() const override { return "tau_power"; }
  std::map<std::string, double> parameters() const override;

 private:
  double scale_;
  double exponent_;
};

/// psi = scale * tau (2 - exp(-tau)); psi_tautau changes sign at tau = 2.
class TauConcavePrescription final : public Prescription {
 public:
  explicit TauConcavePrescription(double scale);
  PsiJet eval(double r, const Eigen::VectorXd& xi, double tau) const override;
  std::string name() const override { return "tau_concave"; }
  std::map<std::string, double> parameters() const override;

 private:
  double scale_;
};

class ConstantPrescription final : public Prescription {
 public:
  explicit ConstantPrescription(double value);
  PsiJet eval(double r, const Eigen::VectorXd& xi, double tau) const override;
  std::string name() const override { return "constant"; }
  std::map<std::string, double> parameters() const override;

 private:
  double value_;
};

/// Builds a prescription from its registered name. Missing parameters take
/// defaults; unknown names or parameters throw std::invalid_argument.
PrescriptionPtr make_prescription(const std::string& name,
                                  const std::map<std::string, double>& params);

std::vector<std::string> prescription_names();

// ---------------------------------------------------------------------------
// Barrier scan

struct BarrierScanOptions {
  double r_min = 1e-3;
  double r_max = 3.0;
  int samples = 3000;
};

struct Barriers {
  double R1 = 0.0;
  double R2 = 0.0;
};

struct BarrierScan {
  std::optional<double> R1;
  std::optional<double> R2;
  std::vector<double> radii;
  /// Per radius: +1 if tanh(r) > psi for every sampled xi, -1 if below for
  /// every xi, 0 otherwise.
  std::vector<int> sign_pattern;
  std::string failure;

  bool ok() const { return R1 && R2; }
  Barriers barriers() const;
};

/// Scans s(r, xi) = tanh(r) - slice(r, xi) on the lattice of `options` with
/// xi ranging over the nodes of `xi_samples`.
BarrierScan scan_barriers(const std::function<double(double, const Eigen::VectorXd&)>& slice,
                          const SphereGrid& xi_samples, const BarrierScanOptions& options);

/// Slice psi(r, xi, cosh(r)) of a prescription.
BarrierScan scan_barriers(const Prescription& psi, const SphereGrid& xi_samples,
                          const BarrierScanOptions& options);

/// Barriers valid for the whole homotopy family: R1 = min and R2 = max over
/// the target and the reference tau^p u tanh(u).
BarrierScan scan_family_barriers(const Prescription& target, double p,
                                 const SphereGrid& xi_samples,
                                 const BarrierScanOptions& options);

// ---------------------------------------------------------------------------
// Structural audit

struct AuditBox {
  double r_lo = 0.1;
  double r_hi = 2.0;
  double tau_max = 20.0;
  int r_samples = 24;
  int tau_samples = 60;
};

struct AuditWitness {
  std::string condition;
  double r = 0.0;
  Eigen::VectorXd xi;
  double tau = 0.0;
  double value = 0.0;  // the violating quantity
};

struct StructuralAudit {
  AuditBox box;
  bool positive = true;
  bool pass_A = false;
  bool pass_B = false;
  bool pass_C = false;  // finite-box surrogate for psi/tau -> infinity
  bool pass_D = false;
  bool pass_E = false;
  double constant_D = 0.0;
  double min_B_gap = 0.0;    // min of psi_tau tau - psi
  double min_B_ratio = 0.0;  // min of psi_tau tau / psi
  double min_psi_tautau = 0.0;
  BarrierScan barriers;
  std::vector<AuditWitness> witnesses;

  /// Conditions B-E and positivity; A is reported through `barriers`.
  bool structural_ok() const { return positive && pass_B && pass_C && pass_D && pass_E; }
};

StructuralAudit audit_structural(const Prescription& psi, const AuditBox& box,
                                 const SphereGrid& xi_samples,
                                 const BarrierScanOptions& scan = {});

// ---------------------------------------------------------------------------
// Homotopy family

/// psi_t(xi, u, tau) = t psi(u, xi, tau) + (1 - t) tau^p u tanh(u).
class HomotopyPrescription {
 public:
  HomotopyPrescription(PrescriptionPtr target, double p, double t);

  /// Jet in (u, tau); `d_r` is the partial in u. Throws DomainError for u <= 0.
  PsiJet eval(const Eigen::VectorXd& xi, double u, double tau) const;
  /// d psi_t / dt = psi - Psi.
  double d_t(const Eigen::VectorXd& xi, double u, double tau) const;

  double t() const { return t_; }
  double p() const { return p_; }
  const Prescription& target() const { return *target_; }
  HomotopyPrescription at(double t) const { return {target_, p_, t}; }

 private:
  PrescriptionPtr target_;
  double p_;
  double t_;
};

/// Reference prescription tau^p u tanh(u) with its partials.
PsiJet reference_psi(double p, double u, double tau, Index xi_dim);

PsiJet homotopy_eval(const HomotopyPrescription& h, const Eigen::VectorXd& xi, double u,
                     double tau);

}  // namespace kcurv
