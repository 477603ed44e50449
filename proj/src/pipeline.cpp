#include "kcurv/pipeline.hpp"

#include "kcurv/apriori_monitor.hpp"
#include "kcurv/continuation_solver.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

namespace kcurv {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ojson number_or_null(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

ojson optional_json(const std::optional<double>& x) {
  return x ? number_or_null(*x) : ojson(nullptr);
}

ojson vector_json(const Eigen::VectorXd& v) {
  ojson out = ojson::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number_or_null(v(i)));
  return out;
}

ojson scan_json(const BarrierScan& scan) {
  ojson out;
  out["ok"] = scan.ok();
  out["R1"] = optional_json(scan.R1);
  out["R2"] = optional_json(scan.R2);
  out["failure"] = scan.failure;
  return out;
}

ojson audit_json(const StructuralAudit& audit) {
  ojson out;
  out["structural_ok"] = audit.structural_ok();
  out["positive"] = audit.positive;
  out["pass_A"] = audit.pass_A;
  out["pass_B"] = audit.pass_B;
  out["pass_C"] = audit.pass_C;
  out["pass_D"] = audit.pass_D;
  out["pass_E"] = audit.pass_E;
  out["constant_D"] = number_or_null(audit.constant_D);
  out["min_B_gap"] = number_or_null(audit.min_B_gap);
  out["min_B_ratio"] = number_or_null(audit.min_B_ratio);
  out["min_psi_tautau"] = number_or_null(audit.min_psi_tautau);
  out["barriers"] = scan_json(audit.barriers);
  ojson witnesses = ojson::array();
  for (const AuditWitness& w : audit.witnesses)
    witnesses.push_back({{"condition", w.condition},
                         {"r", number_or_null(w.r)},
                         {"xi", vector_json(w.xi)},
                         {"tau", number_or_null(w.tau)},
                         {"value", number_or_null(w.value)}});
  out["witnesses"] = witnesses;
  return out;
}

ojson monitor_json(const BoundReport& m) {
  return {{"all_ok", m.all_ok()},
          {"c0_ok", m.c0_ok},
          {"min_u", m.min_u},
          {"max_u", m.max_u},
          {"R1", m.R1},
          {"R2", m.R2},
          {"tilt_ok", m.tilt_ok},
          {"max_tau", number_or_null(m.max_tau)},
          {"C_tau", m.C_tau},
          {"curv_ok", m.curv_ok},
          {"max_A", number_or_null(m.max_A)},
          {"C_A", m.C_A},
          {"min_cone_margin", number_or_null(m.min_cone_margin)}};
}

ojson residuals_json(const IdentityResiduals& r) {
  return {{"h", r.h},
          {"r_eta", r.r_eta},
          {"r_tau1", r.r_tau1},
          {"r_tau2", r.r_tau2},
          {"codazzi", r.codazzi}};
}

void write_fields(const fs::path& path, const SphereGrid& grid, const Field<double>& u,
                  const InducedGeometry& geom, const Field<double>& residual) {
  std::ofstream out(path);
  const int n = grid.dim();
  out << (n == 2 ? "phi,theta" : "theta") << ",u,tau,eta";
  for (int i = 1; i <= n; ++i) out << ",lambda_" << i;
  out << ",residual\n";
  for (Index node = 0; node < grid.size(); ++node) {
    const SmallVec<double> x = grid.coordinates(node);
    for (Index c = 0; c < x.size(); ++c) out << fmt(x(c)) << ',';
    out << fmt(u(node)) << ',' << fmt(geom.tau(node)) << ',' << fmt(geom.eta(node));
    const EigenTuple& lambda = geom.shape_eigs[node];
    for (int i = 0; i < n; ++i)
      out << ',' << fmt(i < lambda.size() ? lambda(i) : std::nan(""));
    out << ',' << fmt(residual(node)) << '\n';
  }
}

void write_trace(const fs::path& path, const std::vector<StepRecord>& steps) {
  std::ofstream out(path);
  out << "t,dt,iters,residual,min_u,max_u,max_tau,max_A\n";
  for (const StepRecord& s : steps)
    out << fmt(s.t) << ',' << fmt(s.dt) << ',' << s.iterations << ',' << fmt(s.residual) << ','
        << fmt(s.min_u) << ',' << fmt(s.max_u) << ',' << fmt(s.max_tau) << ',' << fmt(s.max_A)
        << '\n';
}

Field<double> profile_field(const SphereGrid& grid, const ProfileConfig& profile) {
  Field<double> u(grid.size());
  for (Index node = 0; node < grid.size(); ++node) {
    const SmallVec<double> x = grid.coordinates(node);
    double y;
    if (grid.dim() == 1) {
      y = std::cos(x(0));
    } else {
      const double c = std::cos(x(0));
      y = 0.5 * (3.0 * c * c - 1.0);
    }
    u(node) = profile.base + profile.amplitude * y;
  }
  return u;
}

class Run {
 public:
  Run(const RunConfig& config, std::ostream* log) : config_(config), log_(log) {
    summary_["code_version"] = kVersion;
    summary_["status"] = "running";
    summary_["exit_code"] = nullptr;
    summary_["message"] = "";
    summary_["config"] = config.echo();
  }

  int execute() {
    int code = kExitOk;
    std::string message = "ok";
    try {
      fs::create_directories(dir());
      grid_.emplace(build_grid(config_.dim, config_.resolution));
      summary_["grid"] = {{"dim", grid_->dim()},
                          {"resolution", config_.resolution},
                          {"nodes", grid_->size()},
                          {"h", grid_->spacing()}};
      switch (config_.mode) {
        case RunMode::AuditOnly: code = audit_only(message); break;
        case RunMode::IdentityCheck: code = identity_check(message); break;
        case RunMode::Solve: code = solve(message); break;
      }
    } catch (const ConfigError& e) {
      code = kExitConfig;
      message = e.what();
    } catch (const DomainError& e) {
      code = kExitConfig;
      message = e.what();
    } catch (const std::invalid_argument& e) {
      code = kExitConfig;
      message = e.what();
    } catch (const fs::filesystem_error& e) {
      code = kExitConfig;
      message = std::string("output directory: ") + e.what();
    }
    summary_["status"] = code == kExitOk ? "ok" : "failed";
    summary_["exit_code"] = code;
    summary_["message"] = message;
    write_summary();
    say(message);
    return code;
  }

 private:
  fs::path dir() const { return fs::path(config_.output_directory); }

  void say(const std::string& line) {
    if (log_) *log_ << line << '\n';
  }

  void write_summary() {
    std::error_code ec;
    fs::create_directories(dir(), ec);
    std::ofstream out(dir() / "summary.json");
    out << summary_.dump(2) << '\n';
  }

  // Structural audit of the target; fills the summary and returns an exit code.
  int audit(const Prescription& psi, std::string& message) {
    const StructuralAudit report = audit_structural(psi, config_.audit, *grid_, config_.scan);
    summary_["audit"] = audit_json(report);
    say("audit: " + std::string(report.structural_ok() ? "pass" : "FAIL") +
        ", barriers: " + (report.barriers.ok() ? "found" : "missing"));
    if (!report.structural_ok()) {
      std::string failed;
      if (!report.positive) failed += " positivity";
      if (!report.pass_B) failed += " B";
      if (!report.pass_C) failed += " C";
      if (!report.pass_D) failed += " D";
      if (!report.pass_E) failed += " E";
      message = "audit failed:" + failed;
      return kExitAudit;
    }
    if (!report.barriers.ok()) {
      message = "barrier scan failed: " + report.barriers.failure;
      return kExitBarrier;
    }
    return kExitOk;
  }

  int audit_only(std::string& message) {
    const PrescriptionPtr psi =
        make_prescription(config_.prescription, config_.prescription_parameters);
    return audit(*psi, message);
  }

  int identity_check(std::string& message) {
    const SphereGrid fine = grid_->refined();
    const Field<double> coarse_u = profile_field(*grid_, config_.profile);
    const Field<double> fine_u = profile_field(fine, config_.profile);
    IdentityResiduals coarse, refined, umbilic;
    try {
      coarse = identity_residuals(coarse_u, *grid_);
      refined = identity_residuals(fine_u, fine);
      umbilic = identity_residuals(Field<double>::Constant(grid_->size(), config_.profile.base),
                                   *grid_);
    } catch (const SpacelikeError& e) {
      message = std::string("profile is not spacelike: ") + e.what();
      return kExitConfig;
    }
    auto ratio = [](double a, double b) { return b > 0.0 ? number_or_null(a / b) : ojson(nullptr); };
    summary_["identity"] = {
        {"profile", {{"base", config_.profile.base}, {"amplitude", config_.profile.amplitude}}},
        {"coarse", residuals_json(coarse)},
        {"refined", residuals_json(refined)},
        {"ratio",
         {{"r_eta", ratio(coarse.r_eta, refined.r_eta)},
          {"r_tau1", ratio(coarse.r_tau1, refined.r_tau1)},
          {"r_tau2", ratio(coarse.r_tau2, refined.r_tau2)},
          {"codazzi", ratio(coarse.codazzi, refined.codazzi)}}},
        {"umbilic", residuals_json(umbilic)}};
    write_fields(dir() / "fields.csv", *grid_, coarse_u, compute_geometry(coarse_u, *grid_),
                 Field<double>::Zero(grid_->size()));
    message = "identity residuals written";
    return kExitOk;
  }

  int solve(std::string& message) {
    const PrescriptionPtr psi =
        make_prescription(config_.prescription, config_.prescription_parameters);
    if (const int code = audit(*psi, message); code != kExitOk) return code;

    SolverConfig solver = config_.solver;
    solver.k = config_.k;
    const BarrierScan family = scan_family_barriers(*psi, solver.p, *grid_, config_.scan);
    summary_["barriers"] = {{"target", summary_["audit"]["barriers"]}, {"family", scan_json(family)}};
    if (!family.ok()) {
      message = "barrier scan failed: " + family.failure;
      return kExitBarrier;
    }
    const Barriers barriers = family.barriers();

    const CurvatureProblem problem(*grid_, config_.k, psi, solver.p);
    HomotopyState state;
    int code = kExitOk;
    try {
      state = run_homotopy(problem, solver, barriers);
      message = "solved";
    } catch (const ContinuationFailure& e) {
      state = e.partial();
      code = kExitContinuation;
      message = std::string("continuation failed: ") + e.what();
    } catch (const std::exception& e) {
      code = kExitContinuation;
      message = std::string("continuation failed: ") + e.what();
    }
    export_state(problem, state);
    return code;
  }

  void export_state(const CurvatureProblem& problem, const HomotopyState& state) {
    write_trace(dir() / "trace.csv", state.step_history);
    if (state.u.size() != grid_->size()) return;

    const InducedGeometry geom = compute_geometry(state.u, *grid_);
    const ResidualEval eval = problem.evaluate(state.u, state.t);
    write_fields(dir() / "fields.csv", *grid_, state.u, geom, eval.values);

    ojson final;
    final["t"] = state.t;
    final["residual_sup"] = number_or_null(eval.sup_norm());
    final["newton_iterations"] = state.newton_iters;
    final["accepted_steps"] = static_cast<int>(state.step_history.size());
    final["min_u"] = state.u.minCoeff();
    final["max_u"] = state.u.maxCoeff();
    try {
      final["maclaurin_margin"] = maclaurin_monitor(geom, config_.k);
    } catch (const AdmissibilityError&) {
      final["maclaurin_margin"] = nullptr;
    }
    final["jacobian_checks"] = state.jacobian_checks;
    final["max_jacobian_error"] = state.max_jacobian_error;
    summary_["monitor"] = monitor_json(state.monitor);
    summary_["final"] = final;
    say("t = " + fmt(state.t) + ", residual = " + fmt(eval.sup_norm()));
  }

  const RunConfig& config_;
  std::ostream* log_;
  std::optional<SphereGrid> grid_;
  ojson summary_;
};

}  // namespace

int run(const RunConfig& config, std::ostream* log) {
  try {
    config.validate();
  } catch (const ConfigError& e) {
    if (log) *log << e.what() << '\n';
    return kExitConfig;
  }
  return Run(config, log).execute();
}

std::vector<double> FieldsTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) {
      std::vector<double> out;
      out.reserve(rows.size());
      for (const auto& row : rows) out.push_back(row[c]);
      return out;
    }
  throw std::out_of_range("no column '" + name + "'");
}

FieldsTable read_fields(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  FieldsTable table;
  std::string line;
  auto split = [](const std::string& text) {
    std::vector<std::string> cells;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (std::getline(in, line)) table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& cell : split(line)) row.push_back(std::strtod(cell.c_str(), nullptr));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace kcurv
