#pragma once

// Run configuration: a JSON document with grid, prescription, solver, audit
// and output sections. Unknown or duplicate keys are rejected.

#include "kcurv/continuation_solver.hpp"
#include "kcurv/prescription.hpp"

#include <json.hpp>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kcurv {

inline constexpr const char* kVersion = "kcurv 0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { Solve, AuditOnly, IdentityCheck };

std::string to_string(RunMode mode);
RunMode parse_mode(const std::string& text);

/// Test profile for identity checks: u = base + amplitude * Y, with
/// Y = cos(theta) on S^1 and Y = P_2(cos(phi)) on S^2.
struct ProfileConfig {
  double base = 0.8;
  double amplitude = 0.1;
};

struct RunConfig {
  RunMode mode = RunMode::Solve;
  int dim = 2;
  std::vector<Index> resolution{32, 64};
  int k = 2;
  std::string prescription = "model";
  std::map<std::string, double> prescription_parameters;
  SolverConfig solver;
  AuditBox audit;
  BarrierScanOptions scan;
  ProfileConfig profile;
  std::string output_directory = "kcurv_out";

  /// Full document with every default filled in; parse_config_text(echo())
  /// reproduces this configuration.
  nlohmann::ordered_json echo() const;

  /// Cross-field checks (k <= n, resolution shape, solver ranges).
  void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

}  // namespace kcurv
