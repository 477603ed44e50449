#pragma once

// Mode pipelines behind the command-line tool. Each run writes its artifacts
// into the configured output directory:
//   fields.csv   per-node coordinates, u, tau, eta, principal curvatures, residual
//   trace.csv    one row per accepted continuation step
//   summary.json audit, barriers, monitor bounds, final norms, config echo

#include "kcurv/run_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace kcurv {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitAudit = 3,
  kExitBarrier = 4,
  kExitContinuation = 5,
};

/// Runs the configured mode and returns its exit code. Progress goes to `log`
/// (may be null). The summary is written even when the run fails.
int run(const RunConfig& config, std::ostream* log);

/// Reads a fields.csv written by `run` back into (header, rows).
struct FieldsTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};
FieldsTable read_fields(const std::string& path);

}  // namespace kcurv
