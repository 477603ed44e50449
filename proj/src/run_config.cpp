#include "kcurv/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace kcurv {

using nlohmann::json;

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Solve: return "solve";
    case RunMode::AuditOnly: return "audit-only";
    case RunMode::IdentityCheck: return "identity-check";
  }
  return "solve";
}

RunMode parse_mode(const std::string& text) {
  if (text == "solve") return RunMode::Solve;
  if (text == "audit-only") return RunMode::AuditOnly;
  if (text == "identity-check") return RunMode::IdentityCheck;
  throw ConfigError("mode: unknown value '" + text + "' (solve | audit-only | identity-check)");
}

namespace {

// Reads keys out of one JSON object and rejects whatever is left over.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where("") + ": expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& child(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = child(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    return v.get<double>();
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = child(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return v.get<int>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = child(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& item : node_.items())
      if (!used_.count(item.key())) throw ConfigError(where(item.key()) + ": unknown key");
  }

  std::string where(const std::string& key) const {
    if (path_.empty()) return key;
    return key.empty() ? path_ : path_ + "." + key;
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

json parse_rejecting_duplicates(const std::string& text) {
  std::vector<std::set<std::string>> open_objects;
  json::parser_callback_t guard = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        open_objects.emplace_back();
        break;
      case json::parse_event_t::object_end:
        open_objects.pop_back();
        break;
      case json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        if (!open_objects.back().insert(key).second)
          throw ConfigError(key + ": duplicate key");
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(text, guard);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  const json doc = parse_rejecting_duplicates(text);
  Section root(doc, "");
  RunConfig cfg;

  cfg.mode = parse_mode(root.text("mode", "solve"));

  if (!root.has("grid")) throw ConfigError("grid: missing required section");
  {
    Section grid(root.child("grid"), "grid");
    if (!grid.has("dim")) throw ConfigError("grid.dim: missing");
    if (!grid.has("resolution")) throw ConfigError("grid.resolution: missing");
    cfg.dim = grid.integer("dim", 2);
    const json& res = grid.child("resolution");
    cfg.resolution.clear();
    if (res.is_number_integer()) {
      cfg.resolution.push_back(res.get<Index>());
    } else if (res.is_array()) {
      for (const auto& v : res) {
        if (!v.is_number_integer()) throw ConfigError("grid.resolution: expected integers");
        cfg.resolution.push_back(v.get<Index>());
      }
    } else {
      throw ConfigError("grid.resolution: expected an integer or an array of integers");
    }
    grid.finish();
  }

  cfg.k = root.integer("k", std::min(2, cfg.dim));

  if (!root.has("prescription")) throw ConfigError("prescription: missing required section");
  {
    Section psi(root.child("prescription"), "prescription");
    if (!psi.has("name")) throw ConfigError("prescription.name: missing");
    cfg.prescription = psi.text("name", "model");
    if (psi.has("parameters")) {
      Section params(psi.child("parameters"), "prescription.parameters");
      for (const auto& item : psi.child("parameters").items())
        cfg.prescription_parameters[item.key()] = params.number(item.key(), 0.0);
      params.finish();
    }
    psi.finish();
  }

  if (root.has("solver")) {
    Section s(root.child("solver"), "solver");
    SolverConfig& sc = cfg.solver;
    sc.p = s.number("p", sc.p);
    sc.tol_newton = s.number("tol_newton", sc.tol_newton);
    sc.max_newton = s.integer("max_newton", sc.max_newton);
    sc.dt_init = s.number("dt_init", sc.dt_init);
    sc.dt_min = s.number("dt_min", sc.dt_min);
    sc.dt_max = s.number("dt_max", sc.dt_max);
    sc.dt_grow = s.number("dt_grow", sc.dt_grow);
    sc.fast_iterations = s.integer("fast_iterations", sc.fast_iterations);
    sc.backtrack = s.number("backtrack", sc.backtrack);
    sc.min_step = s.number("min_step", sc.min_step);
    sc.C_tau = s.number("C_tau", sc.C_tau);
    sc.C_A = s.number("C_A", sc.C_A);
    sc.jacobian_check_every = s.integer("jacobian_check_every", sc.jacobian_check_every);
    s.finish();
  }

  if (root.has("audit")) {
    Section a(root.child("audit"), "audit");
    cfg.audit.r_lo = a.number("r_lo", cfg.audit.r_lo);
    cfg.audit.r_hi = a.number("r_hi", cfg.audit.r_hi);
    cfg.audit.tau_max = a.number("tau_max", cfg.audit.tau_max);
    cfg.audit.r_samples = a.integer("r_samples", cfg.audit.r_samples);
    cfg.audit.tau_samples = a.integer("tau_samples", cfg.audit.tau_samples);
    a.finish();
  }

  if (root.has("barrier_scan")) {
    Section b(root.child("barrier_scan"), "barrier_scan");
    cfg.scan.r_min = b.number("r_min", cfg.scan.r_min);
    cfg.scan.r_max = b.number("r_max", cfg.scan.r_max);
    cfg.scan.samples = b.integer("samples", cfg.scan.samples);
    b.finish();
  }

  if (root.has("profile")) {
    Section p(root.child("profile"), "profile");
    cfg.profile.base = p.number("base", cfg.profile.base);
    cfg.profile.amplitude = p.number("amplitude", cfg.profile.amplitude);
    p.finish();
  }

  if (root.has("output")) {
    Section o(root.child("output"), "output");
    cfg.output_directory = o.text("directory", cfg.output_directory);
    o.finish();
  }

  root.finish();
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void RunConfig::validate() const {
  if (dim != 1 && dim != 2) throw ConfigError("grid.dim: must be 1 or 2");
  if (resolution.size() != std::size_t(dim))
    throw ConfigError("grid.resolution: expected " + std::to_string(dim) + " value(s)");
  if (k < 1 || k > dim)
    throw ConfigError("k: must satisfy 1 <= k <= n = " + std::to_string(dim));
  try {
    (void)make_prescription(prescription, prescription_parameters);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("prescription: ") + e.what());
  }
  SolverConfig sc = solver;
  sc.k = k;
  try {
    sc.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  if (!(audit.r_lo > 0.0 && audit.r_hi > audit.r_lo))
    throw ConfigError("audit: need 0 < r_lo < r_hi");
  if (!(audit.tau_max >= 2.0)) throw ConfigError("audit.tau_max: must be >= 2");
  if (audit.r_samples < 2 || audit.tau_samples < 3)
    throw ConfigError("audit: need r_samples >= 2 and tau_samples >= 3");
  if (!(scan.r_min > 0.0 && scan.r_max > scan.r_min) || scan.samples < 2)
    throw ConfigError("barrier_scan: need 0 < r_min < r_max and samples >= 2");
  if (output_directory.empty()) throw ConfigError("output.directory: must not be empty");
}

nlohmann::ordered_json RunConfig::echo() const {
  nlohmann::ordered_json doc;
  doc["mode"] = to_string(mode);
  doc["grid"] = {{"dim", dim}, {"resolution", resolution}};
  doc["k"] = k;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [key, value] : make_prescription(prescription, prescription_parameters)->parameters())
    params[key] = value;
  doc["prescription"] = {{"name", prescription}, {"parameters", params}};
  doc["solver"] = {{"p", solver.p},
                   {"tol_newton", solver.tol_newton},
                   {"max_newton", solver.max_newton},
                   {"dt_init", solver.dt_init},
                   {"dt_min", solver.dt_min},
                   {"dt_max", solver.dt_max},
                   {"dt_grow", solver.dt_grow},
                   {"fast_iterations", solver.fast_iterations},
                   {"backtrack", solver.backtrack},
                   {"min_step", solver.min_step},
                   {"C_tau", solver.C_tau},
                   {"C_A", solver.C_A},
                   {"jacobian_check_every", solver.jacobian_check_every}};
  doc["audit"] = {{"r_lo", audit.r_lo},
                  {"r_hi", audit.r_hi},
                  {"tau_max", audit.tau_max},
                  {"r_samples", audit.r_samples},
                  {"tau_samples", audit.tau_samples}};
  doc["barrier_scan"] = {{"r_min", scan.r_min}, {"r_max", scan.r_max}, {"samples", scan.samples}};
  doc["profile"] = {{"base", profile.base}, {"amplitude", profile.amplitude}};
  doc["output"] = {{"directory", output_directory}};
  return doc;
}

}  // namespace kcurv
