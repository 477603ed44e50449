#include "kcurv/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<kcurv::Index> parse_resolution(const std::string& text) {
  std::vector<kcurv::Index> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    const long long v = std::stoll(cell, &used);
    if (used != cell.size()) throw kcurv::ConfigError("--resolution: bad value '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spacelike graphs of prescribed k-curvature in de Sitter space"};
  app.footer(
      "Exit codes:\n"
      "  0  success\n"
      "  2  configuration error (bad file, unknown or duplicate key, k > n)\n"
      "  3  structural audit failed\n"
      "  4  barrier scan failed\n"
      "  5  continuation failed (partial artifacts are still written)");

  std::string config_path, mode, resolution, out_dir;
  int k = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--mode", mode, "solve | audit-only | identity-check");
  app.add_option("--resolution", resolution, "grid override, e.g. 128 or 32,64");
  app.add_option("--k", k, "curvature order override");
  app.add_option("--out", out_dir, "output directory override");
  app.add_flag("--quiet", quiet, "suppress progress output");
  app.set_version_flag("--version", kcurv::kVersion);

  CLI11_PARSE(app, argc, argv);

  kcurv::RunConfig config;
  try {
    config = kcurv::parse_config(config_path);
    if (!mode.empty()) config.mode = kcurv::parse_mode(mode);
    if (!resolution.empty()) config.resolution = parse_resolution(resolution);
    if (app.count("--k")) config.k = k;
    if (!out_dir.empty()) config.output_directory = out_dir;
    config.validate();
  } catch (const kcurv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kcurv::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kcurv::kExitConfig;
  }
  return kcurv::run(config, quiet ? nullptr : &std::cout);
}
