#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "conecap/scenario.hpp"

namespace {

int dispatch(const std::string& config, const conecap::RunOptions& opt,
             conecap::ScenarioKind expected) {
  conecap::Scenario sc = conecap::parse_scenario_file(config);
  if (sc.kind != expected) {
    std::fprintf(stderr, "error: %s is not a config of the requested kind\n", config.c_str());
    return 2;
  }
  return conecap::run_scenario(sc, opt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conecap: capacities, curvature flows and mass checks for free-boundary "
               "hypersurfaces in convex cones"};
  app.require_subcommand(1);

  conecap::RunOptions opt;
  std::string config;
  app.add_option("--out-dir", opt.out_dir, "directory for artifacts")->capture_default_str();
  bool no_timestamp = false;
  app.add_flag("--no-timestamp", no_timestamp, "omit the generated_at field from reports");
  app.add_option("--grid-scale", opt.grid_scale, "multiply both grid resolutions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* cap = app.add_subcommand("cap-solve", "solve the exterior problem and report capacities");
  cap->add_option("config", config, "scenario JSON file")->required();
  auto* imcf = app.add_subcommand("imcf-run", "integrate the inverse mean curvature flow");
  imcf->add_option("config", config, "scenario JSON file")->required();
  auto* pen = app.add_subcommand("penrose-check", "run the mass and capacity comparisons");
  pen->add_option("config", config, "scenario JSON file")->required();
  auto* sweep = app.add_subcommand("sweep", "expand a parameter sweep into a combined CSV");
  sweep->add_option("config", config, "scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);
  opt.timestamp = !no_timestamp;

  try {
    if (cap->parsed()) return dispatch(config, opt, conecap::ScenarioKind::Capacity);
    if (imcf->parsed()) return dispatch(config, opt, conecap::ScenarioKind::Imcf);
    if (pen->parsed()) return dispatch(config, opt, conecap::ScenarioKind::Penrose);
    if (sweep->parsed()) return dispatch(config, opt, conecap::ScenarioKind::Sweep);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
