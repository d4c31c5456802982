#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conecap/conformal_mass.hpp"
#include "conecap/imcf_flow.hpp"

namespace conecap {

using json = nlohmann::ordered_json;

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

enum class ScenarioKind { Capacity, Imcf, Penrose, Sweep };
enum class SurfaceType { Cap, PerturbedCap, ProfileCsv };

struct ConeConfig {
  int n = 3;
  double theta0_deg = 90.0;
};

struct SurfaceConfig {
  SurfaceType type = SurfaceType::Cap;
  double r = 1.0;
  double eps = 0.1;
  int mode = 2;
  std::string path;  // profile_csv only
};

struct GridConfig {
  int m_theta = 128;
  int m_s = 256;
  std::optional<double> s_max;  // default: max log rho + 4
};

struct FlowConfig {
  double t_end = 6.0;
  double dt = 1e-3;
};

struct ToleranceConfig {
  double inequality_slack = 1e-6;  // absolute slack added to every inequality
  double equality_rel = 5e-3;      // relative band for "equality within tol"
  double admissibility = 1e-3;
  double h_uptick = 1e-8;          // per-sample slack of the h monotonicity
  double growth_rel = 1e-6;        // relative slack of the exponential bound
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::Capacity;
  ConeConfig cone;
  SurfaceConfig surface;
  GridConfig grid;
  FlowConfig flow;
  double schwarzschild_mass = 2.0;
  ToleranceConfig tol;
  std::string output;      // artifact filename prefix
  bool emit_field_csv = false;
  // sweep only
  json sweep_base;
  std::map<std::string, std::vector<json>> sweep_over;
};

struct RunOptions {
  std::string out_dir = ".";
  bool timestamp = true;
  int grid_scale = 1;           // multiplies both grid resolutions
  bool write_artifacts = true;  // cleared for sweep points, which only feed rows
};

/// Strict parser: unknown keys are rejected, defaults are filled in, the
/// resolved form is echoed into every report.
Scenario parse_scenario(const json& doc);
Scenario parse_scenario_file(const std::string& path);

/// Dispatch a scenario, write its artifacts under out_dir and return the
/// process exit code: 0 iff every checked inequality holds within its
/// tolerance.
int run_scenario(const Scenario& sc, const RunOptions& opt);

// report builders, exposed for tests and the sweep driver
json capacity_report(const Scenario& sc, const RunOptions& opt, bool& ok);
json imcf_report(const Scenario& sc, const RunOptions& opt, bool& ok);
json penrose_report(const Scenario& sc, const RunOptions& opt, bool& ok);
json penrose_report_to_json(const PenroseReport& rep);

RadialGraph build_surface(const Scenario& sc, int m);

}  // namespace conecap
