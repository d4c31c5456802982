#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "conecap/scenario.hpp"

using namespace conecap;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const char* leaf) {
  auto p = std::filesystem::temp_directory_path() / leaf;
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("minimal configs parse with documented defaults") {
  const Scenario sc = parse_scenario(json{{"kind", "capacity"}});
  CHECK(sc.grid.m_theta == 128);
  CHECK(sc.grid.m_s == 256);
  CHECK(!sc.grid.s_max.has_value());
  CHECK(sc.cone.n == 3);
  CHECK(sc.cone.theta0_deg == 90.0);
  CHECK(sc.surface.type == SurfaceType::Cap);
  const Scenario fl = parse_scenario(json{{"kind", "imcf"}});
  CHECK(fl.flow.dt == 1e-3);
  CHECK(fl.flow.t_end == 6.0);
}

TEST_CASE("strict parsing rejects bad configs with diagnostics") {
  CHECK_THROWS_AS(parse_scenario(json{{"kind", "capacity"}, {"typo", 1}}), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(json{{"kind", "nope"}}), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(json{{"kind", "capacity"}, {"cone", {{"theta0_deg", 120.0}}}}),
                  ScenarioError);
  CHECK_THROWS_AS(
      parse_scenario(json{{"kind", "capacity"},
                          {"surface", {{"type", "perturbed_cap"}, {"eps", 0.7}}}}),
      ScenarioError);
  CHECK_THROWS_AS(
      parse_scenario(json{{"kind", "capacity"},
                          {"surface", {{"type", "perturbed_cap"}, {"mode", 3}}}}),
      ScenarioError);
  CHECK_THROWS_AS(parse_scenario(json{{"kind", "capacity"}, {"schwarzschild", {{"mass", 1.0}}}}),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario(json{{"kind", "penrose"}, {"surface", {{"type", "cap"}}}}),
                  ScenarioError);
  try {
    parse_scenario(json{{"kind", "capacity"}, {"grid", {{"m_theta", 13}}}});
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("m_theta") != std::string::npos);
  }
}

TEST_CASE("capacity scenario: equality verdicts on a cap and determinism") {
  const json doc = {{"kind", "capacity"},
                    {"surface", {{"type", "cap"}, {"r", 1.0}}},
                    {"grid", {{"m_theta", 32}, {"m_s", 64}}},
                    {"output", "det"}};
  const Scenario sc = parse_scenario(doc);
  RunOptions opt;
  opt.timestamp = false;

  opt.out_dir = temp_dir("conecap_det_a").string();
  CHECK(run_scenario(sc, opt) == 0);
  const std::string a = slurp(std::filesystem::path(opt.out_dir) / "det_report.json");

  opt.out_dir = temp_dir("conecap_det_b").string();
  CHECK(run_scenario(sc, opt) == 0);
  const std::string b = slurp(std::filesystem::path(opt.out_dir) / "det_report.json");

  CHECK(a == b);  // byte-identical reports without the timestamp
  CHECK(a.find("\"verdict\": \"equality within tol\"") != std::string::npos);
  CHECK(a.find("generated_at") == std::string::npos);

  opt.timestamp = true;
  opt.out_dir = temp_dir("conecap_det_c").string();
  CHECK(run_scenario(sc, opt) == 0);
  CHECK(slurp(std::filesystem::path(opt.out_dir) / "det_report.json").find("generated_at") !=
        std::string::npos);
}

TEST_CASE("imcf scenario writes a trace and passes its checks") {
  const json doc = {{"kind", "imcf"},
                    {"cone", {{"n", 3}, {"theta0_deg", 60.0}}},
                    {"surface", {{"type", "perturbed_cap"}, {"r", 1.0}, {"eps", 0.2}, {"mode", 2}}},
                    {"grid", {{"m_theta", 64}}},
                    {"flow", {{"t_end", 1.0}, {"dt", 1e-3}}},
                    {"output", "flow"}};
  RunOptions opt;
  opt.timestamp = false;
  opt.out_dir = temp_dir("conecap_imcf").string();
  CHECK(run_scenario(parse_scenario(doc), opt) == 0);
  const std::string trace = slurp(std::filesystem::path(opt.out_dir) / "flow_trace.csv");
  CHECK(trace.rfind("t,area,I,h,umbilicity,area_ratio_err\n", 0) == 0);
  const std::string rep = slurp(std::filesystem::path(opt.out_dir) / "flow_report.json");
  CHECK(rep.find("\"h_monotone\": true") != std::string::npos);
}

TEST_CASE("penrose scenario on the model exits 0 with tiny margins") {
  const json doc = {{"kind", "penrose"},
                    {"schwarzschild", {{"mass", 2.0}}},
                    {"grid", {{"m_theta", 32}, {"m_s", 64}}},
                    {"output", "pen"}};
  RunOptions opt;
  opt.timestamp = false;
  opt.out_dir = temp_dir("conecap_pen").string();
  CHECK(run_scenario(parse_scenario(doc), opt) == 0);
  const json rep = json::parse(slurp(std::filesystem::path(opt.out_dir) / "pen_report.json"));
  CHECK(std::abs(double(rep["margin_mass_capacity"])) < 0.02);
  CHECK(bool(rep["u_lower_geq_2"]));
}

TEST_CASE("sweep expands the cross product into one CSV row per point") {
  const json doc = {{"kind", "sweep"},
                    {"output", "sw"},
                    {"base",
                     {{"kind", "capacity"},
                      {"surface", {{"type", "cap"}, {"r", 1.0}}},
                      {"grid", {{"m_theta", 16}, {"m_s", 32}}}}},
                    {"over",
                     {{"surface.r", {0.5, 1.0}}, {"cone.n", {3, 4}}}}};
  RunOptions opt;
  opt.timestamp = false;
  opt.out_dir = temp_dir("conecap_sweep").string();
  CHECK(run_scenario(parse_scenario(doc), opt) == 0);
  const std::string csv = slurp(std::filesystem::path(opt.out_dir) / "sw_sweep.csv");
  int rows = 0;
  for (char c : csv) rows += (c == '\n');
  CHECK(rows == 5);  // header + 4 points
  CHECK(csv.find("cone.n") != std::string::npos);
  CHECK(csv.find("cap_flux") != std::string::npos);
}

TEST_CASE("profile_csv surfaces round trip through a scenario") {
  const auto cone = ConeSpec::make(3, kPi_placeholder());
  (void)cone;
}
