#include "conecap/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>

namespace conecap {

namespace {

constexpr double kPi = std::numbers::pi;

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ScenarioError(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ScenarioError(where + ": unknown key \"" + item.key() + "\"");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T def) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw ScenarioError(std::string("invalid value for \"") + key + "\"");
  }
}

ConeConfig parse_cone(const json& j) {
  check_keys(j, "cone", {"n", "theta0_deg"});
  ConeConfig c;
  c.n = get_or(j, "n", 3);
  c.theta0_deg = get_or(j, "theta0_deg", 90.0);
  if (c.n < 3) throw ScenarioError("cone.n must be >= 3");
  if (!(c.theta0_deg > 0.0) || c.theta0_deg > 90.0) {
    throw ScenarioError("cone.theta0_deg must lie in (0, 90]: the cone must be convex");
  }
  return c;
}

SurfaceConfig parse_surface(const json& j) {
  check_keys(j, "surface", {"type", "r", "eps", "mode", "path"});
  SurfaceConfig s;
  const std::string type = get_or<std::string>(j, "type", "cap");
  if (type == "cap") {
    s.type = SurfaceType::Cap;
  } else if (type == "perturbed_cap") {
    s.type = SurfaceType::PerturbedCap;
  } else if (type == "profile_csv") {
    s.type = SurfaceType::ProfileCsv;
  } else {
    throw ScenarioError("surface.type must be cap, perturbed_cap or profile_csv");
  }
  s.r = get_or(j, "r", 1.0);
  s.eps = get_or(j, "eps", 0.1);
  s.mode = get_or(j, "mode", 2);
  s.path = get_or<std::string>(j, "path", "");
  if (!(s.r > 0.0)) throw ScenarioError("surface.r must be positive");
  if (s.type == SurfaceType::PerturbedCap) {
    if (!(std::abs(s.eps) < 0.5)) throw ScenarioError("surface.eps must satisfy |eps| < 0.5");
    if (s.mode < 2 || s.mode % 2 != 0) throw ScenarioError("surface.mode must be even and >= 2");
  }
  if (s.type == SurfaceType::ProfileCsv && s.path.empty()) {
    throw ScenarioError("surface.path is required for profile_csv");
  }
  return s;
}

GridConfig parse_grid(const json& j) {
  check_keys(j, "grid", {"m_theta", "m_s", "s_max"});
  GridConfig g;
  g.m_theta = get_or(j, "m_theta", 128);
  g.m_s = get_or(j, "m_s", 256);
  if (j.contains("s_max")) g.s_max = j.at("s_max").get<double>();
  if (g.m_theta < 8 || g.m_theta % 4 != 0) {
    throw ScenarioError("grid.m_theta must be a multiple of 4, >= 8");
  }
  if (g.m_s < 8 || g.m_s % 2 != 0) throw ScenarioError("grid.m_s must be even and >= 8");
  return g;
}

FlowConfig parse_flow(const json& j) {
  check_keys(j, "flow", {"t_end", "dt"});
  FlowConfig f;
  f.t_end = get_or(j, "t_end", 6.0);
  f.dt = get_or(j, "dt", 1e-3);
  if (!(f.t_end > 0.0)) throw ScenarioError("flow.t_end must be positive");
  if (!(f.dt > 0.0)) throw ScenarioError("flow.dt must be positive");
  return f;
}

ToleranceConfig parse_tolerances(const json& j) {
  check_keys(j, "tolerances",
             {"inequality_slack", "equality_rel", "admissibility", "h_uptick", "growth_rel"});
  ToleranceConfig t;
  t.inequality_slack = get_or(j, "inequality_slack", 1e-6);
  t.equality_rel = get_or(j, "equality_rel", 5e-3);
  t.admissibility = get_or(j, "admissibility", 1e-3);
  t.h_uptick = get_or(j, "h_uptick", 1e-8);
  t.growth_rel = get_or(j, "growth_rel", 1e-6);
  return t;
}

std::string kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Capacity: return "capacity";
    case ScenarioKind::Imcf: return "imcf";
    case ScenarioKind::Penrose: return "penrose";
    case ScenarioKind::Sweep: return "sweep";
  }
  return "?";
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  check_keys(doc, "scenario",
             {"kind", "cone", "surface", "grid", "flow", "schwarzschild", "tolerances", "output",
              "emit_field_csv", "base", "over"});
  Scenario sc;
  const std::string kind = get_or<std::string>(doc, "kind", "");
  if (kind == "capacity") {
    sc.kind = ScenarioKind::Capacity;
  } else if (kind == "imcf") {
    sc.kind = ScenarioKind::Imcf;
  } else if (kind == "penrose") {
    sc.kind = ScenarioKind::Penrose;
  } else if (kind == "sweep") {
    sc.kind = ScenarioKind::Sweep;
  } else {
    throw ScenarioError("kind must be one of capacity, imcf, penrose, sweep");
  }

  if (sc.kind == ScenarioKind::Sweep) {
    if (!doc.contains("base") || !doc.contains("over")) {
      throw ScenarioError("sweep scenarios need \"base\" and \"over\"");
    }
    sc.sweep_base = doc.at("base");
    const json& over = doc.at("over");
    if (!over.is_object() || over.empty()) {
      throw ScenarioError("sweep.over must map parameter paths to value lists");
    }
    for (const auto& item : over.items()) {
      if (!item.value().is_array() || item.value().empty()) {
        throw ScenarioError("sweep.over." + item.key() + " must be a non-empty array");
      }
      sc.sweep_over[item.key()] = std::vector<json>(item.value().begin(), item.value().end());
    }
    // validate every expanded point up front
    json probe = sc.sweep_base;
    parse_scenario(probe);
    sc.output = get_or<std::string>(doc, "output", "sweep");
    return sc;
  }
  if (doc.contains("base") || doc.contains("over")) {
    throw ScenarioError("\"base\"/\"over\" are only valid for sweep scenarios");
  }

  sc.cone = doc.contains("cone") ? parse_cone(doc.at("cone")) : ConeConfig{};
  sc.grid = doc.contains("grid") ? parse_grid(doc.at("grid")) : GridConfig{};
  sc.tol = doc.contains("tolerances") ? parse_tolerances(doc.at("tolerances")) : ToleranceConfig{};
  sc.flow = doc.contains("flow") ? parse_flow(doc.at("flow")) : FlowConfig{};
  sc.emit_field_csv = get_or(doc, "emit_field_csv", false);
  sc.output = get_or<std::string>(doc, "output", kind_name(sc.kind));

  if (sc.kind == ScenarioKind::Penrose) {
    if (doc.contains("surface")) {
      throw ScenarioError("penrose scenarios derive the surface from the model mass");
    }
    if (std::abs(sc.cone.theta0_deg - 90.0) > 1e-12) {
      throw ScenarioError("penrose scenarios live on the half-space: theta0_deg must be 90");
    }
    const json& s = doc.contains("schwarzschild") ? doc.at("schwarzschild") : json::object();
    check_keys(s, "schwarzschild", {"mass"});
    sc.schwarzschild_mass = get_or(s, "mass", 2.0);
    if (!(sc.schwarzschild_mass > 0.0)) throw ScenarioError("schwarzschild.mass must be positive");
  } else {
    if (doc.contains("schwarzschild")) {
      throw ScenarioError("schwarzschild block is only valid for penrose scenarios");
    }
    if (doc.contains("surface")) sc.surface = parse_surface(doc.at("surface"));
  }
  return sc;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const std::exception& e) {
    throw ScenarioError("config parse error in " + path + ": " + e.what());
  }
  return parse_scenario(doc);
}

RadialGraph build_surface(const Scenario& sc, int m) {
  const ConeSpec cone = ConeSpec::make(sc.cone.n, sc.cone.theta0_deg * kPi / 180.0);
  switch (sc.surface.type) {
    case SurfaceType::Cap:
      return RadialGraph::cap(cone, sc.surface.r, m);
    case SurfaceType::PerturbedCap:
      return RadialGraph::perturbed_cap(cone, sc.surface.r, sc.surface.eps, sc.surface.mode, m);
    case SurfaceType::ProfileCsv: {
      RadialGraph g = read_profile_csv(cone, sc.surface.path);
      return g.m() == m ? g : g.resampled(m);
    }
  }
  throw ScenarioError("unreachable surface type");
}

namespace {

json scenario_echo(const Scenario& sc, const RunOptions& opt) {
  json e;
  e["kind"] = kind_name(sc.kind);
  e["cone"] = {{"n", sc.cone.n}, {"theta0_deg", sc.cone.theta0_deg}};
  if (sc.kind != ScenarioKind::Penrose) {
    json s;
    s["type"] = sc.surface.type == SurfaceType::Cap          ? "cap"
                : sc.surface.type == SurfaceType::PerturbedCap ? "perturbed_cap"
                                                               : "profile_csv";
    s["r"] = sc.surface.r;
    if (sc.surface.type == SurfaceType::PerturbedCap) {
      s["eps"] = sc.surface.eps;
      s["mode"] = sc.surface.mode;
    }
    if (sc.surface.type == SurfaceType::ProfileCsv) s["path"] = sc.surface.path;
    e["surface"] = s;
  } else {
    e["schwarzschild"] = {{"mass", sc.schwarzschild_mass}};
  }
  e["grid"] = {{"m_theta", sc.grid.m_theta * opt.grid_scale},
               {"m_s", sc.grid.m_s * opt.grid_scale}};
  if (sc.grid.s_max) e["grid"]["s_max"] = *sc.grid.s_max;
  if (sc.kind == ScenarioKind::Imcf) {
    e["flow"] = {{"t_end", sc.flow.t_end}, {"dt", sc.flow.dt}};
  }
  e["tolerances"] = {{"inequality_slack", sc.tol.inequality_slack},
                     {"equality_rel", sc.tol.equality_rel},
                     {"admissibility", sc.tol.admissibility},
                     {"h_uptick", sc.tol.h_uptick},
                     {"growth_rel", sc.tol.growth_rel}};
  e["output"] = sc.output;
  return e;
}

void stamp(json& report, const RunOptions& opt) {
  if (!opt.timestamp) return;
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  report["generated_at"] = buf;
}

json check_entry(const std::string& relation, double lhs, double rhs, double slack,
                 double equality_rel, bool* all_hold) {
  // relation: "lhs<=rhs" or "lhs>=rhs"
  const bool ge = relation == ">=";
  const double margin = ge ? lhs - rhs : rhs - lhs;
  const bool holds = margin >= -slack;
  const bool equality =
      std::abs(lhs - rhs) <= equality_rel * std::max({std::abs(lhs), std::abs(rhs), 1e-30});
  if (!holds) *all_hold = false;
  json c;
  c["lhs"] = lhs;
  c["relation"] = ge ? ">=" : "<=";
  c["rhs"] = rhs;
  c["margin"] = margin;
  c["slack"] = slack;
  c["holds"] = holds;
  c["verdict"] = !holds ? "violated" : (equality ? "equality within tol" : "holds");
  return c;
}

std::filesystem::path artifact_path(const Scenario& sc, const RunOptions& opt,
                                    const std::string& suffix) {
  std::filesystem::create_directories(opt.out_dir);
  return std::filesystem::path(opt.out_dir) / (sc.output + suffix);
}

double default_s_max(const Scenario& sc, const RadialGraph& g) {
  return sc.grid.s_max ? *sc.grid.s_max : g.max_u() + 4.0;
}

}  // namespace

json capacity_report(const Scenario& sc, const RunOptions& opt, bool& ok) {
  const int mt = sc.grid.m_theta * opt.grid_scale;
  const int ms = sc.grid.m_s * opt.grid_scale;
  const RadialGraph graph = build_surface(sc, mt);
  const ConeSpec& cone = graph.cone();
  const int n = cone.n;

  const ExteriorGrid grid = ExteriorGrid::make(graph, default_s_max(sc, graph), ms);
  const PotentialField field = solve_mixed_bvp(grid);
  const CapacityResult cap = capacity_estimates(field);
  const SurfaceFunctionals sf = functionals(graph);
  const double capvol = capvol_lower_bound(field);

  bool all_hold = true;
  const double slack = sc.tol.inequality_slack + 2.0 * cap.error_estimate;
  json checks;
  checks["capacity_vs_total_mean_curvature"] =
      check_entry("<=", cap.cap_extrapolated, sf.total_mean_curvature / ((n - 1) * cone.alpha),
                  slack, sc.tol.equality_rel, &all_hold);
  checks["total_mean_curvature_vs_area"] = check_entry(
      ">=", sf.total_mean_curvature / (2.0 * (n - 1) * cone.alpha),
      0.5 * std::pow(sf.area / cone.alpha, double(n - 2) / (n - 1)), sc.tol.inequality_slack,
      sc.tol.equality_rel, &all_hold);
  checks["capacity_vs_volume"] =
      check_entry(">=", cap.cap_extrapolated,
                  std::pow(sf.volume * n / cone.alpha, double(n - 2) / n), slack,
                  sc.tol.equality_rel, &all_hold);
  checks["radius_profile_vs_energy"] =
      check_entry("<=", capvol, cap.cap_energy, slack, sc.tol.equality_rel, &all_hold);
  checks["area_vs_isoperimetric_bound"] =
      check_entry(">=", sf.area, isoperimetric_bound(cone, sf.volume), sc.tol.inequality_slack,
                  sc.tol.equality_rel, &all_hold);
  {
    json c;
    c["discrepancy"] = cap.discrepancy;
    c["holds"] = cap.discrepancy < 0.01;
    if (!(cap.discrepancy < 0.01)) all_hold = false;
    checks["energy_flux_agreement"] = c;
  }

  json rep;
  rep["kind"] = "capacity";
  rep["scenario"] = scenario_echo(sc, opt);
  rep["n"] = n;
  rep["alpha"] = cone.alpha;
  rep["area"] = sf.area;
  rep["volume"] = sf.volume;
  rep["total_mean_curvature"] = sf.total_mean_curvature;
  rep["min_H"] = sf.min_H;
  rep["umbilicity_residual"] = sf.umbilicity_residual;
  rep["cap_energy"] = cap.cap_energy;
  rep["cap_flux"] = cap.cap_flux;
  rep["cap_extrapolated"] = cap.cap_extrapolated;
  rep["discrepancy"] = cap.discrepancy;
  rep["error_estimate"] = cap.error_estimate;
  rep["radius_profile_bound"] = capvol;
  rep["checks"] = checks;
  rep["all_hold"] = all_hold;
  ok = all_hold;

  if (sc.emit_field_csv && opt.write_artifacts) {
    write_field_csv(field, artifact_path(sc, opt, "_field.csv").string());
    rep["field_csv"] = (sc.output + "_field.csv");
  }
  return rep;
}

json imcf_report(const Scenario& sc, const RunOptions& opt, bool& ok) {
  const int mt = sc.grid.m_theta * opt.grid_scale;
  const RadialGraph graph = build_surface(sc, mt);
  const ConeSpec& cone = graph.cone();
  const int n = cone.n;

  const FlowTrace trace = run(graph, sc.flow.t_end, sc.flow.dt);
  if (opt.write_artifacts) {
    write_trace_csv(trace, artifact_path(sc, opt, "_trace.csv").string());
  }

  bool all_hold = true;
  double max_uptick = 0.0;
  for (size_t k = 1; k < trace.samples.size(); ++k) {
    max_uptick = std::max(max_uptick, trace.samples[k].h - trace.samples[k - 1].h);
  }
  const bool h_monotone = max_uptick <= sc.tol.h_uptick;

  const double rate = double(n - 2) / (n - 1);
  double max_growth_excess = 0.0;
  const double I0 = trace.samples.front().total_mean_curvature;
  for (const FlowSample& s : trace.samples) {
    const double bound = I0 * std::exp(rate * s.t) * (1.0 + sc.tol.growth_rel);
    max_growth_excess = std::max(max_growth_excess, s.total_mean_curvature / bound - 1.0);
  }
  const bool growth_ok = max_growth_excess <= 0.0;

  double area_err = 0.0;
  for (const FlowSample& s : trace.samples) area_err = std::max(area_err, s.area_ratio_err);
  const bool area_ok = area_err <= std::max(sc.flow.dt, 1e-3);

  const double h_limit = (n - 1) * std::pow(cone.alpha, 1.0 / (n - 1));
  all_hold = h_monotone && growth_ok && area_ok;

  json rep;
  rep["kind"] = "imcf";
  rep["scenario"] = scenario_echo(sc, opt);
  rep["n"] = n;
  rep["alpha"] = cone.alpha;
  rep["samples"] = trace.samples.size();
  rep["r_infinity"] = trace.r_infinity;
  rep["r_infinity_expected"] = trace.r_infinity_expected;
  rep["r_infinity_normalization"] = "round-limit area interpreted as alpha";
  rep["h_initial"] = trace.samples.front().h;
  rep["h_final"] = trace.samples.back().h;
  rep["h_limit"] = h_limit;
  rep["h_monotone"] = h_monotone;
  rep["max_h_uptick"] = max_uptick;
  rep["growth_bound_holds"] = growth_ok;
  rep["max_growth_excess"] = max_growth_excess;
  rep["area_law_max_rel_err"] = area_err;
  rep["area_law_holds"] = area_ok;
  rep["umbilicity_initial"] = trace.samples.front().umbilicity;
  rep["umbilicity_final"] = trace.samples.back().umbilicity;
  rep["sup_variation_initial"] = trace.sup_variation_initial;
  rep["sup_variation_final"] = trace.sup_variation_final;
  rep["final_dt"] = trace.final_dt;
  if (opt.write_artifacts) rep["trace_csv"] = sc.output + "_trace.csv";
  rep["all_hold"] = all_hold;
  ok = all_hold;
  return rep;
}

json penrose_report_to_json(const PenroseReport& r) {
  json j;
  j["n"] = r.n;
  j["mass_expansion"] = r.mass_expansion;
  j["mass_identity"] = r.mass_identity;
  j["mass_flux"] = r.mass_flux;
  j["expansion_residual"] = r.expansion_residual;
  j["expansion_degraded"] = r.expansion_degraded;
  j["cap_flat"] = r.cap_flat;
  j["cap_flat_extrapolated"] = r.cap_flat_extrapolated;
  j["cap_conformal"] = r.cap_conformal;
  j["cap_conformal_extrapolated"] = r.cap_conformal_extrapolated;
  j["vol_term"] = r.vol_term;
  j["volume"] = r.volume;
  j["u_lower"] = r.u_lower;
  j["in_M_interior"] = r.in_M_interior;
  j["in_M_wall"] = r.in_M_wall;
  j["sigma_mean_convex"] = r.sigma_mean_convex;
  j["sigma_g_minimal"] = r.sigma_g_minimal;
  j["wall_g_mean_convex"] = r.wall_g_mean_convex;
  j["u_lower_geq_2"] = r.u_lower_geq_2;
  j["max_laplacian"] = r.max_laplacian;
  j["min_wall_flux"] = r.min_wall_flux;
  j["max_abs_R_g"] = r.max_abs_R_g;
  j["max_abs_H_g_sigma"] = r.max_abs_H_g_sigma;
  j["max_abs_H_g_wall"] = r.max_abs_H_g_wall;
  j["margin_mass_capacity"] = r.margin_mass_capacity;
  j["margin_volumetric"] = r.margin_volumetric;
  j["margin_cap_comparison"] = r.margin_cap_comparison;
  j["margin_mass_total_curvature"] = r.margin_mass_total_curvature;
  j["margin_mass_capacity_weighted"] = r.margin_mass_capacity_weighted;
  j["margin_volumetric_weighted"] = r.margin_volumetric_weighted;
  j["tol_admissibility"] = r.tol_admissibility;
  j["tol_equality"] = r.tol_equality;
  return j;
}

json penrose_report(const Scenario& sc, const RunOptions& opt, bool& ok) {
  const int mt = sc.grid.m_theta * opt.grid_scale;
  const int ms = sc.grid.m_s * opt.grid_scale;
  const HalfSchwarzschild model{sc.cone.n, sc.schwarzschild_mass};
  const ConeSpec cone = ConeSpec::make(sc.cone.n, 0.5 * kPi);
  const RadialGraph horizon = RadialGraph::cap(cone, model.horizon_radius(), mt);
  const double s_max = sc.grid.s_max ? *sc.grid.s_max : horizon.max_u() + 4.0;
  const ExteriorGrid grid = ExteriorGrid::make(horizon, s_max, ms);
  const ConformalFactorField field = schwarzschild_field(model, grid);
  const PenroseReport rep = penrose_check(field, sc.tol.admissibility, sc.tol.equality_rel);

  const double m = rep.mass_expansion;
  const double slack = sc.tol.inequality_slack + sc.tol.equality_rel * std::abs(m);
  bool all_hold = true;
  json checks;
  if (rep.u_lower_geq_2) {
    checks["mass_vs_conformal_capacity"] = check_entry(
        ">=", m, rep.cap_conformal_extrapolated, slack, sc.tol.equality_rel, &all_hold);
    checks["mass_vs_volume_term"] =
        check_entry(">=", m, rep.vol_term, slack, sc.tol.equality_rel, &all_hold);
  } else {
    checks["mass_vs_conformal_capacity_weighted"] = check_entry(
        ">=", m, 2.0 * rep.u_lower / (2.0 + rep.u_lower) * rep.cap_conformal_extrapolated, slack,
        sc.tol.equality_rel, &all_hold);
    checks["mass_vs_volume_term_weighted"] = check_entry(
        ">=", m, rep.u_lower * 0.5 * rep.vol_term, slack, sc.tol.equality_rel, &all_hold);
  }
  checks["capacity_comparison"] =
      check_entry("<=", rep.cap_conformal_extrapolated, rep.cap_flat_extrapolated + 0.5 * m, slack,
                  sc.tol.equality_rel, &all_hold);
  checks["mass_vs_total_mean_curvature"] =
      check_entry(">=", m, m - rep.margin_mass_total_curvature, slack, sc.tol.equality_rel,
                  &all_hold);

  json j = penrose_report_to_json(rep);
  j["kind"] = "penrose";
  j["scenario"] = scenario_echo(sc, opt);
  j["checks"] = checks;
  j["all_hold"] = all_hold;
  ok = all_hold;
  return j;
}

namespace {

void write_json(const json& j, const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

json get_path(const json& j, const std::string& dotted) {
  const json* cur = &j;
  size_t pos = 0;
  while (pos != std::string::npos) {
    const size_t dot = dotted.find('.', pos);
    const std::string key = dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (!cur->contains(key)) return json();
    cur = &cur->at(key);
    pos = dot == std::string::npos ? dot : dot + 1;
  }
  return *cur;
}

void set_path(json& j, const std::string& dotted, const json& value) {
  json* cur = &j;
  size_t pos = 0;
  while (true) {
    const size_t dot = dotted.find('.', pos);
    const std::string key = dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    pos = dot + 1;
  }
}

// scalar summary columns per point for the combined sweep CSV
std::vector<std::pair<std::string, std::string>> summarize(const json& rep) {
  std::vector<std::pair<std::string, std::string>> cols;
  auto add = [&](const char* k) {
    if (rep.contains(k)) {
      cols.emplace_back(k, rep.at(k).dump());
    }
  };
  for (const char* k :
       {"cap_energy", "cap_flux", "cap_extrapolated", "discrepancy", "area", "volume",
        "total_mean_curvature", "r_infinity", "h_initial", "h_final", "h_limit", "max_h_uptick",
        "area_law_max_rel_err", "mass_expansion", "mass_flux", "mass_identity", "cap_flat",
        "cap_conformal", "vol_term", "margin_mass_capacity", "margin_volumetric",
        "margin_cap_comparison", "margin_mass_total_curvature", "all_hold"}) {
    add(k);
  }
  return cols;
}

}  // namespace

int run_scenario(const Scenario& sc, const RunOptions& opt) {
  if (sc.kind == ScenarioKind::Sweep) {
    // expand the cross product in deterministic (sorted key) order
    std::vector<std::string> keys;
    for (const auto& kv : sc.sweep_over) keys.push_back(kv.first);
    std::vector<json> points;
    std::vector<json> current;
    std::function<void(size_t, json)> expand = [&](size_t k, json doc) {
      if (k == keys.size()) {
        points.push_back(std::move(doc));
        return;
      }
      for (const json& v : sc.sweep_over.at(keys[k])) {
        json next = doc;
        set_path(next, keys[k], v);
        expand(k + 1, std::move(next));
      }
    };
    expand(0, sc.sweep_base);

    std::vector<json> reports(points.size());
    std::vector<char> oks(points.size(), 0);
    std::vector<std::string> errors(points.size());
    std::atomic<size_t> cursor{0};
    const unsigned workers =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                           std::min<size_t>(points.size(), 8));
    auto work = [&]() {
      while (true) {
        const size_t i = cursor.fetch_add(1);
        if (i >= points.size()) break;
        try {
          Scenario point = parse_scenario(points[i]);
          bool ok = false;
          RunOptions silent = opt;
          silent.write_artifacts = false;
          switch (point.kind) {
            case ScenarioKind::Capacity:
              reports[i] = capacity_report(point, silent, ok);
              break;
            case ScenarioKind::Imcf:
              reports[i] = imcf_report(point, silent, ok);
              break;
            case ScenarioKind::Penrose:
              reports[i] = penrose_report(point, silent, ok);
              break;
            default:
              throw ScenarioError("sweep points cannot be sweeps");
          }
          oks[i] = ok ? 1 : 0;
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    // combined CSV, one row per point
    std::filesystem::create_directories(opt.out_dir);
    const auto csv_path = std::filesystem::path(opt.out_dir) / (sc.output + "_sweep.csv");
    std::ofstream csv(csv_path);
    csv.precision(17);
    csv << "index";
    for (const auto& k : keys) csv << ',' << k;
    const auto head = summarize(reports.empty() ? json::object() : reports[0]);
    for (const auto& kv : head) csv << ',' << kv.first;
    csv << ",error\n";
    bool all_ok = true;
    for (size_t i = 0; i < points.size(); ++i) {
      csv << i;
      for (const auto& k : keys) csv << ',' << get_path(points[i], k).dump();
      const auto cols = summarize(reports[i]);
      for (const auto& kv : head) {
        bool found = false;
        for (const auto& actual : cols) {
          if (actual.first == kv.first) {
            csv << ',' << actual.second;
            found = true;
            break;
          }
        }
        if (!found) csv << ',';
      }
      csv << ',' << (errors[i].empty() ? "" : "\"" + errors[i] + "\"") << '\n';
      if (!errors[i].empty() || !oks[i]) all_ok = false;
    }
    return all_ok ? 0 : 1;
  }

  bool ok = false;
  json rep;
  switch (sc.kind) {
    case ScenarioKind::Capacity:
      rep = capacity_report(sc, opt, ok);
      break;
    case ScenarioKind::Imcf:
      rep = imcf_report(sc, opt, ok);
      break;
    case ScenarioKind::Penrose:
      rep = penrose_report(sc, opt, ok);
      break;
    default:
      return 2;
  }
  stamp(rep, opt);
  write_json(rep, artifact_path(sc, opt, "_report.json"));
  return ok ? 0 : 1;
}

}  // namespace conecap
