#pragma once

#include <functional>
#include <string>
#include <vector>

#include "conecap/capacity_solver.hpp"

namespace conecap {

/// Exterior of the coordinate half-ball of radius (m/2)^(1/(n-2)) in the
/// half-space, with conformal factor u = 1 + (m/2)|x|^(2-n).  The equality
/// model of every mass inequality in this project.
struct HalfSchwarzschild {
  int n = 3;
  double mass = 1.0;

  double horizon_radius() const { return std::pow(0.5 * mass, 1.0 / (n - 2)); }
  double factor(double r) const { return 1.0 + 0.5 * mass * std::pow(r, 2 - n); }
};

/// Positive conformal factor sampled on a half-space exterior grid
/// (theta0 = pi/2); the metric is g = u^(4/(n-2)) delta.
struct ConformalFactorField {
  ExteriorGrid grid;
  std::vector<double> u;

  double at(int i, int j) const { return u[grid.idx(i, j)]; }
};

ConformalFactorField schwarzschild_field(const HalfSchwarzschild& model, const ExteriorGrid& grid);

/// Sample an axisymmetric factor u(r, theta) on the grid nodes.
ConformalFactorField field_from_function(const ExteriorGrid& grid,
                                         const std::function<double(double, double)>& u);

/// Conformal capacity weight w = u^2 with the far-field closure data the
/// weighted Robin condition needs.
WeightField conformal_weight(const ConformalFactorField& field);

struct ConformalCurvatures {
  std::vector<double> R_g;         // nodal scalar curvature of g
  std::vector<double> laplacian;   // nodal flat Delta u
  std::vector<double> H_g_sigma;   // per theta node, w.r.t. the outward normal of Omega
  std::vector<double> H_g_wall;    // per xi node along theta = theta0
  double max_abs_R_g;              // over interior nodes
  double max_laplacian;            // over interior nodes (sign carries admissibility)
  double max_abs_H_g_sigma;
  double max_abs_H_g_wall;
  double min_wall_flux;            // min over the wall of D_mu u, mu = -e_n
};

ConformalCurvatures conformal_curvatures(const ConformalFactorField& field);

struct ExpansionFit {
  double mass;          // 2 x coefficient of r^(2-n) fitted on the outer rings
  double rel_residual;  // rms misfit relative to rms(u-1)
  bool degraded;        // residual above threshold
};

/// Least-squares fit of u - 1 against r^(2-n) and r^(1-n) on the outer 20%
/// of the grid.
ExpansionFit mass_from_expansion(const ConformalFactorField& field);

/// Mass from the divergence identity:
/// m = (1/omega) int R_g u^{-1} dv + (2/((n-1) omega)) int_Sigma H u dsigma;
/// the wall term vanishes because the flat wall has H = 0.
double mass_identity(const ConformalFactorField& field, const RadialGraph& sigma);

struct FluxMass {
  double mass;       // extrapolated r -> infinity, linear in 1/r
  double station1;   // value at r = 0.8 e^{s_max}
  double station2;   // value at r = e^{s_max}
  double r1, r2;
  double wall_term;  // identically zero for a diagonal conformal metric
};

/// Mass from the asymptotic flux integral.  For g = psi delta,
/// psi = u^(4/(n-2)), the hemisphere integrand reduces to (1-n) d(psi)/dr;
/// the half-space mass is normalized so the half Schwarzschild model of
/// parameter m has mass m (hemisphere flux over (n-1) omega_{n-1}).
FluxMass mass_flux(const ConformalFactorField& field);

/// Slow validation path: evaluates the general-metric flux integrand by
/// finite-differencing every metric component of g = u^(4/(n-2)) delta in
/// Cartesian coordinates, without using conformal flatness.  u is an
/// axisymmetric callable of (r, theta).
double mass_flux_reference(int n, const std::function<double(double, double)>& u, double r,
                           double fd_step);

struct PenroseReport {
  int n;
  // mass three ways
  double mass_expansion;
  double mass_identity;
  double mass_flux;
  double expansion_residual;
  bool expansion_degraded;
  // capacities and the volume term
  double cap_flat;
  double cap_flat_extrapolated;
  double cap_conformal;
  double cap_conformal_extrapolated;
  double vol_term;  // 2 (Vol(Omega)/Vol(half unit ball))^((n-2)/n)
  double volume;
  double u_lower;   // infimum of u on Sigma
  // admissibility and hypothesis flags
  bool in_M_interior;      // Delta u <= tol everywhere inside
  bool in_M_wall;          // D_mu u >= -tol on the wall
  bool sigma_mean_convex;  // flat H > 0 on Sigma
  bool sigma_g_minimal;    // |H_g| <= tol on Sigma
  bool wall_g_mean_convex;
  bool u_lower_geq_2;      // hypothesis of the sharp mass inequalities
  double max_laplacian;
  double min_wall_flux;
  double max_abs_R_g;
  double max_abs_H_g_sigma;
  double max_abs_H_g_wall;
  // inequality margins, computed with mass = mass_expansion
  double margin_mass_capacity;           // m - Cap(Sigma, g)
  double margin_volumetric;              // m - vol_term
  double margin_cap_comparison;          // Cap(Sigma) + m/2 - Cap(Sigma, g)
  double margin_mass_total_curvature;    // m - (2 u_lower/((n-1) omega)) I(Sigma)
  double margin_mass_capacity_weighted;  // m - (2u/(2+u)) Cap(Sigma, g)
  double margin_volumetric_weighted;     // m - u * vol_term / 2
  double tol_admissibility;
  double tol_equality;
};

PenroseReport penrose_check(const ConformalFactorField& field, double tol_admissibility = 1e-3,
                            double tol_equality = 1e-2);

}  // namespace conecap
