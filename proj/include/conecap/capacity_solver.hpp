#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conecap/surface_model.hpp"

namespace conecap {

/// Boundary-fitted grid on the exterior domain between Sigma and the
/// truncation sphere: xi in [0,1] maps to log-radius
/// s = u(theta) + xi * (s_max - u(theta)), theta on the cone link.
/// Node (i,j) sits at (xi_i, theta_j) with i = 0..m_s, j = 0..m_theta and
/// m_theta equal to the graph resolution.
struct ExteriorGrid {
  RadialGraph graph;
  double s_max;
  int m_s;
  int m_theta;

  // per-column profile data, cached at construction
  std::vector<double> a;    // log rho(theta_j)
  std::vector<double> ap;   // d/dtheta of the profile
  std::vector<double> app;  // second derivative
  std::vector<double> sin_pow;  // sin^(n-2)(theta_j)

  static ExteriorGrid make(RadialGraph graph, double s_max, int m_s);
  ExteriorGrid coarsened() const;  // both resolutions halved

  int n() const { return graph.cone().n; }
  int num_nodes() const { return (m_s + 1) * (m_theta + 1); }
  int idx(int i, int j) const { return i * (m_theta + 1) + j; }
  double xi(int i) const { return double(i) / m_s; }
  double theta(int j) const { return graph.cone().theta0 * j / m_theta; }
  double s(int i, int j) const { return a[j] + xi(i) * (s_max - a[j]); }
  // Capacity coordinate: the flat radial equation is linear in it, which
  // makes the scheme nodally exact on round caps.
  double Y(int i, int j) const { return std::exp((2 - n()) * s(i, j)); }
};

/// Coefficient of div(w D phi) = 0 plus the far-field closure data.  An
/// empty values array means the flat Laplacian (w = 1).  For a conformal
/// weight w = u^2 the outer arrays carry u and du/ds on xi = 1, which close
/// the domain with the Robin condition d(u phi)/ds = (n-2)(1 - u phi) --
/// exact for the conformal monopole tail and reducing to
/// dphi/ds = (n-2)(1-phi) in the flat case.
struct WeightField {
  std::vector<double> values;    // nodal w, size num_nodes(), or empty
  std::vector<double> outer_u;   // u(s_max, theta_j), or empty (=1)
  std::vector<double> outer_us;  // du/ds(s_max, theta_j), or empty (=0)

  bool flat() const { return values.empty(); }
  WeightField coarsened(const ExteriorGrid& fine) const;
};

struct PotentialField {
  ExteriorGrid grid;
  WeightField weight;
  std::vector<double> phi;  // nodal, phi = 0 on xi = 0
  double residual_norm;     // final relative CG residual
  int iterations;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

/// Solve the mixed boundary value problem: div(w D phi) = 0 in the exterior
/// domain, phi = 0 on Sigma, zero conormal flux on the axis and the cone
/// wall, Robin closure at s_max.  Bilinear finite elements on the
/// boundary-fitted grid, preconditioned conjugate gradients to relative
/// residual 1e-10 with iteration cap 50*sqrt(#nodes).
PotentialField solve_mixed_bvp(const ExteriorGrid& grid,
                               const std::optional<WeightField>& weight = std::nullopt);

struct CapacityResult {
  double cap_energy;        // energy form incl. exact monopole tail
  double cap_flux;          // flux through Sigma (primary estimate)
  double cap_extrapolated;  // Richardson over this and the halved grid
  double discrepancy;       // |cap_energy - cap_flux| / cap_flux
  double cap_flux_coarse;
  double error_estimate;    // |cap_flux - cap_extrapolated|
  double alpha;
  int n;
};

CapacityResult capacity_estimates(const PotentialField& field);

/// Volume-radius profile R(t) of the level sets {phi < t} for
/// t = 0.05, 0.10, ..., 0.95: Vol(Omega_t) = Vol(C(alpha,1)) R(t)^n.
/// Requires the flat weight.
std::vector<std::pair<double, double>> pfs_radius_profile(const PotentialField& field);

/// Lower bound of the capacity from the radius profile,
/// (1/(n-2)) * integral R^(n-1)/R' dt over the sampled levels.
double capvol_lower_bound(const PotentialField& field);

void write_field_csv(const PotentialField& field, const std::string& path);

}  // namespace conecap
