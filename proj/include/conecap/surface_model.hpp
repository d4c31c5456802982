#pragma once

#include <string>
#include <vector>

#include "conecap/cone_geometry.hpp"

namespace conecap {

/// Axisymmetric star-shaped hypersurface with free boundary on the cone wall,
/// stored as u_i = log rho(theta_i) on the uniform grid theta_i = i*theta0/m.
///
/// The outward unit normal N points away from the enclosed region.  Both ends
/// carry a discrete Neumann condition (even reflection): u'(0) = 0 is the
/// axis regularity condition, u'(theta0) = 0 is the orthogonal intersection
/// with the wall.
class RadialGraph {
 public:
  RadialGraph(ConeSpec cone, std::vector<double> u);

  static RadialGraph cap(const ConeSpec& cone, double radius, int m);
  // rho(theta) = r * (1 + eps * P_mode(cos(pi*theta/(2*theta0)))), even
  // Legendre mode; the argument rescaling keeps the profile Neumann at the
  // wall for every theta0 <= pi/2 and reduces to P_mode(cos theta) on the
  // half-space.
  static RadialGraph perturbed_cap(const ConeSpec& cone, double radius, double eps, int mode,
                                   int m);

  const ConeSpec& cone() const { return cone_; }
  int m() const { return int(u_.size()) - 1; }
  double h() const { return cone_.theta0 / m(); }
  double theta(int i) const { return cone_.theta0 * i / m(); }
  const std::vector<double>& u() const { return u_; }
  double u(int i) const { return u_[i]; }
  double rho(int i) const;
  double max_u() const;
  double min_u() const;

  // Central differences with even-reflection ghosts at both ends.
  double du(int i) const;
  double d2u(int i) const;

  RadialGraph scaled(double lambda) const;   // rho -> lambda * rho
  RadialGraph resampled(int new_m) const;    // cubic resampling onto a new grid
  RadialGraph subsampled() const;            // every other node; m must be even

 private:
  ConeSpec cone_;
  std::vector<double> u_;
};

/// Pointwise principal curvatures of the graph with respect to the outward
/// normal: kappa_mer along the meridian, kappa_orb on the rotational orbits
/// (with multiplicity n-2).
struct CurvatureField {
  std::vector<double> kappa_mer;
  std::vector<double> kappa_orb;
  std::vector<double> H;        // kappa_mer + (n-2) * kappa_orb
  std::vector<double> A2;       // kappa_mer^2 + (n-2) * kappa_orb^2
  double min_H;
  int argmin_H;
};

CurvatureField mean_curvature_field(const RadialGraph& graph);

struct SurfaceFunctionals {
  double area;
  double volume;                // of the enclosed region
  double total_mean_curvature;  // I(Sigma)
  double min_H;
  double umbilicity_residual;   // max_i |H_i^2 - (n-1)|A_i|^2|
};

/// Area, volume and total mean curvature by composite Simpson on the theta
/// grid (m must be even).
SurfaceFunctionals functionals(const RadialGraph& graph);

double umbilicity_residual(const RadialGraph& graph);

/// Legendre polynomial P_k evaluated by the three-term recurrence.
double legendre_p(int k, double x);

/// Two-column CSV profile exchange: "theta,rho" rows.
void write_profile_csv(const RadialGraph& graph, const std::string& path);
RadialGraph read_profile_csv(const ConeSpec& cone, const std::string& path);

}  // namespace conecap
