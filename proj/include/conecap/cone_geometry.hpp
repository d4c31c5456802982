#pragma once

#include <functional>
#include <stdexcept>

namespace conecap {

/// Rotationally symmetric convex cone in R^n: all rays from the origin whose
/// polar angle against the axis is at most theta0.  theta0 = pi/2 is the
/// half-space.  alpha is the (n-1)-dimensional measure of the unit link
/// (the spherical cross-section), so a cap sector of radius r has boundary
/// area alpha * r^(n-1) and volume alpha * r^n / n.
struct ConeSpec {
  int n = 3;          // ambient dimension, n >= 3
  double theta0 = 0;  // half-angle in radians, 0 < theta0 <= pi/2
  double alpha = 0;   // link measure |S^(n-2)| * integral_0^theta0 sin^(n-2)

  static ConeSpec make(int n, double theta0);
};

/// Spherical cap sector: intersection of the ball of radius r centered at the
/// vertex with the cone.  The equality configuration of every inequality in
/// this project.
struct CapSector {
  ConeSpec cone;
  double r = 1.0;

  static CapSector make(const ConeSpec& cone, double r);
};

struct CapMetrics {
  double area;
  double volume;
  double total_mean_curvature;  // integral of H over the cap, H = (n-1)/r
  double capacity;              // r^(n-2)
};

/// Surface measure of the unit k-sphere S^k.
double sphere_area(int k);

/// integral_0^theta0 sin^(n-2)(t) dt by adaptive quadrature, relative
/// error <= 1e-12.
double link_integral(int n, double theta0);

/// alpha_{n-1}: link measure of the cone cross-section.
double solid_angle(int n, double theta0);

CapMetrics cap_metrics(const CapSector& sector);

/// Lions-Pacella lower bound for the area of a hypersurface enclosing the
/// given volume inside the cone: n * Vol(C(alpha,1))^(1/n) * V^((n-1)/n).
/// Sharp on cap sectors.
double isoperimetric_bound(const ConeSpec& cone, double volume);

/// Adaptive Simpson quadrature, used for the link integral and available to
/// other modules for smooth 1-D integrands.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol);

}  // namespace conecap
