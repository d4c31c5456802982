#include "conecap/cone_geometry.hpp"

#include <cmath>
#include <numbers>

namespace conecap {

namespace {

constexpr double kPi = std::numbers::pi;

double simpson_rule(double a, double fa, double fm, double b, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_rule(a, fa, flm, m, fm);
  const double right = simpson_rule(m, fm, frm, b, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = simpson_rule(a, fa, fm, b, fb);
  const double scale = std::abs(whole) > 1e-300 ? std::abs(whole) : 1.0;
  return adaptive_step(f, a, fa, b, fb, m, fm, whole, rel_tol * scale, 48);
}

double sphere_area(int k) {
  if (k < 0) throw std::invalid_argument("sphere_area: k must be >= 0");
  // |S^k| = 2 pi^((k+1)/2) / Gamma((k+1)/2)
  return 2.0 * std::pow(kPi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

double link_integral(int n, double theta0) {
  if (n < 3) throw std::invalid_argument("link_integral: dimension must be >= 3");
  if (!(theta0 > 0.0) || theta0 > 0.5 * kPi + 1e-14) {
    throw std::invalid_argument("link_integral: theta0 must lie in (0, pi/2]");
  }
  const int p = n - 2;
  return adaptive_simpson([p](double t) { return std::pow(std::sin(t), p); }, 0.0, theta0,
                          1e-13);
}

double solid_angle(int n, double theta0) {
  return sphere_area(n - 2) * link_integral(n, theta0);
}

ConeSpec ConeSpec::make(int n, double theta0) {
  ConeSpec c;
  c.n = n;
  c.theta0 = theta0;
  c.alpha = solid_angle(n, theta0);  // validates n and theta0
  return c;
}

CapSector CapSector::make(const ConeSpec& cone, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("CapSector: radius must be positive");
  return CapSector{cone, r};
}

CapMetrics cap_metrics(const CapSector& sector) {
  const int n = sector.cone.n;
  const double a = sector.cone.alpha;
  const double r = sector.r;
  CapMetrics m;
  m.area = a * std::pow(r, n - 1);
  m.volume = a * std::pow(r, n) / n;
  m.total_mean_curvature = (n - 1) * a * std::pow(r, n - 2);
  m.capacity = std::pow(r, n - 2);
  return m;
}

double isoperimetric_bound(const ConeSpec& cone, double volume) {
  if (!(volume > 0.0)) throw std::invalid_argument("isoperimetric_bound: volume must be positive");
  const int n = cone.n;
  const double sector_vol = cone.alpha / n;  // Vol(C(alpha,1))
  return n * std::pow(sector_vol, 1.0 / n) * std::pow(volume, double(n - 1) / n);
}

}  // namespace conecap
