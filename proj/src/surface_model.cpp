#include "conecap/surface_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace conecap {

namespace {
constexpr double kPi = std::numbers::pi;

void check_grid(int m) {
  if (m < 4 || m % 2 != 0) {
    throw std::invalid_argument("RadialGraph: grid must have an even number of intervals >= 4");
  }
}
}  // namespace

RadialGraph::RadialGraph(ConeSpec cone, std::vector<double> u) : cone_(cone), u_(std::move(u)) {
  check_grid(int(u_.size()) - 1);
  for (double v : u_) {
    if (!std::isfinite(v)) throw std::invalid_argument("RadialGraph: non-finite profile value");
  }
}

RadialGraph RadialGraph::cap(const ConeSpec& cone, double radius, int m) {
  if (!(radius > 0.0)) throw std::invalid_argument("RadialGraph::cap: radius must be positive");
  return RadialGraph(cone, std::vector<double>(m + 1, std::log(radius)));
}

RadialGraph RadialGraph::perturbed_cap(const ConeSpec& cone, double radius, double eps, int mode,
                                       int m) {
  if (!(radius > 0.0)) throw std::invalid_argument("perturbed_cap: radius must be positive");
  if (mode < 2 || mode % 2 != 0) {
    throw std::invalid_argument("perturbed_cap: mode must be a positive even integer");
  }
  if (!(std::abs(eps) < 0.5)) {
    throw std::invalid_argument("perturbed_cap: |eps| must be < 0.5");
  }
  std::vector<double> u(m + 1);
  const double lam = 0.5 * kPi / cone.theta0;
  for (int i = 0; i <= m; ++i) {
    const double theta = cone.theta0 * i / m;
    const double shape = 1.0 + eps * legendre_p(mode, std::cos(lam * theta));
    if (!(shape > 0.0)) throw std::invalid_argument("perturbed_cap: profile not star-shaped");
    u[i] = std::log(radius * shape);
  }
  return RadialGraph(cone, std::move(u));
}

double RadialGraph::rho(int i) const { return std::exp(u_[i]); }

double RadialGraph::max_u() const { return *std::max_element(u_.begin(), u_.end()); }
double RadialGraph::min_u() const { return *std::min_element(u_.begin(), u_.end()); }

double RadialGraph::du(int i) const {
  const int m = this->m();
  const double up = (i == m) ? u_[m - 1] : u_[i + 1];
  const double dn = (i == 0) ? u_[1] : u_[i - 1];
  return (up - dn) / (2.0 * h());
}

double RadialGraph::d2u(int i) const {
  const int m = this->m();
  const double up = (i == m) ? u_[m - 1] : u_[i + 1];
  const double dn = (i == 0) ? u_[1] : u_[i - 1];
  return (up - 2.0 * u_[i] + dn) / (h() * h());
}

RadialGraph RadialGraph::scaled(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("scaled: lambda must be positive");
  std::vector<double> u = u_;
  const double s = std::log(lambda);
  for (double& v : u) v += s;
  return RadialGraph(cone_, std::move(u));
}

RadialGraph RadialGraph::subsampled() const {
  const int m = this->m();
  if (m % 4 != 0) throw std::invalid_argument("subsampled: m must be divisible by 4");
  std::vector<double> u(m / 2 + 1);
  for (int i = 0; i <= m / 2; ++i) u[i] = u_[2 * i];
  return RadialGraph(cone_, std::move(u));
}

RadialGraph RadialGraph::resampled(int new_m) const {
  check_grid(new_m);
  const int m = this->m();
  std::vector<double> u(new_m + 1);
  // Cubic Lagrange through the four nearest nodes, with even reflection past
  // the ends so the Neumann closure survives resampling.
  auto sample = [&](int j) {
    if (j < 0) j = -j;
    if (j > m) j = 2 * m - j;
    return u_[j];
  };
  for (int i = 0; i <= new_m; ++i) {
    const double x = double(i) * m / new_m;  // position in old index units
    int base = int(std::floor(x));
    if (base > m - 1) base = m - 1;
    const double t = x - base;
    const double f0 = sample(base - 1), f1 = sample(base), f2 = sample(base + 1),
                 f3 = sample(base + 2);
    u[i] = f1 + t * (0.5 * (f2 - f0) +
                     t * (f0 - 2.5 * f1 + 2.0 * f2 - 0.5 * f3 +
                          t * (0.5 * (f3 - f0) + 1.5 * (f1 - f2))));
  }
  return RadialGraph(cone_, std::move(u));
}

CurvatureField mean_curvature_field(const RadialGraph& graph) {
  const int n = graph.cone().n;
  const int m = graph.m();
  CurvatureField f;
  f.kappa_mer.resize(m + 1);
  f.kappa_orb.resize(m + 1);
  f.H.resize(m + 1);
  f.A2.resize(m + 1);
  f.min_H = std::numeric_limits<double>::infinity();
  f.argmin_H = 0;
  for (int i = 0; i <= m; ++i) {
    const double rho = graph.rho(i);
    const double up = graph.du(i);
    const double upp = graph.d2u(i);
    const double v2 = 1.0 + up * up;
    const double v = std::sqrt(v2);
    const double km = (v2 - upp) / (rho * v2 * v);
    // orbit curvature (1 - u' cot theta)/(rho v); at the axis u' cot theta
    // has the symmetric limit u''(0)
    double ko;
    if (i == 0) {
      ko = (1.0 - upp) / (rho * v);
    } else {
      ko = (1.0 - up / std::tan(graph.theta(i))) / (rho * v);
    }
    f.kappa_mer[i] = km;
    f.kappa_orb[i] = ko;
    f.H[i] = km + (n - 2) * ko;
    f.A2[i] = km * km + (n - 2) * ko * ko;
    if (f.H[i] < f.min_H) {
      f.min_H = f.H[i];
      f.argmin_H = i;
    }
  }
  return f;
}

namespace {

double simpson(const std::vector<double>& f, double h) {
  const int m = int(f.size()) - 1;
  double s = f[0] + f[m];
  for (int i = 1; i < m; ++i) s += f[i] * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

SurfaceFunctionals functionals(const RadialGraph& graph) {
  const int n = graph.cone().n;
  const int m = graph.m();
  const double sn2 = sphere_area(n - 2);
  const CurvatureField cf = mean_curvature_field(graph);

  std::vector<double> fa(m + 1), fv(m + 1), fi(m + 1);
  for (int i = 0; i <= m; ++i) {
    const double theta = graph.theta(i);
    const double w = std::pow(std::sin(theta), n - 2);
    const double rho = graph.rho(i);
    const double v = std::sqrt(1.0 + graph.du(i) * graph.du(i));
    const double dA = std::pow(rho, n - 1) * v * w;
    fa[i] = dA;
    fv[i] = std::pow(rho, n) / n * w;
    fi[i] = cf.H[i] * dA;
  }
  SurfaceFunctionals out;
  out.area = sn2 * simpson(fa, graph.h());
  out.volume = sn2 * simpson(fv, graph.h());
  out.total_mean_curvature = sn2 * simpson(fi, graph.h());
  out.min_H = cf.min_H;
  double res = 0.0;
  for (int i = 0; i <= m; ++i) {
    res = std::max(res, std::abs(cf.H[i] * cf.H[i] - (n - 1) * cf.A2[i]));
  }
  out.umbilicity_residual = res;
  return out;
}

double umbilicity_residual(const RadialGraph& graph) {
  const int n = graph.cone().n;
  const CurvatureField cf = mean_curvature_field(graph);
  double res = 0.0;
  for (size_t i = 0; i < cf.H.size(); ++i) {
    res = std::max(res, std::abs(cf.H[i] * cf.H[i] - (n - 1) * cf.A2[i]));
  }
  return res;
}

double legendre_p(int k, double x) {
  if (k < 0) throw std::invalid_argument("legendre_p: negative degree");
  double p0 = 1.0;
  if (k == 0) return p0;
  double p1 = x;
  for (int j = 2; j <= k; ++j) {
    const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

void write_profile_csv(const RadialGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_profile_csv: cannot open " + path);
  out.precision(17);
  out << "theta,rho\n";
  for (int i = 0; i <= graph.m(); ++i) {
    out << graph.theta(i) << ',' << graph.rho(i) << '\n';
  }
}

RadialGraph read_profile_csv(const ConeSpec& cone, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_profile_csv: cannot open " + path);
  std::vector<double> theta, rho;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double t, r;
    if (!(ss >> t >> r)) continue;  // skip the header
    theta.push_back(t);
    rho.push_back(r);
  }
  const int m = int(theta.size()) - 1;
  check_grid(m);
  const double h = cone.theta0 / m;
  std::vector<double> u(m + 1);
  for (int i = 0; i <= m; ++i) {
    if (std::abs(theta[i] - i * h) > 1e-9 * cone.theta0) {
      throw std::runtime_error("read_profile_csv: theta column is not the uniform grid [0,theta0]");
    }
    if (!(rho[i] > 0.0)) throw std::runtime_error("read_profile_csv: rho must be positive");
    u[i] = std::log(rho[i]);
  }
  return RadialGraph(cone, std::move(u));
}

}  // namespace conecap
