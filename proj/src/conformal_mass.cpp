#include "conecap/conformal_mass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace conecap {

namespace {

constexpr double kPi = std::numbers::pi;

void require_half_space(const ExteriorGrid& grid) {
  if (std::abs(grid.graph.cone().theta0 - 0.5 * kPi) > 1e-12) {
    throw std::invalid_argument("conformal_mass: grid must sit over the half-space (theta0=pi/2)");
  }
}

// second-order first derivative on a uniform index line
double d1(const std::vector<double>& f, int i, int n, double h) {
  if (i == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  if (i == n) return (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * h);
  return (f[i + 1] - f[i - 1]) / (2.0 * h);
}

// second-order second derivative (4-point one-sided at the ends)
double d2(const std::vector<double>& f, int i, int n, double h) {
  if (i == 0) return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
  if (i == n) return (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) / (h * h);
  return (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
}

struct GridDerivatives {
  std::vector<double> ux, uxx, ut, utt, uxt;  // w.r.t. xi and theta indices
  std::vector<double> uY, uYY;  // w.r.t. the capacity coordinate Y = e^{(2-n)s}
};

// radial derivatives in Y by the quadratic through three neighbouring
// column nodes; exact for tails linear in Y, which is what the harmonic
// monopole is
void radial_Y_derivatives(const ExteriorGrid& g, const std::vector<double>& u, int i, int j,
                          double& uY, double& uYY) {
  const int c = std::clamp(i, 1, g.m_s - 1);
  const double y0 = g.Y(c - 1, j), y1 = g.Y(c, j), y2 = g.Y(c + 1, j);
  const double f0 = u[g.idx(c - 1, j)], f1 = u[g.idx(c, j)], f2 = u[g.idx(c + 1, j)];
  const double y = g.Y(i, j);
  uY = f0 * (2.0 * y - y1 - y2) / ((y0 - y1) * (y0 - y2)) +
       f1 * (2.0 * y - y0 - y2) / ((y1 - y0) * (y1 - y2)) +
       f2 * (2.0 * y - y0 - y1) / ((y2 - y0) * (y2 - y1));
  uYY = 2.0 * (f0 / ((y0 - y1) * (y0 - y2)) + f1 / ((y1 - y0) * (y1 - y2)) +
               f2 / ((y2 - y0) * (y2 - y1)));
}

GridDerivatives grid_derivatives(const ConformalFactorField& f) {
  const ExteriorGrid& g = f.grid;
  const int ms = g.m_s, mt = g.m_theta;
  const double hx = 1.0 / ms;
  const double ht = g.graph.h();
  GridDerivatives d;
  const int nn = g.num_nodes();
  d.ux.resize(nn);
  d.uxx.resize(nn);
  d.ut.resize(nn);
  d.utt.resize(nn);
  d.uxt.resize(nn);
  d.uY.resize(nn);
  d.uYY.resize(nn);
  std::vector<double> col(ms + 1), row(mt + 1);
  for (int j = 0; j <= mt; ++j) {
    for (int i = 0; i <= ms; ++i) col[i] = f.at(i, j);
    for (int i = 0; i <= ms; ++i) {
      d.ux[g.idx(i, j)] = d1(col, i, ms, hx);
      d.uxx[g.idx(i, j)] = d2(col, i, ms, hx);
      radial_Y_derivatives(g, f.u, i, j, d.uY[g.idx(i, j)], d.uYY[g.idx(i, j)]);
    }
  }
  for (int i = 0; i <= ms; ++i) {
    for (int j = 0; j <= mt; ++j) row[j] = f.at(i, j);
    for (int j = 0; j <= mt; ++j) {
      d.ut[g.idx(i, j)] = d1(row, j, mt, ht);
      d.utt[g.idx(i, j)] = d2(row, j, mt, ht);
    }
    for (int j = 0; j <= mt; ++j) row[j] = d.ux[g.idx(i, j)];
    for (int j = 0; j <= mt; ++j) d.uxt[g.idx(i, j)] = d1(row, j, mt, ht);
  }
  return d;
}

// flat Laplacian of the sampled field through the boundary-fitted map
std::vector<double> discrete_laplacian(const ConformalFactorField& f, const GridDerivatives& d) {
  const ExteriorGrid& g = f.grid;
  const int n = g.n();
  const int ms = g.m_s, mt = g.m_theta;
  std::vector<double> lap(g.num_nodes());
  for (int i = 0; i <= ms; ++i) {
    for (int j = 0; j <= mt; ++j) {
      const int k = g.idx(i, j);
      const double L = g.s_max - g.a[j];
      const double xi = g.xi(i);
      const double xt = -g.ap[j] * (1.0 - xi) / L;  // d(xi)/d(theta) at fixed s
      const double xtt = -g.app[j] * (1.0 - xi) / L - 2.0 * g.ap[j] * g.ap[j] * (1.0 - xi) / (L * L);
      const double uth = d.ut[k] + d.ux[k] * xt;
      const double uthth = d.utt[k] + 2.0 * d.uxt[k] * xt + d.uxx[k] * xt * xt + d.ux[k] * xtt;
      const double s = g.s(i, j);
      const double Y = g.Y(i, j);
      // u_ss + (n-2) u_s collapses to (n-2)^2 Y^2 u_YY in the capacity
      // coordinate
      const double radial = (n - 2) * (n - 2) * Y * Y * d.uYY[k];
      double bracket;
      if (j == 0) {
        bracket = radial + (n - 1) * uthth;  // cot term by symmetric limit
      } else {
        bracket = radial + uthth + (n - 2) * uth / std::tan(g.theta(j));
      }
      lap[k] = std::exp(-2.0 * s) * bracket;
    }
  }
  return lap;
}

double simpson_theta(const std::vector<double>& f, double h) {
  const int m = int(f.size()) - 1;
  double s = f[0] + f[m];
  for (int i = 1; i < m; ++i) s += f[i] * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

ConformalFactorField schwarzschild_field(const HalfSchwarzschild& model, const ExteriorGrid& grid) {
  require_half_space(grid);
  if (model.n != grid.n()) {
    throw std::invalid_argument("schwarzschild_field: dimension mismatch between model and grid");
  }
  const double R = model.horizon_radius();
  for (int j = 0; j <= grid.m_theta; ++j) {
    if (std::abs(grid.a[j] - std::log(R)) > 1e-12) {
      throw std::invalid_argument("schwarzschild_field: Sigma is not the horizon cap of the model");
    }
  }
  return field_from_function(grid, [&](double r, double) { return model.factor(r); });
}

ConformalFactorField field_from_function(const ExteriorGrid& grid,
                                         const std::function<double(double, double)>& u) {
  require_half_space(grid);
  std::vector<double> vals(grid.num_nodes());
  for (int i = 0; i <= grid.m_s; ++i) {
    for (int j = 0; j <= grid.m_theta; ++j) {
      const double v = u(std::exp(grid.s(i, j)), grid.theta(j));
      if (!(v > 0.0)) throw std::invalid_argument("conformal factor must be positive");
      vals[grid.idx(i, j)] = v;
    }
  }
  return ConformalFactorField{grid, std::move(vals)};
}

WeightField conformal_weight(const ConformalFactorField& field) {
  const ExteriorGrid& g = field.grid;
  WeightField w;
  w.values.resize(g.num_nodes());
  for (int k = 0; k < g.num_nodes(); ++k) w.values[k] = field.u[k] * field.u[k];
  w.outer_u.resize(g.m_theta + 1);
  w.outer_us.resize(g.m_theta + 1);
  const int n = g.n();
  for (int j = 0; j <= g.m_theta; ++j) {
    double uY, uYY;
    radial_Y_derivatives(g, field.u, g.m_s, j, uY, uYY);
    w.outer_u[j] = field.at(g.m_s, j);
    w.outer_us[j] = (2 - n) * g.Y(g.m_s, j) * uY;
  }
  return w;
}

ConformalCurvatures conformal_curvatures(const ConformalFactorField& field) {
  const ExteriorGrid& g = field.grid;
  const int n = g.n();
  const int ms = g.m_s, mt = g.m_theta;
  const GridDerivatives d = grid_derivatives(field);

  ConformalCurvatures cc;
  cc.laplacian = discrete_laplacian(field, d);
  cc.R_g.resize(g.num_nodes());
  const double cr = 4.0 * (n - 1) / double(n - 2);
  for (int k = 0; k < g.num_nodes(); ++k) {
    cc.R_g[k] = -cr * std::pow(field.u[k], -double(n + 2) / (n - 2)) * cc.laplacian[k];
  }
  cc.max_abs_R_g = 0.0;
  cc.max_laplacian = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < ms; ++i) {
    for (int j = 1; j < mt; ++j) {
      const int k = g.idx(i, j);
      cc.max_abs_R_g = std::max(cc.max_abs_R_g, std::abs(cc.R_g[k]));
      cc.max_laplacian = std::max(cc.max_laplacian, cc.laplacian[k]);
    }
  }

  // H_g on Sigma, w.r.t. the outward normal of Omega (the flow normal)
  const CurvatureField cf = mean_curvature_field(g.graph);
  cc.H_g_sigma.resize(mt + 1);
  const double ch = 2.0 * (n - 1) / double(n - 2);
  for (int j = 0; j <= mt; ++j) {
    const int k = g.idx(0, j);
    const double L = g.s_max - g.a[j];
    const double us = (2 - n) * g.Y(0, j) * d.uY[k];
    const double uth = d.ut[k] + d.ux[k] * (-g.ap[j] / L);
    const double v = std::sqrt(1.0 + g.ap[j] * g.ap[j]);
    const double dNu = std::exp(-g.a[j]) * (us - g.ap[j] * uth) / v;
    cc.H_g_sigma[j] =
        std::pow(field.u[k], -double(n) / (n - 2)) * (ch * dNu + cf.H[j] * field.u[k]);
  }

  // H_g on the wall (flat, H = 0), outward normal -e_n
  cc.H_g_wall.resize(ms + 1);
  cc.min_wall_flux = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= ms; ++i) {
    const int k = g.idx(i, mt);
    const int j = mt;
    const double L = g.s_max - g.a[j];
    const double xi = g.xi(i);
    const double xt = -g.ap[j] * (1.0 - xi) / L;
    const double uth = d.ut[k] + d.ux[k] * xt;
    const double flux = std::exp(-g.s(i, j)) * uth;  // D_mu u, mu = -e_n
    cc.min_wall_flux = std::min(cc.min_wall_flux, flux);
    cc.H_g_wall[i] = std::pow(field.u[k], -double(n) / (n - 2)) * ch * flux;
  }
  cc.max_abs_H_g_sigma = 0.0;
  for (double v : cc.H_g_sigma) cc.max_abs_H_g_sigma = std::max(cc.max_abs_H_g_sigma, std::abs(v));
  cc.max_abs_H_g_wall = 0.0;
  for (double v : cc.H_g_wall) cc.max_abs_H_g_wall = std::max(cc.max_abs_H_g_wall, std::abs(v));
  return cc;
}

ExpansionFit mass_from_expansion(const ConformalFactorField& field) {
  const ExteriorGrid& g = field.grid;
  const int n = g.n();
  // rings with xi >= 0.8; fit u-1 = c1 r^(2-n) + c2 r^(1-n)
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0, ss = 0;
  int count = 0;
  const int i0 = int(std::ceil(0.8 * g.m_s));
  for (int i = i0; i <= g.m_s; ++i) {
    for (int j = 0; j <= g.m_theta; ++j) {
      const double r = std::exp(g.s(i, j));
      const double f1 = std::pow(r, 2 - n);
      const double f2 = std::pow(r, 1 - n);
      const double y = field.at(i, j) - 1.0;
      a11 += f1 * f1;
      a12 += f1 * f2;
      a22 += f2 * f2;
      b1 += f1 * y;
      b2 += f2 * y;
      ss += y * y;
      ++count;
    }
  }
  const double det = a11 * a22 - a12 * a12;
  ExpansionFit fit{0.0, 0.0, false};
  if (ss < 1e-28 * count) return fit;  // identically flat tail
  const double c1 = (b1 * a22 - b2 * a12) / det;
  const double c2 = (a11 * b2 - a12 * b1) / det;
  double resid = 0.0;
  for (int i = i0; i <= g.m_s; ++i) {
    for (int j = 0; j <= g.m_theta; ++j) {
      const double r = std::exp(g.s(i, j));
      const double y = field.at(i, j) - 1.0;
      const double e = y - c1 * std::pow(r, 2 - n) - c2 * std::pow(r, 1 - n);
      resid += e * e;
    }
  }
  fit.mass = 2.0 * c1;
  fit.rel_residual = std::sqrt(resid / ss);
  fit.degraded = fit.rel_residual > 0.05;
  return fit;
}

double mass_identity(const ConformalFactorField& field, const RadialGraph& sigma) {
  const ExteriorGrid& g = field.grid;
  const int n = g.n();
  const double omega = sphere_area(n - 1);
  const double sn2 = sphere_area(n - 2);
  const ConformalCurvatures cc = conformal_curvatures(field);

  // volume term: trapezoid over the grid, dv = e^{ns} sin^{n-2} L dxi dtheta
  double vol_term = 0.0;
  const double hx = 1.0 / g.m_s;
  const double ht = g.graph.h();
  for (int i = 0; i <= g.m_s; ++i) {
    const double wi = (i == 0 || i == g.m_s) ? 0.5 : 1.0;
    for (int j = 0; j <= g.m_theta; ++j) {
      const double wj = (j == 0 || j == g.m_theta) ? 0.5 : 1.0;
      const int k = g.idx(i, j);
      const double L = g.s_max - g.a[j];
      vol_term += wi * wj * cc.R_g[k] / field.u[k] * std::exp(n * g.s(i, j)) * g.sin_pow[j] * L;
    }
  }
  vol_term *= sn2 * hx * ht / omega;

  // Sigma term: (2/((n-1) omega)) int H u dsigma
  const CurvatureField cf = mean_curvature_field(sigma);
  std::vector<double> integrand(g.m_theta + 1);
  for (int j = 0; j <= g.m_theta; ++j) {
    const double rho = std::exp(g.a[j]);
    const double v = std::sqrt(1.0 + g.ap[j] * g.ap[j]);
    integrand[j] =
        cf.H[j] * field.at(0, j) * std::pow(rho, n - 1) * v * g.sin_pow[j];
  }
  const double sigma_term =
      2.0 / ((n - 1) * omega) * sn2 * simpson_theta(integrand, ht);

  return vol_term + sigma_term;  // the flat wall contributes H = 0
}

namespace {

// u and du/ds at log-radius s on column j, by 4-point Lagrange interpolation
// in xi (exact cubic through the nearest nodes)
void column_sample(const ConformalFactorField& f, int j, double s, double& u, double& us) {
  const ExteriorGrid& g = f.grid;
  const int ms = g.m_s;
  const double L = g.s_max - g.a[j];
  const double x = (s - g.a[j]) / L * ms;  // fractional index
  int base = int(std::floor(x));
  base = std::clamp(base, 1, ms - 2);
  const double t = x - base;
  const double fv[4] = {f.at(base - 1, j), f.at(base, j), f.at(base + 1, j), f.at(base + 2, j)};
  const double p[4] = {-1.0, 0.0, 1.0, 2.0};
  u = 0.0;
  us = 0.0;
  for (int k = 0; k < 4; ++k) {
    double lk = 1.0, dk = 0.0;
    for (int a = 0; a < 4; ++a) {
      if (a == k) continue;
      lk *= (t - p[a]) / (p[k] - p[a]);
      double term = 1.0 / (p[k] - p[a]);
      for (int b = 0; b < 4; ++b) {
        if (b == k || b == a) continue;
        term *= (t - p[b]) / (p[k] - p[b]);
      }
      dk += term;
    }
    u += fv[k] * lk;
    us += fv[k] * dk;
  }
  us *= ms / L;
}

double flux_at_radius(const ConformalFactorField& f, double r) {
  const ExteriorGrid& g = f.grid;
  const int n = g.n();
  const double s = std::log(r);
  std::vector<double> integrand(g.m_theta + 1);
  for (int j = 0; j <= g.m_theta; ++j) {
    if ((s - g.a[j]) / (g.s_max - g.a[j]) < 0.5) {
      throw std::invalid_argument("mass_flux: station too close to Sigma (s_max too small)");
    }
    double u, us;
    column_sample(f, j, s, u, us);
    const double ur = std::exp(-s) * us;
    const double dpsi_dr = 4.0 / (n - 2) * std::pow(u, (6.0 - n) / (n - 2)) * ur;
    integrand[j] = dpsi_dr * std::pow(r, n - 1) * g.sin_pow[j];
  }
  const double hem = (1 - n) * sphere_area(n - 2) * simpson_theta(integrand, g.graph.h());
  return hem / ((n - 1) * sphere_area(n - 1));
}

}  // namespace

FluxMass mass_flux(const ConformalFactorField& field) {
  const ExteriorGrid& g = field.grid;
  FluxMass fm;
  fm.r2 = std::exp(g.s_max);
  fm.r1 = 0.8 * fm.r2;
  fm.station1 = flux_at_radius(field, fm.r1);
  fm.station2 = flux_at_radius(field, fm.r2);
  const double inv1 = 1.0 / fm.r1, inv2 = 1.0 / fm.r2;
  const double slope = (fm.station1 - fm.station2) / (inv1 - inv2);
  fm.mass = fm.station2 - slope * inv2;
  fm.wall_term = 0.0;  // g_{beta n} = 0 for a diagonal conformal metric
  return fm;
}

double mass_flux_reference(int n, const std::function<double(double, double)>& u, double r,
                           double fd_step) {
  const double omega = sphere_area(n - 1);
  auto psi_at = [&](const std::vector<double>& x) {
    double rr = 0.0;
    for (double c : x) rr += c * c;
    rr = std::sqrt(rr);
    const double ct = std::clamp(x[n - 1] / rr, -1.0, 1.0);
    return std::pow(u(rr, std::acos(ct)), 4.0 / (n - 2));
  };
  auto dpsi = [&](std::vector<double> x, int k) {
    x[k] += fd_step;
    const double up = psi_at(x);
    x[k] -= 2.0 * fd_step;
    const double dn = psi_at(x);
    return (up - dn) / (2.0 * fd_step);
  };
  // hemisphere integrand at the representative meridian point
  auto hem_integrand = [&](double theta) {
    std::vector<double> x(n, 0.0);
    x[0] = r * std::sin(theta);
    x[n - 1] = r * std::cos(theta);
    // g_ij = psi delta_ij; sum_ij (g_ij,j - g_jj,i) x_i / r without using
    // the diagonal structure symbolically
    double total = 0.0;
    std::vector<double> grad(n);
    for (int k = 0; k < n; ++k) grad[k] = dpsi(x, k);
    for (int i = 0; i < n; ++i) {
      double gij_j = 0.0, gjj_i = 0.0;
      for (int j = 0; j < n; ++j) {
        gij_j += (i == j) ? grad[j] : 0.0;  // d_j (psi delta_ij)
        gjj_i += grad[i];                   // d_i (psi delta_jj)
      }
      total += (gij_j - gjj_i) * x[i] / r;
    }
    return total;
  };
  const int quad_n = 64;
  double hem = 0.0;
  const double h = 0.5 * kPi / quad_n;
  for (int k = 0; k <= quad_n; ++k) {
    const double theta = k * h;
    const double w = (k == 0 || k == quad_n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    hem += w * hem_integrand(theta) * std::pow(std::sin(theta), n - 2);
  }
  hem *= h / 3.0 * std::pow(r, n - 1) * sphere_area(n - 2);

  // wall ring term: sum_beta g_{beta n} x_beta / r on {x_n = 0, |x| = r}
  std::vector<double> xw(n, 0.0);
  xw[0] = r;
  double wall_integrand = 0.0;
  for (int b = 0; b < n - 1; ++b) {
    const double g_bn = (b == n - 1) ? psi_at(xw) : 0.0;  // psi delta_{b,n-1}
    wall_integrand += g_bn * xw[b] / r;
  }
  const double wall = wall_integrand * sphere_area(n - 2) * std::pow(r, n - 2);

  return (hem + wall) / ((n - 1) * omega);
}

PenroseReport penrose_check(const ConformalFactorField& field, double tol_admissibility,
                            double tol_equality) {
  const ExteriorGrid& g = field.grid;
  const int n = g.n();
  const double omega = sphere_area(n - 1);
  const RadialGraph& sigma = g.graph;

  PenroseReport rep{};
  rep.n = n;
  rep.tol_admissibility = tol_admissibility;
  rep.tol_equality = tol_equality;

  const ExpansionFit fit = mass_from_expansion(field);
  rep.mass_expansion = fit.mass;
  rep.expansion_residual = fit.rel_residual;
  rep.expansion_degraded = fit.degraded;
  rep.mass_identity = conecap::mass_identity(field, sigma);
  rep.mass_flux = conecap::mass_flux(field).mass;

  const PotentialField flat = solve_mixed_bvp(g);
  const CapacityResult cap_flat = capacity_estimates(flat);
  rep.cap_flat = cap_flat.cap_flux;
  rep.cap_flat_extrapolated = cap_flat.cap_extrapolated;

  const PotentialField conf = solve_mixed_bvp(g, conformal_weight(field));
  const CapacityResult cap_conf = capacity_estimates(conf);
  rep.cap_conformal = cap_conf.cap_flux;
  rep.cap_conformal_extrapolated = cap_conf.cap_extrapolated;

  const SurfaceFunctionals sf = functionals(sigma);
  rep.volume = sf.volume;
  const double half_ball = 0.5 * sphere_area(n - 1) / n;  // Vol of the unit half-ball
  rep.vol_term = 2.0 * std::pow(sf.volume / half_ball, double(n - 2) / n);

  rep.u_lower = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= g.m_theta; ++j) rep.u_lower = std::min(rep.u_lower, field.at(0, j));

  const ConformalCurvatures cc = conformal_curvatures(field);
  rep.max_laplacian = cc.max_laplacian;
  rep.min_wall_flux = cc.min_wall_flux;
  rep.max_abs_R_g = cc.max_abs_R_g;
  rep.max_abs_H_g_sigma = cc.max_abs_H_g_sigma;
  rep.max_abs_H_g_wall = cc.max_abs_H_g_wall;
  rep.in_M_interior = cc.max_laplacian <= tol_admissibility;
  rep.in_M_wall = cc.min_wall_flux >= -tol_admissibility;
  rep.sigma_mean_convex = sf.min_H > 0.0;
  rep.sigma_g_minimal = cc.max_abs_H_g_sigma <= tol_admissibility;
  rep.wall_g_mean_convex = [&] {
    double mn = std::numeric_limits<double>::infinity();
    for (double v : cc.H_g_wall) mn = std::min(mn, v);
    return mn >= -tol_admissibility;
  }();
  rep.u_lower_geq_2 = rep.u_lower >= 2.0 - tol_equality;

  const double m = rep.mass_expansion;
  rep.margin_mass_capacity = m - rep.cap_conformal_extrapolated;
  rep.margin_volumetric = m - rep.vol_term;
  rep.margin_cap_comparison = rep.cap_flat_extrapolated + 0.5 * m - rep.cap_conformal_extrapolated;
  rep.margin_mass_total_curvature =
      m - 2.0 * rep.u_lower / ((n - 1) * omega) * sf.total_mean_curvature;
  rep.margin_mass_capacity_weighted =
      m - 2.0 * rep.u_lower / (2.0 + rep.u_lower) * rep.cap_conformal_extrapolated;
  rep.margin_volumetric_weighted = m - rep.u_lower * 0.5 * rep.vol_term;
  return rep;
}

}  // namespace conecap
