#include "conecap/capacity_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

namespace conecap {

namespace {

// 2-point Gauss rule on [-1,1]
constexpr double kGauss[2] = {-0.5773502691896257, 0.5773502691896257};

struct LocalNodes {
  // reference coordinates of the four corners: (i,j),(i+1,j),(i+1,j+1),(i,j+1)
  static constexpr double q[4] = {-1.0, 1.0, 1.0, -1.0};
  static constexpr double t[4] = {-1.0, -1.0, 1.0, 1.0};
};

inline double shape(int k, double q, double t) {
  return 0.25 * (1.0 + LocalNodes::q[k] * q) * (1.0 + LocalNodes::t[k] * t);
}
inline double shape_dq(int k, double t) {
  return 0.25 * LocalNodes::q[k] * (1.0 + LocalNodes::t[k] * t);
}
inline double shape_dt(int k, double q) {
  return 0.25 * LocalNodes::t[k] * (1.0 + LocalNodes::q[k] * q);
}

// Assembled element data: per element the four global node ids and the
// symmetric 4x4 stiffness; Robin edges carry a 2x2 block and a load pair.
struct Assembly {
  std::vector<std::array<int, 4>> enodes;
  std::vector<std::array<double, 16>> K;
  std::vector<std::array<int, 2>> robin_nodes;
  std::vector<std::array<double, 4>> robin_K;
  std::vector<std::array<double, 2>> robin_b;
  std::vector<double> diag;
  std::vector<double> b;
  std::vector<char> dirichlet;
  int nn = 0;
};

double weight_at(const WeightField& w, const ExteriorGrid& g, int i, int j) {
  return w.flat() ? 1.0 : w.values[g.idx(i, j)];
}

Assembly assemble(const ExteriorGrid& g, const WeightField& w) {
  const int n = g.n();
  const int ms = g.m_s;
  const int mt = g.m_theta;
  Assembly as;
  as.nn = g.num_nodes();
  as.diag.assign(as.nn, 0.0);
  as.b.assign(as.nn, 0.0);
  as.dirichlet.assign(as.nn, 0);
  for (int j = 0; j <= mt; ++j) as.dirichlet[g.idx(0, j)] = 1;

  as.enodes.reserve(size_t(ms) * mt);
  as.K.reserve(size_t(ms) * mt);

  for (int i = 0; i < ms; ++i) {
    for (int j = 0; j < mt; ++j) {
      const std::array<int, 4> nd = {g.idx(i, j), g.idx(i + 1, j), g.idx(i + 1, j + 1),
                                     g.idx(i, j + 1)};
      const double Yc[4] = {g.Y(i, j), g.Y(i + 1, j), g.Y(i + 1, j + 1), g.Y(i, j + 1)};
      const double Tc[4] = {g.theta(j), g.theta(j), g.theta(j + 1), g.theta(j + 1)};
      const double Wc[4] = {weight_at(w, g, i, j), weight_at(w, g, i + 1, j),
                            weight_at(w, g, i + 1, j + 1), weight_at(w, g, i, j + 1)};
      std::array<double, 16> K{};
      for (double gq : kGauss) {
        for (double gt : kGauss) {
          double Y = 0, T = 0, W = 0, dYdq = 0, dYdt = 0, dTdt = 0;
          for (int k = 0; k < 4; ++k) {
            const double N = shape(k, gq, gt);
            Y += N * Yc[k];
            T += N * Tc[k];
            W += N * Wc[k];
            dYdq += shape_dq(k, gt) * Yc[k];
            dYdt += shape_dt(k, gq) * Yc[k];
            dTdt += shape_dt(k, gq) * Tc[k];
          }
          // J = [[dY/dq, dY/dt], [0, dT/dt]]; gradients via J^{-T}
          const double det = dYdq * dTdt;
          const double inv_dYdq = 1.0 / dYdq;
          const double inv_dTdt = 1.0 / dTdt;
          const double spow = std::pow(std::sin(T), n - 2);
          const double A = (n - 2) * W * spow;
          const double B = W * spow / ((n - 2) * Y * Y);
          double gY[4], gT[4];
          for (int k = 0; k < 4; ++k) {
            const double nq = shape_dq(k, gt);
            const double nt = shape_dt(k, gq);
            gY[k] = nq * inv_dYdq;
            gT[k] = (nt - gY[k] * dYdt) * inv_dTdt;
          }
          const double wq = std::abs(det);  // Gauss weights are 1
          for (int r = 0; r < 4; ++r) {
            for (int c = r; c < 4; ++c) {
              const double v = (A * gY[r] * gY[c] + B * gT[r] * gT[c]) * wq;
              K[r * 4 + c] += v;
              if (c != r) K[c * 4 + r] += v;
            }
          }
        }
      }
      as.enodes.push_back(nd);
      as.K.push_back(K);
      for (int k = 0; k < 4; ++k) as.diag[nd[k]] += K[k * 4 + k];
    }
  }

  // Robin closure along xi = 1
  for (int j = 0; j < mt; ++j) {
    const std::array<int, 2> nd = {g.idx(ms, j), g.idx(ms, j + 1)};
    const double Yc[2] = {g.Y(ms, j), g.Y(ms, j + 1)};
    const double Tc[2] = {g.theta(j), g.theta(j + 1)};
    const double Wc[2] = {weight_at(w, g, ms, j), weight_at(w, g, ms, j + 1)};
    const double Uc[2] = {w.flat() ? 1.0 : w.outer_u[j], w.flat() ? 1.0 : w.outer_u[j + 1]};
    const double Sc[2] = {w.flat() ? 0.0 : w.outer_us[j], w.flat() ? 0.0 : w.outer_us[j + 1]};
    std::array<double, 4> K{};
    std::array<double, 2> b{};
    const double half = 0.5 * (Tc[1] - Tc[0]);
    for (double gt : kGauss) {
      const double N0 = 0.5 * (1.0 - gt);
      const double N1 = 0.5 * (1.0 + gt);
      const double T = N0 * Tc[0] + N1 * Tc[1];
      const double Y = N0 * Yc[0] + N1 * Yc[1];
      const double W = N0 * Wc[0] + N1 * Wc[1];
      const double U = N0 * Uc[0] + N1 * Uc[1];
      const double Us = N0 * Sc[0] + N1 * Sc[1];
      const double spow = std::pow(std::sin(T), n - 2);
      const double bil = W * spow * ((n - 2) * U + Us) / (U * Y);
      const double load = (n - 2) * W * spow / (U * Y);
      K[0] += bil * N0 * N0 * half;
      K[1] += bil * N0 * N1 * half;
      K[2] += bil * N1 * N0 * half;
      K[3] += bil * N1 * N1 * half;
      b[0] += load * N0 * half;
      b[1] += load * N1 * half;
    }
    as.robin_nodes.push_back(nd);
    as.robin_K.push_back(K);
    as.robin_b.push_back(b);
    as.diag[nd[0]] += K[0];
    as.diag[nd[1]] += K[3];
    as.b[nd[0]] += b[0];
    as.b[nd[1]] += b[1];
  }
  return as;
}

// y = A x over all rows, Dirichlet included
void matvec_full(const Assembly& as, const std::vector<double>& x, std::vector<double>& y) {
  std::fill(y.begin(), y.end(), 0.0);
  for (size_t e = 0; e < as.enodes.size(); ++e) {
    const auto& nd = as.enodes[e];
    const auto& K = as.K[e];
    const double xl[4] = {x[nd[0]], x[nd[1]], x[nd[2]], x[nd[3]]};
    for (int r = 0; r < 4; ++r) {
      y[nd[r]] += K[r * 4 + 0] * xl[0] + K[r * 4 + 1] * xl[1] + K[r * 4 + 2] * xl[2] +
                  K[r * 4 + 3] * xl[3];
    }
  }
  for (size_t e = 0; e < as.robin_nodes.size(); ++e) {
    const auto& nd = as.robin_nodes[e];
    const auto& K = as.robin_K[e];
    y[nd[0]] += K[0] * x[nd[0]] + K[1] * x[nd[1]];
    y[nd[1]] += K[2] * x[nd[0]] + K[3] * x[nd[1]];
  }
}

// y = A x restricted to free rows/columns (Dirichlet rows and columns act
// as the identity on zero entries)
void matvec_free(const Assembly& as, const std::vector<double>& x, std::vector<double>& y) {
  matvec_full(as, x, y);
  for (int k = 0; k < as.nn; ++k) {
    if (as.dirichlet[k]) y[k] = 0.0;
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

ExteriorGrid ExteriorGrid::make(RadialGraph graph, double s_max, int m_s) {
  ExteriorGrid g{std::move(graph), s_max, m_s, 0, {}, {}, {}, {}};
  g.m_theta = g.graph.m();
  if (m_s < 4) throw std::invalid_argument("ExteriorGrid: m_s must be >= 4");
  const double mx = g.graph.max_u();
  const double mn = g.graph.min_u();
  if (!(s_max >= mx + 2.0)) {
    throw std::invalid_argument("ExteriorGrid: s_max must be at least max(log rho) + 2");
  }
  if (std::exp(mn) < 1e-6 * std::exp(mx)) {
    throw std::invalid_argument("ExteriorGrid: surface touches the vertex (min rho too small)");
  }
  const int n = g.graph.cone().n;
  g.a.resize(g.m_theta + 1);
  g.ap.resize(g.m_theta + 1);
  g.app.resize(g.m_theta + 1);
  g.sin_pow.resize(g.m_theta + 1);
  for (int j = 0; j <= g.m_theta; ++j) {
    g.a[j] = g.graph.u(j);
    g.ap[j] = g.graph.du(j);
    g.app[j] = g.graph.d2u(j);
    g.sin_pow[j] = std::pow(std::sin(g.theta(j)), n - 2);
  }
  return g;
}

ExteriorGrid ExteriorGrid::coarsened() const {
  if (m_s % 2 != 0 || m_theta % 4 != 0) {
    throw std::invalid_argument("ExteriorGrid::coarsened: resolutions not divisible");
  }
  return ExteriorGrid::make(graph.subsampled(), s_max, m_s / 2);
}

WeightField WeightField::coarsened(const ExteriorGrid& fine) const {
  WeightField c;
  if (flat()) return c;
  const int ms = fine.m_s, mt = fine.m_theta;
  c.values.reserve(size_t(ms / 2 + 1) * (mt / 2 + 1));
  for (int i = 0; i <= ms; i += 2) {
    for (int j = 0; j <= mt; j += 2) {
      c.values.push_back(values[fine.idx(i, j)]);
    }
  }
  for (int j = 0; j <= mt; j += 2) {
    c.outer_u.push_back(outer_u[j]);
    c.outer_us.push_back(outer_us[j]);
  }
  return c;
}

PotentialField solve_mixed_bvp(const ExteriorGrid& grid, const std::optional<WeightField>& weight) {
  WeightField w = weight.value_or(WeightField{});
  if (!w.flat()) {
    if (int(w.values.size()) != grid.num_nodes() || int(w.outer_u.size()) != grid.m_theta + 1 ||
        int(w.outer_us.size()) != grid.m_theta + 1) {
      throw std::invalid_argument("solve_mixed_bvp: weight field size mismatch");
    }
    for (double v : w.values) {
      if (!(v > 0.0)) throw std::invalid_argument("solve_mixed_bvp: weight must be positive");
    }
  }
  const Assembly as = assemble(grid, w);
  const int nn = as.nn;

  // start from the per-column monopole profile, exact for round caps
  std::vector<double> x(nn);
  for (int i = 0; i <= grid.m_s; ++i) {
    for (int j = 0; j <= grid.m_theta; ++j) {
      x[grid.idx(i, j)] = 1.0 - grid.Y(i, j) / grid.Y(0, j);
    }
  }
  for (int k = 0; k < nn; ++k) {
    if (as.dirichlet[k]) x[k] = 0.0;
  }

  std::vector<double> r(nn), z(nn), p(nn), q(nn);
  matvec_free(as, x, r);
  double bnorm = 0.0;
  for (int k = 0; k < nn; ++k) {
    const double bk = as.dirichlet[k] ? 0.0 : as.b[k];
    r[k] = bk - r[k];
    bnorm += bk * bk;
  }
  bnorm = std::sqrt(bnorm);
  const double target = 1e-10 * bnorm;
  const int max_iter = int(50.0 * std::sqrt(double(nn))) + 1;

  auto precond = [&](const std::vector<double>& rr, std::vector<double>& zz) {
    for (int k = 0; k < nn; ++k) {
      zz[k] = as.dirichlet[k] ? 0.0 : rr[k] / as.diag[k];
    }
  };

  precond(r, z);
  p = z;
  double rz = dot(r, z);
  double rnorm = std::sqrt(dot(r, r));
  int it = 0;
  while (rnorm > target && it < max_iter) {
    matvec_free(as, p, q);
    const double pq = dot(p, q);
    const double alpha = rz / pq;
    for (int k = 0; k < nn; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    precond(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int k = 0; k < nn; ++k) p[k] = z[k] + beta * p[k];
    rnorm = std::sqrt(dot(r, r));
    ++it;
  }
  const double rel = bnorm > 0 ? rnorm / bnorm : rnorm;
  if (rnorm > target) {
    throw SolverError("solve_mixed_bvp: CG did not reach the residual target", rel, it);
  }
  return PotentialField{grid, std::move(w), std::move(x), rel, it};
}

namespace {

double simpson_theta(const std::vector<double>& f, double h) {
  const int m = int(f.size()) - 1;
  double s = f[0] + f[m];
  for (int i = 1; i < m; ++i) s += f[i] * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// flux of w D phi through Sigma (per unit |S^(n-2)|), via the residual of
// the full system at the Dirichlet rows -- superconvergent for nodal FEM
double sigma_flux(const PotentialField& f) {
  const Assembly as = assemble(f.grid, f.weight);
  std::vector<double> y(as.nn);
  matvec_full(as, f.phi, y);
  double flux = 0.0;
  for (int j = 0; j <= f.grid.m_theta; ++j) {
    const int k = f.grid.idx(0, j);
    flux -= y[k] - as.b[k];
  }
  return flux;
}

// quadrature of w |D phi|^2 from the nodal field, independent of the FEM
// bilinear forms: finite-difference gradients (radial part in the capacity
// coordinate, angular part with the boundary-fitted cross term) and 2-D
// composite Simpson
double interior_energy(const PotentialField& f) {
  const ExteriorGrid& g = f.grid;
  const int n = g.n();
  const int ms = g.m_s, mt = g.m_theta;
  const double hx = 1.0 / ms;
  const double ht = g.graph.h();

  // d phi / dY along a column, 3-point formulas on the non-uniform Y nodes
  auto dphi_dY = [&](int i, int j) {
    const int c = std::clamp(i, 1, ms - 1);
    const double y0 = g.Y(c - 1, j), y1 = g.Y(c, j), y2 = g.Y(c + 1, j);
    const double f0 = f.phi[g.idx(c - 1, j)], f1 = f.phi[g.idx(c, j)],
                 f2 = f.phi[g.idx(c + 1, j)];
    const double y = g.Y(i, j);
    // derivative of the quadratic through the three points, at Y(i,j)
    return f0 * (2.0 * y - y1 - y2) / ((y0 - y1) * (y0 - y2)) +
           f1 * (2.0 * y - y0 - y2) / ((y1 - y0) * (y1 - y2)) +
           f2 * (2.0 * y - y0 - y1) / ((y2 - y0) * (y2 - y1));
  };
  auto d1 = [](double fm, double f0, double fp, int i, int m, double h) {
    if (i == 0) return (-3.0 * f0 + 4.0 * fp - fm) / (2.0 * h);  // fm holds f[2]
    if (i == m) return (3.0 * f0 - 4.0 * fm + fp) / (2.0 * h);   // fp holds f[m-2]
    return (fp - fm) / (2.0 * h);
  };

  double total = 0.0;
  for (int i = 0; i <= ms; ++i) {
    const double wi = (i == 0 || i == ms) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    for (int j = 0; j <= mt; ++j) {
      const double wj = (j == 0 || j == mt) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      const int k = g.idx(i, j);
      const double L = g.s_max - g.a[j];
      const double s = g.s(i, j);
      const double phi_s = (2 - n) * g.Y(i, j) * dphi_dY(i, j);
      const double phi_xi =
          d1(f.phi[g.idx(i == 0 ? 2 : i - 1, j)], f.phi[k], f.phi[g.idx(i == ms ? ms - 2 : i + 1, j)],
             i, ms, hx);
      const double phi_th_hat =
          d1(f.phi[g.idx(i, j == 0 ? 2 : j - 1)], f.phi[k], f.phi[g.idx(i, j == mt ? mt - 2 : j + 1)],
             j, mt, ht);
      const double xi_th = -g.ap[j] * (1.0 - g.xi(i)) / L;
      const double phi_th = phi_th_hat + phi_xi * xi_th;
      const double w = weight_at(f.weight, g, i, j);
      total += wi * wj * w * (phi_s * phi_s + phi_th * phi_th) * std::exp((n - 2) * s) *
               g.sin_pow[j] * L;
    }
  }
  return total * (hx / 3.0) * (ht / 3.0);
}

// Dirichlet energy of the monopole tail beyond s_max, per unit |S^(n-2)|:
// with zeta = u*phi = 1 - C Y and u = 1 + D Y the integrand collapses to
// (n-2) u (1-phi)^2 / Y at s_max.
double tail_energy(const PotentialField& f) {
  const ExteriorGrid& g = f.grid;
  const int n = g.n();
  std::vector<double> integrand(g.m_theta + 1);
  for (int j = 0; j <= g.m_theta; ++j) {
    const double phi = f.phi[g.idx(g.m_s, j)];
    const double u = f.weight.flat() ? 1.0 : f.weight.outer_u[j];
    integrand[j] = g.sin_pow[j] * (n - 2) * u * (1.0 - phi) * (1.0 - phi) / g.Y(g.m_s, j);
  }
  return simpson_theta(integrand, g.graph.h());
}

double cap_flux_of(const PotentialField& f) {
  const int n = f.grid.n();
  const double q = f.grid.graph.cone().alpha / sphere_area(n - 2);
  return sigma_flux(f) / ((n - 2) * q);
}

}  // namespace

CapacityResult capacity_estimates(const PotentialField& field) {
  const int n = field.grid.n();
  const double alpha = field.grid.graph.cone().alpha;
  const double q = alpha / sphere_area(n - 2);

  CapacityResult res{};
  res.n = n;
  res.alpha = alpha;
  res.cap_energy = (interior_energy(field) + tail_energy(field)) / ((n - 2) * q);
  res.cap_flux = cap_flux_of(field);

  const ExteriorGrid coarse_grid = field.grid.coarsened();
  const WeightField coarse_w = field.weight.coarsened(field.grid);
  const PotentialField coarse = solve_mixed_bvp(
      coarse_grid, field.weight.flat() ? std::nullopt : std::make_optional(coarse_w));
  res.cap_flux_coarse = cap_flux_of(coarse);

  // second-order Richardson
  res.cap_extrapolated = res.cap_flux + (res.cap_flux - res.cap_flux_coarse) / 3.0;
  res.error_estimate = std::abs(res.cap_flux - res.cap_extrapolated);
  res.discrepancy = std::abs(res.cap_energy - res.cap_flux) / res.cap_flux;
  return res;
}

std::vector<std::pair<double, double>> pfs_radius_profile(const PotentialField& field) {
  if (!field.weight.flat()) {
    throw std::invalid_argument("pfs_radius_profile: requires the flat weight");
  }
  const ExteriorGrid& g = field.grid;
  const int n = g.n();
  const double alpha = g.graph.cone().alpha;
  const double vol_omega = functionals(g.graph).volume;
  const double sn2 = sphere_area(n - 2);

  std::vector<std::pair<double, double>> out;
  for (int lev = 1; lev <= 19; ++lev) {
    const double t = 0.05 * lev;
    std::vector<double> col(g.m_theta + 1);
    for (int j = 0; j <= g.m_theta; ++j) {
      int i = 1;
      while (i <= g.m_s && field.phi[g.idx(i, j)] < t) ++i;
      if (i > g.m_s) {
        throw std::runtime_error("pfs_radius_profile: level set escapes the truncated domain");
      }
      const double p0 = field.phi[g.idx(i - 1, j)];
      const double p1 = field.phi[g.idx(i, j)];
      const double y0 = g.Y(i - 1, j);
      const double y1 = g.Y(i, j);
      // phi is piecewise linear in the capacity coordinate Y
      const double ystar = y0 + (t - p0) * (y1 - y0) / (p1 - p0);
      const double sstar = std::log(ystar) / (2 - n);
      col[j] = g.sin_pow[j] * (std::exp(n * sstar) - std::exp(n * g.a[j])) / n;
    }
    const double shell = sn2 * simpson_theta(col, g.graph.h());
    const double vol_t = vol_omega + shell;
    out.emplace_back(t, std::pow(n * vol_t / alpha, 1.0 / n));
  }
  return out;
}

double capvol_lower_bound(const PotentialField& field) {
  const auto prof = pfs_radius_profile(field);
  const int n = field.grid.n();
  // central-difference R' on the level samples, trapezoid over the interior
  const int k = int(prof.size());
  double integral = 0.0;
  std::vector<double> f(k, 0.0);
  for (int i = 1; i + 1 < k; ++i) {
    const double rp = (prof[i + 1].second - prof[i - 1].second) /
                      (prof[i + 1].first - prof[i - 1].first);
    f[i] = std::pow(prof[i].second, n - 1) / rp;
  }
  for (int i = 1; i + 2 < k; ++i) {
    integral += 0.5 * (f[i] + f[i + 1]) * (prof[i + 1].first - prof[i].first);
  }
  return integral / (n - 2);
}

void write_field_csv(const PotentialField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
  out.precision(17);
  out << "xi,theta,phi\n";
  for (int i = 0; i <= field.grid.m_s; ++i) {
    for (int j = 0; j <= field.grid.m_theta; ++j) {
      out << field.grid.xi(i) << ',' << field.grid.theta(j) << ','
          << field.phi[field.grid.idx(i, j)] << '\n';
    }
  }
}

}  // namespace conecap
