#include "conecap/imcf_flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace conecap {

namespace {

// rho v H at every node: D = (v^2 - u'')/v^2 + (n-2)(1 - u' cot theta),
// with the symmetric limit at the axis.
void speed_denominator(const RadialGraph& g, std::vector<double>& D, std::vector<double>& v2) {
  const int n = g.cone().n;
  const int m = g.m();
  D.resize(m + 1);
  v2.resize(m + 1);
  for (int i = 0; i <= m; ++i) {
    const double up = g.du(i);
    const double upp = g.d2u(i);
    v2[i] = 1.0 + up * up;
    const double orb = (i == 0) ? (1.0 - upp) : (1.0 - up / std::tan(g.theta(i)));
    D[i] = (v2[i] - upp) / v2[i] + (n - 2) * orb;
  }
}

// Finite-volume weights of the conservative spherical Laplacian
// (1/S)(S u')' with S = sin^(n-2) theta and zero-flux ends:
// (L u)_i = wup_i (u_{i+1} - u_i) - wlo_i (u_i - u_{i-1}).
struct LaplacianWeights {
  std::vector<double> wlo, wup;
};

LaplacianWeights laplacian_weights(const RadialGraph& g) {
  const int n = g.cone().n;
  const int m = g.m();
  const double h = g.h();
  auto S = [&](double theta) { return std::pow(std::sin(theta), n - 2); };
  // 4-point Gauss on [a,b]
  auto cell_measure = [&](double a, double b) {
    static const double x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                0.8611363115940526};
    static const double w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                0.3478548451374538};
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) sum += w[k] * S(c + r * x[k]);
    return sum * r;
  };
  LaplacianWeights lw;
  lw.wlo.assign(m + 1, 0.0);
  lw.wup.assign(m + 1, 0.0);
  for (int i = 0; i <= m; ++i) {
    const double theta = g.theta(i);
    const double cell =
        cell_measure(std::max(0.0, theta - 0.5 * h), std::min(g.cone().theta0, theta + 0.5 * h));
    if (i > 0) lw.wlo[i] = S(theta - 0.5 * h) / (h * cell);
    if (i < m) lw.wup[i] = S(theta + 0.5 * h) / (h * cell);
  }
  return lw;
}

void apply_laplacian(const LaplacianWeights& lw, const std::vector<double>& u,
                     std::vector<double>& out) {
  const int m = int(u.size()) - 1;
  out.resize(m + 1);
  for (int i = 0; i <= m; ++i) {
    const double up = (i < m) ? lw.wup[i] * (u[i + 1] - u[i]) : 0.0;
    const double dn = (i > 0) ? lw.wlo[i] * (u[i] - u[i - 1]) : 0.0;
    out[i] = up - dn;
  }
}

void solve_tridiagonal(std::vector<double>& lo, std::vector<double>& di, std::vector<double>& up,
                       std::vector<double>& rhs) {
  const int n = int(di.size());
  for (int i = 1; i < n; ++i) {
    const double w = lo[i] / di[i - 1];
    di[i] -= w * up[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= di[n - 1];
  for (int i = n - 2; i >= 0; --i) {
    rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / di[i];
  }
}

}  // namespace

Monitors monitors(const FlowState& state) {
  const SurfaceFunctionals f = functionals(state.graph);
  const int n = state.graph.cone().n;
  Monitors m;
  m.area = f.area;
  m.total_mean_curvature = f.total_mean_curvature;
  m.h = f.total_mean_curvature / std::pow(f.area, double(n - 2) / (n - 1));
  m.umbilicity = f.umbilicity_residual;
  return m;
}

std::optional<FlowState> try_step(const FlowState& state, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("try_step: dt must be positive");
  const RadialGraph& g = state.graph;
  const int m = g.m();

  std::vector<double> D, v2;
  speed_denominator(g, D, v2);
  for (int i = 0; i <= m; ++i) {
    if (!(D[i] > 0.0)) {
      throw FlowError("IMCF: mean curvature is not positive at a node", state.t, i);
    }
  }

  // u_t = G(u), G = v^2 / D; the spherical-Laplacian part of the linearized
  // speed is advanced implicitly with the lagged coefficient c = v^2 / D^2
  std::vector<double> c(m + 1), G(m + 1), Lu;
  for (int i = 0; i <= m; ++i) {
    c[i] = v2[i] / (D[i] * D[i]);
    G[i] = v2[i] / D[i];
  }
  const LaplacianWeights lw = laplacian_weights(g);
  apply_laplacian(lw, g.u(), Lu);

  // (I - dt c L) w = u + dt (G - c L u)
  std::vector<double> lo(m + 1), di(m + 1), up(m + 1), rhs(m + 1);
  for (int i = 0; i <= m; ++i) {
    rhs[i] = g.u(i) + dt * (G[i] - c[i] * Lu[i]);
    lo[i] = -dt * c[i] * lw.wlo[i];
    up[i] = -dt * c[i] * lw.wup[i];
    di[i] = 1.0 + dt * c[i] * (lw.wlo[i] + lw.wup[i]);
  }
  solve_tridiagonal(lo, di, up, rhs);

  double sup = 0.0;
  for (int i = 0; i <= m; ++i) sup = std::max(sup, std::abs(rhs[i] - g.u(i)));
  if (sup > 0.1) return std::nullopt;

  return FlowState{state.t + dt, RadialGraph(g.cone(), std::move(rhs))};
}

FlowState step(const FlowState& state, double dt) {
  auto next = try_step(state, dt);
  if (!next) {
    throw FlowError("IMCF: step rejected (sup-norm update exceeds 0.1, dt too large)", state.t,
                    -1);
  }
  return *next;
}

FlowTrace run(const RadialGraph& initial, double t_end, double dt) {
  if (!(t_end > 0.0)) throw std::invalid_argument("run: t_end must be positive");
  const int n = initial.cone().n;
  FlowState state{0.0, initial};

  FlowTrace trace;
  trace.sup_variation_initial = initial.max_u() - initial.min_u();
  const double area0 = functionals(initial).area;
  const double sample_every = std::max(dt, t_end / 1000.0);
  const double drift0 = initial.max_u();

  auto record = [&](const FlowState& st) {
    const Monitors mo = monitors(st);
    FlowSample s;
    s.t = st.t;
    s.area = mo.area;
    s.total_mean_curvature = mo.total_mean_curvature;
    s.h = mo.h;
    s.umbilicity = mo.umbilicity;
    s.area_ratio_err = std::abs(mo.area / (area0 * std::exp(st.t)) - 1.0);
    trace.samples.push_back(s);
  };

  record(state);
  double next_sample = sample_every;
  while (state.t < t_end - 1e-12) {
    const double dt_step = std::min(dt, t_end - state.t);
    auto next = try_step(state, dt_step);
    if (!next) {
      dt *= 0.5;
      if (dt < 1e-9) throw FlowError("IMCF: step size collapsed", state.t, -1);
      continue;
    }
    state = std::move(*next);
    if (state.graph.max_u() - state.t / (n - 1) > drift0 + 5.0) {
      throw FlowError("IMCF: rescaled radius diverges", state.t, -1);
    }
    if (state.t >= next_sample - 1e-12 || state.t >= t_end - 1e-12) {
      record(state);
      while (next_sample <= state.t + 1e-12) next_sample += sample_every;
    }
  }

  double mean_u = 0.0;
  for (int i = 0; i <= state.graph.m(); ++i) mean_u += state.graph.u(i);
  mean_u /= state.graph.m() + 1;
  trace.r_infinity = std::exp(mean_u - state.t / (n - 1));
  trace.r_infinity_expected = std::pow(area0 / initial.cone().alpha, 1.0 / (n - 1));
  trace.final_dt = dt;
  trace.sup_variation_final = state.graph.max_u() - state.graph.min_u();
  return trace;
}

void write_trace_csv(const FlowTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  out.precision(17);
  out << "t,area,I,h,umbilicity,area_ratio_err\n";
  for (const FlowSample& s : trace.samples) {
    out << s.t << ',' << s.area << ',' << s.total_mean_curvature << ',' << s.h << ','
        << s.umbilicity << ',' << s.area_ratio_err << '\n';
  }
}

}  // namespace conecap
