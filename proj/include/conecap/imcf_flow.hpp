#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conecap/surface_model.hpp"

namespace conecap {

class FlowError : public std::runtime_error {
 public:
  FlowError(const std::string& what, double t, int node)
      : std::runtime_error(what), t(t), node(node) {}
  double t;
  int node;
};

/// State of the inverse mean curvature flow: the scalar equation for
/// u = log rho is u_t = v / (rho H) with v = sqrt(1 + u'^2).
struct FlowState {
  double t;
  RadialGraph graph;
};

struct FlowSample {
  double t;
  double area;
  double total_mean_curvature;  // I(Sigma_t)
  double h;                     // I / Area^((n-2)/(n-1))
  double umbilicity;
  double area_ratio_err;        // |area(t)/(area(0) e^t) - 1|
};

struct FlowTrace {
  std::vector<FlowSample> samples;
  double r_infinity;           // exp(mean u - t/(n-1)) at the final time
  double r_infinity_expected;  // (area(0)/alpha)^(1/(n-1)); interprets the
                               // round-limit area normalization as alpha
  double final_dt;
  double sup_variation_initial;  // max u - min u at t = 0
  double sup_variation_final;
};

struct Monitors {
  double area;
  double total_mean_curvature;
  double h;
  double umbilicity;
};

Monitors monitors(const FlowState& state);

/// One semi-implicit step: the spherical-Laplacian part of the linearized
/// speed is treated implicitly (tridiagonal solve), the rest explicitly with
/// lagged coefficients.  Throws FlowError if H <= 0 anywhere; returns
/// nullopt when the update exceeds 0.1 in sup norm (step rejected).
std::optional<FlowState> try_step(const FlowState& state, double dt);

/// try_step that throws on rejection instead.
FlowState step(const FlowState& state, double dt);

/// Integrate to t_end sampling every max(dt, t_end/1000); dt halves on step
/// rejection and stays halved.
FlowTrace run(const RadialGraph& initial, double t_end, double dt);

void write_trace_csv(const FlowTrace& trace, const std::string& path);

}  // namespace conecap
