#pragma once

// Test-only oracles, independent of the library's discretizations.

#include <cmath>
#include <functional>

namespace test_oracles {

// Mean curvature of the axisymmetric surface rho(theta) computed from the
// embedded meridian curve (x, z) = (rho sin theta, rho cos theta) by finite
// differences on the embedding: curve curvature from the Frenet formula plus
// the orbit curvature from the normal component, both with respect to the
// outward normal.  Uses only the profile callable, not the radial-graph
// curvature formulas.
inline double embedded_mean_curvature(const std::function<double(double)>& rho, int n,
                                      double theta, double fd = 1e-3) {
  auto x = [&](double t) { return rho(t) * std::sin(t); };
  auto z = [&](double t) { return rho(t) * std::cos(t); };
  const double xp = (x(theta + fd) - x(theta - fd)) / (2 * fd);
  const double zp = (z(theta + fd) - z(theta - fd)) / (2 * fd);
  const double xpp = (x(theta + fd) - 2 * x(theta) + x(theta - fd)) / (fd * fd);
  const double zpp = (z(theta + fd) - 2 * z(theta) + z(theta - fd)) / (fd * fd);
  const double speed = std::sqrt(xp * xp + zp * zp);
  const double kappa_mer = -(xp * zpp - zp * xpp) / (speed * speed * speed);
  const double kappa_orb = -zp / (speed * x(theta));  // N_x / x, N = (-z', x')/|P'|
  return kappa_mer + (n - 2) * kappa_orb;
}

// deterministic xorshift for property-style sampling
struct Rng {
  unsigned long long state = 0x9e3779b97f4a7c15ull;
  double uniform() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return double(state % (1ull << 53)) / double(1ull << 53);
  }
  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

}  // namespace test_oracles
