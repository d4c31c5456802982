#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "conecap/surface_model.hpp"
#include "oracles.hpp"

using namespace conecap;
constexpr double kPi = std::numbers::pi;

TEST_CASE("caps have constant curvature and vanishing umbilicity residual") {
  for (int n : {3, 4, 5}) {
    for (double th : {kPi / 3, kPi / 2}) {
      const auto cone = ConeSpec::make(n, th);
      const auto g = RadialGraph::cap(cone, 0.7, 64);
      const auto cf = mean_curvature_field(g);
      for (double H : cf.H) CHECK(H == doctest::Approx((n - 1) / 0.7).epsilon(1e-14));
      CHECK(umbilicity_residual(g) <= 1e-10);
    }
  }
}

TEST_CASE("curvature matches the embedding oracle at second order") {
  const auto cone = ConeSpec::make(3, kPi / 2);
  auto rho = [](double t) { return 1.0 + 0.1 * std::cos(2 * t); };
  double errs[2];
  for (int k = 0; k < 2; ++k) {
    const int m = 64 << k;
    std::vector<double> u(m + 1);
    for (int i = 0; i <= m; ++i) u[i] = std::log(rho(cone.theta0 * i / m));
    const RadialGraph g(cone, u);
    const auto cf = mean_curvature_field(g);
    double err = 0.0;
    for (int i = 1; i < m; ++i) {
      const double oracle = test_oracles::embedded_mean_curvature(rho, 3, g.theta(i), 5e-4);
      err = std::max(err, std::abs(cf.H[i] - oracle));
    }
    errs[k] = err;
  }
  CHECK(errs[0] < 2e-3);
  const double order = std::log2(errs[0] / errs[1]);
  CHECK(order >= 1.9);
}

TEST_CASE("pointwise Cauchy-Schwarz between H^2 and |A|^2") {
  // H^2 <= (n-1)|A|^2 holds exactly for any pair of principal curvatures
  test_oracles::Rng rng;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + int(rng.range(0, 3.999));
    const auto cone = ConeSpec::make(n, rng.range(0.3, kPi / 2));
    const int m = 32;
    std::vector<double> u(m + 1);
    const double a1 = rng.range(-0.3, 0.3);
    const double a2 = rng.range(-0.2, 0.2);
    for (int i = 0; i <= m; ++i) {
      const double t = kPi * i / m;  // cos(k pi theta/theta0) keeps both ends Neumann
      u[i] = a1 * std::cos(t) + a2 * std::cos(2 * t);
    }
    const RadialGraph g(cone, u);
    const auto cf = mean_curvature_field(g);
    for (int i = 0; i <= m; ++i) {
      CHECK(cf.H[i] * cf.H[i] <= (n - 1) * cf.A2[i] * (1 + 1e-13) + 1e-13);
    }
  }
}

TEST_CASE("functionals reproduce the cap closed forms") {
  const auto cone = ConeSpec::make(3, kPi / 2);
  const auto sf = functionals(RadialGraph::cap(cone, 1.0, 256));
  CHECK(sf.area == doctest::Approx(2 * kPi).epsilon(1e-6));
  CHECK(sf.volume == doctest::Approx(2 * kPi / 3).epsilon(1e-6));
  CHECK(sf.total_mean_curvature == doctest::Approx(4 * kPi).epsilon(1e-6));
  for (int n : {4, 5}) {
    const auto cn = ConeSpec::make(n, 1.0);
    const auto m = cap_metrics(CapSector::make(cn, 1.3));
    const auto f = functionals(RadialGraph::cap(cn, 1.3, 256));
    CHECK(f.area == doctest::Approx(m.area).epsilon(1e-8));
    CHECK(f.volume == doctest::Approx(m.volume).epsilon(1e-8));
    CHECK(f.total_mean_curvature == doctest::Approx(m.total_mean_curvature).epsilon(1e-8));
  }
}

TEST_CASE("functionals scale with their homogeneity degrees") {
  const auto cone = ConeSpec::make(4, 1.1);
  const auto g = RadialGraph::perturbed_cap(cone, 1.0, 0.15, 2, 64);
  const double lam = 1.9;
  const auto f0 = functionals(g);
  const auto f1 = functionals(g.scaled(lam));
  const int n = 4;
  CHECK(f1.area == doctest::Approx(f0.area * std::pow(lam, n - 1)).epsilon(1e-12));
  CHECK(f1.volume == doctest::Approx(f0.volume * std::pow(lam, n)).epsilon(1e-12));
  CHECK(f1.total_mean_curvature ==
        doctest::Approx(f0.total_mean_curvature * std::pow(lam, n - 2)).epsilon(1e-12));
  // umbilicity residual is curvature-squared, hence lambda^{-2}
  CHECK(umbilicity_residual(g.scaled(lam)) ==
        doctest::Approx(umbilicity_residual(g) / (lam * lam)).epsilon(1e-10));
}

TEST_CASE("perturbed caps are mean convex and respect the isoperimetric bound") {
  for (double th : {kPi / 3, kPi / 2}) {
    const auto cone = ConeSpec::make(3, th);
    for (int mode : {2, 4}) {
      for (double eps : {0.1, 0.2}) {
        if (mode == 4 && eps >= 0.1 && th < kPi / 2) continue;  // loses mean convexity
        const auto g = RadialGraph::perturbed_cap(cone, 1.0, eps, mode, 128);
        const auto f = functionals(g);
        CHECK(f.min_H > 0.0);
        CHECK(f.area >= isoperimetric_bound(cone, f.volume));
        CHECK(f.umbilicity_residual > 0.0);
      }
    }
  }
}

TEST_CASE("perturbed cap validation") {
  const auto cone = ConeSpec::make(3, kPi / 2);
  CHECK_THROWS_AS(RadialGraph::perturbed_cap(cone, 1.0, 0.7, 2, 64), std::invalid_argument);
  CHECK_THROWS_AS(RadialGraph::perturbed_cap(cone, 1.0, 0.2, 3, 64), std::invalid_argument);
  CHECK_THROWS_AS(RadialGraph::cap(cone, -1.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(RadialGraph(cone, std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST_CASE("wall normal is radial under the discrete Neumann closure") {
  // one-sided derivative of the analytic profile at theta0 decays at O(h^2)
  const auto cone = ConeSpec::make(3, kPi / 3);
  double slopes[2];
  for (int k = 0; k < 2; ++k) {
    const int m = 64 << k;
    const auto g = RadialGraph::perturbed_cap(cone, 1.0, 0.2, 2, m);
    const double h = g.h();
    slopes[k] = std::abs((3 * g.u(m) - 4 * g.u(m - 1) + g.u(m - 2)) / (2 * h));
  }
  CHECK(slopes[0] < 1e-3);
  CHECK(slopes[0] / slopes[1] > 3.0);
}

TEST_CASE("profile CSV round trip") {
  const auto cone = ConeSpec::make(3, kPi / 3);
  const auto g = RadialGraph::perturbed_cap(cone, 1.3, 0.2, 2, 64);
  const auto path = std::filesystem::temp_directory_path() / "conecap_profile.csv";
  write_profile_csv(g, path.string());
  const auto back = read_profile_csv(cone, path.string());
  REQUIRE(back.m() == g.m());
  for (int i = 0; i <= g.m(); ++i) CHECK(back.u(i) == doctest::Approx(g.u(i)).epsilon(1e-14));
  std::filesystem::remove(path);
}

TEST_CASE("resampling preserves caps exactly and smooth profiles closely") {
  const auto cone = ConeSpec::make(3, kPi / 2);
  const auto cap = RadialGraph::cap(cone, 2.0, 64).resampled(96);
  for (int i = 0; i <= 96; ++i) CHECK(cap.u(i) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  const auto g = RadialGraph::perturbed_cap(cone, 1.0, 0.2, 2, 64);
  const auto fine = RadialGraph::perturbed_cap(cone, 1.0, 0.2, 2, 96);
  const auto res = g.resampled(96);
  for (int i = 0; i <= 96; ++i) CHECK(res.u(i) == doctest::Approx(fine.u(i)).epsilon(1e-5));

  const auto sub = RadialGraph::perturbed_cap(cone, 1.0, 0.2, 2, 64).subsampled();
  const auto half = RadialGraph::perturbed_cap(cone, 1.0, 0.2, 2, 32);
  for (int i = 0; i <= 32; ++i) CHECK(sub.u(i) == doctest::Approx(half.u(i)).epsilon(1e-14));
}

TEST_CASE("legendre polynomials") {
  CHECK(legendre_p(2, 0.5) == doctest::Approx((3 * 0.25 - 1) / 2).epsilon(1e-15));
  CHECK(legendre_p(4, 0.3) ==
        doctest::Approx((35 * std::pow(0.3, 4) - 30 * 0.09 + 3) / 8).epsilon(1e-14));
  CHECK(legendre_p(2, 1.0) == doctest::Approx(1.0));
  CHECK(legendre_p(4, 1.0) == doctest::Approx(1.0));
}
