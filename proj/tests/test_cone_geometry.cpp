#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conecap/cone_geometry.hpp"

using namespace conecap;
constexpr double kPi = std::numbers::pi;

TEST_CASE("solid angle closed forms") {
  CHECK(solid_angle(3, kPi / 2) == doctest::Approx(2 * kPi).epsilon(1e-12));
  CHECK(solid_angle(3, kPi / 3) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(solid_angle(4, kPi / 2) == doctest::Approx(kPi * kPi).epsilon(1e-12));
  // n = 3: 2 pi (1 - cos theta0); n = 4: 2 pi (theta0 - sin cos)
  for (double th : {0.3, 0.7, 1.1, kPi / 2}) {
    CHECK(solid_angle(3, th) == doctest::Approx(2 * kPi * (1 - std::cos(th))).epsilon(1e-12));
    CHECK(solid_angle(4, th) ==
          doctest::Approx(2 * kPi * (th - std::sin(th) * std::cos(th))).epsilon(1e-12));
  }
}

TEST_CASE("solid angle domain errors") {
  CHECK_THROWS_AS(solid_angle(2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(solid_angle(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solid_angle(3, 2.0), std::invalid_argument);  // wider than pi/2
  CHECK_THROWS_AS(ConeSpec::make(3, 2.0 * kPi / 3), std::invalid_argument);
}

TEST_CASE("solid angle monotone in theta0 and positive across n") {
  for (int n : {3, 4, 5, 6, 7}) {
    double prev = 0.0;
    for (int k = 1; k <= 10; ++k) {
      const double a = solid_angle(n, k * kPi / 20);
      CHECK(a > prev);
      prev = a;
    }
  }
}

TEST_CASE("cap metrics and the three equalities") {
  // n=3 half-space unit cap
  {
    const auto cone = ConeSpec::make(3, kPi / 2);
    const auto m = cap_metrics(CapSector::make(cone, 1.0));
    CHECK(m.area == doctest::Approx(2 * kPi).epsilon(1e-12));
    CHECK(m.volume == doctest::Approx(2 * kPi / 3).epsilon(1e-12));
    CHECK(m.total_mean_curvature == doctest::Approx(4 * kPi).epsilon(1e-12));
    CHECK(m.capacity == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int n : {3, 4, 5, 6}) {
    for (double th : {0.4, 1.0, kPi / 2}) {
      const auto cone = ConeSpec::make(n, th);
      for (double r : {0.5, 1.0, 2.3}) {
        const auto m = cap_metrics(CapSector::make(cone, r));
        // capacity * (n-1) * alpha = total mean curvature
        CHECK(m.capacity * (n - 1) * cone.alpha ==
              doctest::Approx(m.total_mean_curvature).epsilon(1e-12));
        // I / (2(n-1)alpha) = (1/2) (area/alpha)^((n-2)/(n-1))
        CHECK(m.total_mean_curvature / (2.0 * (n - 1) * cone.alpha) ==
              doctest::Approx(0.5 * std::pow(m.area / cone.alpha, double(n - 2) / (n - 1)))
                  .epsilon(1e-12));
        // (vol / unit-sector-volume)^((n-2)/n) = capacity
        CHECK(std::pow(m.volume * n / cone.alpha, double(n - 2) / n) ==
              doctest::Approx(m.capacity).epsilon(1e-12));
        // area = d(volume)/dr consistency
        const double dr = 1e-6 * r;
        const double v1 = cap_metrics(CapSector::make(cone, r + dr)).volume;
        const double v0 = cap_metrics(CapSector::make(cone, r - dr)).volume;
        CHECK((v1 - v0) / (2 * dr) == doctest::Approx(m.area).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("isoperimetric bound is sharp on sectors and homogeneous") {
  const auto cone3 = ConeSpec::make(3, kPi / 2);
  CHECK(isoperimetric_bound(cone3, 2 * kPi / 3) == doctest::Approx(2 * kPi).epsilon(1e-12));
  const auto cone60 = ConeSpec::make(3, kPi / 3);
  CHECK(isoperimetric_bound(cone60, kPi / 3) == doctest::Approx(kPi).epsilon(1e-12));

  for (int n : {3, 5}) {
    const auto cone = ConeSpec::make(n, 0.8);
    for (double r : {0.3, 1.0, 1.7}) {
      const auto m = cap_metrics(CapSector::make(cone, r));
      CHECK(isoperimetric_bound(cone, m.volume) == doctest::Approx(m.area).epsilon(1e-12));
    }
    // volume -> lambda^n volume scales the bound by lambda^(n-1)
    const double b1 = isoperimetric_bound(cone, 1.0);
    const double lam = 1.7;
    CHECK(isoperimetric_bound(cone, std::pow(lam, n)) ==
          doctest::Approx(b1 * std::pow(lam, n - 1)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(isoperimetric_bound(cone3, -1.0), std::invalid_argument);
}
