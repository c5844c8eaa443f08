#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gapstress/disk_analytics.hpp"

using namespace gapstress;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("circle reflection") {
  const Disk unit{{0, 0}, 1.0};
  const Point2 r = reflect_circle({2, 0}, unit);
  CHECK(r.x == Approx(0.5));
  CHECK(r.y == 0.0);
  const Point2 on{std::cos(0.3), std::sin(0.3)};
  CHECK(distance(reflect_circle(on, unit), on) < 1e-15);
  const Disk d{{0.3, -0.2}, 0.7};
  const Point2 z{1.1, 0.9};
  CHECK(distance(reflect_circle(reflect_circle(z, d), d), z) < 1e-14);
  CHECK_THROWS_AS(reflect_circle({0.3, -0.2}, d), std::domain_error);
}

TEST_CASE("mixed-reflection fixed points") {
  const Disk d1{{-1, 0}, 1}, d2{{1.01, 0}, 1};
  const FixedPointPair fp = mixed_fixed_points(d1, d2);
  const double exact = 0.005 + std::sqrt(1.005 * 1.005 - 1.0);
  CHECK(fp.p2.x == Approx(exact).epsilon(1e-12));
  CHECK(fp.p2.x == Approx(0.1051249).epsilon(1e-6));
  CHECK(fp.p1.x == Approx(0.005 - std::sqrt(1.005 * 1.005 - 1.0)).epsilon(1e-12));
  CHECK(fp.residual < 1e-12);
  CHECK(distance(reflect_circle(reflect_circle(fp.p1, d2), d1), fp.p1) < 1e-12);
  CHECK(std::abs(fp.p2.x - 0.1) <= 2 * 0.01);
  const FixedPointPair cf = collinear_fixed_points(d1, d2);
  CHECK(cf.p2.x == Approx(fp.p2.x).epsilon(1e-12));
  // unequal radii
  const Disk e1{{-2, 0}, 2}, e2{{3.05, 0}, 3};
  const FixedPointPair a = mixed_fixed_points(e1, e2), b = collinear_fixed_points(e1, e2);
  CHECK(a.p1.x == Approx(b.p1.x).epsilon(1e-11));
  CHECK(a.p2.x == Approx(b.p2.x).epsilon(1e-11));
  // touching disks: both points tend to the contact
  const FixedPointPair t = mixed_fixed_points(d1, Disk{{1, 0}, 1});
  CHECK(std::abs(t.p1.x) < 1e-5);
  CHECK(std::abs(t.p2.x) < 1e-5);
  CHECK_THROWS_AS(mixed_fixed_points(d1, Disk{{0.5, 0}, 1}), GeometryError);
}

TEST_CASE("explicit singular function") {
  const Disk d1{{-1, 0}, 1}, d2{{1.01, 0}, 1};
  const FixedPointPair fp = mixed_fixed_points(d1, d2);
  const FieldValue mid = q_explicit({0.005, 0}, fp);
  CHECK(std::abs(mid.value) < 1e-13);
  CHECK(mid.gradient.x == Approx(1.0 / (pi * 0.1001249)).epsilon(1e-6));
  CHECK(mid.gradient.x == Approx(3.17914).epsilon(1e-5));
  const double far = q_explicit({100, 0}, fp).value;
  CHECK(std::abs(far) == Approx((fp.p2.x - fp.p1.x) / (2 * pi * 100)).epsilon(1e-2));
  CHECK(std::abs(far) <= 1e-3);
  // fluxes through the circles, with the normal pointing into each disk
  for (int j = 0; j < 2; ++j) {
    const Disk& d = j == 0 ? d1 : d2;
    const int n = 4096;
    double flux = 0.0;
    for (int k = 0; k < n; ++k) {
      const double t = 2 * pi * k / n;
      const Point2 nu{-std::cos(t), -std::sin(t)};
      flux += dot(q_explicit(d.center + d.radius * Point2{std::cos(t), std::sin(t)}, fp).gradient, nu) * 2 * pi * d.radius / n;
    }
    CHECK(flux == Approx(j == 0 ? -1.0 : 1.0).epsilon(1e-8));
  }
  CHECK_THROWS_AS(q_explicit(fp.p1, fp), std::domain_error);
}

TEST_CASE("disk reference values") {
  CHECK(alpha_disk_asymptotic(1, 1, HarmonicBackground::uniform(1, 0)) == Approx(1.0));
  CHECK(alpha_disk_asymptotic(1, 1, HarmonicBackground::uniform(0, 1)) == 0.0);
  CHECK(alpha_disk_asymptotic(1, 3, HarmonicBackground::uniform(2, 0)) == Approx(3.0));
  const BlowupReference b = blowup_reference(1, 1, 1, 0.01);
  CHECK(b.grad_limit == Approx(1.0 / pi));
  CHECK(b.grad_limit == Approx(0.3183099).epsilon(1e-7));
  CHECK(b.qnorm_leading == Approx(10.0 / pi));
  const BlowupReference b2 = blowup_reference(2, 2, 1, 0.01);
  CHECK(b2.grad_limit / b.grad_limit == Approx(std::sqrt(2.0)));
  CHECK(b2.qnorm_leading / b.qnorm_leading == Approx(std::sqrt(2.0)));
}

TEST_CASE("Mobius concentric map") {
  const MobiusResult m = mobius_concentric({0.5, 0}, 0.25);
  CHECK(m.alpha.real() == Approx(0.5470656).epsilon(1e-7));
  CHECK(m.alpha.imag() == 0.0);
  double lo = 1e9, hi = 0, ulo = 1e9, uhi = 0;
  for (int k = 0; k < 64; ++k) {
    const double t = 2 * pi * k / 64;
    const double r = std::abs(mobius(m.alpha, {0.5 + 0.25 * std::cos(t), 0.25 * std::sin(t)}));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    const double u = std::abs(mobius(m.alpha, {std::cos(t), std::sin(t)}));
    ulo = std::min(ulo, u);
    uhi = std::max(uhi, u);
  }
  CHECK(hi - lo < 1e-12);
  CHECK(m.rho_star == Approx(hi).epsilon(1e-12));
  CHECK(std::abs(ulo - 1) < 1e-12);
  CHECK(std::abs(uhi - 1) < 1e-12);
  const MobiusResult z = mobius_concentric({0, 0}, 0.3);
  CHECK(z.alpha == std::complex<double>(0.0));
  CHECK(z.rho_star == 0.3);
  // off-axis centers work too
  const MobiusResult o = mobius_concentric({0.2, -0.4}, 0.3);
  CHECK(std::abs(o.alpha) < 1.0);
  CHECK_THROWS_AS(mobius_concentric({0.8, 0}, 0.3), GeometryError);
}

TEST_CASE("neck Mobius asymptotics") {
  const Disk b1{{-1, 0}, 1};
  const NeckAsymptotics a = mobius_neck_asymptotics(b1, 1e-4);
  CHECK(a.c3 == Approx(-2.0 / 3.0).epsilon(1e-3));
  CHECK(a.rho3 == Approx(1.0 / 3.0).epsilon(1e-3));
  CHECK(a.beta == Approx(std::sqrt(2 * (a.c3 + 1) / std::abs(a.c3))));
  CHECK(a.beta == Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(a.gamma_measured - a.gamma) <= 0.05 * a.gamma);
  double prev = 1e9;
  for (double e : {1e-2, 1e-3, 1e-4}) {
    const double dev = std::abs(mobius_neck_asymptotics(b1, e).gamma_measured - 2.0);
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK_THROWS_AS(mobius_neck_asymptotics(Disk{{-1, 0.1}, 1}, 1e-3), GeometryError);
}

TEST_CASE("image series oracle") {
  const Disk d1{{-1, 0}, 1};
  for (double eps : {2.0, 0.5, 0.1}) {
    const ImageSeriesOracle o = image_series_oracle(d1, Disk{{1 + eps, 0}, 1}, HarmonicBackground::uniform(1, 0));
    CHECK(o.boundary_residual() < 1e-10);
    CHECK(o.net_charge(0) == 0.0);
    // antisymmetry about x = eps/2
    CHECK(o.lambda1() + o.lambda2() == Approx(eps).epsilon(1e-10));
    if (eps == 2.0) CHECK(o.terms() < 80);
  }
  CHECK_THROWS_AS(image_series_oracle(d1, Disk{{1.1, 0}, 1}, HarmonicBackground{0, {0, 1, 0, 0}, {}}), std::invalid_argument);
}
