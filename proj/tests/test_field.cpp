#include <cmath>
#include <numbers>
#include <random>

#include "ablab/errors.hpp"
#include "ablab/field.hpp"
#include "doctest.h"
#include "random_loops.hpp"

using namespace ablab;
using std::numbers::pi;

namespace {

// Independent oracle: curl_z = (1/rho) d(rho A_phi)/drho by central differences on eval().
double curl_z_cylindrical_fd(const FluxTubeField& f, double rho, double h) {
  const auto g = [&](double r) { return r * f.eval(CylPoint(r, 0.3, 0.0)).phi; };
  return (g(rho + h) - g(rho - h)) / (2.0 * h) / rho;
}

Polyline arc(double radius, double phi0, double phi1, int segments) {
  std::vector<CartPoint> v;
  for (int k = 0; k <= segments; ++k) {
    const double phi = phi0 + (phi1 - phi0) * k / segments;
    v.push_back({radius * std::cos(phi), radius * std::sin(phi), 0.0});
  }
  return Polyline(v, false);
}

}  // namespace

TEST_CASE("cylindrical <-> cartesian round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const CartPoint p{u(rng), u(rng), u(rng)};
    if (std::hypot(p.x, p.y) < 1e-3) continue;
    const CartPoint q = to_cartesian(to_cylindrical(p));
    CHECK(norm(p - q) < 1e-12);
  }
  const CylPoint c(1.0, -pi / 2, 0.0);
  CHECK(c.phi() == doctest::Approx(1.5 * pi).epsilon(1e-15));
  CHECK_THROWS_AS(CylPoint(-1.0, 0.0, 0.0), ValidationError);
}

TEST_CASE("eval_field branches") {
  const FluxTubeField ab(1.0, 1.0, FieldMode::ab_standard);
  const FluxTubeField lit(1.0, 1.0, FieldMode::literal);

  CHECK(ab.eval(CylPoint(0.5, 0, 0)).phi == 0.25);
  CHECK(ab.eval(CylPoint(1.0, 0, 0)).phi == 0.5);
  CHECK(lit.eval(CylPoint(1.0, 0, 0)).phi == 0.5);
  CHECK(ab.eval(CylPoint(2.0, 0, 0)).phi == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(lit.eval(CylPoint(2.0, 0, 0)).phi == 0.5);

  for (const auto* f : {&ab, &lit}) {
    const CylComponents a = f->eval(CylPoint(3.7, 1.1, -2.0));
    CHECK(a.rho == 0.0);
    CHECK(a.z == 0.0);
  }

  // 1/rho falloff of the standard exterior
  CHECK(ab.eval(CylPoint(4.0, 0, 0)).phi * 4.0 == doctest::Approx(ab.eval(CylPoint(8.0, 0, 0)).phi * 8.0));

  CHECK_THROWS_AS(FluxTubeField(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(FluxTubeField(1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(FluxTubeField(1.0, -1.0), ValidationError);
}

TEST_CASE("field continuity at the core boundary") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uf(-3.0, 3.0), ur(0.1, 4.0);
  for (int i = 0; i < 200; ++i) {
    double F = uf(rng);
    if (std::abs(F) < 1e-3) F = 1.0;
    const double ra = ur(rng);
    for (FieldMode mode : {FieldMode::ab_standard, FieldMode::literal}) {
      const FluxTubeField f(F, ra, mode);
      double prev = 1e300;
      for (double delta : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const double jump = std::abs(f.eval(CylPoint(ra - delta, 0, 0)).phi - f.eval(CylPoint(ra + delta, 0, 0)).phi);
        CHECK(jump <= prev);
        prev = jump;
      }
      CHECK(prev < 1e-7 * (1.0 + std::abs(F)));
    }
  }
}

TEST_CASE("curl_analytic examples") {
  const FluxTubeField ab(1.0, 1.0, FieldMode::ab_standard);
  const FluxTubeField lit(1.0, 1.0, FieldMode::literal);
  CHECK(ab.curl(CylPoint(0.5, 0, 0)).z == 1.0);
  CHECK(ab.curl(CylPoint(1.0, 0, 0)).z == 1.0);  // closed interval: boundary is inside
  CHECK(ab.curl(CylPoint(3.0, 0, 0)).z == 0.0);
  CHECK(lit.curl(CylPoint(2.0, 0, 0)).z == 0.25);
  CHECK(std::abs(curl_z_cylindrical_fd(lit, 2.0, 1e-5) - 0.25) < 1e-6);
  CHECK(std::abs(curl_z_cylindrical_fd(ab, 2.0, 1e-5)) < 1e-6);
}

TEST_CASE("curl_numeric") {
  const FluxTubeField ab(1.0, 1.0);
  const Vector3 in = curl_numeric(ab, to_cartesian(CylPoint(0.5, 0.7, 0.0)), 1e-4);
  CHECK(std::abs(in.x) < 1e-7);
  CHECK(std::abs(in.y) < 1e-7);
  CHECK(std::abs(in.z - 1.0) < 1e-7);
  const Vector3 out = curl_numeric(ab, to_cartesian(CylPoint(2.0, 2.1, 1.0)), 1e-4);
  CHECK(std::abs(out.z) < 1e-7);
  CHECK_THROWS_AS(curl_numeric(ab, {2.0, 0.0, 0.0}, 0.0), ValidationError);
  CHECK_THROWS_AS(curl_numeric(ab, {2.0, 0.0, 0.0}, -1e-3), ValidationError);
  CHECK_THROWS_AS(curl_numeric(ab, {1.0 + 1e-5, 0.0, 0.0}, 1e-4), ValidationError);
}

TEST_CASE("curl oracle agreement at random points") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ur(0.0, 5.0), uphi(0.0, 2 * pi), uz(-3.0, 3.0);
  const double h = 1e-4;
  for (FieldMode mode : {FieldMode::ab_standard, FieldMode::literal}) {
    const FluxTubeField f(1.3, 1.0, mode);
    int checked = 0;
    while (checked < 1000) {
      const CylPoint c(ur(rng), uphi(rng), uz(rng));
      if (std::abs(c.rho() - f.core_radius()) < 2 * h) continue;
      const Vector3 num = curl_numeric(f, to_cartesian(c), h);
      const CylComponents ana = f.curl(c);
      CHECK(std::abs(num.x) < 1e-6);
      CHECK(std::abs(num.y) < 1e-6);
      CHECK(std::abs(num.z - ana.z) < 1e-6);
      ++checked;
    }
  }
}

TEST_CASE("gauss-legendre rules integrate polynomials exactly") {
  for (int n = 1; n <= 20; ++n) {
    const auto& r = gauss_legendre(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
      const double exact = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
      CHECK(std::abs(s - exact) < 1e-13);
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), ValidationError);
}

TEST_CASE("line_integral examples") {
  const FluxTubeField ab(1.0, 1.0);
  // along z and radially the integrand vanishes identically
  CHECK(line_integral(ab, Polyline({{1.5, 0.3, -4.0}, {1.5, 0.3, 7.0}}, false)) == 0.0);
  const CylPoint r0(0.2, 0.9, 1.0), r1(6.0, 0.9, 1.0);
  CHECK(std::abs(line_integral(ab, Polyline({to_cartesian(r0), to_cartesian(r1)}, false))) < 1e-15);

  // Quarter arc at rho = 2: A_phi * arc length = 0.25 * pi = pi / 4. Refine until stable.
  double prev = 0.0;
  double value = 0.0;
  for (int order = 2; order <= 32; order *= 2) {
    value = line_integral(ab, arc(2.0, 0.0, pi / 2, 256), Quadrature{order});
    if (order > 2) CHECK(std::abs(value - prev) < 1e-10);
    prev = value;
  }
  CHECK(std::abs(value - pi / 4) < 1e-10);

  CHECK_THROWS_AS(Polyline({{1, 1, 0}}, false), ValidationError);
  CHECK_THROWS_AS(line_integral(ab, arc(2.0, 0.0, 1.0, 4), Quadrature{0}), ValidationError);
}

TEST_CASE("segments through the core are split at the boundary") {
  const FluxTubeField ab(1.0, 1.0);
  // Chord y = 0.4 across the unit core. Exterior pieces are pure gauge, (F rho_a^2 / 2) dphi;
  // the interior piece integrates A_x = -F y / 2 over the chord length inside.
  const double y = 0.4;
  const double xin = std::sqrt(1.0 - y * y);
  const double exterior = 0.5 * 2.0 * (std::atan(y / 3.0) - std::atan(y / xin));
  const double interior = -0.5 * y * 2.0 * xin;
  const CartPoint a{-3.0, y, 0.0}, b{3.0, y, 0.0};
  CHECK(std::abs(segment_integral(ab, a, b) - (exterior + interior)) < 1e-12);
  CHECK(std::abs(segment_integral(ab, a, b, Quadrature{32, 0.01}) - (exterior + interior)) < 1e-12);
}

TEST_CASE("line_integral is antisymmetric under reversal") {
  std::mt19937_64 rng(77);
  const FluxTubeField ab(0.8, 1.2);
  const FluxTubeField lit(0.8, 1.2, FieldMode::literal);
  for (int i = 0; i < 100; ++i) {
    const Polyline p = testing::random_open_path(rng, 12, 6.0);
    for (const auto* f : {&ab, &lit}) {
      const double fwd = line_integral(*f, p);
      const double rev = line_integral(*f, p.reversed());
      CHECK(std::abs(fwd + rev) < 1e-12);
    }
  }
}

TEST_CASE("loop_integral examples") {
  const FluxTubeField ab(1.0, 1.0);
  const FluxTubeField lit(1.0, 1.0, FieldMode::literal);
  const Polyline c2 = Polyline::circle(0, 0, 2.0, 256);
  CHECK(std::abs(loop_integral(ab, c2) - pi) < 1e-9);
  // Literal exterior on an N-gon of circumradius R: along a chord at distance d from the axis,
  // A . t = 0.5 d / rho, which integrates to d asinh(tan(pi / N)) per side.
  const double d = 2.0 * std::cos(pi / 256);
  CHECK(std::abs(loop_integral(lit, c2) - 256 * d * std::asinh(std::tan(pi / 256))) < 1e-12);
  CHECK(std::abs(loop_integral(lit, Polyline::circle(0, 0, 2.0, 8192)) - 2 * pi) < 1e-6);
  CHECK(std::abs(loop_integral(ab, Polyline::circle(10.0, 0, 2.0, 256))) < 1e-12);
  CHECK_THROWS_AS(loop_integral(ab, arc(2.0, 0.0, 1.0, 4)), ValidationError);
}

TEST_CASE("winding number and enclosed flux") {
  const FluxTubeField ab(1.0, 1.0);
  CHECK(winding_number(Polyline::circle(0, 0, 2.0, 64)) == 1);
  CHECK(winding_number(Polyline::circle(0, 0, 2.0, 64, -1)) == -1);
  CHECK(winding_number(Polyline::circle(0, 0, 2.0, 64, 2)) == 2);
  CHECK(winding_number(Polyline::circle(10, 0, 2.0, 64)) == 0);

  CHECK(enclosed_flux(ab, Polyline::circle(0, 0, 2.0, 64)) == doctest::Approx(pi).epsilon(1e-15));
  CHECK(enclosed_flux(ab, Polyline::circle(10, 0, 2.0, 64)) == 0.0);
  const Polyline twice = Polyline::circle(0, 0, 2.0, 64, 2);
  CHECK(enclosed_flux(ab, twice) == doctest::Approx(2 * pi).epsilon(1e-15));
  CHECK(std::abs(loop_integral(ab, twice) - enclosed_flux(ab, twice)) < 1e-9);

  // loop cutting into H
  CHECK_THROWS_AS(enclosed_flux(ab, Polyline::circle(0.5, 0, 1.0, 64)), ValidationError);
  // polygon whose vertices sit outside the core but whose chords cut it
  CHECK_THROWS_AS(enclosed_flux(ab, Polyline::circle(0, 0, 1.2, 3)), ValidationError);
}

TEST_CASE("stokes_residual examples") {
  const FluxTubeField ab(1.0, 1.0);
  const FluxTubeField lit(1.0, 1.0, FieldMode::literal);
  CHECK(std::abs(stokes_residual(ab, Polyline::circle(0, 0, 2.0, 256))) < 1e-9);
  CHECK(std::abs(stokes_residual(ab, Polyline::circle(10, 0, 2.0, 256))) < 1e-9);
  CHECK(std::abs(stokes_residual(lit, Polyline::circle(0, 0, 2.0, 8192)) - pi) < 1e-6);
}

TEST_CASE("stokes residual converges at second order under the midpoint rule") {
  const FluxTubeField ab(1.0, 1.0);
  const Quadrature midpoint{1, 10.0};  // no angular subdivision
  double prev = std::abs(stokes_residual(ab, Polyline::circle(0, 0, 2.0, 8), midpoint));
  for (int n = 16; n <= 4096; n *= 2) {
    const double r = std::abs(stokes_residual(ab, Polyline::circle(0, 0, 2.0, n), midpoint));
    if (prev > 1e-12) CHECK(prev / r >= 4.0);
    prev = r;
  }
  // the default rule is already at the rounding floor
  for (int n : {8, 64, 512}) CHECK(std::abs(stokes_residual(ab, Polyline::circle(0, 0, 2.0, n))) < 1e-12);
}

TEST_CASE("homotopy invariance of random loops") {
  std::mt19937_64 rng(99);
  const FluxTubeField ab(1.7, 0.8);
  const Quadrature q{16};
  for (int i = 0; i < 100; ++i) {
    const int w = static_cast<int>(i % 5) - 2;
    const Polyline loop = testing::random_loop(rng, w, ab.core_radius(), 256);
    CHECK(winding_number(loop) == w);
    CHECK(std::abs(loop_integral(ab, loop, q) - w * ab.core_flux()) < 1e-6);
  }
}

TEST_CASE("path independence") {
  const FluxTubeField ab(1.0, 1.0);
  const FluxTubeField lit(1.0, 1.0, FieldMode::literal);
  // two right-side detours from (0,-10) to (0,10) around the barrier x in [-2,2]
  const Polyline p1({{0, -10, 0}, {3, -5, 0}, {3, 5, 0}, {0, 10, 0}}, false);
  const Polyline p2({{0, -10, 0}, {6, -7, 0}, {8, 0, 0}, {4, 6, 0}, {0, 10, 0}}, false);
  CHECK(path_independence_gap(ab, p1, p2) < 1e-8);
  CHECK(path_independence_gap(ab, p1, p1) == 0.0);
  CHECK(path_independence_gap(lit, p1, p2) > 1e-3);

  const Polyline other_side({{0, -10, 0}, {-3, -5, 0}, {-3, 5, 0}, {0, 10, 0}}, false);
  CHECK_THROWS_AS(path_independence_gap(ab, p1, other_side), ValidationError);
  const Polyline moved({{0, -10, 0}, {3, -5, 0}, {3, 5, 0}, {0, 11, 0}}, false);
  CHECK_THROWS_AS(path_independence_gap(ab, p1, moved), ValidationError);
}
