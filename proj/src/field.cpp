#include "ablab/field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "ablab/errors.hpp"

namespace ablab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxQuadratureOrder = 64;

GaussLegendreRule build_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n from the Chebyshev-like initial guesses; roots are symmetric.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// signed angle swept about the axis by the xy projection of a -> b
double swept_angle(const CartPoint& a, const CartPoint& b) {
  const double cross = a.x * b.y - a.y * b.x;
  const double dotp = a.x * b.x + a.y * b.y;
  return std::atan2(cross, dotp);
}

CartPoint lerp(const CartPoint& a, const CartPoint& b, double s) { return a + s * (b - a); }

}  // namespace

const char* to_string(FieldMode mode) {
  return mode == FieldMode::ab_standard ? "ab-standard" : "literal";
}

FieldMode field_mode_from_string(const std::string& name) {
  if (name == "ab-standard" || name == "ab_standard") return FieldMode::ab_standard;
  if (name == "literal") return FieldMode::literal;
  throw ValidationError("unknown field mode '" + name + "' (expected ab-standard or literal)");
}

FluxTubeField::FluxTubeField(double flux_density, double core_radius, FieldMode mode)
    : flux_density_(flux_density), core_radius_(core_radius), mode_(mode) {
  if (!std::isfinite(flux_density) || flux_density == 0.0)
    throw ValidationError("flux tube: F must be a finite nonzero number");
  if (!std::isfinite(core_radius) || !(core_radius > 0.0))
    throw ValidationError("flux tube: rho_a must be > 0");
}

double FluxTubeField::azimuthal(double rho) const {
  if (rho <= core_radius_) return 0.5 * flux_density_ * rho;
  if (mode_ == FieldMode::literal) return 0.5 * flux_density_ * core_radius_;
  return 0.5 * flux_density_ * core_radius_ * core_radius_ / rho;
}

CylComponents FluxTubeField::eval(const CylPoint& p) const { return {0.0, azimuthal(p.rho()), 0.0}; }

Vector3 FluxTubeField::eval(const CartPoint& p) const {
  const double rho = std::hypot(p.x, p.y);
  if (rho == 0.0) return {};
  // A_phi * phi_hat with phi_hat = (-y, x) / rho
  const double scale = azimuthal(rho) / rho;
  return {-scale * p.y, scale * p.x, 0.0};
}

CylComponents FluxTubeField::curl(const CylPoint& p) const {
  if (p.rho() <= core_radius_) return {0.0, 0.0, flux_density_};
  if (mode_ == FieldMode::literal) return {0.0, 0.0, 0.5 * flux_density_ * core_radius_ / p.rho()};
  return {};
}

Vector3 curl_numeric(const FluxTubeField& field, const CartPoint& p, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("curl_numeric: step h must be > 0");
  const double rho = std::hypot(p.x, p.y);
  if (std::abs(rho - field.core_radius()) < 2.0 * h)
    throw ValidationError("curl_numeric: stencil straddles the core boundary");

  const auto f = [&](double dx, double dy, double dz) { return field.eval(CartPoint{p.x + dx, p.y + dy, p.z + dz}); };
  const Vector3 xp = f(h, 0, 0), xm = f(-h, 0, 0);
  const Vector3 yp = f(0, h, 0), ym = f(0, -h, 0);
  const Vector3 zp = f(0, 0, h), zm = f(0, 0, -h);
  const double inv = 0.5 / h;
  return {
      ((yp.z - ym.z) - (zp.y - zm.y)) * inv,
      ((zp.x - zm.x) - (xp.z - xm.z)) * inv,
      ((xp.y - xm.y) - (yp.x - ym.x)) * inv,
  };
}

Polyline::Polyline(std::vector<CartPoint> vertices, bool closed) : vertices_(std::move(vertices)), closed_(closed) {
  if (vertices_.size() < 2) throw ValidationError("polyline needs at least 2 vertices");
  if (closed_ && norm(vertices_.front() - vertices_.back()) > 1e-12)
    throw ValidationError("closed polyline must end at its first vertex");
}

Polyline Polyline::reversed() const {
  return Polyline(std::vector<CartPoint>(vertices_.rbegin(), vertices_.rend()), closed_);
}

Polyline Polyline::circle(double cx, double cy, double radius, int segments, int turns) {
  if (segments < 3 || turns == 0) throw ValidationError("circle: need >= 3 segments and nonzero turns");
  const int total = segments * std::abs(turns);
  const double dir = turns > 0 ? 1.0 : -1.0;
  std::vector<CartPoint> v;
  v.reserve(total + 1);
  for (int k = 0; k < total; ++k) {
    const double phi = dir * kTwoPi * k / segments;
    v.push_back({cx + radius * std::cos(phi), cy + radius * std::sin(phi), 0.0});
  }
  v.push_back(v.front());
  return Polyline(std::move(v), true);
}

const GaussLegendreRule& gauss_legendre(int order) {
  static const std::array<GaussLegendreRule, kMaxQuadratureOrder> table = [] {
    std::array<GaussLegendreRule, kMaxQuadratureOrder> t;
    for (int n = 1; n <= kMaxQuadratureOrder; ++n) t[n - 1] = build_rule(n);
    return t;
  }();
  if (order < 1 || order > kMaxQuadratureOrder)
    throw ValidationError("quadrature order must be in [1, " + std::to_string(kMaxQuadratureOrder) + "]");
  return table[order - 1];
}

double segment_integral(const FluxTubeField& field, const CartPoint& a, const CartPoint& b, const Quadrature& quad) {
  const GaussLegendreRule& rule = gauss_legendre(quad.order);
  if (!(quad.max_subtended > 0.0)) throw ValidationError("quadrature: max_subtended must be > 0");

  const Vector3 d = b - a;
  // Split where the xy projection crosses the core circle: the integrand has a kink there.
  std::array<double, 4> breaks{0.0, 1.0, 1.0, 1.0};
  int nbreaks = 1;
  const double qa = d.x * d.x + d.y * d.y;
  if (qa > 0.0) {
    const double r2 = field.core_radius() * field.core_radius();
    const double qb = 2.0 * (a.x * d.x + a.y * d.y);
    const double qc = a.x * a.x + a.y * a.y - r2;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      for (double s : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)})
        if (s > 0.0 && s < 1.0) breaks[nbreaks++] = s;
    }
  }
  breaks[nbreaks++] = 1.0;

  double total = 0.0;
  for (int piece = 0; piece + 1 < nbreaks; ++piece) {
    const double s0 = breaks[piece];
    const double s1 = breaks[piece + 1];
    if (s1 <= s0) continue;
    const CartPoint p0 = lerp(a, b, s0);
    const CartPoint p1 = lerp(a, b, s1);
    const CartPoint mid = lerp(a, b, 0.5 * (s0 + s1));
    int nsub = 1;
    if (std::hypot(mid.x, mid.y) > field.core_radius()) {
      const double angle = std::abs(swept_angle(p0, p1));
      nsub = std::max(1, static_cast<int>(std::ceil(angle / quad.max_subtended)));
    }
    const double h = (s1 - s0) / nsub;
    for (int k = 0; k < nsub; ++k) {
      const double lo = s0 + k * h;
      const double c = lo + 0.5 * h;
      double acc = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const CartPoint x = lerp(a, b, c + 0.5 * h * rule.nodes[q]);
        acc += rule.weights[q] * dot(field.eval(x), d);
      }
      total += 0.5 * h * acc;
    }
  }
  return total;
}

double line_integral(const FluxTubeField& field, const Polyline& path, const Quadrature& quad) {
  const auto& v = path.vertices();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) total += segment_integral(field, v[i], v[i + 1], quad);
  return total;
}

double loop_integral(const FluxTubeField& field, const Polyline& loop, const Quadrature& quad) {
  if (!loop.closed()) throw ValidationError("loop_integral: path is not closed");
  return line_integral(field, loop, quad);
}

int winding_number(const Polyline& loop) {
  if (!loop.closed()) throw ValidationError("winding_number: path is not closed");
  const auto& v = loop.vertices();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (segment_axis_distance(v[i], v[i + 1]) == 0.0)
      throw ValidationError("winding_number: segment " + std::to_string(i) + " passes through the axis");
    total += swept_angle(v[i], v[i + 1]);
  }
  const double turns = total / kTwoPi;
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 1e-6) throw NumericalError("winding_number: non-integer winding");
  return static_cast<int>(rounded);
}

namespace {

void require_outside_core(const FluxTubeField& field, const Polyline& path, const char* who) {
  const auto& v = path.vertices();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (segment_axis_distance(v[i], v[i + 1]) <= field.core_radius())
      throw ValidationError(std::string(who) + ": segment " + std::to_string(i) + " enters the flux core");
  }
}

}  // namespace

double enclosed_flux(const FluxTubeField& field, const Polyline& loop) {
  if (!loop.closed()) throw ValidationError("enclosed_flux: path is not closed");
  require_outside_core(field, loop, "enclosed_flux");
  return winding_number(loop) * field.core_flux();
}

double stokes_residual(const FluxTubeField& field, const Polyline& loop, const Quadrature& quad) {
  const double flux = enclosed_flux(field, loop);
  return loop_integral(field, loop, quad) - flux;
}

double path_independence_gap(const FluxTubeField& field, const Polyline& path1, const Polyline& path2,
                             const Quadrature& quad) {
  if (norm(path1.front() - path2.front()) > 1e-12 || norm(path1.back() - path2.back()) > 1e-12)
    throw ValidationError("path_independence_gap: paths do not share endpoints");
  require_outside_core(field, path1, "path_independence_gap");
  require_outside_core(field, path2, "path_independence_gap");

  std::vector<CartPoint> joined = path1.vertices();
  const auto& back = path2.vertices();
  joined.insert(joined.end(), back.rbegin() + 1, back.rend());
  joined.back() = joined.front();
  if (winding_number(Polyline(std::move(joined), true)) != 0)
    throw ValidationError("path_independence_gap: paths lie in different homotopy classes");

  return std::abs(line_integral(field, path1, quad) - line_integral(field, path2, quad));
}

}  // namespace ablab
