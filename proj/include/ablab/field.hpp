#pragma once

#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ablab/geometry.hpp"

namespace ablab {

/// Exterior branch of the flux-tube potential.
///
/// `ab_standard` uses A_phi = F rho_a^2 / (2 rho) outside the core, which is curl free and
/// threads F pi rho_a^2 through any loop around the core. `literal` keeps A_phi = F rho_a / 2
/// outside, whose exterior curl is F rho_a / (2 rho); it is kept for diagnostics.
enum class FieldMode { ab_standard, literal };

const char* to_string(FieldMode mode);
FieldMode field_mode_from_string(const std::string& name);

/// Azimuthal vector potential of an infinite flux tube of radius `core_radius` with uniform
/// curl `flux_density` along +z inside the tube. Continuous at the core boundary in both modes.
class FluxTubeField {
 public:
  FluxTubeField(double flux_density, double core_radius, FieldMode mode = FieldMode::ab_standard);

  double flux_density() const { return flux_density_; }
  double core_radius() const { return core_radius_; }
  FieldMode mode() const { return mode_; }

  /// F * pi * rho_a^2, the flux through the core cross-section.
  double core_flux() const { return flux_density_ * std::numbers::pi * core_radius_ * core_radius_; }

  /// Field in physical cylindrical components. rho == rho_a takes the inside branch.
  CylComponents eval(const CylPoint& p) const;
  /// Field in Cartesian components at a Cartesian point.
  Vector3 eval(const CartPoint& p) const;

  /// Closed-form curl, physical cylindrical components.
  CylComponents curl(const CylPoint& p) const;

 private:
  double azimuthal(double rho) const;

  double flux_density_;
  double core_radius_;
  FieldMode mode_;
};

/// Central-difference curl in Cartesian components. Requires h > 0 and the stencil to stay
/// clear of the core boundary (|rho - rho_a| >= 2h).
Vector3 curl_numeric(const FluxTubeField& field, const CartPoint& p, double h);

/// Ordered vertex list; a closed polyline repeats its first vertex at the end.
class Polyline {
 public:
  Polyline(std::vector<CartPoint> vertices, bool closed);

  const std::vector<CartPoint>& vertices() const { return vertices_; }
  bool closed() const { return closed_; }
  std::size_t segment_count() const { return vertices_.size() - 1; }
  const CartPoint& front() const { return vertices_.front(); }
  const CartPoint& back() const { return vertices_.back(); }

  Polyline reversed() const;

  /// Regular polygon approximating a circle of `radius` around (cx, cy) in the plane z = 0,
  /// traversed `turns` times (negative turns run clockwise).
  static Polyline circle(double cx, double cy, double radius, int segments, int turns = 1);

 private:
  std::vector<CartPoint> vertices_;
  bool closed_;
};

/// Per-segment Gauss-Legendre rule. Each straight segment is first split where it crosses the
/// core circle, then subdivided so that no piece subtends more than `max_subtended` radians
/// about the axis.
struct Quadrature {
  int order = 8;
  double max_subtended = 5.0 * std::numbers::pi / 180.0;
};

/// Nodes on [-1, 1] and weights of the n-point Gauss-Legendre rule.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre(int order);

/// Integral of A . ds along a single straight segment.
double segment_integral(const FluxTubeField& field, const CartPoint& a, const CartPoint& b,
                        const Quadrature& quad = {});

double line_integral(const FluxTubeField& field, const Polyline& path, const Quadrature& quad = {});
double loop_integral(const FluxTubeField& field, const Polyline& loop, const Quadrature& quad = {});

/// Signed number of turns of a closed polyline about the z axis.
int winding_number(const Polyline& loop);

/// winding * F * pi * rho_a^2 for a closed loop that stays outside the core.
double enclosed_flux(const FluxTubeField& field, const Polyline& loop);

/// loop_integral - enclosed_flux.
double stokes_residual(const FluxTubeField& field, const Polyline& loop, const Quadrature& quad = {});

/// |line_integral(path1) - line_integral(path2)| for two paths with shared endpoints that are
/// homotopic in the region outside the core.
double path_independence_gap(const FluxTubeField& field, const Polyline& path1, const Polyline& path2,
                             const Quadrature& quad = {});

}  // namespace ablab
