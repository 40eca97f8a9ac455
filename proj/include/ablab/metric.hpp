#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ablab/field.hpp"

namespace ablab {

/// Coordinates of the accelerated frame, cylindrical in space.
enum class Coord { t = 0, rho = 1, phi = 2, z = 3 };

const char* coord_name(Coord c);

/// Right-hand side of a metric-derivative constraint.
enum class ConstraintRhs { zero, a_rho, a_phi, a_z };

/// One equation g_{component},derivative = rhs on the metric of the accelerated frame.
struct MetricConstraint {
  std::array<Coord, 2> component;
  Coord derivative;
  ConstraintRhs rhs;

  /// e.g. "g_{0phi},d_rho = A_phi"
  std::string label() const;
  /// Value of the right-hand side at p for the given field.
  double rhs_value(const FluxTubeField& field, const CylPoint& p) const;

  friend bool operator==(const MetricConstraint&, const MetricConstraint&) = default;
};

/// The 13 derivative constraints that tie g_{0 mu} of the accelerated frame to the flux-tube
/// potential: g_{0l},rho = A_l (3), g_{00},nu = 0 (4), g_{0l},j = 0 for j != rho (6).
std::vector<MetricConstraint> enumerate_constraints(const FluxTubeField& field);

struct DofReport {
  int unknowns = 0;
  int equations = 0;
  bool underdetermined = false;
};

/// 16 transformation functions Lambda^beta_mu against the 13 constraint equations.
DofReport dof_report();

/// Nonrelativistic reduction of the epsilon-shifted Lagrangian:
/// L = (m/2)|v|^2 + epsilon A(x) . v, rest-mass constant dropped.
struct PerturbedLagrangian {
  double mass;
  double epsilon;
  FluxTubeField field;
  double hbar = 1.0;
  /// Rule for the epsilon A . dx term of each skeleton segment. {1, large} is the midpoint rule.
  Quadrature coupling{};

  PerturbedLagrangian(double mass, double epsilon, FluxTubeField field, double hbar = 1.0, Quadrature coupling = {});
  PerturbedLagrangian with_epsilon(double eps) const;
};

double lagrangian(const PerturbedLagrangian& pl, const CartPoint& pos, const Vector3& vel);

/// Path sampled at times t_0 < t_1 < ... with uniform spacing.
struct SlicedPath {
  std::vector<CartPoint> vertices;
  std::vector<double> times;

  static SlicedPath uniform(std::vector<CartPoint> vertices, double t0, double dt);
  Polyline polyline() const { return Polyline(vertices, false); }
  /// Time step; throws ValidationError when slices are nonuniform or non-positive.
  double time_step() const;
};

/// Skeletonized free action sum_n (m/2)|dx_n|^2 / dt.
double free_action(double mass, const SlicedPath& path);
/// free_action + epsilon * sum_n integral of A . dx over segment n.
double action(const PerturbedLagrangian& pl, const SlicedPath& path);

// ---------------------------------------------------------------------------------------------
// Geodesics

using FourVector = std::array<double, 4>;

/// Connection coefficients Gamma^b_{mn}, indexed [b][m][n].
using Connection = std::array<std::array<std::array<double, 4>, 4>, 4>;
using ConnectionField = std::function<Connection(const FourVector&)>;

struct GeodesicState {
  FourVector position{};
  FourVector velocity{};
};

/// Fixed-step RK4 for d^2x^b/dtau^2 + Gamma^b_{mn} u^m u^n = 0. Returns steps + 1 states.
std::vector<GeodesicState> geodesic_integrate(const ConnectionField& christoffel, const GeodesicState& s0,
                                              double tau_span, int steps);

ConnectionField flat_connection();

/// Minkowski space in coordinates (t, x, y, z) co-rotating with angular velocity omega about z.
/// Nonzero coefficients: Gamma^x_tt = -omega^2 x, Gamma^y_tt = -omega^2 y,
/// Gamma^x_ty = Gamma^x_yt = -omega, Gamma^y_tx = Gamma^y_xt = omega.
ConnectionField rotating_connection(double omega);

/// Metric of the rotating frame, g_tt = -(1 - omega^2 (x^2 + y^2)), g_tx = -omega y, g_ty = omega x.
std::array<std::array<double, 4>, 4> rotating_metric(double omega, const FourVector& x);

/// Start at `position` with spatial velocity components `spatial`; u^t is the future-directed
/// root of g_mn u^m u^n = -1. Throws ValidationError if no timelike u exists there.
GeodesicState rotating_timelike_start(double omega, const FourVector& position, const std::array<double, 3>& spatial);

/// Exact rotating-frame state at proper time tau: the inertial straight line through s0,
/// mapped into co-rotating coordinates.
GeodesicState rotating_frame_exact(double omega, const GeodesicState& s0, double tau);

}  // namespace ablab
