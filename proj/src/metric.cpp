#include "ablab/metric.hpp"

#include <cmath>
#include <sstream>

#include "ablab/errors.hpp"

namespace ablab {

const char* coord_name(Coord c) {
  switch (c) {
    case Coord::t: return "t";
    case Coord::rho: return "rho";
    case Coord::phi: return "phi";
    case Coord::z: return "z";
  }
  return "?";
}

namespace {

const char* rhs_name(ConstraintRhs r) {
  switch (r) {
    case ConstraintRhs::zero: return "0";
    case ConstraintRhs::a_rho: return "A_rho";
    case ConstraintRhs::a_phi: return "A_phi";
    case ConstraintRhs::a_z: return "A_z";
  }
  return "?";
}

// component label: time index prints as 0
std::string index_name(Coord c) { return c == Coord::t ? "0" : coord_name(c); }

}  // namespace

std::string MetricConstraint::label() const {
  std::ostringstream os;
  os << "g_{" << index_name(component[0]) << index_name(component[1]) << "},d_" << coord_name(derivative) << " = "
     << rhs_name(rhs);
  return os.str();
}

double MetricConstraint::rhs_value(const FluxTubeField& field, const CylPoint& p) const {
  const CylComponents a = field.eval(p);
  switch (rhs) {
    case ConstraintRhs::zero: return 0.0;
    case ConstraintRhs::a_rho: return a.rho;
    case ConstraintRhs::a_phi: return a.phi;
    case ConstraintRhs::a_z: return a.z;
  }
  return 0.0;
}

std::vector<MetricConstraint> enumerate_constraints(const FluxTubeField& /*field*/) {
  constexpr std::array<Coord, 3> space{Coord::rho, Coord::phi, Coord::z};
  constexpr std::array<ConstraintRhs, 3> potential{ConstraintRhs::a_rho, ConstraintRhs::a_phi, ConstraintRhs::a_z};

  std::vector<MetricConstraint> out;
  for (std::size_t l = 0; l < space.size(); ++l) out.push_back({{Coord::t, space[l]}, Coord::rho, potential[l]});
  for (Coord nu : {Coord::t, Coord::rho, Coord::phi, Coord::z})
    out.push_back({{Coord::t, Coord::t}, nu, ConstraintRhs::zero});
  for (Coord l : space)
    for (Coord j : space)
      if (j != Coord::rho) out.push_back({{Coord::t, l}, j, ConstraintRhs::zero});
  return out;
}

DofReport dof_report() {
  const FluxTubeField unit(1.0, 1.0);
  DofReport r;
  r.unknowns = 16;
  r.equations = static_cast<int>(enumerate_constraints(unit).size());
  r.underdetermined = r.unknowns > r.equations;
  return r;
}

PerturbedLagrangian::PerturbedLagrangian(double mass_, double epsilon_, FluxTubeField field_, double hbar_,
                                         Quadrature coupling_)
    : mass(mass_), epsilon(epsilon_), field(field_), hbar(hbar_), coupling(coupling_) {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("lagrangian: mass must be > 0");
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ValidationError("lagrangian: hbar must be > 0");
  if (!std::isfinite(epsilon)) throw ValidationError("lagrangian: epsilon must be finite");
}

PerturbedLagrangian PerturbedLagrangian::with_epsilon(double eps) const {
  return PerturbedLagrangian(mass, eps, field, hbar, coupling);
}

double lagrangian(const PerturbedLagrangian& pl, const CartPoint& pos, const Vector3& vel) {
  const double kinetic = 0.5 * pl.mass * dot(vel, vel);
  if (pl.epsilon == 0.0) return kinetic;
  return kinetic + pl.epsilon * dot(pl.field.eval(pos), vel);
}

SlicedPath SlicedPath::uniform(std::vector<CartPoint> vertices, double t0, double dt) {
  SlicedPath p;
  p.times.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) p.times.push_back(t0 + dt * static_cast<double>(i));
  p.vertices = std::move(vertices);
  return p;
}

double SlicedPath::time_step() const {
  if (vertices.size() < 2 || times.size() != vertices.size())
    throw ValidationError("sliced path: need >= 2 vertices with one time per vertex");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw ValidationError("sliced path: time step must be > 0");
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (std::abs((times[i + 1] - times[i]) - dt) > 1e-9 * dt)
      throw ValidationError("sliced path: nonuniform time slice at index " + std::to_string(i));
  }
  return dt;
}

double free_action(double mass, const SlicedPath& path) {
  const double dt = path.time_step();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i) {
    const Vector3 d = path.vertices[i + 1] - path.vertices[i];
    s += dot(d, d);
  }
  return 0.5 * mass * s / dt;
}

double action(const PerturbedLagrangian& pl, const SlicedPath& path) {
  const double s0 = free_action(pl.mass, path);
  if (pl.epsilon == 0.0) return s0;
  return s0 + pl.epsilon * line_integral(pl.field, path.polyline(), pl.coupling);
}

// ---------------------------------------------------------------------------------------------

namespace {

struct Derivative {
  FourVector dx;
  FourVector du;
};

Derivative geodesic_rhs(const ConnectionField& christoffel, const FourVector& x, const FourVector& u, int step) {
  const Connection g = christoffel(x);
  Derivative d{u, {}};
  for (int b = 0; b < 4; ++b) {
    double acc = 0.0;
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n) {
        const double c = g[b][m][n];
        if (!std::isfinite(c)) {
          std::ostringstream os;
          os << "geodesic_integrate: non-finite Gamma^" << b << "_" << m << n << " at step " << step << ", x = ("
             << x[0] << ", " << x[1] << ", " << x[2] << ", " << x[3] << ")";
          throw NumericalError(os.str());
        }
        acc += c * u[m] * u[n];
      }
    d.du[b] = -acc;
  }
  return d;
}

FourVector axpy(const FourVector& x, double a, const FourVector& y) {
  return {x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2], x[3] + a * y[3]};
}

}  // namespace

std::vector<GeodesicState> geodesic_integrate(const ConnectionField& christoffel, const GeodesicState& s0,
                                              double tau_span, int steps) {
  if (steps < 1) throw ValidationError("geodesic_integrate: steps must be >= 1");
  if (!std::isfinite(tau_span)) throw ValidationError("geodesic_integrate: tau_span must be finite");
  const double h = tau_span / steps;

  std::vector<GeodesicState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(s0);
  FourVector x = s0.position;
  FourVector u = s0.velocity;
  // compensated accumulation keeps the rounding of long runs at the level of one step
  FourVector cx{}, cu{};
  const auto add = [](double& sum, double& carry, double increment) {
    const double y = increment - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  };
  for (int i = 0; i < steps; ++i) {
    const Derivative k1 = geodesic_rhs(christoffel, x, u, i);
    const Derivative k2 = geodesic_rhs(christoffel, axpy(x, 0.5 * h, k1.dx), axpy(u, 0.5 * h, k1.du), i);
    const Derivative k3 = geodesic_rhs(christoffel, axpy(x, 0.5 * h, k2.dx), axpy(u, 0.5 * h, k2.du), i);
    const Derivative k4 = geodesic_rhs(christoffel, axpy(x, h, k3.dx), axpy(u, h, k3.du), i);
    for (int b = 0; b < 4; ++b) {
      add(x[b], cx[b], h / 6.0 * (k1.dx[b] + 2.0 * (k2.dx[b] + k3.dx[b]) + k4.dx[b]));
      add(u[b], cu[b], h / 6.0 * (k1.du[b] + 2.0 * (k2.du[b] + k3.du[b]) + k4.du[b]));
    }
    out.push_back({x, u});
  }
  return out;
}

ConnectionField flat_connection() {
  return [](const FourVector&) { return Connection{}; };
}

ConnectionField rotating_connection(double omega) {
  return [omega](const FourVector& x) {
    Connection g{};
    g[1][0][0] = -omega * omega * x[1];
    g[2][0][0] = -omega * omega * x[2];
    g[1][0][2] = g[1][2][0] = -omega;
    g[2][0][1] = g[2][1][0] = omega;
    return g;
  };
}

std::array<std::array<double, 4>, 4> rotating_metric(double omega, const FourVector& x) {
  std::array<std::array<double, 4>, 4> g{};
  g[0][0] = -(1.0 - omega * omega * (x[1] * x[1] + x[2] * x[2]));
  g[0][1] = g[1][0] = -omega * x[2];
  g[0][2] = g[2][0] = omega * x[1];
  g[1][1] = g[2][2] = g[3][3] = 1.0;
  return g;
}

GeodesicState rotating_frame_exact(double omega, const GeodesicState& s0, double tau) {
  const auto& [t0, x0, y0, z0] = s0.position;
  const auto& [ut, ux, uy, uz] = s0.velocity;

  // to inertial coordinates
  const double c0 = std::cos(omega * t0), sn0 = std::sin(omega * t0);
  const double X0 = x0 * c0 - y0 * sn0;
  const double Y0 = x0 * sn0 + y0 * c0;
  const double px = ux - omega * ut * y0;
  const double py = uy + omega * ut * x0;
  const double UX = c0 * px - sn0 * py;
  const double UY = sn0 * px + c0 * py;

  // straight line, then back to the rotating frame
  const double t = t0 + ut * tau;
  const double X = X0 + UX * tau;
  const double Y = Y0 + UY * tau;
  const double c = std::cos(omega * t), sn = std::sin(omega * t);
  const double x = X * c + Y * sn;
  const double y = -X * sn + Y * c;
  const double vx = UX * c + UY * sn + omega * ut * y;
  const double vy = -UX * sn + UY * c - omega * ut * x;

  return {{t, x, y, z0 + uz * tau}, {ut, vx, vy, uz}};
}

GeodesicState rotating_timelike_start(double omega, const FourVector& position, const std::array<double, 3>& spatial) {
  const auto g = rotating_metric(omega, position);
  const double a = g[0][0];
  const double b = 2.0 * (g[0][1] * spatial[0] + g[0][2] * spatial[1]);
  const double c = spatial[0] * spatial[0] + spatial[1] * spatial[1] + spatial[2] * spatial[2] + 1.0;
  const double disc = b * b - 4.0 * a * c;
  if (!(a < 0.0) || !(disc >= 0.0))
    throw ValidationError("geodesic: start lies outside the light cylinder of the rotating frame");
  return {position, {(-b - std::sqrt(disc)) / (2.0 * a), spatial[0], spatial[1], spatial[2]}};
}

}  // namespace ablab
