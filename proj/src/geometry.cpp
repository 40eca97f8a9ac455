#include "ablab/geometry.hpp"

#include <algorithm>

#include "ablab/errors.hpp"

namespace ablab {

double normalize_angle(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(phi, two_pi);
  if (r < 0.0) r += two_pi;
  // fmod of a tiny negative number can round up to exactly 2*pi
  if (r >= two_pi) r = 0.0;
  return r;
}

CylPoint::CylPoint(double rho, double phi, double z) : rho_(rho), phi_(normalize_angle(phi)), z_(z) {
  if (!(rho >= 0.0)) throw ValidationError("CylPoint: rho must be >= 0");
}

CylPoint to_cylindrical(const CartPoint& p) {
  return CylPoint(std::hypot(p.x, p.y), std::atan2(p.y, p.x), p.z);
}

CartPoint to_cartesian(const CylPoint& p) {
  return {p.rho() * std::cos(p.phi()), p.rho() * std::sin(p.phi()), p.z()};
}

Vector3 cyl_to_cart_components(const CylComponents& v, double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {v.rho * c - v.phi * s, v.rho * s + v.phi * c, v.z};
}

double segment_axis_distance(const CartPoint& a, const CartPoint& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double s = 0.0;
  if (len2 > 0.0) s = std::clamp(-(a.x * dx + a.y * dy) / len2, 0.0, 1.0);
  return std::hypot(a.x + s * dx, a.y + s * dy);
}

}  // namespace ablab
