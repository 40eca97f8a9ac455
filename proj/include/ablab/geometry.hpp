#pragma once

#include <cmath>
#include <numbers>

namespace ablab {

/// Cartesian 3-vector. Used for positions, displacements and field values.
struct Vector3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vector3 operator+(const Vector3& a, const Vector3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vector3 operator-(const Vector3& a, const Vector3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vector3 operator*(double s, const Vector3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend Vector3 operator*(const Vector3& a, double s) { return s * a; }
  friend bool operator==(const Vector3&, const Vector3&) = default;
};

inline double dot(const Vector3& a, const Vector3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vector3& a) { return std::sqrt(dot(a, a)); }

using CartPoint = Vector3;

/// Physical (orthonormal-frame) cylindrical components of a vector.
struct CylComponents {
  double rho = 0.0;
  double phi = 0.0;
  double z = 0.0;
};

/// Point in cylindrical coordinates. `phi` is kept in [0, 2*pi).
class CylPoint {
 public:
  CylPoint() = default;
  CylPoint(double rho, double phi, double z);

  double rho() const { return rho_; }
  double phi() const { return phi_; }
  double z() const { return z_; }

 private:
  double rho_ = 0.0;
  double phi_ = 0.0;
  double z_ = 0.0;
};

double normalize_angle(double phi);

CylPoint to_cylindrical(const CartPoint& p);
CartPoint to_cartesian(const CylPoint& p);

/// Rotates physical cylindrical components at azimuth `phi` into Cartesian ones.
Vector3 cyl_to_cart_components(const CylComponents& v, double phi);

/// Distance from the z axis of the xy projection of segment [a, b].
double segment_axis_distance(const CartPoint& a, const CartPoint& b);

}  // namespace ablab
