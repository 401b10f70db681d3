#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <complex>
#include <numbers>

namespace quadcarve {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;
inline constexpr double kQuarterPi = 0.25 * std::numbers::pi;

// Maps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  return a;
}

// Maps an angle to [0, 2pi).
inline double wrap_positive(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

// x mod m into [0, m).
inline double positive_mod(double x, double m) {
  double r = std::fmod(x, m);
  if (r < 0) r += m;
  if (r >= m) r -= m;
  return r;
}

inline Vec3 project_to_plane(const Vec3& v, const Vec3& unit_normal) {
  return v - v.dot(unit_normal) * unit_normal;
}

// Rotation taking unit vector `from` onto unit vector `to` about from x to.
inline Eigen::Matrix3d minimal_rotation(const Vec3& from, const Vec3& to) {
  return Eigen::Quaterniond::FromTwoVectors(from, to).toRotationMatrix();
}

// Orthonormal tangent frame at a point. axis x axis2 == normal.
struct Frame {
  Vec3 normal = Vec3::UnitZ();
  Vec3 axis = Vec3::UnitX();

  Vec3 axis2() const { return normal.cross(axis); }
  double angle_of(const Vec3& v) const { return std::atan2(v.dot(axis2()), v.dot(axis)); }
  Vec3 direction(double angle) const { return std::cos(angle) * axis + std::sin(angle) * axis2(); }

  // Frame with the given normal and an axis derived from a hint vector.
  static Frame from_normal(const Vec3& n, const Vec3& hint = Vec3::UnitX());
};

inline Frame Frame::from_normal(const Vec3& n, const Vec3& hint) {
  Frame f;
  f.normal = n.normalized();
  Vec3 a = project_to_plane(hint, f.normal);
  if (a.norm() < 1e-8) a = project_to_plane(Vec3::UnitY(), f.normal);
  if (a.norm() < 1e-8) a = project_to_plane(Vec3::UnitZ(), f.normal);
  f.axis = a.normalized();
  return f;
}

// Signed angle from a to b in the plane with the given normal.
inline double signed_angle(const Vec3& a, const Vec3& b, const Vec3& normal) {
  return std::atan2(normal.dot(a.cross(b)), a.dot(b));
}

}  // namespace quadcarve
