#pragma once

#include <cmath>
#include <numbers>

namespace coopriv {

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

/// Wraps an angle into [-pi, pi).
inline double normalize_heading(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(radians + std::numbers::pi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  wrapped -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift for inputs like -pi - tiny.
  if (wrapped >= std::numbers::pi) wrapped -= two_pi;
  return wrapped;
}

/// Planar vehicle or camera pose. Heading is a rotation about the vertical
/// (z) axis, measured from +x towards +y.
struct Pose {
  double x{0.0};
  double y{0.0};
  double z{0.0};
  double heading{0.0};

  Vec3 position() const { return {x, y, z}; }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(heading);
  }

  friend bool operator==(const Pose&, const Pose&) = default;
};

inline Pose make_pose(double x, double y, double z, double heading) {
  return {x, y, z, normalize_heading(heading)};
}

}  // namespace coopriv
