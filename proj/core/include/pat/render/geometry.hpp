#pragma once

#include <array>
#include <cmath>

namespace pat::render {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return s * a; }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { return (1.0 / norm(a)) * a; }

// Row-major 3x3.
struct Mat3 {
  std::array<double, 9> m{};

  static Mat3 identity() { return Mat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }
  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }

  Vec3 operator*(Vec3 v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const;
  double determinant() const;
  // Throws when singular.
  Mat3 inverse() const;
};

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

// Meters and degrees. World frame: x east, y north (toward the poster), z up.
struct Pose6D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  Vec3 position() const { return {x, y, z}; }
  friend Pose6D operator+(const Pose6D& a, const Pose6D& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z, a.roll + b.roll, a.pitch + b.pitch, a.yaw + b.yaw};
  }
  friend bool operator==(const Pose6D&, const Pose6D&) = default;
};

// Orthonormal frame of a posed body. With zero angles the body looks along
// +y with +x to its right. Yaw turns left about +z, pitch tilts the view
// up, roll turns about the viewing axis.
struct Basis {
  Vec3 right;
  Vec3 up;
  Vec3 forward;
};

Basis orientation(const Pose6D& pose);

}  // namespace pat::render
