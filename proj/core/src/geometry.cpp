#include "pat/render/geometry.hpp"

#include "pat/error.hpp"

namespace pat::render {

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
      r(i, j) = s;
    }
  }
  return r;
}

double Mat3::determinant() const {
  const auto& a = m;
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Mat3 Mat3::inverse() const {
  const double det = determinant();
  if (det == 0.0 || !std::isfinite(det)) throw Error("Mat3::inverse: singular matrix");
  const auto& a = m;
  Mat3 r;
  r.m = {a[4] * a[8] - a[5] * a[7], a[2] * a[7] - a[1] * a[8], a[1] * a[5] - a[2] * a[4],
         a[5] * a[6] - a[3] * a[8], a[0] * a[8] - a[2] * a[6], a[2] * a[3] - a[0] * a[5],
         a[3] * a[7] - a[4] * a[6], a[1] * a[6] - a[0] * a[7], a[0] * a[4] - a[1] * a[3]};
  for (double& v : r.m) v /= det;
  return r;
}

Basis orientation(const Pose6D& pose) {
  const double yaw = pose.yaw * kDegToRad;
  const double pitch = pose.pitch * kDegToRad;
  const double roll = pose.roll * kDegToRad;
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);

  const Vec3 forward{-sy * cp, cy * cp, sp};
  const Vec3 right0{cy, sy, 0.0};
  const Vec3 up0 = cross(right0, forward);
  Basis b;
  b.forward = forward;
  b.right = cr * right0 - sr * up0;
  b.up = sr * right0 + cr * up0;
  return b;
}

}  // namespace pat::render
