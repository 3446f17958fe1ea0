#include "dbkf/quaternion.hpp"

#include <cmath>

#include "dbkf/errors.hpp"

namespace dbkf {

namespace {
constexpr double kTaylorThreshold = 1e-8;
}

Quaternion::Quaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!std::isfinite(n) || n == 0.0) {
    throw InvalidArgument("quaternion coefficients must be finite and non-zero");
  }
  w_ = w / n;
  x_ = x / n;
  y_ = y / n;
  z_ = z / n;
}

Quaternion Quaternion::conjugate() const { return {w_, -x_, -y_, -z_}; }

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Quaternion quat_exp(const Vec3& rv) {
  if (!rv.allFinite()) throw InvalidArgument("quat_exp: rotation vector is not finite");
  const double theta = rv.norm();
  if (theta < kTaylorThreshold) {
    const double t2 = theta * theta;
    const double s = 0.5 * (1.0 - t2 / 24.0);
    return {1.0 - t2 / 8.0, s * rv.x(), s * rv.y(), s * rv.z()};
  }
  const double s = std::sin(0.5 * theta) / theta;
  return {std::cos(0.5 * theta), s * rv.x(), s * rv.y(), s * rv.z()};
}

Vec3 quat_log(const Quaternion& q) {
  // Pick the representative with w >= 0 so the angle lies in [0, pi].
  double w = q.w();
  Vec3 v = q.vec();
  if (w < 0.0) {
    w = -w;
    v = -v;
  }
  const double vn = v.norm();
  if (vn < kTaylorThreshold) {
    // 2 atan(vn / w) / vn ~ (2 / w) (1 - vn^2 / (3 w^2))
    return (2.0 / w) * (1.0 - vn * vn / (3.0 * w * w)) * v;
  }
  const double theta = 2.0 * std::atan2(vn, w);
  return (theta / vn) * v;
}

Quaternion quat_mul(const Quaternion& a, const Quaternion& b) {
  return {a.w() * b.w() - a.x() * b.x() - a.y() * b.y() - a.z() * b.z(),
          a.w() * b.x() + a.x() * b.w() + a.y() * b.z() - a.z() * b.y(),
          a.w() * b.y() - a.x() * b.z() + a.y() * b.w() + a.z() * b.x(),
          a.w() * b.z() + a.x() * b.y() - a.y() * b.x() + a.z() * b.w()};
}

Mat3 rotation_matrix(const Quaternion& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  Mat3 r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
       2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
       2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

Quaternion quat_from_rotation_matrix(const Mat3& r) {
  const Eigen::Quaterniond e(r);
  return {e.w(), e.x(), e.y(), e.z()};
}

Mat3 so3_right_jacobian(const Vec3& rv) {
  const double theta = rv.norm();
  const Mat3 k = skew(rv);
  if (theta < 1e-6) return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  const double t2 = theta * theta;
  return Mat3::Identity() - (1.0 - std::cos(theta)) / t2 * k +
         (theta - std::sin(theta)) / (t2 * theta) * k * k;
}

Mat3 so3_right_jacobian_inv(const Vec3& rv) {
  const double theta = rv.norm();
  const Mat3 k = skew(rv);
  if (theta < 1e-6) return Mat3::Identity() + 0.5 * k + (1.0 / 12.0) * k * k;
  const double t2 = theta * theta;
  const double coeff = 1.0 / t2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * k + coeff * k * k;
}

}  // namespace dbkf
