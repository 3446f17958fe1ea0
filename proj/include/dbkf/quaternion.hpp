#pragma once

#include "dbkf/types.hpp"

namespace dbkf {

/// Unit quaternion, Hamilton convention, scalar first, rotating body vectors
/// into the world frame. Every constructor normalizes.
class Quaternion {
 public:
  Quaternion() = default;
  /// Throws InvalidArgument for a zero or non-finite input.
  Quaternion(double w, double x, double y, double z);

  static Quaternion identity() { return {}; }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  Vec3 vec() const { return {x_, y_, z_}; }
  Eigen::Vector4d coeffs() const { return {w_, x_, y_, z_}; }

  Quaternion conjugate() const;

  friend bool operator==(const Quaternion&, const Quaternion&) = default;

 private:
  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

Mat3 skew(const Vec3& v);

/// Exponential map from a rotation vector (rad). Uses a Taylor branch below
/// 1e-8 rad. Throws InvalidArgument for non-finite input.
Quaternion quat_exp(const Vec3& rv);

/// Inverse of quat_exp with the rotation angle taken in [0, pi].
Vec3 quat_log(const Quaternion& q);

/// Hamilton product, renormalized.
Quaternion quat_mul(const Quaternion& a, const Quaternion& b);

Mat3 rotation_matrix(const Quaternion& q);

Quaternion quat_from_rotation_matrix(const Mat3& r);

/// Right Jacobian of SO(3) and its inverse.
Mat3 so3_right_jacobian(const Vec3& rv);
Mat3 so3_right_jacobian_inv(const Vec3& rv);

}  // namespace dbkf
