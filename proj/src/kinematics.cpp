#include "dbkf/kinematics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dbkf/errors.hpp"

namespace dbkf {

namespace {

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1.0, 0.0, 0.0,
       0.0, c, -s,
       0.0, s, c;
  return r;
}

}  // namespace

void LegGeometry::validate() const {
  if (!(thigh_length > 0.0)) throw InvalidArgument("thigh_length must be positive");
  if (!(hip_offset > 0.0)) throw InvalidArgument("hip_offset must be positive");
  if (side_sign != 1 && side_sign != -1) throw InvalidArgument("side_sign must be +1 or -1");
  if (!hip_position.allFinite()) throw InvalidArgument("hip_position must be finite");
}

RobotGeometry RobotGeometry::go2() {
  RobotGeometry g;
  const double hx = 0.1934, hy = 0.0465;
  const std::array<Vec3, kNumLegs> hips = {Vec3(hx, hy, 0.0), Vec3(hx, -hy, 0.0),
                                           Vec3(-hx, hy, 0.0), Vec3(-hx, -hy, 0.0)};
  for (int i = 0; i < kNumLegs; ++i) {
    g.legs[i].id = static_cast<LegId>(i);
    g.legs[i].hip_position = hips[i];
    g.legs[i].side_sign = (i % 2 == 0) ? 1 : -1;
  }
  return g;
}

void RobotGeometry::validate() const {
  for (const auto& leg : legs) leg.validate();
}

void LegParams::validate(double max_length) const {
  for (int i = 0; i < kNumLegs; ++i) {
    if (!(calf[i] > 0.0 && calf[i] < max_length)) {
      throw InvalidArgument("calf length of leg " + std::string(kLegNames[i]) +
                            " out of range: " + std::to_string(calf[i]));
    }
  }
}

Vec3 fk(const Vec3& q, const LegGeometry& geo, double lc) {
  const double lt = geo.thigh_length;
  const double s2 = std::sin(q[1]), c2 = std::cos(q[1]);
  const double s23 = std::sin(q[1] + q[2]), c23 = std::cos(q[1] + q[2]);
  const Vec3 planar(-lt * s2 - lc * s23, geo.side_sign * geo.hip_offset, -lt * c2 - lc * c23);
  return geo.hip_position + rot_x(q[0]) * planar;
}

Jacobian3 jacobian(const Vec3& q, const LegGeometry& geo, double lc) {
  const double lt = geo.thigh_length;
  const double s2 = std::sin(q[1]), c2 = std::cos(q[1]);
  const double s23 = std::sin(q[1] + q[2]), c23 = std::cos(q[1] + q[2]);
  const Mat3 rx = rot_x(q[0]);
  const Vec3 planar(-lt * s2 - lc * s23, geo.side_sign * geo.hip_offset, -lt * c2 - lc * c23);
  Jacobian3 j;
  j.col(0) = Vec3::UnitX().cross(rx * planar);
  j.col(1) = rx * Vec3(-lt * c2 - lc * c23, 0.0, lt * s2 + lc * s23);
  j.col(2) = rx * Vec3(-lc * c23, 0.0, lc * s23);
  return j;
}

Vec3 jacobian_wrt_lc(const Vec3& q, const LegGeometry& /*geo*/, double /*lc*/) {
  const double s23 = std::sin(q[1] + q[2]), c23 = std::cos(q[1] + q[2]);
  return rot_x(q[0]) * Vec3(-s23, 0.0, -c23);
}

Vec3 statics_torque(const Vec3& q, const LegGeometry& geo, double lc, const Vec3& force) {
  return -jacobian(q, geo, lc).transpose() * force;
}

double jacobian_condition_number(const Jacobian3& j) {
  Eigen::JacobiSVD<Mat3> svd(j);
  const auto& sv = svd.singularValues();
  if (sv[2] == 0.0) return std::numeric_limits<double>::infinity();
  return sv[0] / sv[2];
}

Vec3 statics_force(const Vec3& q, const LegGeometry& geo, double lc, const Vec3& torques,
                   double max_condition) {
  const Jacobian3 j = jacobian(q, geo, lc);
  const double cond = jacobian_condition_number(j);
  if (!(cond < max_condition)) {
    throw SingularConfiguration("leg " + std::string(kLegNames[static_cast<int>(geo.id)]) +
                                " Jacobian condition number " + std::to_string(cond) +
                                " exceeds limit");
  }
  return -j.transpose().partialPivLu().solve(torques);
}

double statics_normal_force(const Vec3& q, const LegGeometry& geo, double lc,
                            const Vec3& torques, double max_condition) {
  return statics_force(q, geo, lc, torques, max_condition).z();
}

Vec3 inverse_kinematics(const Vec3& foot_body, const LegGeometry& geo, double lc) {
  const double lt = geo.thigh_length;
  const double d = geo.side_sign * geo.hip_offset;
  const Vec3 r = foot_body - geo.hip_position;

  const double rho = std::hypot(r.y(), r.z());
  if (rho < std::abs(d)) throw ScenarioError("foot target inside the hip offset radius");
  const double alpha = std::atan2(r.z(), r.y());
  double roll = alpha + std::acos(d / rho);
  roll = std::remainder(roll, 2.0 * std::numbers::pi);

  // Planar coordinates in the rolled leg plane.
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double ax = r.x();
  const double az = -sr * r.y() + cr * r.z();
  const double l2 = ax * ax + az * az;
  const double c3 = (l2 - lt * lt - lc * lc) / (2.0 * lt * lc);
  if (c3 > 1.0 || c3 < -1.0) {
    throw ScenarioError("foot target out of reach (distance " + std::to_string(std::sqrt(l2)) +
                        " m)");
  }
  const double knee = -std::acos(c3);
  const double a = lt + lc * std::cos(knee);
  const double b = lc * std::sin(knee);
  const double pitch = std::atan2(-ax, -az) - std::atan2(b, a);
  return {roll, std::remainder(pitch, 2.0 * std::numbers::pi), knee};
}

}  // namespace dbkf
