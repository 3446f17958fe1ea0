#include "dbkf/measurement.hpp"

namespace dbkf {

MeasVector measure(const RobotState& x, const SensorFrame& frame, const LegParams& params,
                   const RobotGeometry& geometry) {
  const Mat3 r = rotation_matrix(x.q);
  const Vec3 omega = frame.gyro - x.gyro_bias;
  MeasVector h;
  for (int i = 0; i < kNumLegs; ++i) {
    const LegReading& leg = frame.legs[i];
    const LegGeometry& geo = geometry.legs[i];
    const Vec3 foot = fk(leg.angles, geo, params[i]);
    const Vec3 rel_vel = jacobian(leg.angles, geo, params[i]) * leg.rates + omega.cross(foot);
    h.segment<3>(ix::meas_pos(i)) = r * foot - (x.feet[i] - x.p);
    h.segment<3>(ix::meas_vel(i)) = r * rel_vel + x.v;
  }
  return h;
}

MeasJacobian measurement_jacobian(const RobotState& x, const SensorFrame& frame,
                                  const LegParams& params, const RobotGeometry& geometry) {
  const Mat3 r = rotation_matrix(x.q);
  const Vec3 omega = frame.gyro - x.gyro_bias;
  MeasJacobian h = MeasJacobian::Zero();
  for (int i = 0; i < kNumLegs; ++i) {
    const LegReading& leg = frame.legs[i];
    const LegGeometry& geo = geometry.legs[i];
    const Vec3 foot = fk(leg.angles, geo, params[i]);
    const Vec3 rel_vel = jacobian(leg.angles, geo, params[i]) * leg.rates + omega.cross(foot);
    const int pr = ix::meas_pos(i);
    const int vr = ix::meas_vel(i);
    h.block<3, 3>(pr, ix::kPos) = Mat3::Identity();
    h.block<3, 3>(pr, ix::foot(i)) = -Mat3::Identity();
    h.block<3, 3>(pr, ix::kRot) = -r * skew(foot);
    h.block<3, 3>(vr, ix::kVel) = Mat3::Identity();
    h.block<3, 3>(vr, ix::kRot) = -r * skew(rel_vel);
    h.block<3, 3>(vr, ix::kGyroBias) = r * skew(foot);
  }
  return h;
}

LegMask contact_mask(const SensorFrame& frame) {
  LegMask m{};
  for (int i = 0; i < kNumLegs; ++i) m[i] = frame.legs[i].contact;
  return m;
}

RowMask leg_row_mask(const SensorFrame& frame) {
  RowMask mask;
  for (int i = 0; i < kNumLegs; ++i) {
    mask.segment<3>(ix::meas_pos(i)).setConstant(frame.legs[i].contact);
    mask.segment<3>(ix::meas_vel(i)).setConstant(frame.legs[i].contact);
  }
  return mask;
}

LegMask contact_from_force(const SensorFrame& frame, double threshold) {
  LegMask m{};
  for (int i = 0; i < kNumLegs; ++i) m[i] = frame.legs[i].normal_force >= threshold;
  return m;
}

Vec3 foot_from_kinematics(const RobotState& x, const Vec3& angles, const LegGeometry& geo,
                          double calf_length) {
  return x.p + rotation_matrix(x.q) * fk(angles, geo, calf_length);
}

void reanchor_feet(RobotState& x, StateCovariance& cov, const SensorFrame& frame,
                   const LegParams& params, const RobotGeometry& geometry, const LegMask& legs,
                   double variance) {
  const Mat3 r = rotation_matrix(x.q);
  for (int i = 0; i < kNumLegs; ++i) {
    if (!legs[i]) continue;
    const Vec3 foot = fk(frame.legs[i].angles, geometry.legs[i], params[i]);
    x.feet[i] = x.p + r * foot;
    // d s_i = d p - R [fk]x d theta
    const Mat3 rot_block = -r * skew(foot);
    Eigen::Matrix<double, 3, kErrorDim> row =
        cov.middleRows<3>(ix::kPos) + rot_block * cov.middleRows<3>(ix::kRot);
    const Mat3 self = row.middleCols<3>(ix::kPos) +
                      row.middleCols<3>(ix::kRot) * rot_block.transpose() +
                      variance * Mat3::Identity();
    const int k = ix::foot(i);
    cov.middleRows<3>(k) = row;
    cov.middleCols<3>(k) = row.transpose();
    cov.block<3, 3>(k, k) = 0.5 * (self + self.transpose());
  }
}

}  // namespace dbkf
