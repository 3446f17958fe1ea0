#include "dbkf/state.hpp"

namespace dbkf {

ErrorState ErrorState::from_vector(const ErrorVector& e) {
  ErrorState d;
  d.dp = e.segment<3>(ix::kPos);
  d.dv = e.segment<3>(ix::kVel);
  d.dtheta = e.segment<3>(ix::kRot);
  for (int i = 0; i < kNumLegs; ++i) d.dfeet[i] = e.segment<3>(ix::foot(i));
  d.dgyro_bias = e.segment<3>(ix::kGyroBias);
  d.daccel_bias = e.segment<3>(ix::kAccelBias);
  return d;
}

ErrorVector ErrorState::to_vector() const {
  ErrorVector e;
  e.segment<3>(ix::kPos) = dp;
  e.segment<3>(ix::kVel) = dv;
  e.segment<3>(ix::kRot) = dtheta;
  for (int i = 0; i < kNumLegs; ++i) e.segment<3>(ix::foot(i)) = dfeet[i];
  e.segment<3>(ix::kGyroBias) = dgyro_bias;
  e.segment<3>(ix::kAccelBias) = daccel_bias;
  return e;
}

RobotState retract(const RobotState& x, const ErrorVector& delta) {
  RobotState y = x;
  y.p += delta.segment<3>(ix::kPos);
  y.v += delta.segment<3>(ix::kVel);
  const Vec3 dtheta = delta.segment<3>(ix::kRot);
  if (!dtheta.isZero(0.0)) y.q = quat_mul(x.q, quat_exp(dtheta));
  for (int i = 0; i < kNumLegs; ++i) y.feet[i] += delta.segment<3>(ix::foot(i));
  y.gyro_bias += delta.segment<3>(ix::kGyroBias);
  y.accel_bias += delta.segment<3>(ix::kAccelBias);
  return y;
}

RobotState retract(const RobotState& x, const ErrorState& delta) {
  return retract(x, delta.to_vector());
}

ErrorVector local(const RobotState& x, const RobotState& y) {
  ErrorVector e;
  e.segment<3>(ix::kPos) = y.p - x.p;
  e.segment<3>(ix::kVel) = y.v - x.v;
  e.segment<3>(ix::kRot) = quat_log(quat_mul(x.q.conjugate(), y.q));
  for (int i = 0; i < kNumLegs; ++i) e.segment<3>(ix::foot(i)) = y.feet[i] - x.feet[i];
  e.segment<3>(ix::kGyroBias) = y.gyro_bias - x.gyro_bias;
  e.segment<3>(ix::kAccelBias) = y.accel_bias - x.accel_bias;
  return e;
}

}  // namespace dbkf
