#include "dbkf/process.hpp"

#include "dbkf/errors.hpp"

namespace dbkf {

void ControlInput::validate() const {
  if (!(dt > 0.0 && dt < 0.1)) throw InvalidArgument("control dt must lie in (0, 0.1) s");
  if (!accel.allFinite() || !gyro.allFinite()) {
    throw InvalidArgument("control input is not finite");
  }
}

RobotState propagate(const RobotState& x, const ControlInput& u, const Vec3& gravity) {
  const Mat3 r = rotation_matrix(x.q);
  RobotState y = x;
  y.p = x.p + x.v * u.dt;
  y.v = x.v + (r * (u.accel - x.accel_bias) + gravity) * u.dt;
  y.q = quat_mul(x.q, quat_exp((u.gyro - x.gyro_bias) * u.dt));
  if (!y.p.allFinite() || !y.v.allFinite()) {
    throw NumericalError("propagation overflow: state became non-finite");
  }
  return y;
}

StateMatrix process_jacobian(const RobotState& x, const ControlInput& u, const Vec3& /*gravity*/) {
  const Mat3 r = rotation_matrix(x.q);
  const Vec3 rot_step = (u.gyro - x.gyro_bias) * u.dt;
  StateMatrix f = StateMatrix::Identity();
  f.block<3, 3>(ix::kPos, ix::kVel) = Mat3::Identity() * u.dt;
  f.block<3, 3>(ix::kVel, ix::kRot) = -r * skew(u.accel - x.accel_bias) * u.dt;
  f.block<3, 3>(ix::kVel, ix::kAccelBias) = -r * u.dt;
  f.block<3, 3>(ix::kRot, ix::kRot) = rotation_matrix(quat_exp(rot_step)).transpose();
  f.block<3, 3>(ix::kRot, ix::kGyroBias) = -so3_right_jacobian(rot_step) * u.dt;
  return f;
}

}  // namespace dbkf
