#pragma once

#include <array>

#include "dbkf/quaternion.hpp"
#include "dbkf/types.hpp"

namespace dbkf {

struct RobotState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Quaternion q;
  std::array<Vec3, kNumLegs> feet{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  Vec3 gyro_bias = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
};

/// Tangent-space perturbation of a RobotState, in block form.
struct ErrorState {
  Vec3 dp = Vec3::Zero();
  Vec3 dv = Vec3::Zero();
  Vec3 dtheta = Vec3::Zero();
  std::array<Vec3, kNumLegs> dfeet{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  Vec3 dgyro_bias = Vec3::Zero();
  Vec3 daccel_bias = Vec3::Zero();

  static ErrorState from_vector(const ErrorVector& e);
  ErrorVector to_vector() const;
};

/// Additive on the Euclidean blocks, q <- q * exp(dtheta) on orientation.
RobotState retract(const RobotState& x, const ErrorVector& delta);
RobotState retract(const RobotState& x, const ErrorState& delta);

/// Inverse chart: retract(x, local(x, y)) == y.
ErrorVector local(const RobotState& x, const RobotState& y);

struct LegReading {
  Vec3 angles = Vec3::Zero();   // hip-roll, hip-pitch, knee-pitch (rad)
  Vec3 rates = Vec3::Zero();    // rad/s
  Vec3 torques = Vec3::Zero();  // N m
  double normal_force = 0.0;    // N
  bool contact = false;
};

/// One timestamped bundle of proprioceptive readings.
struct SensorFrame {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();   // rad/s, body
  Vec3 accel = Vec3::Zero();  // m/s^2, body
  std::array<LegReading, kNumLegs> legs{};
};

}  // namespace dbkf
