#pragma once

#include "dbkf/state.hpp"

namespace dbkf {

/// IMU sample driving one propagation step.
struct ControlInput {
  Vec3 accel = Vec3::Zero();  // m/s^2, body
  Vec3 gyro = Vec3::Zero();   // rad/s, body
  double dt = 0.002;          // s

  /// Throws InvalidArgument unless 0 < dt < 0.1 and the readings are finite.
  void validate() const;
};

using StateMatrix = Eigen::Matrix<double, kErrorDim, kErrorDim>;

/// One explicit Euler step of the IMU-driven motion model. Feet and biases are
/// held constant. Throws NumericalError if the result is not finite.
RobotState propagate(const RobotState& x, const ControlInput& u, const Vec3& gravity);

/// Tangent-space Jacobian of `propagate` under right perturbations.
StateMatrix process_jacobian(const RobotState& x, const ControlInput& u, const Vec3& gravity);

}  // namespace dbkf
