#pragma once

#include "dbkf/kinematics.hpp"
#include "dbkf/state.hpp"

namespace dbkf {

using RowMask = Eigen::Matrix<bool, kMeasDim, 1>;

/// Leg-odometry residuals h(x; params) against the zero pseudo-measurement.
/// Rows: position residual of every leg (FL, FR, RL, RR), then velocity
/// residual of every leg. The gyro reading is bias corrected.
MeasVector measure(const RobotState& x, const SensorFrame& frame, const LegParams& params,
                   const RobotGeometry& geometry);

/// Analytic d h / d(error state) under right perturbations.
MeasJacobian measurement_jacobian(const RobotState& x, const SensorFrame& frame,
                                  const LegParams& params, const RobotGeometry& geometry);

LegMask contact_mask(const SensorFrame& frame);

/// True on rows belonging to legs in contact.
RowMask leg_row_mask(const SensorFrame& frame);

/// Per-leg contact derived from the normal force reading.
LegMask contact_from_force(const SensorFrame& frame, double threshold);

/// Foot position implied by the kinematic chain: p + R fk.
Vec3 foot_from_kinematics(const RobotState& x, const Vec3& angles, const LegGeometry& geo,
                          double calf_length);

/// Re-anchors the feet of `legs` at their kinematic positions and replaces
/// their covariance blocks by the linearized pushforward of the body pose
/// covariance plus `variance` on the diagonal.
void reanchor_feet(RobotState& x, StateCovariance& cov, const SensorFrame& frame,
                   const LegParams& params, const RobotGeometry& geometry, const LegMask& legs,
                   double variance);

}  // namespace dbkf
