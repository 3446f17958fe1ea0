#pragma once

#include <array>

#include "dbkf/types.hpp"

namespace dbkf {

/// Fixed geometry of one 3-DoF leg: hip-roll about body x, hip-pitch and
/// knee-pitch about the rolled y axis.
struct LegGeometry {
  LegId id = LegId::FL;
  Vec3 hip_position = Vec3::Zero();  // m, body frame
  double hip_offset = 0.0955;        // m, lateral, magnitude
  double thigh_length = 0.213;       // m
  int side_sign = 1;                 // +1 left legs, -1 right legs

  /// Throws InvalidArgument when lengths are non-positive or the sign is not +-1.
  void validate() const;
};

struct RobotGeometry {
  std::array<LegGeometry, kNumLegs> legs;

  static RobotGeometry go2();
  void validate() const;
};

inline constexpr double kNominalCalfLength = 0.226;

/// Calf length per leg (m), ordered FL, FR, RL, RR.
struct LegParams {
  ParamVector calf = ParamVector::Constant(kNominalCalfLength);

  static LegParams uniform(double lc) { return {ParamVector::Constant(lc)}; }
  double operator[](int leg) const { return calf[leg]; }
  /// Throws InvalidArgument unless every length lies in (0, max_length).
  void validate(double max_length = 1.0) const;
};

using Jacobian3 = Mat3;

/// Foot position relative to the body centre, body frame.
Vec3 fk(const Vec3& angles, const LegGeometry& geo, double calf_length);

/// d fk / d angles.
Jacobian3 jacobian(const Vec3& angles, const LegGeometry& geo, double calf_length);

/// d fk / d calf_length; a unit vector for every configuration.
Vec3 jacobian_wrt_lc(const Vec3& angles, const LegGeometry& geo, double calf_length);

/// Joint torques balancing the ground-reaction force: tau = -J^T F.
Vec3 statics_torque(const Vec3& angles, const LegGeometry& geo, double calf_length,
                    const Vec3& force);

/// Ground-reaction force implied by the torques, -J^{-T} tau. Throws
/// SingularConfiguration when cond(J) exceeds `max_condition`.
Vec3 statics_force(const Vec3& angles, const LegGeometry& geo, double calf_length,
                   const Vec3& torques, double max_condition = 1e8);

/// Last component of statics_force: the predicted normal contact force.
double statics_normal_force(const Vec3& angles, const LegGeometry& geo, double calf_length,
                            const Vec3& torques, double max_condition = 1e8);

double jacobian_condition_number(const Jacobian3& j);

/// Joint angles placing the foot at `foot_body` (body frame, relative to the
/// body centre) with the knee bent backwards. Throws ScenarioError when the
/// point is out of reach.
Vec3 inverse_kinematics(const Vec3& foot_body, const LegGeometry& geo, double calf_length);

}  // namespace dbkf
