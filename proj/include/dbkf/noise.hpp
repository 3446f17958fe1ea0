#pragma once

#include "dbkf/types.hpp"

namespace dbkf {

/// Per-frame standard deviations from which a NoiseConfig is assembled.
/// Process entries are per propagation step; measurement entries per sample.
struct NoiseSigmas {
  double position = 1e-6;       // m
  double velocity = 4e-4;       // m/s
  double orientation = 4e-5;    // rad
  double foot = 4e-4;           // m, body frame before rotation to world
  double gyro_bias = 2e-6;      // rad/s
  double accel_bias = 2e-5;     // m/s^2
  double meas_position = 0.01;  // m
  double meas_velocity = 0.05;  // m/s
  double param_walk = 1e-4;     // m, calf length random walk
  double normal_force = 3.0;    // N

  friend bool operator==(const NoiseSigmas&, const NoiseSigmas&) = default;
};

/// Covariances and the robustness scalar shared by every filter.
struct NoiseConfig {
  StateCovariance Q = StateCovariance::Identity() * 1e-8;
  MeasCovariance Sigma = MeasCovariance::Identity() * 1e-4;
  ParamCovariance Xi = ParamCovariance::Identity() * 1e-8;
  ParamCovariance Z = ParamCovariance::Identity() * 9.0;
  double beta = 1e-3;
  Vec3 gravity{0.0, 0.0, -9.81};

  /// Throws InvalidArgument unless Q, Sigma and Z are symmetric positive
  /// definite, Xi is positive semidefinite and 0 < beta < 1.
  void validate() const;

  static NoiseConfig from_sigmas(const NoiseSigmas& s, double beta,
                                 const Vec3& gravity = Vec3(0.0, 0.0, -9.81));
};

/// Process covariance for one step with the foot blocks rotated to the world
/// frame by the current attitude.
StateCovariance world_process_covariance(const StateCovariance& q_body, const Mat3& r_wb);

/// Sigma with the rows and columns of legs not in contact scaled by `factor`.
MeasCovariance inflate_measurement_covariance(const MeasCovariance& sigma,
                                              const LegMask& contact, double factor);

}  // namespace dbkf
