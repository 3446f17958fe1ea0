#pragma once

#include <array>
#include <string_view>

#include <Eigen/Dense>

namespace dbkf {

inline constexpr int kNumLegs = 4;
/// Tangent-space dimension of RobotState: p, v, theta, feet, gyro bias, accel bias.
inline constexpr int kErrorDim = 3 * kNumLegs + 15;
/// Stacked residual dimension: per-leg position blocks, then per-leg velocity blocks.
inline constexpr int kMeasDim = 6 * kNumLegs;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using ErrorVector = Eigen::Matrix<double, kErrorDim, 1>;
using StateCovariance = Eigen::Matrix<double, kErrorDim, kErrorDim>;
using MeasVector = Eigen::Matrix<double, kMeasDim, 1>;
using MeasCovariance = Eigen::Matrix<double, kMeasDim, kMeasDim>;
using MeasJacobian = Eigen::Matrix<double, kMeasDim, kErrorDim>;
using ParamVector = Eigen::Matrix<double, kNumLegs, 1>;
using ParamCovariance = Eigen::Matrix<double, kNumLegs, kNumLegs>;
using LegMask = std::array<bool, kNumLegs>;

enum class LegId { FL = 0, FR = 1, RL = 2, RR = 3 };

inline constexpr std::array<std::string_view, kNumLegs> kLegNames = {"FL", "FR", "RL", "RR"};

// Offsets of each block inside an ErrorVector.
namespace ix {
inline constexpr int kPos = 0;
inline constexpr int kVel = 3;
inline constexpr int kRot = 6;
inline constexpr int kFeet = 9;
inline constexpr int kGyroBias = kFeet + 3 * kNumLegs;
inline constexpr int kAccelBias = kGyroBias + 3;
constexpr int foot(int leg) { return kFeet + 3 * leg; }
// Rows of the measurement vector.
constexpr int meas_pos(int leg) { return 3 * leg; }
constexpr int meas_vel(int leg) { return 3 * kNumLegs + 3 * leg; }
}  // namespace ix

}  // namespace dbkf
