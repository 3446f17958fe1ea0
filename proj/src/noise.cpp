#include "dbkf/noise.hpp"

#include <cmath>

#include "dbkf/covariance.hpp"
#include "dbkf/errors.hpp"

namespace dbkf {

namespace {

template <typename M>
void require_spd(const M& m, const char* name) {
  if (!m.allFinite()) throw InvalidArgument(std::string(name) + " has non-finite entries");
  if (asymmetry(m) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw InvalidArgument(std::string(name) + " is not symmetric");
  }
  Eigen::LLT<typename M::PlainObject> llt(symmetrize(m));
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument(std::string(name) + " is not positive definite");
  }
}

template <typename M>
void require_psd(const M& m, const char* name) {
  if (!m.allFinite()) throw InvalidArgument(std::string(name) + " has non-finite entries");
  if (asymmetry(m) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw InvalidArgument(std::string(name) + " is not symmetric");
  }
  if (min_eigenvalue(m) < -1e-15) {
    throw InvalidArgument(std::string(name) + " is not positive semidefinite");
  }
}

}  // namespace

void NoiseConfig::validate() const {
  require_spd(Q, "Q");
  require_spd(Sigma, "Sigma");
  require_psd(Xi, "Xi");  // zero freezes the parameters
  require_spd(Z, "Z");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  if (!gravity.allFinite()) throw InvalidArgument("gravity must be finite");
}

NoiseConfig NoiseConfig::from_sigmas(const NoiseSigmas& s, double beta, const Vec3& gravity) {
  NoiseConfig n;
  ErrorVector q;
  q.segment<3>(ix::kPos).setConstant(s.position * s.position);
  q.segment<3>(ix::kVel).setConstant(s.velocity * s.velocity);
  q.segment<3>(ix::kRot).setConstant(s.orientation * s.orientation);
  for (int i = 0; i < kNumLegs; ++i) q.segment<3>(ix::foot(i)).setConstant(s.foot * s.foot);
  q.segment<3>(ix::kGyroBias).setConstant(s.gyro_bias * s.gyro_bias);
  q.segment<3>(ix::kAccelBias).setConstant(s.accel_bias * s.accel_bias);
  n.Q = q.asDiagonal();

  MeasVector r;
  r.head<3 * kNumLegs>().setConstant(s.meas_position * s.meas_position);
  r.tail<3 * kNumLegs>().setConstant(s.meas_velocity * s.meas_velocity);
  n.Sigma = r.asDiagonal();

  n.Xi = ParamCovariance::Identity() * (s.param_walk * s.param_walk);
  n.Z = ParamCovariance::Identity() * (s.normal_force * s.normal_force);
  n.beta = beta;
  n.gravity = gravity;
  return n;
}

StateCovariance world_process_covariance(const StateCovariance& q_body, const Mat3& r_wb) {
  StateCovariance q = q_body;
  for (int i = 0; i < kNumLegs; ++i) {
    const int k = ix::foot(i);
    // Rotate rows and columns of the foot block; cross terms follow along.
    q.middleRows<3>(k) = r_wb * q.middleRows<3>(k).eval();
    q.middleCols<3>(k) = q.middleCols<3>(k).eval() * r_wb.transpose();
  }
  return q;
}

MeasCovariance inflate_measurement_covariance(const MeasCovariance& sigma,
                                              const LegMask& contact, double factor) {
  MeasVector scale = MeasVector::Ones();
  const double s = std::sqrt(factor);
  for (int i = 0; i < kNumLegs; ++i) {
    if (contact[i]) continue;
    scale.segment<3>(ix::meas_pos(i)).setConstant(s);
    scale.segment<3>(ix::meas_vel(i)).setConstant(s);
  }
  return scale.asDiagonal() * sigma * scale.asDiagonal();
}

}  // namespace dbkf
