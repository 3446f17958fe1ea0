#include <gtest/gtest.h>

#include "dbkf/measurement.hpp"
#include "test_util.hpp"

namespace dbkf {
namespace {

using test::Rng;

struct Fixture {
  RobotGeometry geo = RobotGeometry::go2();
  LegParams params = LegParams::uniform(0.22);
  RobotState x;
  SensorFrame frame;
  explicit Fixture(std::uint64_t seed) {
    Rng rng(seed);
    x = test::random_state(rng);
    frame = test::random_frame(rng);
    test::make_consistent(x, frame, params, geo);
  }
};

TEST(Measurement, ConsistentStateHasZeroResidual) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Fixture fx(s);
    EXPECT_LT(measure(fx.x, fx.frame, fx.params, fx.geo).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Measurement, PositionShiftAppearsInPositionRows) {
  Fixture fx(1);
  RobotState y = fx.x;
  y.p += Vec3(0.01, 0, 0);
  const MeasVector h = measure(y, fx.frame, fx.params, fx.geo);
  for (int i = 0; i < kNumLegs; ++i) {
    EXPECT_LT((h.segment<3>(ix::meas_pos(i)) - Vec3(0.01, 0, 0)).norm(), 1e-12);
    EXPECT_LT(h.segment<3>(ix::meas_vel(i)).norm(), 1e-12);
  }
}

TEST(Measurement, LinearInPositionVelocityAndFeet) {
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    Fixture a(100 + k), b(200 + k);
    ErrorVector d = ErrorVector::Zero();
    d.segment<3>(ix::kPos) = rng.gaussian(0.1);
    d.segment<3>(ix::kVel) = rng.gaussian(0.1);
    d.segment<12>(ix::kFeet) = Eigen::Matrix<double, 12, 1>::Random() * 0.1;
    // Same frame, two different base states.
    b.frame = a.frame;
    const MeasVector da = measure(retract(a.x, d), a.frame, a.params, a.geo) -
                          measure(a.x, a.frame, a.params, a.geo);
    const MeasVector db = measure(retract(b.x, d), a.frame, a.params, a.geo) -
                          measure(b.x, a.frame, a.params, a.geo);
    // The p and s terms enter unrotated; the v term too.
    EXPECT_LT((da - db).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Measurement, JacobianMatchesFiniteDifferences) {
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    RobotState x = test::random_state(rng);
    const SensorFrame frame = test::random_frame(rng);
    const LegParams params = LegParams::uniform(rng.uniform(0.18, 0.26));
    const RobotGeometry geo = RobotGeometry::go2();
    const auto f = [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
      return measure(retract(x, ErrorVector(d)), frame, params, geo);
    };
    const Eigen::MatrixXd fd = test::central_diff(f, Eigen::VectorXd::Zero(kErrorDim));
    EXPECT_LT(test::rel_err(measurement_jacobian(x, frame, params, geo), fd), 1e-5);
  }
}

TEST(Measurement, JacobianSparsity) {
  Fixture fx(4);
  const MeasJacobian h = measurement_jacobian(fx.x, fx.frame, fx.params, fx.geo);
  for (int i = 0; i < kNumLegs; ++i) {
    const int pr = ix::meas_pos(i), vr = ix::meas_vel(i);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (leg != i) EXPECT_TRUE((h.block<3, 3>(pr, ix::foot(leg)).array() == 0.0).all());
      EXPECT_TRUE((h.block<3, 3>(vr, ix::foot(leg)).array() == 0.0).all());
    }
    EXPECT_TRUE((h.block<3, 3>(pr, ix::kVel).array() == 0.0).all());
    EXPECT_TRUE((h.block<3, 3>(pr, ix::kGyroBias).array() == 0.0).all());
    EXPECT_TRUE((h.block<3, 3>(vr, ix::kPos).array() == 0.0).all());
    EXPECT_TRUE((h.block<6, 3>(pr, ix::kAccelBias).array() == 0.0).all());
    EXPECT_TRUE((h.block<3, 3>(vr, ix::kAccelBias).array() == 0.0).all());
    EXPECT_EQ((h.block<3, 3>(pr, ix::kPos)), Mat3::Identity());
    EXPECT_EQ((h.block<3, 3>(pr, ix::foot(i))), Mat3(-Mat3::Identity()));
    EXPECT_EQ((h.block<3, 3>(vr, ix::kVel)), Mat3::Identity());
  }
}

TEST(Measurement, GyroBiasIsSubtracted) {
  Fixture fx(5);
  RobotState y = fx.x;
  SensorFrame f = fx.frame;
  y.gyro_bias += Vec3(0.1, -0.2, 0.05);
  f.gyro += Vec3(0.1, -0.2, 0.05);
  EXPECT_LT(measure(y, f, fx.params, fx.geo).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Measurement, ContactMasks) {
  Rng rng(6);
  SensorFrame f = test::random_frame(rng);
  const LegMask all = contact_mask(f);
  EXPECT_TRUE(all[0] && all[1] && all[2] && all[3]);
  EXPECT_TRUE(leg_row_mask(f).all());
  f.legs[0].contact = false;
  const RowMask m = leg_row_mask(f);
  EXPECT_EQ(m.count(), kMeasDim - 6);
  EXPECT_FALSE(m.segment<3>(ix::meas_pos(0)).any());
  EXPECT_FALSE(m.segment<3>(ix::meas_vel(0)).any());
  f.legs[2].normal_force = 9.99;
  f.legs[3].normal_force = 10.0;
  const LegMask c = contact_from_force(f, 10.0);
  EXPECT_FALSE(c[2]);
  EXPECT_TRUE(c[3]);
}

TEST(Measurement, ReanchorZeroesPositionResidual) {
  Fixture fx(7);
  RobotState y = fx.x;
  y.feet[2] += Vec3(0.3, -0.1, 0.05);
  StateCovariance p = StateCovariance::Identity() * 1e-3;
  LegMask legs{};
  legs[2] = true;
  reanchor_feet(y, p, fx.frame, fx.params, fx.geo, legs, 1e-4);
  EXPECT_LT(measure(y, fx.frame, fx.params, fx.geo).segment<3>(ix::meas_pos(2)).norm(), 1e-12);
  EXPECT_EQ(y.feet[1], fx.x.feet[1]);
  EXPECT_LT((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-18);
  // Foot block equals the pose pushforward plus the extra variance.
  const Mat3 a = -rotation_matrix(y.q) * skew(fk(fx.frame.legs[2].angles, fx.geo.legs[2], fx.params[2]));
  const Mat3 expected = Mat3::Identity() * 1e-3 + a * a.transpose() * 1e-3 + Mat3::Identity() * 1e-4;
  EXPECT_LT((p.block<3, 3>(ix::foot(2), ix::foot(2)) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

}  // namespace
}  // namespace dbkf
