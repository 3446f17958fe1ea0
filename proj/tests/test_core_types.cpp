#include <gtest/gtest.h>

#include "dbkf/covariance.hpp"
#include "dbkf/errors.hpp"
#include "dbkf/state.hpp"
#include "test_util.hpp"

namespace dbkf {
namespace {

using test::Rng;

TEST(Quaternion, ExpOfZeroIsIdentity) {
  EXPECT_EQ(quat_exp(Vec3::Zero()).coeffs(), Eigen::Vector4d(1, 0, 0, 0));
}

TEST(Quaternion, HalfTurnAboutX) {
  const Quaternion q = quat_exp(Vec3(test::kPi, 0, 0));
  EXPECT_NEAR(q.w(), 0.0, 1e-15);
  EXPECT_NEAR(q.x(), 1.0, 1e-15);
  EXPECT_EQ(q.y(), 0.0);
  EXPECT_EQ(q.z(), 0.0);
}

TEST(Quaternion, ExpMatchesRodrigues) {
  const Vec3 rv(0.1, -0.2, 0.3);
  EXPECT_LT((rotation_matrix(quat_exp(rv)) - test::rodrigues(rv)).cwiseAbs().maxCoeff(), 1e-12);
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const Vec3 r = rng.gaussian(1.0);
    EXPECT_LT((rotation_matrix(quat_exp(r)) - test::rodrigues(r)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Quaternion, TaylorBranchConsistency) {
  const Vec3 axis = Vec3(0.3, -0.5, 0.8).normalized();
  for (double n : {1e-12, 1e-9, 1e-6}) {
    const Vec3 rv = n * axis;
    const double h = 0.5 * n;
    const Eigen::Vector4d exact(std::cos(h), std::sin(h) * axis.x(), std::sin(h) * axis.y(),
                                std::sin(h) * axis.z());
    EXPECT_LT((quat_exp(rv).coeffs() - exact).cwiseAbs().maxCoeff(), 1e-14) << n;
  }
}

TEST(Quaternion, ExpRejectsNonFinite) {
  EXPECT_THROW(quat_exp(Vec3(std::nan(""), 0, 0)), InvalidArgument);
  EXPECT_THROW(quat_exp(Vec3(INFINITY, 0, 0)), InvalidArgument);
  EXPECT_THROW(Quaternion(0, 0, 0, 0), InvalidArgument);
}

TEST(Quaternion, LogInvertsExp) {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    Vec3 rv = rng.gaussian(1.0);
    if (rv.norm() > 3.0) rv *= 3.0 / rv.norm();
    EXPECT_LT((quat_log(quat_exp(rv)) - rv).norm(), 1e-12);
  }
  EXPECT_LT(quat_log(Quaternion::identity()).norm(), 1e-300);
}

TEST(Quaternion, ProductIdentityAndInverse) {
  Rng rng(7);
  const Quaternion a = rng.rotation();
  EXPECT_LT((quat_mul(a, Quaternion::identity()).coeffs() - a.coeffs()).norm(), 1e-15);
  EXPECT_LT((quat_mul(a, a.conjugate()).coeffs() - Eigen::Vector4d(1, 0, 0, 0)).norm(), 1e-15);
}

TEST(Quaternion, HalfTurnComposition) {
  const Quaternion x(0, 1, 0, 0), y(0, 0, 1, 0);
  const Quaternion z = quat_mul(x, y);
  EXPECT_LT((z.coeffs() - Eigen::Vector4d(0, 0, 0, 1)).norm(), 1e-15);
  // Oracle: the rotation-matrix product.
  const Mat3 expected = test::rodrigues(Vec3(test::kPi, 0, 0)) * test::rodrigues(Vec3(0, test::kPi, 0));
  EXPECT_LT((rotation_matrix(z) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Quaternion, ProductIsMatrixProduct) {
  Rng rng(11);
  for (int k = 0; k < 100; ++k) {
    const Quaternion a = rng.rotation(), b = rng.rotation();
    EXPECT_LT((rotation_matrix(quat_mul(a, b)) - rotation_matrix(a) * rotation_matrix(b))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(Quaternion, RotationMatrixCases) {
  EXPECT_EQ(rotation_matrix(Quaternion::identity()), Mat3::Identity());
  const Mat3 r = rotation_matrix(Quaternion(0, 0, 0, 1));
  EXPECT_LT((r - Eigen::Vector3d(-1, -1, 1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(),
            1e-15);
  Rng rng(13);
  for (int k = 0; k < 100; ++k) {
    const Mat3 m = rotation_matrix(rng.rotation());
    EXPECT_LT((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-12);
  }
}

TEST(Quaternion, FromRotationMatrixRoundTrip) {
  Rng rng(17);
  for (int k = 0; k < 100; ++k) {
    const Quaternion q = rng.rotation();
    const Quaternion back = quat_from_rotation_matrix(rotation_matrix(q));
    const double d = std::min((back.coeffs() - q.coeffs()).norm(), (back.coeffs() + q.coeffs()).norm());
    EXPECT_LT(d, 1e-12);
  }
}

TEST(Quaternion, RightJacobianMatchesFiniteDifference) {
  Rng rng(19);
  for (int k = 0; k < 50; ++k) {
    const Vec3 rv = rng.gaussian(0.8);
    // exp(rv + d) ~ exp(rv) exp(Jr d)
    const auto f = [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
      return quat_log(quat_mul(quat_exp(rv).conjugate(), quat_exp(rv + Vec3(d))));
    };
    const Eigen::MatrixXd fd = test::central_diff(f, Eigen::VectorXd::Zero(3));
    EXPECT_LT(test::rel_err(so3_right_jacobian(rv), fd), 1e-7);
    EXPECT_LT((so3_right_jacobian(rv) * so3_right_jacobian_inv(rv) - Mat3::Identity()).norm(), 1e-12);
  }
}

TEST(State, RetractZeroAndTranslation) {
  Rng rng(23);
  const RobotState x = test::random_state(rng);
  const RobotState same = retract(x, ErrorVector::Zero());
  EXPECT_EQ(same.p, x.p);
  EXPECT_EQ(same.q.coeffs(), x.q.coeffs());
  ErrorVector d = ErrorVector::Zero();
  d[0] = 1.0;
  const RobotState moved = retract(x, d);
  EXPECT_EQ(moved.p, x.p + Vec3(1, 0, 0));
  EXPECT_EQ(moved.q.coeffs(), x.q.coeffs());
  EXPECT_EQ(moved.v, x.v);
}

TEST(State, LocalInvertsRetract) {
  Rng rng(29);
  for (int k = 0; k < 50; ++k) {
    const RobotState x = test::random_state(rng);
    ErrorVector d;
    for (int i = 0; i < kErrorDim; ++i) d[i] = rng.normal(0.3);
    EXPECT_LT((local(x, retract(x, d)) - d).norm(), 1e-12);
  }
}

TEST(State, ErrorStateBlocksRoundTrip) {
  ErrorVector v;
  for (int i = 0; i < kErrorDim; ++i) v[i] = i;
  const ErrorState e = ErrorState::from_vector(v);
  EXPECT_EQ(e.dtheta, Vec3(6, 7, 8));
  EXPECT_EQ(e.dfeet[3], Vec3(18, 19, 20));
  EXPECT_EQ(e.dgyro_bias, Vec3(21, 22, 23));
  EXPECT_EQ(e.daccel_bias, Vec3(24, 25, 26));
  EXPECT_EQ(e.to_vector(), v);
}

TEST(Covariance, SymmetrizeIsIdempotent) {
  Rng rng(31);
  Eigen::MatrixXd m(6, 6);
  for (int i = 0; i < 36; ++i) m(i / 6, i % 6) = rng.normal();
  const Eigen::MatrixXd s = symmetrize(m);
  EXPECT_EQ(symmetrize(s), s);
  const auto c = condition_covariance(s, 1e-12);
  EXPECT_GE(min_eigenvalue(c.cov), 1e-12 * 0.999);
  EXPECT_EQ(condition_covariance(c.cov).cov, c.cov);
}

}  // namespace
}  // namespace dbkf
