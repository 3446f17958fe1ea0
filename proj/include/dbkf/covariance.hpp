#pragma once

#include <algorithm>
#include <limits>

#include <Eigen/Dense>

namespace dbkf {

template <typename Derived>
typename Derived::PlainObject symmetrize(const Eigen::MatrixBase<Derived>& m) {
  return (0.5 * (m + m.transpose())).eval();
}

template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  Eigen::SelfAdjointEigenSolver<Plain> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <typename Derived>
double asymmetry(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

/// Result of conditioning a covariance: the repaired matrix and the smallest
/// eigenvalue seen before any flooring.
template <typename Matrix>
struct ConditionedCovariance {
  Matrix cov;
  double min_eigenvalue_before = 0.0;
};

/// Symmetrizes and lifts every eigenvalue to at least `floor`. When the input
/// already satisfies the floor, the symmetrized input is returned unchanged.
template <typename Derived>
ConditionedCovariance<typename Derived::PlainObject> condition_covariance(
    const Eigen::MatrixBase<Derived>& m, double floor = 1e-12) {
  using Plain = typename Derived::PlainObject;
  Plain sym = symmetrize(m);
  Eigen::SelfAdjointEigenSolver<Plain> es(sym);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig >= floor) return {sym, min_eig};
  // Lift slightly past the floor so the reconstruction's round-off cannot drop it
  // below again; a second call is then a no-op.
  const double margin = 64.0 * std::numeric_limits<double>::epsilon() *
                        std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  auto vals = es.eigenvalues().cwiseMax(floor + margin).eval();
  Plain repaired = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
  return {symmetrize(repaired), min_eig};
}

}  // namespace dbkf
