#pragma once

#include <limits>

#include "dbkf/kinematics.hpp"
#include "dbkf/measurement.hpp"
#include "dbkf/noise.hpp"
#include "dbkf/process.hpp"
#include "dbkf/state.hpp"

namespace dbkf {

struct GaussianBelief {
  RobotState mean;
  StateCovariance cov = StateCovariance::Identity();
};

struct ParamBelief {
  LegParams mean;
  ParamCovariance cov = ParamCovariance::Identity() * 1e-4;
};

/// Scaled unscented transform parameters (alpha, kappa, beta).
struct UnscentedParams {
  double alpha = 1e-3;
  double kappa = 0.0;
  double beta = 2.0;

  friend bool operator==(const UnscentedParams&, const UnscentedParams&) = default;
};

/// 2n+1 tangent offsets around a mean with their mean and covariance weights.
struct SigmaPointSet {
  Eigen::MatrixXd offsets;  // n x (2n+1); column 0 is the mean
  Eigen::VectorXd wm;
  Eigen::VectorXd wc;
  double lambda = 0.0;

  int count() const { return static_cast<int>(offsets.cols()); }
};

/// Throws NumericalError for a covariance that is not positive semidefinite.
SigmaPointSet make_sigma_points(const Eigen::MatrixXd& cov, const UnscentedParams& params);

/// Settings shared by every state filter.
struct ModelSettings {
  RobotGeometry geometry = RobotGeometry::go2();
  /// Variance multiplier for the measurement rows of legs not in contact.
  double inflation = 1e6;
  /// Extra variance (m^2) on a foot re-anchored at touchdown.
  double touchdown_variance = 1e-4;
};

enum class GateMode { PerLeg, Full };

struct UkfOrSettings {
  /// Chi-square gate on the innovation Mahalanobis distance.
  double threshold = 16.811893829770927;  // chi2_6(0.99)
  GateMode gate = GateMode::PerLeg;
  UnscentedParams ut;
};

struct StepDiagnostics {
  int iterations = 0;
  bool converged = true;
  LegMask rejected{};
  double min_eigenvalue = 0.0;  // before flooring
  double asymmetry = 0.0;       // before symmetrization
};

struct FilterStep {
  GaussianBelief belief;
  StepDiagnostics diag;
};

/// EKF predict: propagate the mean, P <- F P F^T + Q (foot noise in world frame).
GaussianBelief ekf_predict(const GaussianBelief& belief, const ControlInput& u,
                           const NoiseConfig& noise);

/// Re-anchors the feet flagged in `touchdown` at their kinematic positions.
void apply_touchdown(GaussianBelief& belief, const SensorFrame& frame, const LegParams& params,
                     const ModelSettings& model, const LegMask& touchdown);

/// Quaternion EKF: predict, optional touchdown re-anchoring, Joseph-form update
/// against the zero pseudo-measurement. Contact flags are read from `frame`.
FilterStep qekf_step(const GaussianBelief& belief, const ControlInput& u,
                     const SensorFrame& frame, const LegParams& params,
                     const NoiseConfig& noise, const ModelSettings& model,
                     const LegMask& touchdown = {});

/// Measurement update of the QEKF alone.
FilterStep qekf_update(const GaussianBelief& prior, const SensorFrame& frame,
                       const LegParams& params, const NoiseConfig& noise,
                       const ModelSettings& model);

/// Iterated EKF update: Gauss-Newton on the MAP objective in Kalman-gain form.
/// The covariance update uses the Jacobian at the final iterate.
FilterStep iekf_update(const GaussianBelief& prior, const SensorFrame& frame,
                       const LegParams& params, const NoiseConfig& noise,
                       const ModelSettings& model, int max_iterations = 50,
                       double step_tolerance = 1e-12);

FilterStep iekf_step(const GaussianBelief& belief, const ControlInput& u,
                     const SensorFrame& frame, const LegParams& params,
                     const NoiseConfig& noise, const ModelSettings& model,
                     const LegMask& touchdown = {}, int max_iterations = 50,
                     double step_tolerance = 1e-12);

/// Unscented predict with sigma points drawn in the tangent space and the mean
/// recovered by iterative averaging on the manifold.
GaussianBelief ukf_predict(const GaussianBelief& belief, const ControlInput& u,
                           const NoiseConfig& noise, const UnscentedParams& ut);

/// Unscented update with Mahalanobis gating; gated legs are covariance inflated.
FilterStep ukf_or_update(const GaussianBelief& prior, const SensorFrame& frame,
                         const LegParams& params, const NoiseConfig& noise,
                         const ModelSettings& model, const UkfOrSettings& settings);

FilterStep ukf_or_step(const GaussianBelief& belief, const ControlInput& u,
                       const SensorFrame& frame, const LegParams& params,
                       const NoiseConfig& noise, const ModelSettings& model,
                       const UkfOrSettings& settings, const LegMask& touchdown = {});

struct ParamStepDiagnostics {
  LegMask used{};
  ParamVector innovation = ParamVector::Zero();
};

struct ParamStep {
  ParamBelief belief;
  ParamStepDiagnostics diag;
};

/// Statics-based calf-length UKF: random-walk predict (adds Xi), then an update
/// on the normal forces of contact legs whose Jacobian is well conditioned.
/// Takes no state estimate by construction.
ParamStep ukf_param_step(const ParamBelief& belief, const SensorFrame& frame,
                         const NoiseConfig& noise, const RobotGeometry& geometry,
                         const UnscentedParams& ut = {}, double max_condition = 1e8);

}  // namespace dbkf
