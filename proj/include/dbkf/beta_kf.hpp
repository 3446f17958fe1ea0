#pragma once

#include <cmath>
#include <vector>

#include "dbkf/covariance.hpp"
#include "dbkf/errors.hpp"
#include "dbkf/kinematics.hpp"
#include "dbkf/measurement.hpp"
#include "dbkf/process.hpp"
#include "dbkf/state.hpp"

namespace dbkf {

/// Scalar pieces of the beta-divergence measurement loss for an m-dimensional
/// Gaussian with covariance Sigma. Everything is kept in log form so that
/// tiny beta does not lose precision.
struct BetaLossTerms {
  double beta = 1e-3;
  int m = kMeasDim;
  double log_det_sigma = 0.0;

  /// (2 pi)^{-beta m / 2} det(Sigma)^{-beta / 2}
  double scale() const;
  /// Largest gradient weight, reached at zero residual: (beta + 1) * scale().
  double max_weight() const { return (beta + 1.0) * scale(); }
  /// Gradient weight at squared Mahalanobis residual r2.
  double weight(double r2) const { return max_weight() * std::exp(-0.5 * beta * r2); }
  /// l_h without the constant: -(beta + 1) / beta * scale * exp(-beta r2 / 2).
  double loss(double r2) const;
  /// loss(r2) - loss(0); nonnegative and accurate for any beta.
  double shifted_loss(double r2) const;
  /// Integral term (1 + beta)^{-m/2} (2 pi)^{-beta m/2} det(Sigma)^{-beta/2}.
  double constant() const;
};

/// Damped Gauss-Newton settings.
struct SolverSettings {
  int max_iterations = 50;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-10;
  double damping_init = 0.0;
  double damping_scale = 10.0;
  bool record_trace = false;

  /// Throws InvalidArgument unless every field is positive (damping_init may be 0).
  void validate() const;
  friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

struct SolverDiagnostics {
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  double weight = 0.0;      // w(x) at the returned state
  double final_loss = 0.0;  // shifted objective at the returned state
  std::vector<double> trace;  // shifted objective after each accepted step
};

template <typename State>
struct SolveResult {
  State x;
  SolverDiagnostics diag;
};

/// Levenberg-Marquardt style minimization. `Problem` provides
///   State start() const;
///   double loss(const State&) const;
///   void linearize(const State&, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;
///   State retract(const State&, const Eigen::VectorXd&) const;
///   double weight(const State&) const;
/// Steps are accepted only when the loss does not increase.
template <typename Problem>
auto minimize(const Problem& problem, const SolverSettings& settings)
    -> SolveResult<decltype(problem.start())> {
  settings.validate();
  using State = decltype(problem.start());
  SolveResult<State> out{problem.start(), {}};
  double f = problem.loss(out.x);
  double damping = settings.damping_init;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  problem.linearize(out.x, grad, hess);
  if (settings.record_trace) out.diag.trace.push_back(f);

  for (int it = 0; it < settings.max_iterations; ++it) {
    if (grad.norm() < settings.gradient_tolerance) {
      out.diag.converged = true;
      break;
    }
    out.diag.iterations = it + 1;
    bool accepted = false;
    bool tiny_step = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd system = hess;
      system.diagonal().array() += damping;
      const Eigen::VectorXd step = system.ldlt().solve(-grad);
      if (!step.allFinite()) throw NumericalError("solver produced a non-finite step");
      const State trial = problem.retract(out.x, step);
      const double f_trial = problem.loss(trial);
      if (f_trial <= f) {
        out.x = trial;
        f = f_trial;
        damping /= settings.damping_scale;
        accepted = true;
        tiny_step = step.norm() < settings.step_tolerance;
        break;
      }
      if (step.norm() < settings.step_tolerance) {
        tiny_step = true;
        break;
      }
      damping = damping > 0.0 ? damping * settings.damping_scale
                              : std::max(1e-9, 1e-6 * hess.diagonal().cwiseAbs().maxCoeff());
    }
    if (accepted) {
      problem.linearize(out.x, grad, hess);
      if (settings.record_trace) out.diag.trace.push_back(f);
    }
    if (tiny_step) {
      out.diag.converged = true;
      break;
    }
    if (!accepted) break;
  }
  out.diag.gradient_norm = grad.norm();
  out.diag.weight = problem.weight(out.x);
  out.diag.final_loss = f;
  return out;
}

/// The per-frame robust MAP objective over the full robot state: beta loss on
/// the leg-odometry residual plus a Gaussian prior in the tangent space.
class BetaObjective {
 public:
  BetaObjective(RobotState prior_mean, const StateCovariance& prior_cov, SensorFrame frame,
                LegParams params, RobotGeometry geometry, const MeasCovariance& sigma,
                double beta);

  const RobotState& prior_mean() const { return prior_mean_; }
  const StateCovariance& prior_cov() const { return prior_cov_; }
  const MeasCovariance& sigma() const { return sigma_; }
  const SensorFrame& frame() const { return frame_; }
  const LegParams& params() const { return params_; }
  const RobotGeometry& geometry() const { return geometry_; }
  const BetaLossTerms& terms() const { return terms_; }
  double beta() const { return terms_.beta; }

  MeasVector residual(const RobotState& x) const;
  double mahalanobis2(const MeasVector& h) const;
  /// 0.5 * |local(prior, x)|^2 in the prior metric.
  double prior_loss(const RobotState& x) const;

  // Problem interface for minimize().
  RobotState start() const { return prior_mean_; }
  double loss(const RobotState& x) const;
  void linearize(const RobotState& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;
  RobotState retract(const RobotState& x, const Eigen::VectorXd& step) const;
  double weight(const RobotState& x) const;

 private:
  RobotState prior_mean_;
  StateCovariance prior_cov_;
  Eigen::LLT<StateCovariance> prior_llt_;
  SensorFrame frame_;
  LegParams params_;
  RobotGeometry geometry_;
  MeasCovariance sigma_;
  Eigen::LLT<MeasCovariance> sigma_llt_;
  BetaLossTerms terms_;
};

/// Builds the objective, inflating Sigma on the rows of legs without contact.
BetaObjective make_beta_objective(const RobotState& prior_mean, const StateCovariance& prior_cov,
                                  const SensorFrame& frame, const LegParams& params,
                                  const RobotGeometry& geometry, const MeasCovariance& sigma,
                                  double beta, double inflation = 1e6);

/// Full loss l_h + C_beta + l_f.
double beta_loss(const BetaObjective& obj, const RobotState& x);
/// Loss with the constant and the minimum of l_h removed; same argmin.
double beta_loss_shifted(const BetaObjective& obj, const RobotState& x);
double beta_constant(const BetaObjective& obj);
double beta_weight(const BetaObjective& obj, const RobotState& x);

struct GradientHessian {
  ErrorVector gradient;
  StateCovariance hessian;
};

/// Exact gradient and the Gauss-Newton Hessian w H^T Sigma^-1 H + D^T P^-1 D.
GradientHessian beta_gradient_hessian(const BetaObjective& obj, const RobotState& x);

SolveResult<RobotState> solve(const BetaObjective& obj, const SolverSettings& settings = {});

/// Same objective on a vector state with an affine model h(x) = A x - y.
class LinearBetaObjective {
 public:
  LinearBetaObjective(Eigen::VectorXd prior_mean, const Eigen::MatrixXd& prior_cov,
                      Eigen::MatrixXd a, Eigen::VectorXd y, const Eigen::MatrixXd& sigma,
                      double beta);

  Eigen::VectorXd start() const { return prior_mean_; }
  double loss(const Eigen::VectorXd& x) const;
  void linearize(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;
  Eigen::VectorXd retract(const Eigen::VectorXd& x, const Eigen::VectorXd& step) const {
    return x + step;
  }
  double weight(const Eigen::VectorXd& x) const;
  const BetaLossTerms& terms() const { return terms_; }

 private:
  Eigen::VectorXd prior_mean_;
  Eigen::MatrixXd prior_info_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd sigma_info_;
  BetaLossTerms terms_;
};

/// P_next = Q + F P F^T - F P H^T (H P H^T + Sigma)^-1 H P F^T, symmetrized
/// and floored at 1e-12. Throws NumericalError when the inner matrix is singular.
StateCovariance riccati_prior(const StateCovariance& p, const StateMatrix& f,
                              const MeasJacobian& h, const StateCovariance& q,
                              const MeasCovariance& sigma,
                              double* min_eigenvalue_before = nullptr);

/// Dynamic-size variant of riccati_prior for small systems.
Eigen::MatrixXd riccati_prior(const Eigen::MatrixXd& p, const Eigen::MatrixXd& f,
                              const Eigen::MatrixXd& h, const Eigen::MatrixXd& q,
                              const Eigen::MatrixXd& sigma,
                              double* min_eigenvalue_before = nullptr);

/// P - P H^T (H P H^T + Sigma)^-1 H P, used for reporting the filtered covariance.
StateCovariance posterior_covariance(const StateCovariance& p, const MeasJacobian& h,
                                     const MeasCovariance& sigma);

}  // namespace dbkf
