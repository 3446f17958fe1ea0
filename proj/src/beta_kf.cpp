#include "dbkf/beta_kf.hpp"

#include <cmath>

#include "dbkf/noise.hpp"

namespace dbkf {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

template <typename M>
double log_det_spd(const Eigen::LLT<M>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

StateMatrix prior_chart_jacobian(const ErrorVector& e) {
  StateMatrix d = StateMatrix::Identity();
  d.block<3, 3>(ix::kRot, ix::kRot) = so3_right_jacobian_inv(e.segment<3>(ix::kRot));
  return d;
}

}  // namespace

double BetaLossTerms::scale() const {
  return std::exp(-0.5 * beta * (m * kLog2Pi + log_det_sigma));
}

double BetaLossTerms::loss(double r2) const {
  return -max_weight() / beta * std::exp(-0.5 * beta * r2);
}

double BetaLossTerms::shifted_loss(double r2) const {
  return max_weight() * -std::expm1(-0.5 * beta * r2) / beta;
}

double BetaLossTerms::constant() const {
  return std::exp(-0.5 * m * std::log1p(beta)) * scale();
}

void SolverSettings::validate() const {
  if (max_iterations <= 0 || !(gradient_tolerance > 0.0) || !(step_tolerance > 0.0) ||
      !(damping_init >= 0.0) || !(damping_scale > 1.0)) {
    throw InvalidArgument("solver settings must be positive (damping_scale > 1)");
  }
}

BetaObjective::BetaObjective(RobotState prior_mean, const StateCovariance& prior_cov,
                             SensorFrame frame, LegParams params, RobotGeometry geometry,
                             const MeasCovariance& sigma, double beta)
    : prior_mean_(std::move(prior_mean)),
      prior_cov_(symmetrize(prior_cov)),
      prior_llt_(prior_cov_),
      frame_(std::move(frame)),
      params_(std::move(params)),
      geometry_(std::move(geometry)),
      sigma_(symmetrize(sigma)),
      sigma_llt_(sigma_) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  if (prior_llt_.info() != Eigen::Success) {
    throw NumericalError("beta objective: prior covariance is not positive definite");
  }
  if (sigma_llt_.info() != Eigen::Success) {
    throw NumericalError("beta objective: measurement covariance is not positive definite");
  }
  terms_.beta = beta;
  terms_.m = kMeasDim;
  terms_.log_det_sigma = log_det_spd(sigma_llt_);
}

MeasVector BetaObjective::residual(const RobotState& x) const {
  return measure(x, frame_, params_, geometry_);
}

double BetaObjective::mahalanobis2(const MeasVector& h) const {
  return h.dot(sigma_llt_.solve(h));
}

double BetaObjective::prior_loss(const RobotState& x) const {
  const ErrorVector e = local(prior_mean_, x);
  return 0.5 * e.dot(prior_llt_.solve(e));
}

double BetaObjective::loss(const RobotState& x) const {
  return terms_.shifted_loss(mahalanobis2(residual(x))) + prior_loss(x);
}

void BetaObjective::linearize(const RobotState& x, Eigen::VectorXd& grad,
                              Eigen::MatrixXd& hess) const {
  const GradientHessian gh = beta_gradient_hessian(*this, x);
  grad = gh.gradient;
  hess = gh.hessian;
}

RobotState BetaObjective::retract(const RobotState& x, const Eigen::VectorXd& step) const {
  return dbkf::retract(x, ErrorVector(step));
}

double BetaObjective::weight(const RobotState& x) const {
  return terms_.weight(mahalanobis2(residual(x)));
}

BetaObjective make_beta_objective(const RobotState& prior_mean, const StateCovariance& prior_cov,
                                  const SensorFrame& frame, const LegParams& params,
                                  const RobotGeometry& geometry, const MeasCovariance& sigma,
                                  double beta, double inflation) {
  return BetaObjective(prior_mean, prior_cov, frame, params, geometry,
                       inflate_measurement_covariance(sigma, contact_mask(frame), inflation),
                       beta);
}

double beta_loss(const BetaObjective& obj, const RobotState& x) {
  const double r2 = obj.mahalanobis2(obj.residual(x));
  return obj.terms().loss(r2) + obj.terms().constant() + obj.prior_loss(x);
}

double beta_loss_shifted(const BetaObjective& obj, const RobotState& x) { return obj.loss(x); }

double beta_constant(const BetaObjective& obj) { return obj.terms().constant(); }

double beta_weight(const BetaObjective& obj, const RobotState& x) { return obj.weight(x); }

GradientHessian beta_gradient_hessian(const BetaObjective& obj, const RobotState& x) {
  const MeasVector h = obj.residual(x);
  const MeasJacobian jac = measurement_jacobian(x, obj.frame(), obj.params(), obj.geometry());
  Eigen::LLT<MeasCovariance> sigma_llt(obj.sigma());
  const MeasVector sinv_h = sigma_llt.solve(h);
  const double w = obj.terms().weight(h.dot(sinv_h));

  const ErrorVector e = local(obj.prior_mean(), x);
  const StateMatrix d = prior_chart_jacobian(e);
  Eigen::LLT<StateCovariance> prior_llt(obj.prior_cov());
  const ErrorVector pinv_e = prior_llt.solve(e);
  const StateMatrix pinv_d = prior_llt.solve(d);

  GradientHessian out;
  out.gradient = w * jac.transpose() * sinv_h + d.transpose() * pinv_e;
  out.hessian = w * jac.transpose() * sigma_llt.solve(jac) + d.transpose() * pinv_d;
  out.hessian = symmetrize(out.hessian);
  return out;
}

SolveResult<RobotState> solve(const BetaObjective& obj, const SolverSettings& settings) {
  return minimize(obj, settings);
}

LinearBetaObjective::LinearBetaObjective(Eigen::VectorXd prior_mean,
                                         const Eigen::MatrixXd& prior_cov, Eigen::MatrixXd a,
                                         Eigen::VectorXd y, const Eigen::MatrixXd& sigma,
                                         double beta)
    : prior_mean_(std::move(prior_mean)), a_(std::move(a)), y_(std::move(y)) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  const auto n = prior_mean_.size();
  const auto m = y_.size();
  if (prior_cov.rows() != n || prior_cov.cols() != n || a_.rows() != m || a_.cols() != n ||
      sigma.rows() != m || sigma.cols() != m) {
    throw InvalidArgument("linear beta objective: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> p_llt(symmetrize(prior_cov));
  Eigen::LLT<Eigen::MatrixXd> s_llt(symmetrize(sigma));
  if (p_llt.info() != Eigen::Success || s_llt.info() != Eigen::Success) {
    throw NumericalError("linear beta objective: covariance is not positive definite");
  }
  prior_info_ = p_llt.solve(Eigen::MatrixXd::Identity(n, n));
  sigma_info_ = s_llt.solve(Eigen::MatrixXd::Identity(m, m));
  terms_.beta = beta;
  terms_.m = static_cast<int>(m);
  terms_.log_det_sigma = log_det_spd(s_llt);
}

double LinearBetaObjective::loss(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd r = a_ * x - y_;
  const Eigen::VectorXd e = x - prior_mean_;
  return terms_.shifted_loss(r.dot(sigma_info_ * r)) + 0.5 * e.dot(prior_info_ * e);
}

void LinearBetaObjective::linearize(const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                                    Eigen::MatrixXd& hess) const {
  const Eigen::VectorXd r = a_ * x - y_;
  const double w = terms_.weight(r.dot(sigma_info_ * r));
  grad = w * a_.transpose() * sigma_info_ * r + prior_info_ * (x - prior_mean_);
  hess = w * a_.transpose() * sigma_info_ * a_ + prior_info_;
}

double LinearBetaObjective::weight(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd r = a_ * x - y_;
  return terms_.weight(r.dot(sigma_info_ * r));
}

namespace {

template <typename PMat, typename FMat, typename HMat, typename SMat>
PMat riccati_impl(const PMat& p, const FMat& f, const HMat& h, const PMat& q, const SMat& sigma,
                  double* min_eigenvalue_before) {
  const SMat s = symmetrize(h * p * h.transpose() + sigma);
  Eigen::LLT<SMat> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Riccati recursion: innovation covariance is singular");
  }
  const auto fp = (f * p).eval();
  const auto hpft = (h * fp.transpose()).eval();
  const PMat raw = q + fp * f.transpose() - hpft.transpose() * llt.solve(hpft);
  auto conditioned = condition_covariance(raw, 1e-12);
  if (min_eigenvalue_before) *min_eigenvalue_before = conditioned.min_eigenvalue_before;
  return conditioned.cov;
}

}  // namespace

StateCovariance riccati_prior(const StateCovariance& p, const StateMatrix& f,
                              const MeasJacobian& h, const StateCovariance& q,
                              const MeasCovariance& sigma, double* min_eigenvalue_before) {
  return riccati_impl(p, f, h, q, sigma, min_eigenvalue_before);
}

Eigen::MatrixXd riccati_prior(const Eigen::MatrixXd& p, const Eigen::MatrixXd& f,
                              const Eigen::MatrixXd& h, const Eigen::MatrixXd& q,
                              const Eigen::MatrixXd& sigma, double* min_eigenvalue_before) {
  const auto n = p.rows();
  if (p.cols() != n || f.rows() != n || f.cols() != n || h.cols() != n || q.rows() != n ||
      q.cols() != n || sigma.rows() != h.rows() || sigma.cols() != h.rows()) {
    throw InvalidArgument("riccati_prior: dimension mismatch");
  }
  return riccati_impl(p, f, h, q, sigma, min_eigenvalue_before);
}

StateCovariance posterior_covariance(const StateCovariance& p, const MeasJacobian& h,
                                     const MeasCovariance& sigma) {
  const MeasCovariance s = symmetrize(h * p * h.transpose() + sigma);
  Eigen::LLT<MeasCovariance> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("posterior covariance: innovation covariance is singular");
  }
  const Eigen::Matrix<double, kMeasDim, kErrorDim> hp = h * p;
  return condition_covariance(p - hp.transpose() * llt.solve(hp), 1e-12).cov;
}

}  // namespace dbkf
