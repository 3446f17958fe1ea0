#include "dbkf/filters.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dbkf/covariance.hpp"
#include "dbkf/errors.hpp"

namespace dbkf {

namespace {

constexpr double kCovarianceFloor = 1e-12;

template <typename M>
void finish_covariance(const M& raw, M& out, StepDiagnostics& diag) {
  diag.asymmetry = asymmetry(raw);
  auto conditioned = condition_covariance(raw, kCovarianceFloor);
  diag.min_eigenvalue = conditioned.min_eigenvalue_before;
  out = conditioned.cov;
}

/// Index list of the six residual rows owned by `leg`.
std::array<int, 6> leg_rows(int leg) {
  const int p = ix::meas_pos(leg), v = ix::meas_vel(leg);
  return {p, p + 1, p + 2, v, v + 1, v + 2};
}

}  // namespace

SigmaPointSet make_sigma_points(const Eigen::MatrixXd& cov, const UnscentedParams& params) {
  const int n = static_cast<int>(cov.rows());
  SigmaPointSet sp;
  sp.lambda = params.alpha * params.alpha * (n + params.kappa) - n;
  const double c = n + sp.lambda;

  const Eigen::MatrixXd sym = symmetrize(cov);
  Eigen::MatrixXd root;
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) {
    root = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-9 * scale) {
      throw NumericalError("sigma points: covariance is not positive semidefinite");
    }
    root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  const double spread = std::sqrt(c);
  sp.offsets = Eigen::MatrixXd::Zero(n, 2 * n + 1);
  sp.offsets.middleCols(1, n) = spread * root;
  sp.offsets.middleCols(n + 1, n) = -spread * root;
  sp.wm = Eigen::VectorXd::Constant(2 * n + 1, 0.5 / c);
  sp.wc = sp.wm;
  sp.wm[0] = sp.lambda / c;
  sp.wc[0] = sp.lambda / c + (1.0 - params.alpha * params.alpha + params.beta);
  return sp;
}

GaussianBelief ekf_predict(const GaussianBelief& belief, const ControlInput& u,
                           const NoiseConfig& noise) {
  u.validate();
  const StateMatrix f = process_jacobian(belief.mean, u, noise.gravity);
  GaussianBelief out;
  out.mean = propagate(belief.mean, u, noise.gravity);
  const StateCovariance q = world_process_covariance(noise.Q, rotation_matrix(belief.mean.q));
  out.cov = symmetrize(f * belief.cov * f.transpose() + q);
  return out;
}

void apply_touchdown(GaussianBelief& belief, const SensorFrame& frame, const LegParams& params,
                     const ModelSettings& model, const LegMask& touchdown) {
  bool any = false;
  for (bool b : touchdown) any = any || b;
  if (!any) return;
  reanchor_feet(belief.mean, belief.cov, frame, params, model.geometry, touchdown,
                model.touchdown_variance);
}

FilterStep qekf_update(const GaussianBelief& prior, const SensorFrame& frame,
                       const LegParams& params, const NoiseConfig& noise,
                       const ModelSettings& model) {
  const MeasCovariance sigma =
      inflate_measurement_covariance(noise.Sigma, contact_mask(frame), model.inflation);
  const MeasVector h = measure(prior.mean, frame, params, model.geometry);
  const MeasJacobian jac = measurement_jacobian(prior.mean, frame, params, model.geometry);
  const auto& p = prior.cov;

  const MeasCovariance s = symmetrize(jac * p * jac.transpose() + sigma);
  Eigen::LLT<MeasCovariance> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("QEKF: innovation covariance is singular");
  const Eigen::Matrix<double, kErrorDim, kMeasDim> gain =
      llt.solve(jac * p).transpose();

  FilterStep out;
  out.belief.mean = retract(prior.mean, ErrorVector(-gain * h));
  const StateMatrix ikh = StateMatrix::Identity() - gain * jac;
  const StateCovariance joseph =
      ikh * p * ikh.transpose() + gain * sigma * gain.transpose();
  finish_covariance(joseph, out.belief.cov, out.diag);
  out.diag.iterations = 1;
  return out;
}

FilterStep qekf_step(const GaussianBelief& belief, const ControlInput& u,
                     const SensorFrame& frame, const LegParams& params,
                     const NoiseConfig& noise, const ModelSettings& model,
                     const LegMask& touchdown) {
  GaussianBelief prior = ekf_predict(belief, u, noise);
  apply_touchdown(prior, frame, params, model, touchdown);
  return qekf_update(prior, frame, params, noise, model);
}

FilterStep iekf_update(const GaussianBelief& prior, const SensorFrame& frame,
                       const LegParams& params, const NoiseConfig& noise,
                       const ModelSettings& model, int max_iterations, double step_tolerance) {
  const MeasCovariance sigma =
      inflate_measurement_covariance(noise.Sigma, contact_mask(frame), model.inflation);
  const auto& p = prior.cov;

  FilterStep out;
  out.diag.converged = false;
  RobotState x = prior.mean;
  for (int it = 0; it < max_iterations; ++it) {
    const ErrorVector e = local(prior.mean, x);
    // d local(prior, x + d) / d d is identity except J_r^{-1} on orientation.
    StateMatrix d_inv = StateMatrix::Identity();
    d_inv.block<3, 3>(ix::kRot, ix::kRot) = so3_right_jacobian(e.segment<3>(ix::kRot));

    const MeasVector h = measure(x, frame, params, model.geometry);
    const MeasJacobian jac = measurement_jacobian(x, frame, params, model.geometry) * d_inv;
    const MeasCovariance s = symmetrize(jac * p * jac.transpose() + sigma);
    Eigen::LLT<MeasCovariance> llt(s);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("IEKF: innovation covariance is singular");
    }
    const MeasVector innovation = -(h - jac * e);
    const ErrorVector eta = p * jac.transpose() * llt.solve(innovation);
    const ErrorVector step = d_inv * (eta - e);
    x = retract(x, step);
    out.diag.iterations = it + 1;
    if (step.norm() < step_tolerance) {
      out.diag.converged = true;
      break;
    }
  }
  out.belief.mean = x;

  const MeasJacobian jac = measurement_jacobian(x, frame, params, model.geometry);
  const MeasCovariance s = symmetrize(jac * p * jac.transpose() + sigma);
  Eigen::LLT<MeasCovariance> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("IEKF: innovation covariance is singular");
  const Eigen::Matrix<double, kMeasDim, kErrorDim> hp = jac * p;
  const StateCovariance post = p - hp.transpose() * llt.solve(hp);
  finish_covariance(post, out.belief.cov, out.diag);
  return out;
}

FilterStep iekf_step(const GaussianBelief& belief, const ControlInput& u,
                     const SensorFrame& frame, const LegParams& params,
                     const NoiseConfig& noise, const ModelSettings& model,
                     const LegMask& touchdown, int max_iterations, double step_tolerance) {
  GaussianBelief prior = ekf_predict(belief, u, noise);
  apply_touchdown(prior, frame, params, model, touchdown);
  return iekf_update(prior, frame, params, noise, model, max_iterations, step_tolerance);
}

GaussianBelief ukf_predict(const GaussianBelief& belief, const ControlInput& u,
                           const NoiseConfig& noise, const UnscentedParams& ut) {
  u.validate();
  const SigmaPointSet sp = make_sigma_points(belief.cov, ut);
  const int count = sp.count();
  std::vector<RobotState> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i) {
    points.push_back(
        propagate(retract(belief.mean, ErrorVector(sp.offsets.col(i))), u, noise.gravity));
  }

  RobotState mean = points[0];
  std::vector<ErrorVector> dev(count);
  for (int iter = 0; iter < 50; ++iter) {
    ErrorVector avg = ErrorVector::Zero();
    for (int i = 0; i < count; ++i) {
      dev[i] = local(mean, points[i]);
      avg += sp.wm[i] * dev[i];
    }
    mean = retract(mean, avg);
    if (avg.norm() < 1e-12) break;
  }
  StateCovariance cov = StateCovariance::Zero();
  for (int i = 0; i < count; ++i) {
    dev[i] = local(mean, points[i]);
    cov += sp.wc[i] * dev[i] * dev[i].transpose();
  }
  cov += world_process_covariance(noise.Q, rotation_matrix(belief.mean.q));
  return {mean, symmetrize(cov)};
}

FilterStep ukf_or_update(const GaussianBelief& prior, const SensorFrame& frame,
                         const LegParams& params, const NoiseConfig& noise,
                         const ModelSettings& model, const UkfOrSettings& settings) {
  if (!(settings.threshold >= 0.0)) throw InvalidArgument("UKF-OR threshold must be >= 0");
  const SigmaPointSet sp = make_sigma_points(prior.cov, settings.ut);
  const int count = sp.count();
  std::vector<MeasVector> z(count);
  MeasVector z_mean = MeasVector::Zero();
  for (int i = 0; i < count; ++i) {
    z[i] = measure(retract(prior.mean, ErrorVector(sp.offsets.col(i))), frame, params,
                   model.geometry);
    z_mean += sp.wm[i] * z[i];
  }
  MeasCovariance s0 = MeasCovariance::Zero();
  Eigen::Matrix<double, kErrorDim, kMeasDim> cross = Eigen::Matrix<double, kErrorDim, kMeasDim>::Zero();
  for (int i = 0; i < count; ++i) {
    const MeasVector dz = z[i] - z_mean;
    s0 += sp.wc[i] * dz * dz.transpose();
    cross += sp.wc[i] * sp.offsets.col(i) * dz.transpose();
  }
  const MeasVector innovation = -z_mean;
  const LegMask contact = contact_mask(frame);

  FilterStep out;
  const MeasCovariance s_gate =
      s0 + inflate_measurement_covariance(noise.Sigma, contact, model.inflation);
  if (settings.gate == GateMode::PerLeg) {
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (!contact[leg]) continue;
      const auto rows = leg_rows(leg);
      Eigen::Matrix<double, 6, 6> s_leg;
      Eigen::Matrix<double, 6, 1> nu;
      for (int a = 0; a < 6; ++a) {
        nu[a] = innovation[rows[a]];
        for (int b = 0; b < 6; ++b) s_leg(a, b) = s_gate(rows[a], rows[b]);
      }
      const double d2 = nu.dot(s_leg.ldlt().solve(nu));
      out.diag.rejected[leg] = d2 > settings.threshold;
    }
  } else {
    std::vector<int> rows;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (!contact[leg]) continue;
      for (int r : leg_rows(leg)) rows.push_back(r);
    }
    if (!rows.empty()) {
      const int m = static_cast<int>(rows.size());
      Eigen::MatrixXd s_sub(m, m);
      Eigen::VectorXd nu(m);
      for (int a = 0; a < m; ++a) {
        nu[a] = innovation[rows[a]];
        for (int b = 0; b < m; ++b) s_sub(a, b) = s_gate(rows[a], rows[b]);
      }
      const bool reject = nu.dot(s_sub.ldlt().solve(nu)) > settings.threshold;
      for (int leg = 0; leg < kNumLegs; ++leg) out.diag.rejected[leg] = contact[leg] && reject;
    }
  }

  LegMask usable{};
  for (int leg = 0; leg < kNumLegs; ++leg) usable[leg] = contact[leg] && !out.diag.rejected[leg];
  if (std::none_of(usable.begin(), usable.end(), [](bool u) { return u; })) {
    // Nothing left to fuse: predict-only step.
    out.belief.mean = prior.mean;
    finish_covariance(prior.cov, out.belief.cov, out.diag);
    return out;
  }
  const MeasCovariance s =
      symmetrize(s0 + inflate_measurement_covariance(noise.Sigma, usable, model.inflation));
  Eigen::LLT<MeasCovariance> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("UKF-OR: innovation covariance is singular");
  const Eigen::Matrix<double, kErrorDim, kMeasDim> gain = llt.solve(cross.transpose()).transpose();

  out.belief.mean = retract(prior.mean, ErrorVector(gain * innovation));
  const StateCovariance post = prior.cov - gain * s * gain.transpose();
  finish_covariance(post, out.belief.cov, out.diag);
  out.diag.iterations = 1;
  return out;
}

FilterStep ukf_or_step(const GaussianBelief& belief, const ControlInput& u,
                       const SensorFrame& frame, const LegParams& params,
                       const NoiseConfig& noise, const ModelSettings& model,
                       const UkfOrSettings& settings, const LegMask& touchdown) {
  GaussianBelief prior = ukf_predict(belief, u, noise, settings.ut);
  apply_touchdown(prior, frame, params, model, touchdown);
  return ukf_or_update(prior, frame, params, noise, model, settings);
}

ParamStep ukf_param_step(const ParamBelief& belief, const SensorFrame& frame,
                         const NoiseConfig& noise, const RobotGeometry& geometry,
                         const UnscentedParams& ut, double max_condition) {
  ParamStep out;
  out.belief.mean = belief.mean;
  out.belief.cov = belief.cov + noise.Xi;

  const SigmaPointSet sp = make_sigma_points(out.belief.cov, ut);
  const int count = sp.count();

  std::vector<int> legs;
  std::vector<Eigen::VectorXd> predicted;  // per active leg, one value per sigma point
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const LegReading& r = frame.legs[leg];
    if (!r.contact) continue;
    Eigen::VectorXd values(count);
    bool ok = true;
    for (int j = 0; j < count && ok; ++j) {
      const double lc = out.belief.mean[leg] + sp.offsets(leg, j);
      if (!(lc > 0.0)) {
        ok = false;
        break;
      }
      try {
        values[j] = statics_normal_force(r.angles, geometry.legs[leg], lc, r.torques, max_condition);
      } catch (const SingularConfiguration&) {
        ok = false;
      }
    }
    if (!ok) continue;
    legs.push_back(leg);
    predicted.push_back(values);
    out.diag.used[leg] = true;
  }
  if (legs.empty()) return out;

  const int m = static_cast<int>(legs.size());
  Eigen::MatrixXd zs(m, count);
  Eigen::VectorXd measured(m);
  Eigen::MatrixXd noise_sub(m, m);
  for (int a = 0; a < m; ++a) {
    zs.row(a) = predicted[a].transpose();
    measured[a] = frame.legs[legs[a]].normal_force;
    for (int b = 0; b < m; ++b) noise_sub(a, b) = noise.Z(legs[a], legs[b]);
  }
  const Eigen::VectorXd z_mean = zs * sp.wm;
  Eigen::MatrixXd s = noise_sub;
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(kNumLegs, m);
  for (int j = 0; j < count; ++j) {
    const Eigen::VectorXd dz = zs.col(j) - z_mean;
    s += sp.wc[j] * dz * dz.transpose();
    cross += sp.wc[j] * sp.offsets.col(j) * dz.transpose();
  }
  s = symmetrize(s);
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("parameter UKF: innovation covariance is singular");
  }
  const Eigen::MatrixXd gain = llt.solve(cross.transpose()).transpose();
  const Eigen::VectorXd innovation = measured - z_mean;
  for (int a = 0; a < m; ++a) out.diag.innovation[legs[a]] = innovation[a];

  out.belief.mean.calf += gain * innovation;
  const ParamCovariance post = out.belief.cov - gain * s * gain.transpose();
  out.belief.cov = condition_covariance(post, kCovarianceFloor).cov;
  return out;
}

}  // namespace dbkf
