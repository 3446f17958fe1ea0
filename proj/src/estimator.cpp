#include "dbkf/estimator.hpp"

#include <cmath>
#include <string>

namespace dbkf {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::QEKF: return "QEKF";
    case Variant::UKF_OR: return "UKF-OR";
    case Variant::DualQEKF: return "DualQEKF";
    case Variant::BetaKF: return "BetaKF";
    case Variant::DualBetaKF: return "DualBetaKF";
    case Variant::IteratedEKF: return "IEKF";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  throw ConfigError("unknown estimator variant '" + std::string(name) + "'");
}

bool is_dual(Variant v) { return v == Variant::DualQEKF || v == Variant::DualBetaKF; }
bool is_beta(Variant v) { return v == Variant::BetaKF || v == Variant::DualBetaKF; }

void EstimatorConfig::validate() const {
  try {
    noise.validate();
    solver.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (variant == Variant::UKF_OR && !(ukf.threshold > 0.0)) {
    throw ConfigError("UKF-OR requires a positive outlier threshold");
  }
  if (!(ukf.ut.alpha > 0.0) || !(ukf.ut.alpha <= 1.0) || ukf.ut.kappa < 0.0) {
    throw ConfigError("unscented parameters need 0 < alpha <= 1 and kappa >= 0");
  }
  if (!(contact_threshold >= 0.0)) throw ConfigError("contact threshold must be >= 0");
  if (!(model.inflation >= 1.0)) throw ConfigError("inflation factor must be >= 1");
  if (!(model.touchdown_variance >= 0.0)) throw ConfigError("touchdown variance must be >= 0");
  if (!(max_condition > 1.0)) throw ConfigError("max condition number must exceed 1");
  if (min_eigenvalue(initial_param_cov) < 0.0 || asymmetry(initial_param_cov) > 0.0) {
    throw ConfigError("initial parameter covariance must be symmetric PSD");
  }
  try {
    model.geometry.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

StateCovariance initial_prior(const StateCovariance& p0, const StateMatrix& f0,
                              const StateCovariance& q0) {
  return symmetrize(f0 * p0 * f0.transpose() + q0);
}

StateCovariance default_initial_covariance() {
  ErrorVector d;
  d.segment<3>(ix::kPos).setConstant(1e-6);
  d.segment<3>(ix::kVel).setConstant(1e-4);
  d.segment<3>(ix::kRot).setConstant(1e-6);
  for (int i = 0; i < kNumLegs; ++i) d.segment<3>(ix::foot(i)).setConstant(1e-4);
  d.segment<3>(ix::kGyroBias).setConstant(1e-8);
  d.segment<3>(ix::kAccelBias).setConstant(1e-4);
  return d.asDiagonal();
}

DualEstimator::DualEstimator(const EstimatorConfig& config, const RobotState& x0,
                             const LegParams& rho0, const StateCovariance& p0, double t0,
                             const LegMask& initial_contact)
    : config_(config), t_(t0), last_contact_(initial_contact) {
  config_.validate();
  Eigen::LLT<StateCovariance> llt(p0);
  if (asymmetry(p0) > 1e-12 || llt.info() != Eigen::Success) {
    throw ConfigError("initial covariance P0 must be symmetric positive definite");
  }
  try {
    rho0.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  belief_ = {x0, p0};
  params_.mean = rho0;
  params_.cov = config_.initial_param_cov;
}

EstimateRecord DualEstimator::initial_record() const {
  EstimateRecord r;
  r.t = t_;
  r.state = belief_.mean;
  r.params = params_.mean;
  r.diag.contact = last_contact_;
  r.diag.min_eigenvalue = min_eigenvalue(belief_.cov);
  return r;
}

EstimateRecord DualEstimator::step(const SensorFrame& raw, const ControlInput& u) {
  if (!(raw.t > t_)) {
    throw SequencingError("frame at t=" + std::to_string(raw.t) +
                          " does not follow t=" + std::to_string(t_));
  }
  SensorFrame frame = raw;
  const LegMask contact = contact_from_force(frame, config_.contact_threshold);
  for (int i = 0; i < kNumLegs; ++i) frame.legs[i].contact = contact[i];
  LegMask touchdown{};
  for (int i = 0; i < kNumLegs; ++i) touchdown[i] = contact[i] && !last_contact_[i];

  EstimateRecord rec;
  if (is_dual(config_.variant)) {
    // The parameter filter sees only the sensor frame.
    const ParamStep ps = ukf_param_step(params_, frame, config_.noise, config_.model.geometry,
                                        config_.ukf.ut, config_.max_condition);
    params_ = ps.belief;
    rec.diag.param_used = ps.diag.used;
    rec.diag.param_innovation = ps.diag.innovation;
  }

  if (is_beta(config_.variant)) {
    const EstimateRecord beta_rec = step_beta(frame, u, touchdown);
    rec.state = beta_rec.state;
    rec.diag.iterations = beta_rec.diag.iterations;
    rec.diag.converged = beta_rec.diag.converged;
    rec.diag.weight = beta_rec.diag.weight;
    rec.diag.min_eigenvalue = beta_rec.diag.min_eigenvalue;
    rec.diag.asymmetry = beta_rec.diag.asymmetry;
  } else {
    FilterStep fs;
    switch (config_.variant) {
      case Variant::QEKF:
      case Variant::DualQEKF:
        fs = qekf_step(belief_, u, frame, params_.mean, config_.noise, config_.model, touchdown);
        break;
      case Variant::IteratedEKF:
        fs = iekf_step(belief_, u, frame, params_.mean, config_.noise, config_.model, touchdown,
                       config_.solver.max_iterations, config_.solver.step_tolerance);
        break;
      case Variant::UKF_OR:
        fs = ukf_or_step(belief_, u, frame, params_.mean, config_.noise, config_.model,
                         config_.ukf, touchdown);
        break;
      default:
        break;
    }
    belief_ = fs.belief;
    rec.state = fs.belief.mean;
    rec.diag.iterations = fs.diag.iterations;
    rec.diag.converged = fs.diag.converged;
    rec.diag.rejected = fs.diag.rejected;
    rec.diag.min_eigenvalue = fs.diag.min_eigenvalue;
    rec.diag.asymmetry = fs.diag.asymmetry;
  }

  first_step_ = false;
  last_contact_ = contact;
  t_ = frame.t;
  rec.t = frame.t;
  rec.params = params_.mean;
  rec.diag.contact = contact;
  return rec;
}

EstimateRecord DualEstimator::step_beta(const SensorFrame& frame, const ControlInput& u,
                                        const LegMask& touchdown) {
  const NoiseConfig& noise = config_.noise;
  const StateMatrix f = process_jacobian(belief_.mean, u, noise.gravity);
  const StateCovariance q =
      world_process_covariance(noise.Q, rotation_matrix(belief_.mean.q));

  EstimateRecord rec;
  GaussianBelief prior;
  prior.mean = propagate(belief_.mean, u, noise.gravity);
  if (first_step_) {
    prior.cov = initial_prior(belief_.cov, f, q);
    rec.diag.min_eigenvalue = min_eigenvalue(prior.cov);
  } else {
    prior.cov = riccati_prior(belief_.cov, f, last_h_, q, last_sigma_, &rec.diag.min_eigenvalue);
  }
  apply_touchdown(prior, frame, params_.mean, config_.model, touchdown);

  const MeasCovariance sigma =
      inflate_measurement_covariance(noise.Sigma, contact_mask(frame), config_.model.inflation);
  const BetaObjective obj(prior.mean, prior.cov, frame, params_.mean, config_.model.geometry,
                          sigma, noise.beta);
  const SolveResult<RobotState> sol = solve(obj, config_.solver);

  belief_.mean = sol.x;
  belief_.cov = prior.cov;
  last_h_ = measurement_jacobian(sol.x, frame, params_.mean, config_.model.geometry);
  last_sigma_ = sigma;

  rec.state = sol.x;
  rec.diag.iterations = sol.diag.iterations;
  rec.diag.converged = sol.diag.converged;
  rec.diag.weight = sol.diag.weight;
  return rec;
}

ControlInput control_between(const SensorFrame& previous, const SensorFrame& current) {
  ControlInput u;
  u.accel = previous.accel;
  u.gyro = previous.gyro;
  u.dt = current.t - previous.t;
  return u;
}

namespace {

[[noreturn]] void rethrow_with_index(std::size_t index) {
  const std::string prefix = "frame " + std::to_string(index) + ": ";
  try {
    throw;
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const SequencingError& e) {
    throw SequencingError(prefix + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

}  // namespace

EstimatorOutput run(const EstimatorConfig& config, const std::vector<SensorFrame>& frames,
                    const RobotState& x0, const LegParams& rho0, const StateCovariance& p0) {
  EstimatorOutput out;
  out.variant = config.variant;
  if (frames.empty()) return out;
  DualEstimator est(config, x0, rho0, p0, frames.front().t,
                    contact_from_force(frames.front(), config.contact_threshold));
  out.records.reserve(frames.size());
  out.records.push_back(est.initial_record());
  for (std::size_t k = 1; k < frames.size(); ++k) {
    try {
      out.records.push_back(est.step(frames[k], control_between(frames[k - 1], frames[k])));
    } catch (const Error&) {
      rethrow_with_index(k);
    }
  }
  return out;
}

}  // namespace dbkf
