#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dbkf/beta_kf.hpp"
#include "dbkf/filters.hpp"

namespace dbkf {

/// Estimator variants. IteratedEKF is the Gaussian MAP reference the beta
/// filter collapses to for vanishing beta.
enum class Variant { QEKF, UKF_OR, DualQEKF, BetaKF, DualBetaKF, IteratedEKF };

inline constexpr std::array<Variant, 6> kAllVariants = {
    Variant::QEKF,       Variant::UKF_OR,     Variant::DualQEKF,
    Variant::BetaKF,     Variant::DualBetaKF, Variant::IteratedEKF};

std::string_view variant_name(Variant v);
/// Accepts the names returned by variant_name. Throws ConfigError otherwise.
Variant parse_variant(std::string_view name);
bool is_dual(Variant v);
bool is_beta(Variant v);

struct EstimatorConfig {
  Variant variant = Variant::DualBetaKF;
  NoiseConfig noise = NoiseConfig::from_sigmas(NoiseSigmas{}, 1e-3);
  SolverSettings solver;
  UkfOrSettings ukf;
  ModelSettings model;
  double contact_threshold = 10.0;  // N
  double max_condition = 1e8;       // leg Jacobian, parameter update
  ParamCovariance initial_param_cov = ParamCovariance::Identity() * 1e-4;

  /// Throws ConfigError describing the first invalid field.
  void validate() const;
};

struct StepRecordDiagnostics {
  int iterations = 0;
  bool converged = true;
  LegMask contact{};
  LegMask rejected{};
  LegMask param_used{};
  ParamVector param_innovation = ParamVector::Zero();
  double weight = 0.0;           // beta filters: w(x) at the solution
  double min_eigenvalue = 0.0;   // smallest eigenvalue of the step's covariance before flooring
  double asymmetry = 0.0;
};

struct EstimateRecord {
  double t = 0.0;
  RobotState state;
  LegParams params;
  StepRecordDiagnostics diag;
};

struct EstimatorOutput {
  Variant variant = Variant::QEKF;
  std::vector<EstimateRecord> records;
};

/// P_{1|0} = F0 P0 F0^T + Q0.
StateCovariance initial_prior(const StateCovariance& p0, const StateMatrix& f0,
                              const StateCovariance& q0);

/// Default initial state covariance used by the command-line tool.
StateCovariance default_initial_covariance();

/// One estimator run: a parameter filter (dual variants) feeding a state filter.
class DualEstimator {
 public:
  /// Throws ConfigError for an invalid configuration or a P0 that is not SPD.
  /// `initial_contact` seeds touchdown detection.
  DualEstimator(const EstimatorConfig& config, const RobotState& x0, const LegParams& rho0,
                const StateCovariance& p0, double t0, const LegMask& initial_contact = {});

  /// Advances to `frame` using the IMU sample `u` recorded since the last
  /// frame. Throws SequencingError unless frame.t is later than the last time.
  EstimateRecord step(const SensorFrame& frame, const ControlInput& u);

  const EstimatorConfig& config() const { return config_; }
  const RobotState& state() const { return belief_.mean; }
  const LegParams& params() const { return params_.mean; }
  const ParamBelief& param_belief() const { return params_; }
  /// Current covariance handed to the next step (posterior for the Kalman
  /// variants, last objective prior for the beta variants).
  const StateCovariance& covariance() const { return belief_.cov; }
  double time() const { return t_; }
  EstimateRecord initial_record() const;

 private:
  EstimateRecord step_beta(const SensorFrame& frame, const ControlInput& u,
                           const LegMask& touchdown);

  EstimatorConfig config_;
  GaussianBelief belief_;
  ParamBelief params_;
  double t_ = 0.0;
  LegMask last_contact_{};
  bool first_step_ = true;
  // Beta variants: linearization kept for the Riccati recursion.
  MeasJacobian last_h_ = MeasJacobian::Zero();
  MeasCovariance last_sigma_ = MeasCovariance::Identity();
};

/// IMU input for the interval [previous.t, current.t].
ControlInput control_between(const SensorFrame& previous, const SensorFrame& current);

/// Folds step over `frames`; record 0 is the initial state at frames[0].t.
/// Errors are rethrown with the offending frame index in the message.
EstimatorOutput run(const EstimatorConfig& config, const std::vector<SensorFrame>& frames,
                    const RobotState& x0, const LegParams& rho0, const StateCovariance& p0);

}  // namespace dbkf
