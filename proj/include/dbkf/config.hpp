#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dbkf/estimator.hpp"
#include "dbkf/noise.hpp"
#include "dbkf/simulator.hpp"

namespace dbkf {

/// One estimator block of a run configuration, in user-facing units.
struct EstimatorSpec {
  std::string name;  // output label; defaults to the variant name
  Variant variant = Variant::DualBetaKF;
  NoiseSigmas noise;
  double beta = 1e-3;
  SolverSettings solver;
  double threshold = UkfOrSettings{}.threshold;
  GateMode gate = GateMode::PerLeg;
  UnscentedParams ut;
  double contact_threshold = 10.0;
  double inflation = 1e6;
  double touchdown_variance = 1e-4;
  double max_condition = 1e8;
  double initial_calf = kNominalCalfLength;
  double initial_param_std = 0.01;

  EstimatorConfig to_config() const;
  const std::string& label() const { return name; }
  friend bool operator==(const EstimatorSpec&, const EstimatorSpec&) = default;
};

struct RunConfig {
  std::optional<ScenarioConfig> scenario;  // exactly one of scenario / dataset
  std::optional<std::string> dataset;      // directory with sensors.csv and truth.csv
  std::vector<EstimatorSpec> estimators;
  std::string output = "out";
  std::uint64_t seed = 42;

  /// Throws ConfigError unless exactly one data source and at least one
  /// estimator are present and every block is valid.
  void validate() const;
  /// The scenario with the run seed applied.
  ScenarioConfig scenario_with_seed() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError naming the offending key and its line.
RunConfig parse_run_config(const std::string& yaml_text);
RunConfig load_run_config(const std::filesystem::path& path);
/// YAML text that parses back to an equal RunConfig.
std::string serialize_run_config(const RunConfig& config);

}  // namespace dbkf
