// dbkf command-line tool: simulate, estimate, evaluate.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dbkf/config.hpp"
#include "dbkf/errors.hpp"
#include "dbkf/io.hpp"
#include "dbkf/metrics.hpp"

namespace fs = std::filesystem;
using namespace dbkf;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("dbkf");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("DBKF_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory: " + dir.string());
}

void write_dataset(const fs::path& dir, const Simulation& sim) {
  ensure_dir(dir);
  write_text(dir / "sensors.csv", sensors_csv(sim.dataset));
  write_text(dir / "truth.csv", truth_csv(sim.truth));
  write_text(dir / "params_truth.csv", params_csv(truth_params(sim.truth)));
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const RunConfig cfg = load_run_config(config_path);
  if (!cfg.scenario) throw ConfigError("simulate needs a 'scenario' block");
  const Simulation sim = generate(cfg.scenario_with_seed());
  write_dataset(out_dir, sim);
  std::cout << sim.dataset.frames.size() << " frames written to " << out_dir << "\n";
  return 0;
}

int cmd_estimate(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const fs::path out_dir = cfg.output;
  ensure_dir(out_dir);

  Dataset data;
  std::vector<TruthRecord> truth;
  if (cfg.scenario) {
    spdlog::info("simulating scenario (seed {})", cfg.seed);
    const Simulation sim = generate(cfg.scenario_with_seed());
    write_dataset(out_dir, sim);
    data = sim.dataset;
    truth = parse_truth(CsvTable::parse(truth_csv(sim.truth), "truth"));
  } else {
    const fs::path dir = *cfg.dataset;
    data = parse_sensors(CsvTable::read(dir / "sensors.csv"));
    truth = parse_truth(CsvTable::read(dir / "truth.csv"));
  }
  if (data.frames.empty()) throw SchemaError("dataset has no frames");
  if (truth.empty()) throw SchemaError("truth file has no rows");

  // Initial state from the first truth row; IMU biases start at zero.
  RobotState x0 = truth.front().state;
  x0.gyro_bias.setZero();
  x0.accel_bias.setZero();
  const StateCovariance p0 = default_initial_covariance();

  std::vector<std::string> failures(cfg.estimators.size());
  std::vector<std::thread> workers;
  for (std::size_t k = 0; k < cfg.estimators.size(); ++k) {
    workers.emplace_back([&, k] {
      const EstimatorSpec& spec = cfg.estimators[k];
      try {
        spdlog::info("running {}", spec.name);
        const EstimatorOutput out = run(spec.to_config(), data.frames, x0,
                                        LegParams::uniform(spec.initial_calf), p0);
        write_text(out_dir / ("estimate_" + spec.name + ".csv"), estimate_csv(out));
        write_text(out_dir / ("params_" + spec.name + ".csv"), params_csv(estimate_params(out)));
        spdlog::info("{} done ({} records)", spec.name, out.records.size());
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    });
  }
  for (auto& w : workers) w.join();

  int status = 0;
  for (std::size_t k = 0; k < failures.size(); ++k) {
    if (failures[k].empty()) continue;
    std::cerr << cfg.estimators[k].name << ": " << failures[k] << "\n";
    status = 1;
  }
  return status;
}

int cmd_evaluate(const std::string& est_dir, const std::string& truth_path) {
  if (!fs::exists(truth_path)) throw IoError("file not found: " + truth_path);
  const PositionTrack truth = parse_positions(CsvTable::read(truth_path));

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(est_dir)) {
    const std::string file = entry.path().filename().string();
    if (file.starts_with("estimate_") && file.ends_with(".csv")) {
      names.push_back(file.substr(9, file.size() - 13));
    }
  }
  if (names.empty()) throw IoError("no estimate_<variant>.csv files in " + est_dir);
  // Known variants in their canonical order, anything else alphabetically after.
  auto rank = [](const std::string& n) {
    for (std::size_t i = 0; i < kAllVariants.size(); ++i) {
      if (variant_name(kAllVariants[i]) == n) return static_cast<int>(i);
    }
    return static_cast<int>(kAllVariants.size());
  };
  std::sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
    return rank(a) != rank(b) ? rank(a) < rank(b) : a < b;
  });

  std::vector<std::pair<std::string, PositionSeries>> estimates;
  for (const auto& name : names) {
    const fs::path file = fs::path(est_dir) / ("estimate_" + name + ".csv");
    PositionTrack est = parse_positions(CsvTable::read(file));
    if (est.t.size() != truth.t.size()) {
      throw AlignmentError(file.string() + " has " + std::to_string(est.t.size()) +
                           " rows, truth has " + std::to_string(truth.t.size()));
    }
    for (std::size_t r = 0; r < est.t.size(); ++r) {
      if (std::abs(est.t[r] - truth.t[r]) > 1e-9) {
        throw AlignmentError(file.string() + ": row " + std::to_string(r + 1) +
                             ": time stamp does not match truth");
      }
    }
    estimates.emplace_back(name, std::move(est.p));
  }
  const auto reports = compare(estimates, truth.p);
  write_text(fs::path(est_dir) / "metrics.csv", metrics_csv(reports));
  std::cout << metrics_table(reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Dual beta-Kalman filter toolkit"};
  app.require_subcommand(1);

  std::string config, out_dir, est_dir, truth_path;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--config", config, "run configuration (YAML)")->required();
  sim->add_option("--out", out_dir, "output directory")->required();

  auto* est = app.add_subcommand("estimate", "run the configured estimators");
  est->add_option("--config", config, "run configuration (YAML)")->required();

  auto* eval = app.add_subcommand("evaluate", "compute ATE, MPD and DR");
  eval->add_option("--est", est_dir, "directory with estimate_<variant>.csv files")->required();
  eval->add_option("--truth", truth_path, "truth.csv")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return cmd_simulate(config, out_dir);
    if (*est) return cmd_estimate(config);
    if (*eval) return cmd_evaluate(est_dir, truth_path);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
