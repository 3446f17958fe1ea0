#include "dbkf/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "dbkf/errors.hpp"

namespace dbkf {

namespace {

std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.is_null()) return "";
  return " at line " + std::to_string(m.line + 1);
}

/// Rejects keys outside `allowed`, naming the key and its line.
void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!map.IsMap()) throw ConfigError("'" + context + "' must be a mapping" + where(map));
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + context + where(kv.first));
    }
  }
}

template <typename T>
void read(const YAML::Node& map, const char* key, T& out) {
  const YAML::Node n = map[key];
  if (!n) return;
  try {
    out = n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value for '" + std::string(key) + "'" + where(n));
  }
}

void read_vec3(const YAML::Node& map, const char* key, Vec3& out) {
  const YAML::Node n = map[key];
  if (!n) return;
  if (!n.IsSequence() || n.size() != 3) {
    throw ConfigError("'" + std::string(key) + "' must be a list of three numbers" + where(n));
  }
  try {
    for (int i = 0; i < 3; ++i) out[i] = n[i].as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value for '" + std::string(key) + "'" + where(n));
  }
}

CalfProfile parse_calf(const YAML::Node& n) {
  check_keys(n, {"kind", "value", "mean", "amplitude", "period", "phase", "start", "end",
                 "start_time", "duration"},
             "calf profile");
  CalfProfile c;
  std::string kind = "constant";
  read(n, "kind", kind);
  if (kind == "constant") {
    c.kind = CalfProfile::Kind::Constant;
    read(n, "value", c.value);
  } else if (kind == "sinusoid") {
    c.kind = CalfProfile::Kind::Sinusoid;
    read(n, "mean", c.value);
    read(n, "amplitude", c.amplitude);
    read(n, "period", c.period);
    read(n, "phase", c.phase);
  } else if (kind == "ramp") {
    c.kind = CalfProfile::Kind::Ramp;
    read(n, "start", c.value);
    read(n, "end", c.end_value);
    read(n, "start_time", c.start_time);
    read(n, "duration", c.ramp_duration);
  } else {
    throw ConfigError("unknown calf profile kind '" + kind + "'" + where(n["kind"]));
  }
  return c;
}

ScenarioConfig parse_scenario(const YAML::Node& n) {
  check_keys(n, {"duration", "rate", "mass", "contact_threshold", "gravity", "body", "gait",
                 "slip", "noise", "imu_bias", "calf"},
             "scenario");
  ScenarioConfig s;
  read(n, "duration", s.duration);
  read(n, "rate", s.rate);
  read(n, "mass", s.mass);
  read(n, "contact_threshold", s.contact_threshold);
  read_vec3(n, "gravity", s.gravity);
  if (const YAML::Node b = n["body"]) {
    check_keys(b, {"forward_speed", "surge_amplitude", "surge_period", "lateral_amplitude",
                   "lateral_period", "height", "bob_amplitude", "roll_amplitude", "roll_period",
                   "pitch_amplitude", "pitch_period"},
               "scenario.body");
    read(b, "forward_speed", s.body.forward_speed);
    read(b, "surge_amplitude", s.body.surge_amplitude);
    read(b, "surge_period", s.body.surge_period);
    read(b, "lateral_amplitude", s.body.lateral_amplitude);
    read(b, "lateral_period", s.body.lateral_period);
    read(b, "height", s.body.height);
    read(b, "bob_amplitude", s.body.bob_amplitude);
    read(b, "roll_amplitude", s.body.roll_amplitude);
    read(b, "roll_period", s.body.roll_period);
    read(b, "pitch_amplitude", s.body.pitch_amplitude);
    read(b, "pitch_period", s.body.pitch_period);
  }
  if (const YAML::Node g = n["gait"]) {
    check_keys(g, {"period", "duty", "swing_height"}, "scenario.gait");
    read(g, "period", s.gait.period);
    read(g, "duty", s.gait.duty);
    read(g, "swing_height", s.gait.swing_height);
  }
  if (const YAML::Node sl = n["slip"]) {
    check_keys(sl, {"probability", "speed_min", "speed_max", "mean_duration", "max_duration"},
               "scenario.slip");
    read(sl, "probability", s.slip.probability);
    read(sl, "speed_min", s.slip.speed_min);
    read(sl, "speed_max", s.slip.speed_max);
    read(sl, "mean_duration", s.slip.mean_duration);
    read(sl, "max_duration", s.slip.max_duration);
  }
  if (const YAML::Node z = n["noise"]) {
    check_keys(z, {"gyro", "accel", "angle", "rate", "torque", "force"}, "scenario.noise");
    read(z, "gyro", s.noise.gyro);
    read(z, "accel", s.noise.accel);
    read(z, "angle", s.noise.angle);
    read(z, "rate", s.noise.rate);
    read(z, "torque", s.noise.torque);
    read(z, "force", s.noise.force);
  }
  if (const YAML::Node b = n["imu_bias"]) {
    check_keys(b, {"gyro", "accel"}, "scenario.imu_bias");
    read_vec3(b, "gyro", s.gyro_bias);
    read_vec3(b, "accel", s.accel_bias);
  }
  if (const YAML::Node c = n["calf"]) {
    if (c.IsMap()) {
      const CalfProfile p = parse_calf(c);
      s.calf.fill(p);
    } else if (c.IsSequence() && c.size() == kNumLegs) {
      for (int i = 0; i < kNumLegs; ++i) s.calf[i] = parse_calf(c[i]);
    } else {
      throw ConfigError("'calf' must be one profile or a list of four" + where(c));
    }
  }
  return s;
}

EstimatorSpec parse_estimator(const YAML::Node& n) {
  check_keys(n, {"name", "variant", "beta", "noise", "solver", "threshold", "gate", "unscented",
                 "contact_threshold", "inflation", "touchdown_variance", "max_condition",
                 "initial_calf", "initial_param_std"},
             "estimator");
  EstimatorSpec e;
  std::string variant;
  read(n, "variant", variant);
  if (variant.empty()) throw ConfigError("estimator block without 'variant'" + where(n));
  try {
    e.variant = parse_variant(variant);
  } catch (const ConfigError& err) {
    throw ConfigError(std::string(err.what()) + where(n["variant"]));
  }
  e.name = std::string(variant_name(e.variant));
  read(n, "name", e.name);
  read(n, "beta", e.beta);
  read(n, "threshold", e.threshold);
  std::string gate = "per_leg";
  read(n, "gate", gate);
  if (gate == "per_leg") {
    e.gate = GateMode::PerLeg;
  } else if (gate == "full") {
    e.gate = GateMode::Full;
  } else {
    throw ConfigError("gate must be 'per_leg' or 'full'" + where(n["gate"]));
  }
  read(n, "contact_threshold", e.contact_threshold);
  read(n, "inflation", e.inflation);
  read(n, "touchdown_variance", e.touchdown_variance);
  read(n, "max_condition", e.max_condition);
  read(n, "initial_calf", e.initial_calf);
  read(n, "initial_param_std", e.initial_param_std);
  if (const YAML::Node z = n["noise"]) {
    check_keys(z, {"position", "velocity", "orientation", "foot", "gyro_bias", "accel_bias",
                   "meas_position", "meas_velocity", "param_walk", "normal_force"},
               "estimator.noise");
    read(z, "position", e.noise.position);
    read(z, "velocity", e.noise.velocity);
    read(z, "orientation", e.noise.orientation);
    read(z, "foot", e.noise.foot);
    read(z, "gyro_bias", e.noise.gyro_bias);
    read(z, "accel_bias", e.noise.accel_bias);
    read(z, "meas_position", e.noise.meas_position);
    read(z, "meas_velocity", e.noise.meas_velocity);
    read(z, "param_walk", e.noise.param_walk);
    read(z, "normal_force", e.noise.normal_force);
  }
  if (const YAML::Node s = n["solver"]) {
    check_keys(s, {"max_iterations", "gradient_tolerance", "step_tolerance", "damping_init",
                   "damping_scale"},
               "estimator.solver");
    read(s, "max_iterations", e.solver.max_iterations);
    read(s, "gradient_tolerance", e.solver.gradient_tolerance);
    read(s, "step_tolerance", e.solver.step_tolerance);
    read(s, "damping_init", e.solver.damping_init);
    read(s, "damping_scale", e.solver.damping_scale);
  }
  if (const YAML::Node u = n["unscented"]) {
    check_keys(u, {"alpha", "kappa", "beta"}, "estimator.unscented");
    read(u, "alpha", e.ut.alpha);
    read(u, "kappa", e.ut.kappa);
    read(u, "beta", e.ut.beta);
  }
  return e;
}

void emit_vec3(YAML::Emitter& out, const char* key, const Vec3& v) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << v.x() << v.y()
      << v.z() << YAML::EndSeq;
}

void emit_calf(YAML::Emitter& out, const CalfProfile& c) {
  out << YAML::BeginMap;
  switch (c.kind) {
    case CalfProfile::Kind::Constant:
      out << YAML::Key << "kind" << YAML::Value << "constant";
      out << YAML::Key << "value" << YAML::Value << c.value;
      break;
    case CalfProfile::Kind::Sinusoid:
      out << YAML::Key << "kind" << YAML::Value << "sinusoid";
      out << YAML::Key << "mean" << YAML::Value << c.value;
      out << YAML::Key << "amplitude" << YAML::Value << c.amplitude;
      out << YAML::Key << "period" << YAML::Value << c.period;
      out << YAML::Key << "phase" << YAML::Value << c.phase;
      break;
    case CalfProfile::Kind::Ramp:
      out << YAML::Key << "kind" << YAML::Value << "ramp";
      out << YAML::Key << "start" << YAML::Value << c.value;
      out << YAML::Key << "end" << YAML::Value << c.end_value;
      out << YAML::Key << "start_time" << YAML::Value << c.start_time;
      out << YAML::Key << "duration" << YAML::Value << c.ramp_duration;
      break;
  }
  out << YAML::EndMap;
}

/// Only the fields a profile of that kind reads survive a round trip.
CalfProfile canonical(const CalfProfile& c) {
  CalfProfile out;
  out.kind = c.kind;
  out.value = c.value;
  if (c.kind == CalfProfile::Kind::Sinusoid) {
    out.amplitude = c.amplitude;
    out.period = c.period;
    out.phase = c.phase;
  } else if (c.kind == CalfProfile::Kind::Ramp) {
    out.end_value = c.end_value;
    out.start_time = c.start_time;
    out.ramp_duration = c.ramp_duration;
  }
  return out;
}

template <typename F>
void map_block(YAML::Emitter& out, const char* key, F&& body) {
  out << YAML::Key << key << YAML::Value << YAML::BeginMap;
  body();
  out << YAML::EndMap;
}

template <typename T>
void kv(YAML::Emitter& out, const char* key, const T& value) {
  out << YAML::Key << key << YAML::Value << value;
}

}  // namespace

EstimatorConfig EstimatorSpec::to_config() const {
  EstimatorConfig c;
  c.variant = variant;
  c.noise = NoiseConfig::from_sigmas(noise, beta);
  c.solver = solver;
  c.ukf.threshold = threshold;
  c.ukf.gate = gate;
  c.ukf.ut = ut;
  c.model.inflation = inflation;
  c.model.touchdown_variance = touchdown_variance;
  c.contact_threshold = contact_threshold;
  c.max_condition = max_condition;
  c.initial_param_cov = ParamCovariance::Identity() * (initial_param_std * initial_param_std);
  return c;
}

void RunConfig::validate() const {
  if (scenario.has_value() == dataset.has_value()) {
    throw ConfigError("exactly one of 'scenario' or 'dataset' must be given");
  }
  if (estimators.empty()) throw ConfigError("at least one estimator is required");
  if (output.empty()) throw ConfigError("'output' must not be empty");
  if (scenario) {
    try {
      scenario_with_seed().validate();
    } catch (const ScenarioError& e) {
      throw ConfigError(std::string("scenario: ") + e.what());
    }
  }
  std::set<std::string> names;
  for (const auto& e : estimators) {
    if (!names.insert(e.name).second) {
      throw ConfigError("duplicate estimator name '" + e.name + "'");
    }
    if (!(e.initial_calf > 0.0 && e.initial_calf < 1.0)) {
      throw ConfigError("estimator '" + e.name + "': initial_calf out of range");
    }
    if (!(e.initial_param_std >= 0.0)) {
      throw ConfigError("estimator '" + e.name + "': initial_param_std must be >= 0");
    }
    try {
      e.to_config().validate();
    } catch (const Error& err) {
      throw ConfigError("estimator '" + e.name + "': " + err.what());
    }
  }
}

ScenarioConfig RunConfig::scenario_with_seed() const {
  if (!scenario) throw ConfigError("run configuration has no scenario block");
  ScenarioConfig s = *scenario;
  s.seed = seed;
  return s;
}

RunConfig parse_run_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  check_keys(root, {"seed", "output", "scenario", "dataset", "estimators"}, "run configuration");
  RunConfig cfg;
  read(root, "seed", cfg.seed);
  read(root, "output", cfg.output);
  if (const YAML::Node s = root["scenario"]) cfg.scenario = parse_scenario(s);
  if (const YAML::Node d = root["dataset"]) {
    std::string path;
    read(root, "dataset", path);
    cfg.dataset = path;
  }
  const YAML::Node est = root["estimators"];
  if (est) {
    if (!est.IsSequence()) throw ConfigError("'estimators' must be a list" + where(est));
    for (const auto& e : est) cfg.estimators.push_back(parse_estimator(e));
  }
  if (cfg.scenario) {
    for (auto& c : cfg.scenario->calf) c = canonical(c);
    cfg.scenario->seed = cfg.seed;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("file not found or unreadable: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  kv(out, "seed", cfg.seed);
  kv(out, "output", cfg.output);
  if (cfg.dataset) kv(out, "dataset", *cfg.dataset);
  if (cfg.scenario) {
    const ScenarioConfig& s = *cfg.scenario;
    map_block(out, "scenario", [&] {
      kv(out, "duration", s.duration);
      kv(out, "rate", s.rate);
      kv(out, "mass", s.mass);
      kv(out, "contact_threshold", s.contact_threshold);
      emit_vec3(out, "gravity", s.gravity);
      map_block(out, "body", [&] {
        kv(out, "forward_speed", s.body.forward_speed);
        kv(out, "surge_amplitude", s.body.surge_amplitude);
        kv(out, "surge_period", s.body.surge_period);
        kv(out, "lateral_amplitude", s.body.lateral_amplitude);
        kv(out, "lateral_period", s.body.lateral_period);
        kv(out, "height", s.body.height);
        kv(out, "bob_amplitude", s.body.bob_amplitude);
        kv(out, "roll_amplitude", s.body.roll_amplitude);
        kv(out, "roll_period", s.body.roll_period);
        kv(out, "pitch_amplitude", s.body.pitch_amplitude);
        kv(out, "pitch_period", s.body.pitch_period);
      });
      map_block(out, "gait", [&] {
        kv(out, "period", s.gait.period);
        kv(out, "duty", s.gait.duty);
        kv(out, "swing_height", s.gait.swing_height);
      });
      map_block(out, "slip", [&] {
        kv(out, "probability", s.slip.probability);
        kv(out, "speed_min", s.slip.speed_min);
        kv(out, "speed_max", s.slip.speed_max);
        kv(out, "mean_duration", s.slip.mean_duration);
        kv(out, "max_duration", s.slip.max_duration);
      });
      map_block(out, "noise", [&] {
        kv(out, "gyro", s.noise.gyro);
        kv(out, "accel", s.noise.accel);
        kv(out, "angle", s.noise.angle);
        kv(out, "rate", s.noise.rate);
        kv(out, "torque", s.noise.torque);
        kv(out, "force", s.noise.force);
      });
      map_block(out, "imu_bias", [&] {
        emit_vec3(out, "gyro", s.gyro_bias);
        emit_vec3(out, "accel", s.accel_bias);
      });
      out << YAML::Key << "calf" << YAML::Value << YAML::BeginSeq;
      for (const auto& c : s.calf) emit_calf(out, c);
      out << YAML::EndSeq;
    });
  }
  out << YAML::Key << "estimators" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : cfg.estimators) {
    out << YAML::BeginMap;
    kv(out, "name", e.name);
    kv(out, "variant", std::string(variant_name(e.variant)));
    kv(out, "beta", e.beta);
    kv(out, "threshold", e.threshold);
    kv(out, "gate", std::string(e.gate == GateMode::PerLeg ? "per_leg" : "full"));
    kv(out, "contact_threshold", e.contact_threshold);
    kv(out, "inflation", e.inflation);
    kv(out, "touchdown_variance", e.touchdown_variance);
    kv(out, "max_condition", e.max_condition);
    kv(out, "initial_calf", e.initial_calf);
    kv(out, "initial_param_std", e.initial_param_std);
    map_block(out, "noise", [&] {
      kv(out, "position", e.noise.position);
      kv(out, "velocity", e.noise.velocity);
      kv(out, "orientation", e.noise.orientation);
      kv(out, "foot", e.noise.foot);
      kv(out, "gyro_bias", e.noise.gyro_bias);
      kv(out, "accel_bias", e.noise.accel_bias);
      kv(out, "meas_position", e.noise.meas_position);
      kv(out, "meas_velocity", e.noise.meas_velocity);
      kv(out, "param_walk", e.noise.param_walk);
      kv(out, "normal_force", e.noise.normal_force);
    });
    map_block(out, "solver", [&] {
      kv(out, "max_iterations", e.solver.max_iterations);
      kv(out, "gradient_tolerance", e.solver.gradient_tolerance);
      kv(out, "step_tolerance", e.solver.step_tolerance);
      kv(out, "damping_init", e.solver.damping_init);
      kv(out, "damping_scale", e.solver.damping_scale);
    });
    map_block(out, "unscented", [&] {
      kv(out, "alpha", e.ut.alpha);
      kv(out, "kappa", e.ut.kappa);
      kv(out, "beta", e.ut.beta);
    });
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace dbkf
