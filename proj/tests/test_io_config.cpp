#include <gtest/gtest.h>

#include <fstream>

#include "dbkf/config.hpp"
#include "dbkf/errors.hpp"
#include "dbkf/io.hpp"

namespace dbkf {
namespace {

ScenarioConfig short_scenario(double duration = 1.0) {
  ScenarioConfig s = standard_scenario();
  s.duration = duration;
  return s;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& c : v) s += (s.empty() ? "" : ",") + c;
  return s;
}

TEST(Io, Headers) {
  EXPECT_EQ(join(params_header()), "t,lc_fl,lc_fr,lc_rl,lc_rr");
  const auto s = sensors_header();
  ASSERT_EQ(s.size(), 7u + 4u * 11u);
  EXPECT_EQ(join({s.begin(), s.begin() + 18}),
            "t,wx,wy,wz,ax,ay,az,qfl1,qfl2,qfl3,dqfl1,dqfl2,dqfl3,taufl1,taufl2,taufl3,fzfl,contactfl");
  EXPECT_EQ(s.back(), "contactrr");
  const auto t = truth_header();
  EXPECT_EQ(join({t.begin(), t.begin() + 17}), "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,sflx,sfly,sflz,sdflx,sdfly,sdflz");
  EXPECT_EQ(t.size(), 11u + 4u * 6u);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 0.0}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}

TEST(Io, OneSecondHasFiveHundredRows) {
  const std::string csv = sensors_csv(generate(short_scenario()).dataset);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 501);
}

TEST(Io, SensorRoundTripIsLossless) {
  const Simulation sim = generate(short_scenario());
  const std::string csv = sensors_csv(sim.dataset);
  const Dataset back = parse_sensors(CsvTable::parse(csv, "sensors.csv"));
  ASSERT_EQ(back.frames.size(), sim.dataset.frames.size());
  for (std::size_t k = 0; k < back.frames.size(); ++k) {
    const SensorFrame& a = sim.dataset.frames[k];
    const SensorFrame& b = back.frames[k];
    ASSERT_EQ(a.t, b.t);
    ASSERT_EQ(a.gyro, b.gyro);
    ASSERT_EQ(a.accel, b.accel);
    for (int i = 0; i < kNumLegs; ++i) {
      ASSERT_EQ(a.legs[i].angles, b.legs[i].angles);
      ASSERT_EQ(a.legs[i].rates, b.legs[i].rates);
      ASSERT_EQ(a.legs[i].torques, b.legs[i].torques);
      ASSERT_EQ(a.legs[i].normal_force, b.legs[i].normal_force);
      ASSERT_EQ(a.legs[i].contact, b.legs[i].contact);
    }
  }
  EXPECT_EQ(sensors_csv(back), csv);
}

TEST(Io, TruthAndParamsRoundTrip) {
  const Simulation sim = generate(short_scenario());
  const auto truth = parse_truth(CsvTable::parse(truth_csv(sim.truth), "truth.csv"));
  ASSERT_EQ(truth.size(), sim.truth.frames.size());
  EXPECT_EQ(truth[10].state.p, sim.truth.frames[10].state.p);
  EXPECT_EQ(truth[10].state.q.coeffs(), sim.truth.frames[10].state.q.coeffs());
  EXPECT_EQ(truth[10].state.feet[3], sim.truth.frames[10].state.feet[3]);
  const auto params = truth_params(sim.truth);
  const auto back = parse_params(CsvTable::parse(params_csv(params), "params.csv"));
  EXPECT_EQ(back[200].params.calf, params[200].params.calf);
}

TEST(Io, EstimateRoundTrip) {
  const Simulation sim = generate(short_scenario(0.2));
  RobotState x0 = sim.truth.frames[0].state;
  const EstimatorOutput out =
      run(EstimatorConfig{}, sim.dataset.frames, x0, LegParams{}, default_initial_covariance());
  const std::string csv = estimate_csv(out);
  const auto back = parse_estimate(CsvTable::parse(csv, "est.csv"));
  ASSERT_EQ(back.size(), out.records.size());
  EXPECT_EQ(back.back().state.p, out.records.back().state.p);
  EXPECT_EQ(back.back().state.gyro_bias, out.records.back().state.gyro_bias);
}

TEST(Io, PositionsFromTruthAndEstimateFiles) {
  const Simulation sim = generate(short_scenario(0.1));
  const PositionTrack a = parse_positions(CsvTable::parse(truth_csv(sim.truth), "truth"));
  ASSERT_EQ(a.t.size(), sim.truth.frames.size());
  for (std::size_t k = 0; k < a.t.size(); ++k) {
    EXPECT_EQ(a.t[k], sim.truth.frames[k].t);
    EXPECT_EQ(a.p[k], sim.truth.frames[k].state.p);
  }
  const PositionTrack b = parse_positions(CsvTable::parse("t,pz,px,py\n0,3,1,2\n0.5,6,4,5\n", "e"));
  EXPECT_EQ(b.p[1], Vec3(4, 5, 6));
  EXPECT_THROW(parse_positions(CsvTable::parse("t,px,py\n0,1,2\n", "e")), SchemaError);
  EXPECT_THROW(parse_positions(CsvTable::parse("t,px,py,pz\n1,0,0,0\n1,0,0,0\n", "e")),
               SchemaError);
}

TEST(Io, SchemaErrors) {
  try {
    parse_sensors(CsvTable::parse("t,wx\n0,1\n", "s.csv"));
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("wy"), std::string::npos) << e.what();
  }
  const Simulation sim = generate(short_scenario(0.02));
  std::string csv = sensors_csv(sim.dataset);
  // Corrupt the third data row.
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) pos = csv.find('\n', pos) + 1;
  csv.insert(pos, "oops");
  try {
    parse_sensors(CsvTable::parse(csv, "s.csv"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(CsvTable::read("/nonexistent/truth.csv"), IoError);
}

TEST(Config, ParsesAndRoundTrips) {
  const std::string text = R"(
seed: 7
output: results
scenario:
  duration: 5.0
  slip: {probability: 0.1}
  calf: {kind: ramp, start: 0.226, end: 0.2, start_time: 1.0, duration: 3.0}
estimators:
  - variant: QEKF
  - name: robust
    variant: DualBetaKF
    beta: 0.02
    noise: {meas_velocity: 0.08}
    solver: {max_iterations: 20}
    gate: full
)";
  const RunConfig c = parse_run_config(text);
  ASSERT_TRUE(c.scenario.has_value());
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.scenario_with_seed().seed, 7u);
  EXPECT_EQ(c.scenario->duration, 5.0);
  EXPECT_EQ(c.scenario->calf[2].kind, CalfProfile::Kind::Ramp);
  EXPECT_EQ(c.scenario->calf[2].end_value, 0.2);
  ASSERT_EQ(c.estimators.size(), 2u);
  EXPECT_EQ(c.estimators[0].name, "QEKF");
  EXPECT_EQ(c.estimators[1].name, "robust");
  EXPECT_EQ(c.estimators[1].beta, 0.02);
  EXPECT_EQ(c.estimators[1].noise.meas_velocity, 0.08);
  EXPECT_EQ(c.estimators[1].solver.max_iterations, 20);
  EXPECT_EQ(c.estimators[1].gate, GateMode::Full);
  EXPECT_EQ(parse_run_config(serialize_run_config(c)), c);
  const EstimatorConfig ec = c.estimators[1].to_config();
  EXPECT_EQ(ec.noise.beta, 0.02);
  EXPECT_DOUBLE_EQ(ec.noise.Sigma(ix::meas_vel(0), ix::meas_vel(0)), 0.08 * 0.08);
}

TEST(Config, UnknownKeyNamedWithLine) {
  const std::string text = "seed: 1\nscenario:\n  duration: 1\n  bogus_key: 3\nestimators:\n  - variant: QEKF\n";
  try {
    parse_run_config(text);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bogus_key"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
  }
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_run_config("estimators:\n  - variant: QEKF\n"), ConfigError);  // no data
  EXPECT_THROW(parse_run_config("scenario: {}\nestimators: []\n"), ConfigError);
  EXPECT_THROW(parse_run_config("scenario: {}\nestimators:\n  - variant: Nope\n"), ConfigError);
  EXPECT_THROW(parse_run_config("scenario: {}\nestimators:\n  - variant: BetaKF\n    beta: 2\n"), ConfigError);
  EXPECT_THROW(parse_run_config("scenario: {duration: -1}\nestimators:\n  - variant: QEKF\n"), ConfigError);
  EXPECT_THROW(parse_run_config("scenario: {}\nestimators:\n  - variant: QEKF\n  - variant: QEKF\n"),
               ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent.yaml"), Error);
}

TEST(Config, ShippedStandardConfigIsTheStandardScenario) {
  const RunConfig c = load_run_config(std::string(DBKF_SOURCE_DIR) + "/configs/standard.yaml");
  const ScenarioConfig got = c.scenario_with_seed();
  const ScenarioConfig want = standard_scenario();
  EXPECT_EQ(got.seed, 42u);
  EXPECT_EQ(got.duration, 60.0);
  EXPECT_EQ(got.rate, 500.0);
  EXPECT_EQ(got.slip, want.slip);
  EXPECT_EQ(got.noise, want.noise);
  EXPECT_EQ(got.body, want.body);
  EXPECT_EQ(got.gait, want.gait);
  for (int i = 0; i < kNumLegs; ++i) {
    EXPECT_EQ(got.calf[i].kind, CalfProfile::Kind::Sinusoid);
    EXPECT_NEAR(got.calf[i].value, want.calf[i].value, 1e-15);
    EXPECT_NEAR(got.calf[i].amplitude, want.calf[i].amplitude, 1e-15);
    EXPECT_NEAR(got.calf[i].phase, want.calf[i].phase, 1e-15);
    EXPECT_EQ(got.calf[i].period, want.calf[i].period);
  }
  ASSERT_EQ(c.estimators.size(), 5u);
  for (const char* f : {"ramp.yaml", "quick.yaml"}) {
    EXPECT_NO_THROW(load_run_config(std::string(DBKF_SOURCE_DIR) + "/configs/" + f)) << f;
  }
}

}  // namespace
}  // namespace dbkf
