#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(DBKF_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dbkf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path write_config(const std::string& text) {
    const fs::path p = dir_ / "run.yaml";
    std::ofstream(p) << text;
    return p;
  }
  fs::path dir_;
};

TEST_F(Cli, SimulateEstimateEvaluate) {
  const fs::path cfg = write_config("seed: 3\noutput: " + (dir_ / "out").string() +
                                    "\nscenario:\n  duration: 1.0\nestimators:\n"
                                    "  - variant: QEKF\n  - variant: UKF-OR\n  - variant: DualQEKF\n"
                                    "  - variant: BetaKF\n  - variant: DualBetaKF\n");
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "sim").string(), dir_ / "log"), 0)
      << slurp(dir_ / "log");
  const std::string sensors = slurp(dir_ / "sim" / "sensors.csv");
  EXPECT_EQ(std::count(sensors.begin(), sensors.end(), '\n'), 501);
  EXPECT_TRUE(fs::exists(dir_ / "sim" / "truth.csv"));

  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "sim2").string(), dir_ / "log"), 0);
  EXPECT_EQ(slurp(dir_ / "sim2" / "sensors.csv"), sensors);

  ASSERT_EQ(run("estimate --config " + cfg.string(), dir_ / "log"), 0) << slurp(dir_ / "log");
  for (const char* v : {"QEKF", "UKF-OR", "DualQEKF", "BetaKF", "DualBetaKF"}) {
    const std::string est = slurp(dir_ / "out" / (std::string("estimate_") + v + ".csv"));
    EXPECT_EQ(std::count(est.begin(), est.end(), '\n'), 501) << v;
  }
  ASSERT_EQ(run("evaluate --est " + (dir_ / "out").string() + " --truth " + (dir_ / "out" / "truth.csv").string(),
                dir_ / "log"),
            0)
      << slurp(dir_ / "log");
  const std::string metrics = slurp(dir_ / "out" / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), "variant,ate_m,mpd_m,dr_percent,traj_len_m");
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 6);
  EXPECT_NE(slurp(dir_ / "log").find("DualBetaKF"), std::string::npos);
}

TEST_F(Cli, EstimateFromDatasetDirectory) {
  const fs::path cfg = write_config("scenario:\n  duration: 0.5\nestimators:\n  - variant: QEKF\n");
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "sim").string(), dir_ / "log"), 0);
  const fs::path cfg2 = write_config("dataset: " + (dir_ / "sim").string() + "\noutput: " +
                                     (dir_ / "out").string() + "\nestimators:\n  - variant: DualBetaKF\n");
  ASSERT_EQ(run("estimate --config " + cfg2.string(), dir_ / "log"), 0) << slurp(dir_ / "log");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "estimate_DualBetaKF.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "params_DualBetaKF.csv"));
}

TEST_F(Cli, PerfectEstimateHasZeroMetrics) {
  const fs::path cfg = write_config("scenario:\n  duration: 0.5\nestimators:\n  - variant: QEKF\n");
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "sim").string(), dir_ / "log"), 0);
  // The truth file doubles as an estimate: same position columns.
  fs::create_directories(dir_ / "est");
  fs::copy_file(dir_ / "sim" / "truth.csv", dir_ / "est" / "estimate_QEKF.csv");
  ASSERT_EQ(run("evaluate --est " + (dir_ / "est").string() + " --truth " + (dir_ / "sim" / "truth.csv").string(),
                dir_ / "log"),
            0)
      << slurp(dir_ / "log");
  const std::string metrics = slurp(dir_ / "est" / "metrics.csv");
  EXPECT_NE(metrics.find("QEKF,0,0,0,"), std::string::npos) << metrics;
}

TEST_F(Cli, Errors) {
  const fs::path bad = write_config("scenario:\n  duration: 1\n  speedd: 2\nestimators:\n  - variant: QEKF\n");
  EXPECT_NE(run("simulate --config " + bad.string() + " --out " + (dir_ / "x").string(), dir_ / "log"), 0);
  EXPECT_NE(slurp(dir_ / "log").find("speedd"), std::string::npos) << slurp(dir_ / "log");

  fs::create_directories(dir_ / "est");
  EXPECT_NE(run("evaluate --est " + (dir_ / "est").string() + " --truth " + (dir_ / "missing.csv").string(),
                dir_ / "log"),
            0);
  EXPECT_NE(slurp(dir_ / "log").find("missing.csv"), std::string::npos) << slurp(dir_ / "log");

  EXPECT_NE(run("frobnicate", dir_ / "log"), 0);
}

}  // namespace
