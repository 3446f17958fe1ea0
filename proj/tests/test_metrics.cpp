#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "dbkf/errors.hpp"
#include "dbkf/metrics.hpp"
#include "test_util.hpp"

namespace dbkf {
namespace {

using test::Rng;

PositionSeries line(int n, double length) {
  PositionSeries p;
  for (int k = 0; k < n; ++k) p.emplace_back(length * k / (n - 1), 0, 0);
  return p;
}

TEST(Metrics, PerfectEstimateIsZero) {
  const PositionSeries t = line(10, 5.0);
  EXPECT_EQ(ate(t, t), 0.0);
  EXPECT_EQ(mpd(t, t), 0.0);
  EXPECT_EQ(drift_ratio(t, t), 0.0);
}

TEST(Metrics, ConstantOffset) {
  const PositionSeries t = line(10, 5.0);
  PositionSeries e = t;
  for (auto& p : e) p += Vec3(0.3, 0.4, 0);
  EXPECT_NEAR(ate(e, t), 0.5, 1e-15);
  EXPECT_NEAR(mpd(e, t), 0.5, 1e-15);
}

TEST(Metrics, SingleSpike) {
  const PositionSeries t = line(10, 5.0);
  PositionSeries e = t;
  e[4] += Vec3(0, 0, 1.0);
  EXPECT_EQ(mpd(e, t), 1.0);
  EXPECT_NEAR(ate(e, t), std::sqrt(0.1), 1e-15);
}

TEST(Metrics, DriftRatioOnePercent) {
  const PositionSeries t = line(101, 20.0);
  PositionSeries e = t;
  e.back() += Vec3(0, 0.2, 0);
  EXPECT_NEAR(drift_ratio(e, t), 0.01, 1e-15);
  EXPECT_NEAR(path_length(t), 20.0, 1e-12);
}

TEST(Metrics, BruteForceOracles) {
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const int n = rng.integer(2, 400);
    const PositionSeries t = test::random_walk(rng, n, 0.05);
    PositionSeries e = t;
    for (auto& p : e) p += rng.gaussian(0.1);
    EXPECT_NEAR(ate(e, t), test::ate_oracle(e, t), 1e-12);
    EXPECT_NEAR(mpd(e, t), test::mpd_oracle(e, t), 1e-12);
    EXPECT_NEAR(drift_ratio(e, t), test::dr_oracle(e, t), 1e-12);
  }
}

TEST(Metrics, TranslationInvarianceAndScaling) {
  Rng rng(2);
  const PositionSeries t = test::random_walk(rng, 200, 0.05);
  PositionSeries e = t;
  for (auto& p : e) p += rng.gaussian(0.1);
  PositionSeries t2 = t, e2 = e, e3 = e;
  const Vec3 shift(10, -5, 2);
  for (auto& p : t2) p += shift;
  for (auto& p : e2) p += shift;
  for (std::size_t k = 0; k < e.size(); ++k) e3[k] = t[k] + 3.0 * (e[k] - t[k]);
  EXPECT_NEAR(ate(e2, t2), ate(e, t), 1e-12);
  EXPECT_NEAR(mpd(e2, t2), mpd(e, t), 1e-12);
  EXPECT_NEAR(drift_ratio(e2, t2), drift_ratio(e, t), 1e-12);
  EXPECT_NEAR(ate(e3, t), 3.0 * ate(e, t), 1e-12);
}

TEST(Metrics, Errors) {
  const PositionSeries t = line(10, 5.0);
  EXPECT_THROW(ate(line(9, 5.0), t), AlignmentError);
  EXPECT_THROW(mpd({}, {}), AlignmentError);
  const PositionSeries still(5, Vec3(1, 2, 3));
  EXPECT_THROW(drift_ratio(still, still), UndefinedMetric);
}

TEST(Metrics, CompareAndFormatting) {
  const PositionSeries t = line(11, 10.0);
  PositionSeries e = t;
  e.back() += Vec3(0.1, 0, 0);
  const auto reports = compare({{"B", e}, {"A", t}}, t);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].name, "B");
  EXPECT_EQ(reports[1].ate_m, 0.0);
  EXPECT_EQ(reports[1].mpd_m, 0.0);
  EXPECT_NEAR(reports[0].drift_ratio, 0.01, 1e-15);
  const std::string csv = metrics_csv(reports);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "variant,ate_m,mpd_m,dr_percent,traj_len_m");
  EXPECT_NE(csv.find("\nB,"), std::string::npos);
  std::istringstream rows(csv);
  std::string header, row;
  std::getline(rows, header);
  std::getline(rows, row);
  std::vector<std::string> cells;
  std::istringstream cols(row);
  for (std::string cell; std::getline(cols, cell, ',');) cells.push_back(cell);
  ASSERT_EQ(cells.size(), 5u);
  EXPECT_NEAR(std::stod(cells[3]), 1.0, 1e-12);  // percent
  EXPECT_NEAR(std::stod(cells[4]), 10.0, 1e-12);
  EXPECT_NE(metrics_table(reports).find("B"), std::string::npos);
}

}  // namespace
}  // namespace dbkf
