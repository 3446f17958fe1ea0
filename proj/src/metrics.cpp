#include "dbkf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dbkf/errors.hpp"
#include "dbkf/io.hpp"

namespace dbkf {

namespace {

void check_aligned(const PositionSeries& est, const PositionSeries& truth) {
  if (est.size() != truth.size()) {
    throw AlignmentError("estimate has " + std::to_string(est.size()) + " samples, truth has " +
                         std::to_string(truth.size()));
  }
  if (est.empty()) throw AlignmentError("empty trajectories");
}

}  // namespace

double ate(const PositionSeries& est, const PositionSeries& truth) {
  check_aligned(est, truth);
  double sum = 0.0;
  for (std::size_t t = 0; t < est.size(); ++t) sum += (est[t] - truth[t]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(est.size()));
}

double mpd(const PositionSeries& est, const PositionSeries& truth) {
  check_aligned(est, truth);
  double worst = 0.0;
  for (std::size_t t = 0; t < est.size(); ++t) worst = std::max(worst, (est[t] - truth[t]).norm());
  return worst;
}

double path_length(const PositionSeries& path) {
  double len = 0.0;
  for (std::size_t t = 1; t < path.size(); ++t) len += (path[t] - path[t - 1]).norm();
  return len;
}

double drift_ratio(const PositionSeries& est, const PositionSeries& truth) {
  check_aligned(est, truth);
  const double len = path_length(truth);
  if (!(len > 0.0)) throw UndefinedMetric("drift ratio undefined for a zero-length trajectory");
  return (est.back() - truth.back()).norm() / len;
}

MetricReport evaluate(const std::string& name, const PositionSeries& est,
                      const PositionSeries& truth) {
  MetricReport r;
  r.name = name;
  r.ate_m = ate(est, truth);
  r.mpd_m = mpd(est, truth);
  r.traj_len_m = path_length(truth);
  r.drift_ratio = drift_ratio(est, truth);
  Vec3 sq = Vec3::Zero();
  for (std::size_t t = 0; t < est.size(); ++t) sq += (est[t] - truth[t]).cwiseAbs2();
  r.rmse_axis = (sq / static_cast<double>(est.size())).cwiseSqrt();
  return r;
}

std::vector<MetricReport> compare(
    const std::vector<std::pair<std::string, PositionSeries>>& estimates,
    const PositionSeries& truth) {
  std::vector<MetricReport> out;
  out.reserve(estimates.size());
  for (const auto& [name, est] : estimates) out.push_back(evaluate(name, est, truth));
  return out;
}

std::string metrics_csv(const std::vector<MetricReport>& reports) {
  std::string s = "variant,ate_m,mpd_m,dr_percent,traj_len_m\n";
  for (const auto& r : reports) {
    s += r.name + "," + format_double(r.ate_m) + "," + format_double(r.mpd_m) + "," +
         format_double(100.0 * r.drift_ratio) + "," + format_double(r.traj_len_m) + "\n";
  }
  return s;
}

std::string metrics_table(const std::vector<MetricReport>& reports) {
  std::size_t width = 7;
  for (const auto& r : reports) width = std::max(width, r.name.size());
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %10s  %10s  %8s  %10s\n", static_cast<int>(width),
                "variant", "ATE [m]", "MPD [m]", "DR [%]", "len [m]");
  os << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-*s  %10.4f  %10.4f  %8.3f  %10.3f\n",
                  static_cast<int>(width), r.name.c_str(), r.ate_m, r.mpd_m,
                  100.0 * r.drift_ratio, r.traj_len_m);
    os << line;
  }
  return os.str();
}

}  // namespace dbkf
