#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dbkf/types.hpp"

namespace dbkf {

using PositionSeries = std::vector<Vec3>;

/// Root mean square position error over all samples (no alignment).
/// Throws AlignmentError when the lengths differ or are zero.
double ate(const PositionSeries& est, const PositionSeries& truth);
/// Largest position error over the trajectory.
double mpd(const PositionSeries& est, const PositionSeries& truth);
/// Summed segment lengths of `path`.
double path_length(const PositionSeries& path);
/// Endpoint error over the true path length, as a fraction. Throws
/// UndefinedMetric for a zero-length true path.
double drift_ratio(const PositionSeries& est, const PositionSeries& truth);

struct MetricReport {
  std::string name;
  double ate_m = 0.0;
  double mpd_m = 0.0;
  double drift_ratio = 0.0;  // fraction; printed as percent
  double traj_len_m = 0.0;
  Vec3 rmse_axis = Vec3::Zero();
};

MetricReport evaluate(const std::string& name, const PositionSeries& est,
                      const PositionSeries& truth);

/// One report per named estimate, in input order.
std::vector<MetricReport> compare(
    const std::vector<std::pair<std::string, PositionSeries>>& estimates,
    const PositionSeries& truth);

/// `variant,ate_m,mpd_m,dr_percent,traj_len_m` followed by one row per report.
std::string metrics_csv(const std::vector<MetricReport>& reports);
/// Aligned plain-text table.
std::string metrics_table(const std::vector<MetricReport>& reports);

}  // namespace dbkf
