#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dbkf/estimator.hpp"
#include "dbkf/simulator.hpp"

namespace dbkf {

/// Shortest round-trip-safe text form with 17 significant digits.
std::string format_double(double x);
/// Lower-case leg tag used in column names: fl, fr, rl, rr.
std::string leg_tag(int leg);

std::vector<std::string> sensors_header();
std::vector<std::string> truth_header();
std::vector<std::string> params_header();
std::vector<std::string> estimate_header();

/// Parsed CSV with a header row. Errors name the file and row.
class CsvTable {
 public:
  static CsvTable read(const std::filesystem::path& path);
  static CsvTable parse(const std::string& text, const std::string& source);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return data_.size(); }
  /// Throws SchemaError naming the missing column.
  std::size_t column(const std::string& name) const;
  double at(std::size_t row, std::size_t col) const { return data_[row][col]; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<double>> data_;
};

struct TruthRecord {
  double t = 0.0;
  RobotState state;  // biases are not stored and read back as zero
  std::array<Vec3, kNumLegs> slip_velocity{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                           Vec3::Zero()};
};

struct ParamRecord {
  double t = 0.0;
  LegParams params;
};

std::string sensors_csv(const Dataset& data);
std::string truth_csv(const GroundTruth& truth);
std::string params_csv(const std::vector<ParamRecord>& params);
std::string estimate_csv(const EstimatorOutput& out);

Dataset parse_sensors(const CsvTable& table);
std::vector<TruthRecord> parse_truth(const CsvTable& table);
std::vector<ParamRecord> parse_params(const CsvTable& table);
/// Time stamps and states; diagnostics are not stored.
std::vector<EstimateRecord> parse_estimate(const CsvTable& table);

/// Base positions from any trajectory file with t, px, py, pz columns.
struct PositionTrack {
  std::vector<double> t;
  std::vector<Vec3> p;
};
PositionTrack parse_positions(const CsvTable& table);

/// Throws IoError when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);

std::vector<ParamRecord> truth_params(const GroundTruth& truth);
std::vector<ParamRecord> estimate_params(const EstimatorOutput& out);

}  // namespace dbkf
