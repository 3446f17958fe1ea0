#include "dbkf/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dbkf/errors.hpp"

namespace dbkf {

namespace {

void append_row(std::string& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  out += '\n';
}

std::string join(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) s += ',';
    s += names[i];
  }
  return s + "\n";
}

void push3(std::vector<double>& v, const Vec3& x) {
  v.push_back(x.x());
  v.push_back(x.y());
  v.push_back(x.z());
}

std::vector<std::string> state_columns() {
  std::vector<std::string> h = {"t", "px", "py", "pz", "vx", "vy", "vz", "qw", "qx", "qy", "qz"};
  return h;
}

struct StateColumns {
  std::size_t t, p[3], v[3], q[4];
  std::array<std::array<std::size_t, 3>, kNumLegs> s;
};

StateColumns locate_state(const CsvTable& table) {
  StateColumns c{};
  c.t = table.column("t");
  const char* axes = "xyz";
  for (int a = 0; a < 3; ++a) {
    c.p[a] = table.column(std::string("p") + axes[a]);
    c.v[a] = table.column(std::string("v") + axes[a]);
  }
  c.q[0] = table.column("qw");
  for (int a = 0; a < 3; ++a) c.q[a + 1] = table.column(std::string("q") + axes[a]);
  for (int i = 0; i < kNumLegs; ++i) {
    for (int a = 0; a < 3; ++a) c.s[i][a] = table.column("s" + leg_tag(i) + axes[a]);
  }
  return c;
}

RobotState read_state(const CsvTable& table, const StateColumns& c, std::size_t row) {
  RobotState x;
  for (int a = 0; a < 3; ++a) {
    x.p[a] = table.at(row, c.p[a]);
    x.v[a] = table.at(row, c.v[a]);
  }
  try {
    x.q = Quaternion(table.at(row, c.q[0]), table.at(row, c.q[1]), table.at(row, c.q[2]),
                     table.at(row, c.q[3]));
  } catch (const InvalidArgument& e) {
    throw SchemaError(table.source() + ": row " + std::to_string(row + 1) + ": " + e.what());
  }
  for (int i = 0; i < kNumLegs; ++i) {
    for (int a = 0; a < 3; ++a) x.feet[i][a] = table.at(row, c.s[i][a]);
  }
  return x;
}

void check_times(const CsvTable& table, std::size_t col) {
  for (std::size_t r = 1; r < table.rows(); ++r) {
    if (!(table.at(r, col) > table.at(r - 1, col))) {
      throw SchemaError(table.source() + ": row " + std::to_string(r + 1) +
                        ": timestamps must be strictly increasing");
    }
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string leg_tag(int leg) {
  static const std::array<const char*, kNumLegs> tags = {"fl", "fr", "rl", "rr"};
  return tags.at(static_cast<std::size_t>(leg));
}

std::vector<std::string> sensors_header() {
  std::vector<std::string> h = {"t", "wx", "wy", "wz", "ax", "ay", "az"};
  for (int i = 0; i < kNumLegs; ++i) {
    const std::string l = leg_tag(i);
    for (int j = 1; j <= 3; ++j) h.push_back("q" + l + std::to_string(j));
    for (int j = 1; j <= 3; ++j) h.push_back("dq" + l + std::to_string(j));
    for (int j = 1; j <= 3; ++j) h.push_back("tau" + l + std::to_string(j));
    h.push_back("fz" + l);
    h.push_back("contact" + l);
  }
  return h;
}

std::vector<std::string> truth_header() {
  std::vector<std::string> h = state_columns();
  for (int i = 0; i < kNumLegs; ++i) {
    const std::string l = leg_tag(i);
    for (const char* a : {"x", "y", "z"}) h.push_back("s" + l + a);
    for (const char* a : {"x", "y", "z"}) h.push_back("sd" + l + a);
  }
  return h;
}

std::vector<std::string> params_header() {
  std::vector<std::string> h = {"t"};
  for (int i = 0; i < kNumLegs; ++i) h.push_back("lc_" + leg_tag(i));
  return h;
}

std::vector<std::string> estimate_header() {
  std::vector<std::string> h = state_columns();
  for (int i = 0; i < kNumLegs; ++i) {
    for (const char* a : {"x", "y", "z"}) h.push_back("s" + leg_tag(i) + a);
  }
  for (const char* n : {"bgx", "bgy", "bgz", "bax", "bay", "baz"}) h.push_back(n);
  return h;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("file not found or unreadable: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

CsvTable CsvTable::parse(const std::string& text, const std::string& source) {
  CsvTable table;
  table.source_ = source;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(source + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::istringstream hs(line);
    std::string name;
    while (std::getline(hs, name, ',')) table.header_.push_back(name);
  }
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::vector<double> values;
    values.reserve(table.header_.size());
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc() || res.ptr != comma) {
        throw SchemaError(source + ": row " + std::to_string(row) + ", column " +
                          std::to_string(values.size() + 1) + ": cannot parse '" +
                          std::string(p, comma) + "'");
      }
      values.push_back(v);
      if (comma == end) break;
      p = comma + 1;
    }
    if (values.size() != table.header_.size()) {
      throw SchemaError(source + ": row " + std::to_string(row) + " has " +
                        std::to_string(values.size()) + " fields, expected " +
                        std::to_string(table.header_.size()));
    }
    table.data_.push_back(std::move(values));
  }
  return table;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw SchemaError(source_ + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header_.begin());
}

std::string sensors_csv(const Dataset& data) {
  std::string out = join(sensors_header());
  std::vector<double> row;
  for (const SensorFrame& f : data.frames) {
    row.clear();
    row.push_back(f.t);
    push3(row, f.gyro);
    push3(row, f.accel);
    for (const LegReading& l : f.legs) {
      push3(row, l.angles);
      push3(row, l.rates);
      push3(row, l.torques);
      row.push_back(l.normal_force);
      row.push_back(l.contact ? 1.0 : 0.0);
    }
    append_row(out, row);
  }
  return out;
}

std::string truth_csv(const GroundTruth& truth) {
  std::string out = join(truth_header());
  std::vector<double> row;
  for (const TruthFrame& f : truth.frames) {
    row.clear();
    row.push_back(f.t);
    push3(row, f.state.p);
    push3(row, f.state.v);
    const Eigen::Vector4d q = f.state.q.coeffs();
    row.insert(row.end(), q.data(), q.data() + 4);
    for (int i = 0; i < kNumLegs; ++i) {
      push3(row, f.state.feet[i]);
      push3(row, f.slip_velocity[i]);
    }
    append_row(out, row);
  }
  return out;
}

std::string params_csv(const std::vector<ParamRecord>& params) {
  std::string out = join(params_header());
  std::vector<double> row;
  for (const ParamRecord& p : params) {
    row.assign({p.t});
    for (int i = 0; i < kNumLegs; ++i) row.push_back(p.params[i]);
    append_row(out, row);
  }
  return out;
}

std::string estimate_csv(const EstimatorOutput& est) {
  std::string out = join(estimate_header());
  std::vector<double> row;
  for (const EstimateRecord& r : est.records) {
    row.clear();
    row.push_back(r.t);
    push3(row, r.state.p);
    push3(row, r.state.v);
    const Eigen::Vector4d q = r.state.q.coeffs();
    row.insert(row.end(), q.data(), q.data() + 4);
    for (int i = 0; i < kNumLegs; ++i) push3(row, r.state.feet[i]);
    push3(row, r.state.gyro_bias);
    push3(row, r.state.accel_bias);
    append_row(out, row);
  }
  return out;
}

Dataset parse_sensors(const CsvTable& table) {
  const auto header = sensors_header();
  std::vector<std::size_t> col;
  col.reserve(header.size());
  for (const auto& name : header) col.push_back(table.column(name));
  check_times(table, col[0]);
  Dataset data;
  data.frames.resize(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    SensorFrame& f = data.frames[r];
    std::size_t k = 0;
    auto next = [&] { return table.at(r, col[k++]); };
    f.t = next();
    for (int a = 0; a < 3; ++a) f.gyro[a] = next();
    for (int a = 0; a < 3; ++a) f.accel[a] = next();
    for (LegReading& l : f.legs) {
      for (int a = 0; a < 3; ++a) l.angles[a] = next();
      for (int a = 0; a < 3; ++a) l.rates[a] = next();
      for (int a = 0; a < 3; ++a) l.torques[a] = next();
      l.normal_force = next();
      const double c = next();
      if (c != 0.0 && c != 1.0) {
        throw SchemaError(table.source() + ": row " + std::to_string(r + 1) +
                          ": contact flag must be 0 or 1");
      }
      l.contact = c == 1.0;
    }
  }
  return data;
}

std::vector<TruthRecord> parse_truth(const CsvTable& table) {
  const StateColumns c = locate_state(table);
  std::array<std::array<std::size_t, 3>, kNumLegs> sd{};
  for (int i = 0; i < kNumLegs; ++i) {
    int a = 0;
    for (const char* axis : {"x", "y", "z"}) sd[i][a++] = table.column("sd" + leg_tag(i) + axis);
  }
  check_times(table, c.t);
  std::vector<TruthRecord> out(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out[r].t = table.at(r, c.t);
    out[r].state = read_state(table, c, r);
    for (int i = 0; i < kNumLegs; ++i) {
      for (int a = 0; a < 3; ++a) out[r].slip_velocity[i][a] = table.at(r, sd[i][a]);
    }
  }
  return out;
}

PositionTrack parse_positions(const CsvTable& table) {
  const std::size_t t = table.column("t");
  const std::array<std::size_t, 3> p = {table.column("px"), table.column("py"), table.column("pz")};
  check_times(table, t);
  PositionTrack out;
  out.t.reserve(table.rows());
  out.p.reserve(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out.t.push_back(table.at(r, t));
    out.p.emplace_back(table.at(r, p[0]), table.at(r, p[1]), table.at(r, p[2]));
  }
  return out;
}

std::vector<ParamRecord> parse_params(const CsvTable& table) {
  const auto header = params_header();
  std::vector<std::size_t> col;
  for (const auto& name : header) col.push_back(table.column(name));
  check_times(table, col[0]);
  std::vector<ParamRecord> out(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out[r].t = table.at(r, col[0]);
    for (int i = 0; i < kNumLegs; ++i) out[r].params.calf[i] = table.at(r, col[i + 1]);
  }
  return out;
}

std::vector<EstimateRecord> parse_estimate(const CsvTable& table) {
  const StateColumns c = locate_state(table);
  std::array<std::size_t, 6> b{};
  int k = 0;
  for (const char* n : {"bgx", "bgy", "bgz", "bax", "bay", "baz"}) b[k++] = table.column(n);
  check_times(table, c.t);
  std::vector<EstimateRecord> out(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out[r].t = table.at(r, c.t);
    out[r].state = read_state(table, c, r);
    for (int a = 0; a < 3; ++a) {
      out[r].state.gyro_bias[a] = table.at(r, b[a]);
      out[r].state.accel_bias[a] = table.at(r, b[a + 3]);
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ParamRecord> truth_params(const GroundTruth& truth) {
  std::vector<ParamRecord> out;
  out.reserve(truth.frames.size());
  for (const TruthFrame& f : truth.frames) out.push_back({f.t, f.params});
  return out;
}

std::vector<ParamRecord> estimate_params(const EstimatorOutput& est) {
  std::vector<ParamRecord> out;
  out.reserve(est.records.size());
  for (const EstimateRecord& r : est.records) out.push_back({r.t, r.params});
  return out;
}

}  // namespace dbkf
