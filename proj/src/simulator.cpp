#include "dbkf/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "dbkf/errors.hpp"

namespace dbkf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBoundTolerance = 1e-12;
// Gait phase offsets, FL and RR together, FR and RL half a period later.
constexpr std::array<double, kNumLegs> kPhaseOffset = {0.0, 0.5, 0.5, 0.0};

struct BodySample {
  Vec3 p, v, a;
  Mat3 r;
  Vec3 omega;  // body frame
  double yaw;
};

BodySample body_at(const BodyMotion& m, const GaitConfig& g, double t) {
  const double ws = kTwoPi / m.surge_period;
  const double wl = kTwoPi / m.lateral_period;
  const double wb = 2.0 * kTwoPi / g.period;
  const double wr = kTwoPi / m.roll_period;
  const double wp = kTwoPi / m.pitch_period;

  BodySample b;
  b.p = {m.forward_speed * t + m.surge_amplitude * std::sin(ws * t),
         m.lateral_amplitude * std::sin(wl * t), m.height + m.bob_amplitude * std::sin(wb * t)};
  b.v = {m.forward_speed + m.surge_amplitude * ws * std::cos(ws * t),
         m.lateral_amplitude * wl * std::cos(wl * t), m.bob_amplitude * wb * std::cos(wb * t)};
  b.a = {-m.surge_amplitude * ws * ws * std::sin(ws * t),
         -m.lateral_amplitude * wl * wl * std::sin(wl * t),
         -m.bob_amplitude * wb * wb * std::sin(wb * t)};

  const double speed2 = b.v.x() * b.v.x() + b.v.y() * b.v.y();
  b.yaw = std::atan2(b.v.y(), b.v.x());
  const double yaw_rate =
      speed2 > 1e-12 ? (b.v.x() * b.a.y() - b.v.y() * b.a.x()) / speed2 : 0.0;
  const double roll = m.roll_amplitude * std::sin(wr * t);
  const double roll_rate = m.roll_amplitude * wr * std::cos(wr * t);
  const double pitch = m.pitch_amplitude * std::sin(wp * t);
  const double pitch_rate = m.pitch_amplitude * wp * std::cos(wp * t);

  b.r = (Eigen::AngleAxisd(b.yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
         Eigen::AngleAxisd(roll, Vec3::UnitX()))
            .toRotationMatrix();
  const double sr = std::sin(roll), cr = std::cos(roll);
  const double sp = std::sin(pitch), cp = std::cos(pitch);
  b.omega = {roll_rate - yaw_rate * sp, pitch_rate * cr + yaw_rate * sr * cp,
             -pitch_rate * sr + yaw_rate * cr * cp};
  return b;
}

struct GaitPhase {
  bool stance = false;
  long cycle = 0;     // index of the current (or last) stance interval
  double u = 0.0;     // progress through the stance or the swing, [0, 1)
};

GaitPhase gait_phase(const GaitConfig& g, int leg, double t) {
  const double s = t / g.period - kPhaseOffset[leg];
  GaitPhase ph;
  ph.cycle = static_cast<long>(std::floor(s));
  const double frac = s - static_cast<double>(ph.cycle);
  ph.stance = frac < g.duty;
  ph.u = ph.stance ? frac / g.duty : (frac - g.duty) / (1.0 - g.duty);
  return ph;
}

Vec3 stance_target(const ScenarioConfig& scn, const LegGeometry& geo, int leg, long cycle) {
  const double t_mid = (static_cast<double>(cycle) + kPhaseOffset[leg] + 0.5 * scn.gait.duty) *
                       scn.gait.period;
  const BodySample b = body_at(scn.body, scn.gait, t_mid);
  const Vec3 nominal = geo.hip_position + Vec3(0.0, geo.side_sign * geo.hip_offset, 0.0);
  const Vec3 offset = Eigen::AngleAxisd(b.yaw, Vec3::UnitZ()) * Vec3(nominal.x(), nominal.y(), 0.0);
  return {b.p.x() + offset.x(), b.p.y() + offset.y(), 0.0};
}

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }
double smoothstep_rate(double u) { return 6.0 * u * (1.0 - u); }

void check_profile(const CalfProfile& c, int leg) {
  const auto b = c.bounds();
  if (!(b[0] >= kMinCalfLength - kBoundTolerance && b[1] <= kMaxCalfLength + kBoundTolerance)) {
    throw ScenarioError("calf profile of leg " + std::string(kLegNames[leg]) +
                        " leaves [0.182, 0.253] m");
  }
  if (c.kind == CalfProfile::Kind::Sinusoid && !(c.period > 0.0)) {
    throw ScenarioError("sinusoid calf profile needs a positive period");
  }
  if (c.kind == CalfProfile::Kind::Ramp && !(c.ramp_duration > 0.0)) {
    throw ScenarioError("ramp calf profile needs a positive duration");
  }
}

/// Regenerates the clean readings of `leg` at frame `f` from the truth.
void synthesize_leg(const ScenarioConfig& scn, const LegGeometry& geo, TruthFrame& f, int leg,
                    int frame_index) {
  const Mat3 r = rotation_matrix(f.state.q);
  const double lc = f.params[leg];
  const Vec3 rel = r.transpose() * (f.state.feet[leg] - f.state.p);
  LegReading& out = f.clean.legs[leg];
  try {
    out.angles = inverse_kinematics(rel, geo, lc);
  } catch (const ScenarioError& e) {
    throw ScenarioError("frame " + std::to_string(frame_index) + ", leg " +
                        std::string(kLegNames[leg]) + ": " + e.what());
  }
  const Jacobian3 j = jacobian(out.angles, geo, lc);
  const Vec3 rel_rate = r.transpose() * (f.foot_velocity[leg] - f.state.v) - f.omega.cross(rel);
  out.rates = j.partialPivLu().solve(rel_rate - jacobian_wrt_lc(out.angles, geo, lc) *
                                                    f.calf_rate[leg]);
  out.torques = statics_torque(out.angles, geo, lc, f.grf[leg]);
  out.normal_force = f.grf[leg].z();
  out.contact = f.stance[leg];
  (void)scn;
}

/// Moves the true foot of `leg` by slip * dt from frame index+1 on and fades
/// the displacement out over the following swing. Returns the last frame touched.
int displace_foot(const ScenarioConfig& scn, GroundTruth& truth, int index, int leg,
                  const Vec3& slip) {
  const int n = static_cast<int>(truth.frames.size());
  TruthFrame& f0 = truth.frames[index];
  f0.slip_velocity[leg] += slip;
  f0.foot_velocity[leg] += slip;
  if (index + 1 >= n) return index;
  const Vec3 delta = slip * (truth.frames[index + 1].t - f0.t);

  int j = index + 1;
  for (; j < n && truth.frames[j].stance[leg]; ++j) truth.frames[j].state.feet[leg] += delta;
  const double swing_time = (1.0 - scn.gait.duty) * scn.gait.period;
  for (; j < n && !truth.frames[j].stance[leg]; ++j) {
    TruthFrame& f = truth.frames[j];
    const double u = gait_phase(scn.gait, leg, f.t).u;
    f.state.feet[leg] += delta * (1.0 - smoothstep(u));
    f.foot_velocity[leg] -= delta * smoothstep_rate(u) / swing_time;
  }
  return j - 1;
}

}  // namespace

double CalfProfile::length(double t) const {
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::Sinusoid: return value + amplitude * std::sin(kTwoPi * t / period + phase);
    case Kind::Ramp: {
      const double u = std::clamp((t - start_time) / ramp_duration, 0.0, 1.0);
      return value + (end_value - value) * u;
    }
  }
  return value;
}

double CalfProfile::rate(double t) const {
  switch (kind) {
    case Kind::Constant: return 0.0;
    case Kind::Sinusoid:
      return amplitude * kTwoPi / period * std::cos(kTwoPi * t / period + phase);
    case Kind::Ramp:
      if (t < start_time || t >= start_time + ramp_duration) return 0.0;
      return (end_value - value) / ramp_duration;
  }
  return 0.0;
}

std::array<double, 2> CalfProfile::bounds() const {
  switch (kind) {
    case Kind::Constant: return {value, value};
    case Kind::Sinusoid: return {value - std::abs(amplitude), value + std::abs(amplitude)};
    case Kind::Ramp: return {std::min(value, end_value), std::max(value, end_value)};
  }
  return {value, value};
}

int ScenarioConfig::frame_count() const {
  return static_cast<int>(std::llround(duration * rate));
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ScenarioError(msg);
  };
  require(duration > 0.0 && std::isfinite(duration), "duration must be positive");
  require(rate > 0.0 && std::isfinite(rate), "frame rate must be positive");
  require(frame_count() >= 1, "scenario must contain at least one frame");
  require(gait.period > 0.0, "gait period must be positive");
  require(gait.duty > 0.0 && gait.duty < 1.0, "duty factor must lie in (0, 1)");
  require(gait.swing_height >= 0.0, "swing height must be >= 0");
  require(body.surge_period > 0.0 && body.lateral_period > 0.0 && body.roll_period > 0.0 &&
              body.pitch_period > 0.0,
          "body motion periods must be positive");
  require(body.height > 0.0, "body height must be positive");
  require(slip.probability >= 0.0 && slip.probability < 1.0, "slip probability must lie in [0, 1)");
  require(slip.speed_min >= 0.0 && slip.speed_min <= slip.speed_max,
          "slip speeds need 0 <= min <= max");
  require(slip.mean_duration >= 1.0, "mean slip duration must be >= 1 frame");
  require(slip.max_duration >= 1, "max slip duration must be >= 1 frame");
  require(noise.gyro >= 0.0 && noise.accel >= 0.0 && noise.angle >= 0.0 && noise.rate >= 0.0 &&
              noise.torque >= 0.0 && noise.force >= 0.0,
          "sensor noise standard deviations must be >= 0");
  require(mass > 0.0, "mass must be positive");
  require(contact_threshold >= 0.0, "contact threshold must be >= 0");
  require(gyro_bias.allFinite() && accel_bias.allFinite() && gravity.allFinite(),
          "biases and gravity must be finite");
  for (int i = 0; i < kNumLegs; ++i) check_profile(calf[i], i);
}

ScenarioConfig standard_scenario() {
  ScenarioConfig scn;
  const double mean = 0.5 * (kMinCalfLength + kMaxCalfLength);
  const double amp = 0.5 * (kMaxCalfLength - kMinCalfLength);
  for (int i = 0; i < kNumLegs; ++i) {
    CalfProfile& c = scn.calf[i];
    c.kind = CalfProfile::Kind::Sinusoid;
    c.value = mean;
    c.amplitude = amp;
    c.period = 20.0;
    c.phase = 0.5 * kPi * i;
  }
  return scn;
}

Simulation generate(const ScenarioConfig& scn) {
  scn.validate();
  const RobotGeometry geometry = RobotGeometry::go2();
  const int n = scn.frame_count();
  Simulation sim;
  auto& truth = sim.truth.frames;
  truth.resize(n);

  // Body, schedule, calf lengths and the nominal foot path.
  for (int k = 0; k < n; ++k) {
    TruthFrame& f = truth[k];
    f.t = k / scn.rate;
    const BodySample b = body_at(scn.body, scn.gait, f.t);
    f.state.p = b.p;
    f.state.v = b.v;
    f.state.q = quat_from_rotation_matrix(b.r);
    if (f.state.q.w() < 0.0) {
      f.state.q = Quaternion(-f.state.q.w(), -f.state.q.x(), -f.state.q.y(), -f.state.q.z());
    }
    f.state.gyro_bias = scn.gyro_bias;
    f.state.accel_bias = scn.accel_bias;
    f.omega = b.omega;
    f.accel_world = b.a;
    for (int i = 0; i < kNumLegs; ++i) {
      f.params.calf[i] = scn.calf[i].length(f.t);
      f.calf_rate[i] = scn.calf[i].rate(f.t);
      const GaitPhase ph = gait_phase(scn.gait, i, f.t);
      f.stance[i] = ph.stance;
      if (ph.stance) {
        f.state.feet[i] = stance_target(scn, geometry.legs[i], i, ph.cycle);
        f.foot_velocity[i].setZero();
      } else {
        const Vec3 from = stance_target(scn, geometry.legs[i], i, ph.cycle);
        const Vec3 to = stance_target(scn, geometry.legs[i], i, ph.cycle + 1);
        const double swing_time = (1.0 - scn.gait.duty) * scn.gait.period;
        const double u = ph.u;
        const double bump = 16.0 * u * u * (1.0 - u) * (1.0 - u);
        const double bump_rate = 32.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
        f.state.feet[i] = from + (to - from) * smoothstep(u) +
                          Vec3(0.0, 0.0, scn.gait.swing_height * bump);
        f.foot_velocity[i] = ((to - from) * smoothstep_rate(u) +
                              Vec3(0.0, 0.0, scn.gait.swing_height * bump_rate)) /
                             swing_time;
      }
    }
  }

  // Slip episodes.
  std::mt19937_64 slip_rng(scn.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p = scn.slip.probability;
  const double d = scn.slip.mean_duration;
  const double onset = p > 0.0 ? p / (d * (1.0 - p) + p) : 0.0;
  std::geometric_distribution<int> extra_frames(1.0 / d);
  int active_leg = -1, remaining = 0;
  Vec3 active_slip = Vec3::Zero();
  for (int k = 0; k < n; ++k) {
    if (remaining > 0 && truth[k].stance[active_leg]) {
      displace_foot(scn, sim.truth, k, active_leg, active_slip);
      --remaining;
      continue;
    }
    remaining = 0;
    if (!(unit(slip_rng) < onset)) continue;
    std::vector<int> stance_legs;
    for (int i = 0; i < kNumLegs; ++i) {
      if (truth[k].stance[i]) stance_legs.push_back(i);
    }
    if (stance_legs.empty()) continue;
    const int pick = std::uniform_int_distribution<int>(
        0, static_cast<int>(stance_legs.size()) - 1)(slip_rng);
    active_leg = stance_legs[pick];
    const double speed = scn.slip.speed_min +
                         (scn.slip.speed_max - scn.slip.speed_min) * unit(slip_rng);
    const double heading = kTwoPi * unit(slip_rng);
    active_slip = speed * Vec3(std::cos(heading), std::sin(heading), 0.0);
    remaining = std::min(1 + extra_frames(slip_rng), scn.slip.max_duration);
    displace_foot(scn, sim.truth, k, active_leg, active_slip);
    --remaining;
  }

  // Quasi-static ground reaction forces and clean sensor readings.
  for (int k = 0; k < n; ++k) {
    TruthFrame& f = truth[k];
    const Mat3 r = rotation_matrix(f.state.q);
    int stance_count = 0;
    for (bool s : f.stance) stance_count += s ? 1 : 0;
    const Vec3 total = scn.mass * (f.accel_world - scn.gravity);
    f.clean.t = f.t;
    f.clean.gyro = f.omega;
    f.clean.accel = r.transpose() * (f.accel_world - scn.gravity);
    for (int i = 0; i < kNumLegs; ++i) {
      f.grf[i] = f.stance[i] ? Vec3(r.transpose() * total / stance_count) : Vec3::Zero();
      synthesize_leg(scn, geometry.legs[i], f, i, k);
    }
  }

  // Sensor noise on an independent stream.
  std::mt19937_64 noise_rng(scn.seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto noise3 = [&](double sigma) {
    Vec3 v;
    for (int a = 0; a < 3; ++a) v[a] = sigma * gauss(noise_rng);
    return v;
  };
  sim.dataset.frames.resize(n);
  for (int k = 0; k < n; ++k) {
    const TruthFrame& f = truth[k];
    SensorFrame& s = sim.dataset.frames[k];
    s.t = f.t;
    s.gyro = f.clean.gyro + scn.gyro_bias + noise3(scn.noise.gyro);
    s.accel = f.clean.accel + scn.accel_bias + noise3(scn.noise.accel);
    for (int i = 0; i < kNumLegs; ++i) {
      const LegReading& c = f.clean.legs[i];
      LegReading& m = s.legs[i];
      m.angles = c.angles + noise3(scn.noise.angle);
      m.rates = c.rates + noise3(scn.noise.rate);
      m.torques = c.torques + noise3(scn.noise.torque);
      m.normal_force = c.normal_force + scn.noise.force * gauss(noise_rng);
      m.contact = m.normal_force >= scn.contact_threshold;
    }
  }
  return sim;
}

void inject_slip(const ScenarioConfig& scn, Simulation& sim, int index, int leg,
                 const Vec3& slip) {
  auto& truth = sim.truth.frames;
  if (index < 0 || index >= static_cast<int>(truth.size())) {
    throw InvalidArgument("inject_slip: frame index out of range");
  }
  if (leg < 0 || leg >= kNumLegs) throw InvalidArgument("inject_slip: leg index out of range");
  if (!truth[index].stance[leg]) {
    throw InvalidArgument("inject_slip: leg " + std::string(kLegNames[leg]) +
                          " is in swing at frame " + std::to_string(index));
  }
  if (!slip.allFinite()) throw InvalidArgument("inject_slip: slip velocity must be finite");
  if (slip.isZero(0.0)) return;

  const RobotGeometry geometry = RobotGeometry::go2();
  const int last = displace_foot(scn, sim.truth, index, leg, slip);
  for (int k = index; k <= last; ++k) {
    TruthFrame& f = truth[k];
    const LegReading before = f.clean.legs[leg];
    synthesize_leg(scn, geometry.legs[leg], f, leg, k);
    const LegReading& after = f.clean.legs[leg];
    LegReading& m = sim.dataset.frames[k].legs[leg];
    m.angles += after.angles - before.angles;
    m.rates += after.rates - before.rates;
    m.torques += after.torques - before.torques;
  }
}

}  // namespace dbkf
