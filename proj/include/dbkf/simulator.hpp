#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dbkf/kinematics.hpp"
#include "dbkf/state.hpp"

namespace dbkf {

inline constexpr double kMinCalfLength = 0.182;  // m
inline constexpr double kMaxCalfLength = 0.253;  // m

/// Calf length over time for one leg.
struct CalfProfile {
  enum class Kind { Constant, Sinusoid, Ramp };
  Kind kind = Kind::Constant;
  double value = kNominalCalfLength;  // constant value, sinusoid mean, ramp start
  double amplitude = 0.0;             // sinusoid
  double period = 20.0;               // s, sinusoid
  double phase = 0.0;                 // rad, sinusoid
  double end_value = kNominalCalfLength;  // ramp
  double start_time = 0.0;                // s, ramp
  double ramp_duration = 10.0;            // s, ramp

  double length(double t) const;
  double rate(double t) const;
  /// Smallest and largest length the profile can take.
  std::array<double, 2> bounds() const;
  friend bool operator==(const CalfProfile&, const CalfProfile&) = default;
};

/// Smooth body path: forward motion with a surge oscillation, a lateral
/// weave that sets the heading, height bob and small roll/pitch sway.
struct BodyMotion {
  double forward_speed = 0.5;   // m/s
  double surge_amplitude = 0.2; // m
  double surge_period = 15.0;   // s
  double lateral_amplitude = 1.0;  // m
  double lateral_period = 20.0;    // s
  double height = 0.30;            // m
  double bob_amplitude = 0.005;    // m, at twice the gait frequency
  double roll_amplitude = 0.03;    // rad
  double roll_period = 3.0;        // s
  double pitch_amplitude = 0.02;   // rad
  double pitch_period = 4.0;       // s
  friend bool operator==(const BodyMotion&, const BodyMotion&) = default;
};

struct GaitConfig {
  double period = 0.5;        // s
  double duty = 0.6;          // stance fraction
  double swing_height = 0.06; // m
  friend bool operator==(const GaitConfig&, const GaitConfig&) = default;
};

struct SlipConfig {
  double probability = 0.05;   // fraction of frames with an active slip
  double speed_min = 0.2;      // m/s
  double speed_max = 0.8;      // m/s
  double mean_duration = 25.0; // frames, geometric
  int max_duration = 50;       // frames
  friend bool operator==(const SlipConfig&, const SlipConfig&) = default;
};

struct SensorNoise {
  double gyro = 0.01;    // rad/s
  double accel = 0.1;    // m/s^2
  double angle = 1e-3;   // rad
  double rate = 0.01;    // rad/s
  double torque = 0.2;   // N m
  double force = 2.0;    // N
  friend bool operator==(const SensorNoise&, const SensorNoise&) = default;
};

struct ScenarioConfig {
  double duration = 60.0;   // s
  double rate = 500.0;      // Hz
  BodyMotion body;
  GaitConfig gait;
  SlipConfig slip;
  std::array<CalfProfile, kNumLegs> calf{};
  SensorNoise noise;
  Vec3 gyro_bias = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
  double mass = 15.0;              // kg
  double contact_threshold = 10.0; // N
  Vec3 gravity{0.0, 0.0, -9.81};
  std::uint64_t seed = 42;

  int frame_count() const;
  /// Throws ScenarioError for out-of-range fields.
  void validate() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// The standard comparison scenario: 60 s trot with 5 % slip and sinusoidal
/// calf lengths spanning the full admissible range.
ScenarioConfig standard_scenario();

struct Dataset {
  std::vector<SensorFrame> frames;
};

struct TruthFrame {
  double t = 0.0;
  RobotState state;
  LegParams params;
  std::array<Vec3, kNumLegs> slip_velocity{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                           Vec3::Zero()};
  std::array<Vec3, kNumLegs> foot_velocity{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                           Vec3::Zero()};
  std::array<Vec3, kNumLegs> grf{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                 Vec3::Zero()};  // body frame
  LegMask stance{};
  Vec3 omega = Vec3::Zero();        // body angular velocity
  Vec3 accel_world = Vec3::Zero();  // body acceleration
  ParamVector calf_rate = ParamVector::Zero();
  SensorFrame clean;                // sensor readings before noise
};

struct GroundTruth {
  std::vector<TruthFrame> frames;
};

struct Simulation {
  Dataset dataset;
  GroundTruth truth;
};

/// Deterministic in `scn` (including the seed).
Simulation generate(const ScenarioConfig& scn);

/// Adds a foot slip of velocity `slip` (world) to `leg` at frame `index`:
/// the true foot moves by slip * dt for the rest of the stance, is blended
/// back onto its planned path during the next swing, and the leg's encoder
/// and torque readings are regenerated. Throws InvalidArgument when the leg
/// is not in stance at that frame.
void inject_slip(const ScenarioConfig& scn, Simulation& sim, int index, int leg, const Vec3& slip);

}  // namespace dbkf
