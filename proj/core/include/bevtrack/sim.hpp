#pragma once

#include "bevtrack/io.hpp"
#include "bevtrack/metrics.hpp"
#include "bevtrack/phd.hpp"
#include "bevtrack/types.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace bevtrack {

/// Counter-based stream splitting: one independent generator per
/// (seed, stream, sensor, frame) tuple, so a sensor's noise does not depend on
/// which other sensors are rendered.
std::mt19937_64 sim_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t sensor, std::uint64_t frame);

struct Arena {
  double x_min = -10.0, y_min = -10.0, x_max = 10.0, y_max = 10.0;

  bool contains(const Vec2& p) const { return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max; }
};

struct SimTarget {
  TrackId id = 0;
  ClassLabel class_label = 0;
  int birth = 0;
  /// Last frame the target exists (inclusive); negative means the last frame.
  int death = -1;
  Vec4 initial = Vec4::Zero();
  VecX feature;
};

struct RandomTargets {
  int count = 0;
  double speed_min = 0.3;
  double speed_max = 1.0;
  double min_separation = 1.5;
  double margin = 1.0;
};

struct SimMotion {
  /// Acceleration noise standard deviation (m/s^2) in the constant-velocity mode.
  double process_noise = 0.0;
  bool mode_switching = false;
  std::array<double, 3> pi_stay = {0.9, 0.97, 0.6};
  double damping = 0.5;
  double maneuver_factor = 10.0;
  double max_speed = 1.5;
  /// Pairs closer than this lose their closing velocity component; 0 disables.
  double personal_space = 0.0;
};

struct CameraRing {
  int count = 0;
  double radius = 16.0;
  double height = 6.0;
  double focal = 1000.0;
  double width = 1920.0;
  double image_height = 1080.0;
};

struct CameraNoise {
  double p_D = 1.0;
  double clutter_rate = 0.0;
  double pixel_noise = 0.0;
  double feature_noise = 0.0;
  double hint_noise = 0.3;
  double confidence_min = 0.55;
  double confidence_max = 0.98;
  double clutter_confidence_min = 0.1;
  double clutter_confidence_max = 0.6;
  /// A target is hidden when another, nearer target stands within
  /// `occlusion_radius` of the sight line (in the ground plane) where that
  /// line is still below body height.
  bool occlusion = false;
  double occlusion_radius = 0.3;
};

struct RadarNoise {
  double p_D = 0.9;
  double clutter_rate = 0.0;
  double sigma_r = 0.1;
  double sigma_theta_deg = 1.8;
  double doppler_noise = 0.1;
  int points_min = 1;
  int points_max = 5;
  double fov_deg = 75.0;
  double max_range = 80.0;
  double moving_clutter_fraction = 0.3;
  double v_min = 0.5;
};

struct ScenarioSpec {
  std::string name = "scenario";
  int frames = 100;
  double dt = 0.5;
  Arena arena;
  int feature_dim = 16;
  double H_ref = 1.7;
  std::vector<SimTarget> targets;
  RandomTargets random_targets;
  SimMotion motion;
  CameraRing cameras;
  CameraNoise camera_noise;
  std::vector<RadarPose> radars;
  RadarNoise radar_noise;

  /// Throws Error(Config).
  void validate() const;
};

ScenarioSpec parse_scenario_spec(const std::string& json_text);
ScenarioSpec load_scenario_spec(const std::string& path);

struct GtState {
  int frame = 0;
  TrackId id = 0;
  ClassLabel class_label = 0;
  Vec4 state = Vec4::Zero();
  MotionMode mode = MotionMode::ConstantVelocity;
};

struct Scenario {
  ScenarioSpec spec;
  std::uint64_t seed = 0;
  std::vector<SimTarget> targets;
  Calibration calibration;
  /// Ordered by frame, then id.
  std::vector<GtState> gt;
};

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed);

/// Synthetic detections of camera `camera` (index into the calibration).
std::vector<DetectionRecord> render_camera_detections(const Scenario& scenario, std::size_t camera);

/// Synthetic point cloud of radar `radar` (index into the calibration radars).
std::vector<DetectionRecord> render_radar_detections(const Scenario& scenario, std::size_t radar);

/// Every sensor, ordered by frame then sensor index.
std::vector<DetectionRecord> render_all(const Scenario& scenario);

std::vector<ObjectRecord> ground_truth_records(const Scenario& scenario);

}  // namespace bevtrack
