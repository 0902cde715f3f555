#pragma once

#include "bevtrack/types.hpp"

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bevtrack {

struct CameraPerceptionConfig {
  double tau_yolo = 0.1;
  double alpha_fp = 0.035;
  double alpha_bbox = 0.05;
  double eta_fp = 3.0;
  double sigma2_min_depth = 1e-4;
  double gamma_inflate = 1.75;
  /// Disagreement (m) between an external depth hint and the fused depth that
  /// triggers variance inflation.
  double hint_disagreement = 3.0;
};

struct RadarPerceptionConfig {
  double sigma_r = 0.10;
  double sigma_theta_deg = 1.8;
  double eps_dbscan = 2.5;
  int n_min = 2;
  double v_min = 0.5;
  /// Mean cluster RCS at or above this labels the cluster as class 1.
  double rcs_vehicle_dbsm = 5.0;

  double sigma_theta_rad() const;
};

struct BevProjectionConfig {
  double sigma_pose = 0.17;
  double sigma2_min = 0.16;

  Mat2 r_pose() const { return sigma_pose * sigma_pose * Mat2::Identity(); }
  /// Floor applied to the independent term so the total keeps sigma2_min.
  double sigma2_min_indep() const;
};

struct ClusteringConfig {
  double chi2_gate = 9.21;
  double tau_euc = 0.5;
  double tau_high = 0.5;
  double tau_low = 0.2;
  /// Keep single-sensor clusters when only one sensor reports in a frame.
  bool single_sensor_relax = true;

  /// Survival probability threshold matching the chi-square gate.
  double tau_p() const;
};

/// Parameters that may differ per object class.
struct ClassParams {
  double p_S = 0.99;
  double p_D = 0.90;
  double sigma_v = 1.0;
  double Q_scale = 0.9;
  std::array<double, 3> pi_stay = {0.75, 0.94, 0.10};
  double H_ref = 1.7;
};

struct TrackingConfig {
  double lambda_assoc = 2.5;
  double mu_sem = 2.0;
  double lambda_reid = 3.0;
  double w_boost = 0.15;
  double sigma_spatial = 1.0;
  double tau_geo = 5.0;
  double tau_new = 12.0;
  double tau_birth = 0.65;
  double tau_gate = 9.21;
  double tight_gate = 4.61;
  /// Exponential moving-average momentum for track appearance features.
  double feature_momentum = 0.9;
};

struct LifecycleConfig {
  int N_init = 2;
  int K_max = 2;
  int J_max = 100;
  int tau_confirmed = 0;
  int tau_tent = 1;
  double tau_prune = 0.05;
  double tau_merge = 2.5;
};

struct MotionConfig {
  double dt = 0.5;
  /// Per-step velocity factor of the stationary mode.
  double stationary_damping = 0.5;
  /// Process noise multiplier of the maneuvering mode over the CV mode.
  double maneuver_noise_factor = 10.0;
};

struct TurnPenaltyConfig {
  double lambda_turn = 1.5;
};

struct PostProcessingConfig {
  bool tube_merge = false;
  double d_merge = 6.0;
  int g_merge = 5;
};

struct EvalConfig {
  double match_threshold = 1.0;
  double gospa_p = 2.0;
  double gospa_c = 1.0;
  double gospa_alpha = 2.0;
  double nees_level = 0.95;
  /// Frames at the start of a sequence excluded from scoring.
  int warmup_frames = 0;

  void validate() const;
};

struct TrackerConfig {
  CameraPerceptionConfig camera;
  RadarPerceptionConfig radar;
  BevProjectionConfig projection;
  ClusteringConfig clustering;
  ClassParams class_defaults;
  std::map<ClassLabel, ClassParams> class_overrides;
  TrackingConfig tracking;
  LifecycleConfig lifecycle;
  MotionConfig motion;
  TurnPenaltyConfig turn;
  PostProcessingConfig post;
  EvalConfig eval;

  const ClassParams& class_params(ClassLabel c) const;

  /// Throws Error(Config) on out-of-range values.
  void validate() const;

  static TrackerConfig wildtrack();
  static TrackerConfig multiviewx();
  static TrackerConfig radarscenes();
  static TrackerConfig preset(std::string_view name);
};

/// Parses a JSON config document. Sections mirror the hyperparameter tables;
/// unknown sections or keys are errors. An optional "preset" key selects the
/// base values before overrides apply.
TrackerConfig parse_config(std::string_view json_text);
TrackerConfig load_config(const std::string& path);
std::string config_to_json(const TrackerConfig& cfg);

/// Names accepted by set_parameter / sweep-param.
std::vector<std::string> parameter_names();
double get_parameter(const TrackerConfig& cfg, std::string_view name);
/// Throws Error(Config) listing valid names when `name` is unknown.
void set_parameter(TrackerConfig& cfg, std::string_view name, double value);

}  // namespace bevtrack
