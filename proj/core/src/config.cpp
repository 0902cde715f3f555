#include "bevtrack/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace bevtrack {

using nlohmann::json;

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Calibration: return "calibration error";
    case ErrorKind::InvalidDetection: return "invalid detection";
    case ErrorKind::Geometry: return "geometry error";
    case ErrorKind::Numerical: return "numerical error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::InputFormat: return "input format error";
    case ErrorKind::Evaluation: return "evaluation error";
  }
  return "error";
}

double RadarPerceptionConfig::sigma_theta_rad() const {
  return sigma_theta_deg * std::numbers::pi / 180.0;
}

double BevProjectionConfig::sigma2_min_indep() const {
  return std::max(0.0, sigma2_min - sigma_pose * sigma_pose);
}

double ClusteringConfig::tau_p() const { return std::exp(-0.5 * chi2_gate); }

void EvalConfig::validate() const {
  if (!(match_threshold > 0.0)) throw Error(ErrorKind::Config, "evaluation.match_threshold must be > 0");
  if (!(gospa_p >= 1.0)) throw Error(ErrorKind::Config, "evaluation.gospa_p must be >= 1");
  if (!(gospa_c > 0.0)) throw Error(ErrorKind::Config, "evaluation.gospa_c must be > 0");
  if (!(gospa_alpha > 0.0 && gospa_alpha <= 2.0))
    throw Error(ErrorKind::Config, "evaluation.gospa_alpha must lie in (0, 2]");
  if (!(nees_level > 0.0 && nees_level < 1.0))
    throw Error(ErrorKind::Config, "evaluation.nees_level must lie in (0, 1)");
  if (warmup_frames < 0) throw Error(ErrorKind::Config, "evaluation.warmup_frames must be >= 0");
}

const ClassParams& TrackerConfig::class_params(ClassLabel c) const {
  auto it = class_overrides.find(c);
  return it == class_overrides.end() ? class_defaults : it->second;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Config, what);
}

void validate_class(const ClassParams& p, const std::string& where) {
  auto prob = [&](double v, const char* name) {
    require(v > 0.0 && v < 1.0, where + "." + name + " must lie in (0, 1)");
  };
  prob(p.p_S, "p_S");
  require(p.p_D > 0.0 && p.p_D <= 1.0, where + ".p_D must lie in (0, 1]");
  require(p.sigma_v >= 0.0, where + ".sigma_v must be >= 0");
  require(p.Q_scale >= 0.0, where + ".Q_scale must be >= 0");
  require(p.H_ref > 0.0, where + ".H_ref must be > 0");
  for (double s : p.pi_stay) require(s >= 0.0 && s <= 1.0, where + ".pi_stay entries must lie in [0, 1]");
}

}  // namespace

void TrackerConfig::validate() const {
  require(camera.alpha_fp >= 0 && camera.alpha_bbox >= 0, "camera_perception alphas must be >= 0");
  require(camera.eta_fp > 0, "camera_perception.eta_fp must be > 0");
  require(camera.sigma2_min_depth > 0, "camera_perception.sigma2_min_depth must be > 0");
  require(camera.gamma_inflate >= 1.0, "camera_perception.gamma_inflate must be >= 1");
  require(radar.sigma_r > 0 && radar.sigma_theta_deg > 0, "radar_perception sigmas must be > 0");
  require(radar.eps_dbscan > 0 && radar.n_min >= 1, "radar_perception DBSCAN parameters invalid");
  require(radar.v_min >= 0, "radar_perception.v_min must be >= 0");
  require(projection.sigma_pose >= 0, "bev_projection.sigma_pose must be >= 0");
  require(projection.sigma2_min > 0, "bev_projection.sigma2_min must be > 0");
  require(clustering.chi2_gate > 0 && clustering.tau_euc > 0, "clustering gates must be > 0");
  require(clustering.tau_high >= clustering.tau_low, "clustering.tau_high must be >= tau_low");
  validate_class(class_defaults, "tracking");
  for (const auto& [c, p] : class_overrides) validate_class(p, "classes." + std::to_string(c));
  require(tracking.tau_gate > 0 && tracking.tight_gate > 0, "tracking gates must be > 0");
  require(tracking.tau_geo > 0 && tracking.sigma_spatial > 0, "tracking.tau_geo and sigma_spatial must be > 0");
  require(tracking.w_boost >= 0, "tracking.w_boost must be >= 0");
  require(tracking.feature_momentum >= 0 && tracking.feature_momentum <= 1,
          "tracking.feature_momentum must lie in [0, 1]");
  require(lifecycle.N_init >= 1, "lifecycle.N_init must be >= 1");
  require(lifecycle.K_max >= 0 && lifecycle.tau_confirmed >= 0 && lifecycle.tau_tent >= 0,
          "lifecycle counters must be >= 0");
  require(lifecycle.J_max >= 1, "lifecycle.J_max must be >= 1");
  require(lifecycle.tau_prune >= 0 && lifecycle.tau_merge >= 0, "lifecycle thresholds must be >= 0");
  require(motion.dt > 0, "motion.dt must be > 0");
  require(motion.stationary_damping >= 0 && motion.stationary_damping <= 1,
          "motion.stationary_damping must lie in [0, 1]");
  require(motion.maneuver_noise_factor >= 1, "motion.maneuver_noise_factor must be >= 1");
  require(turn.lambda_turn >= 0, "turn_penalty.lambda_turn must be >= 0");
  require(post.d_merge >= 0 && post.g_merge >= 0, "post_processing gates must be >= 0");
  eval.validate();
}

TrackerConfig TrackerConfig::wildtrack() { return TrackerConfig{}; }

TrackerConfig TrackerConfig::multiviewx() {
  TrackerConfig c;
  c.camera.tau_yolo = 0.63;
  c.projection.sigma_pose = 0.22;
  c.projection.sigma2_min = 0.21;
  c.clustering.tau_high = 0.63;
  // No low-confidence pass for this preset.
  c.clustering.tau_low = 0.63;
  c.class_defaults.p_D = 0.95;
  c.lifecycle.tau_confirmed = 1;
  c.lifecycle.tau_tent = 0;
  return c;
}

TrackerConfig TrackerConfig::radarscenes() {
  TrackerConfig c;
  c.projection.sigma_pose = 0.32;
  c.projection.sigma2_min = 0.21;
  c.clustering.chi2_gate = 13.82;
  c.clustering.tau_high = 0.0;
  c.clustering.tau_low = 0.0;
  c.class_defaults.p_D = 0.90;
  c.class_defaults.sigma_v = 8.0;
  c.class_defaults.Q_scale = 15.0;
  c.class_defaults.pi_stay = {0.70, 0.95, 0.15};
  c.tracking.mu_sem = 0.0;
  c.tracking.lambda_reid = 0.0;
  c.tracking.tau_birth = 0.40;
  c.lifecycle.K_max = 5;
  c.lifecycle.tau_confirmed = 3;
  c.lifecycle.tau_tent = 2;
  c.motion.dt = 0.2;
  c.post.tube_merge = true;
  return c;
}

TrackerConfig TrackerConfig::preset(std::string_view name) {
  if (name == "wildtrack") return wildtrack();
  if (name == "multiviewx") return multiviewx();
  if (name == "radarscenes") return radarscenes();
  throw Error(ErrorKind::Config,
              "unknown preset '" + std::string(name) + "' (valid: wildtrack, multiviewx, radarscenes)");
}

namespace {

enum class ParamKind { Real, Integer, Boolean };

struct Param {
  const char* section;
  const char* key;
  ParamKind kind;
  std::function<void*(TrackerConfig&)> ref;
};

template <class F>
Param real(const char* s, const char* k, F f) {
  return {s, k, ParamKind::Real, [f](TrackerConfig& c) -> void* { return &f(c); }};
}
template <class F>
Param integer(const char* s, const char* k, F f) {
  return {s, k, ParamKind::Integer, [f](TrackerConfig& c) -> void* { return &f(c); }};
}
template <class F>
Param boolean(const char* s, const char* k, F f) {
  return {s, k, ParamKind::Boolean, [f](TrackerConfig& c) -> void* { return &f(c); }};
}

#define BT_REAL(sec, key, expr) real(sec, key, [](TrackerConfig& c) -> double& { return expr; })
#define BT_INT(sec, key, expr) integer(sec, key, [](TrackerConfig& c) -> int& { return expr; })
#define BT_BOOL(sec, key, expr) boolean(sec, key, [](TrackerConfig& c) -> bool& { return expr; })

const std::vector<Param>& param_table() {
  static const std::vector<Param> table = {
      BT_REAL("camera_perception", "tau_yolo", c.camera.tau_yolo),
      BT_REAL("camera_perception", "alpha_fp", c.camera.alpha_fp),
      BT_REAL("camera_perception", "alpha_bbox", c.camera.alpha_bbox),
      BT_REAL("camera_perception", "eta_fp", c.camera.eta_fp),
      BT_REAL("camera_perception", "sigma2_min_depth", c.camera.sigma2_min_depth),
      BT_REAL("camera_perception", "gamma_inflate", c.camera.gamma_inflate),
      BT_REAL("camera_perception", "hint_disagreement", c.camera.hint_disagreement),
      BT_REAL("camera_perception", "H_ref", c.class_defaults.H_ref),
      BT_REAL("radar_perception", "sigma_r", c.radar.sigma_r),
      BT_REAL("radar_perception", "sigma_theta", c.radar.sigma_theta_deg),
      BT_REAL("radar_perception", "eps_dbscan", c.radar.eps_dbscan),
      BT_INT("radar_perception", "n_min", c.radar.n_min),
      BT_REAL("radar_perception", "v_min", c.radar.v_min),
      BT_REAL("radar_perception", "rcs_vehicle_dbsm", c.radar.rcs_vehicle_dbsm),
      BT_REAL("bev_projection", "sigma_pose", c.projection.sigma_pose),
      BT_REAL("bev_projection", "sigma2_min", c.projection.sigma2_min),
      BT_REAL("clustering", "chi2_gate", c.clustering.chi2_gate),
      BT_REAL("clustering", "tau_euc", c.clustering.tau_euc),
      BT_REAL("clustering", "tau_high", c.clustering.tau_high),
      BT_REAL("clustering", "tau_low", c.clustering.tau_low),
      BT_BOOL("clustering", "single_sensor_relax", c.clustering.single_sensor_relax),
      BT_REAL("tracking", "p_S", c.class_defaults.p_S),
      BT_REAL("tracking", "p_D", c.class_defaults.p_D),
      BT_REAL("tracking", "lambda_assoc", c.tracking.lambda_assoc),
      BT_REAL("tracking", "mu_sem", c.tracking.mu_sem),
      BT_REAL("tracking", "lambda_reid", c.tracking.lambda_reid),
      BT_REAL("tracking", "w_boost", c.tracking.w_boost),
      BT_REAL("tracking", "sigma_spatial", c.tracking.sigma_spatial),
      BT_REAL("tracking", "tau_geo", c.tracking.tau_geo),
      BT_REAL("tracking", "tau_new", c.tracking.tau_new),
      BT_REAL("tracking", "sigma_v", c.class_defaults.sigma_v),
      BT_REAL("tracking", "tau_birth", c.tracking.tau_birth),
      BT_REAL("tracking", "Q_scale", c.class_defaults.Q_scale),
      BT_REAL("tracking", "tau_gate", c.tracking.tau_gate),
      BT_REAL("tracking", "tight_gate", c.tracking.tight_gate),
      BT_REAL("tracking", "feature_momentum", c.tracking.feature_momentum),
      BT_INT("lifecycle", "N_init", c.lifecycle.N_init),
      BT_INT("lifecycle", "K_max", c.lifecycle.K_max),
      BT_INT("lifecycle", "J_max", c.lifecycle.J_max),
      BT_INT("lifecycle", "tau_confirmed", c.lifecycle.tau_confirmed),
      BT_INT("lifecycle", "tau_tent", c.lifecycle.tau_tent),
      BT_REAL("lifecycle", "tau_prune", c.lifecycle.tau_prune),
      BT_REAL("lifecycle", "tau_merge", c.lifecycle.tau_merge),
      BT_REAL("motion", "pi_stay_1", c.class_defaults.pi_stay[0]),
      BT_REAL("motion", "pi_stay_2", c.class_defaults.pi_stay[1]),
      BT_REAL("motion", "pi_stay_3", c.class_defaults.pi_stay[2]),
      BT_REAL("motion", "dt", c.motion.dt),
      BT_REAL("motion", "stationary_damping", c.motion.stationary_damping),
      BT_REAL("motion", "maneuver_noise_factor", c.motion.maneuver_noise_factor),
      BT_REAL("turn_penalty", "lambda_turn", c.turn.lambda_turn),
      BT_BOOL("post_processing", "tube_merge", c.post.tube_merge),
      BT_REAL("post_processing", "d_merge", c.post.d_merge),
      BT_INT("post_processing", "g_merge", c.post.g_merge),
      BT_REAL("evaluation", "match_threshold", c.eval.match_threshold),
      BT_REAL("evaluation", "gospa_p", c.eval.gospa_p),
      BT_REAL("evaluation", "gospa_c", c.eval.gospa_c),
      BT_REAL("evaluation", "gospa_alpha", c.eval.gospa_alpha),
      BT_REAL("evaluation", "nees_level", c.eval.nees_level),
      BT_INT("evaluation", "warmup_frames", c.eval.warmup_frames),
  };
  return table;
}

#undef BT_REAL
#undef BT_INT
#undef BT_BOOL

const Param* find_param(std::string_view name) {
  for (const auto& p : param_table())
    if (name == p.key) return &p;
  return nullptr;
}

bool is_pi_stay_component(std::string_view key) { return key.starts_with("pi_stay_"); }

std::string join_names() {
  std::string out;
  for (const auto& n : parameter_names()) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

void assign_from_json(TrackerConfig& cfg, const Param& p, const json& v, const std::string& where) {
  void* target = p.ref(cfg);
  switch (p.kind) {
    case ParamKind::Real:
      if (!v.is_number()) throw Error(ErrorKind::Config, where + " must be a number");
      *static_cast<double*>(target) = v.get<double>();
      break;
    case ParamKind::Integer:
      if (!v.is_number_integer()) throw Error(ErrorKind::Config, where + " must be an integer");
      *static_cast<int*>(target) = v.get<int>();
      break;
    case ParamKind::Boolean:
      if (!v.is_boolean()) throw Error(ErrorKind::Config, where + " must be a boolean");
      *static_cast<bool*>(target) = v.get<bool>();
      break;
  }
}

std::array<double, 3> parse_pi_stay(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3)
    throw Error(ErrorKind::Config, where + " must be an array of 3 numbers");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw Error(ErrorKind::Config, where + " must be an array of 3 numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

ClassParams parse_class(const json& obj, ClassParams base, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::Config, where + " must be an object");
  for (const auto& [key, v] : obj.items()) {
    const std::string w = where + "." + key;
    auto num = [&]() {
      if (!v.is_number()) throw Error(ErrorKind::Config, w + " must be a number");
      return v.get<double>();
    };
    if (key == "p_S") base.p_S = num();
    else if (key == "p_D") base.p_D = num();
    else if (key == "sigma_v") base.sigma_v = num();
    else if (key == "Q_scale") base.Q_scale = num();
    else if (key == "H_ref") base.H_ref = num();
    else if (key == "pi_stay") base.pi_stay = parse_pi_stay(v, w);
    else
      throw Error(ErrorKind::Config,
                  "unknown key '" + w + "' (valid: p_S, p_D, sigma_v, Q_scale, H_ref, pi_stay)");
  }
  return base;
}

}  // namespace

std::vector<std::string> parameter_names() {
  std::vector<std::string> out;
  for (const auto& p : param_table()) out.emplace_back(p.key);
  return out;
}

double get_parameter(const TrackerConfig& cfg, std::string_view name) {
  const Param* p = find_param(name);
  if (!p) throw Error(ErrorKind::Config, "unknown parameter '" + std::string(name) + "'; valid: " + join_names());
  auto& mut = const_cast<TrackerConfig&>(cfg);
  void* target = p->ref(mut);
  switch (p->kind) {
    case ParamKind::Real: return *static_cast<double*>(target);
    case ParamKind::Integer: return *static_cast<int*>(target);
    case ParamKind::Boolean: return *static_cast<bool*>(target) ? 1.0 : 0.0;
  }
  return 0.0;
}

void set_parameter(TrackerConfig& cfg, std::string_view name, double value) {
  const Param* p = find_param(name);
  if (!p) throw Error(ErrorKind::Config, "unknown parameter '" + std::string(name) + "'; valid: " + join_names());
  void* target = p->ref(cfg);
  switch (p->kind) {
    case ParamKind::Real: *static_cast<double*>(target) = value; break;
    case ParamKind::Integer:
      if (value != std::floor(value))
        throw Error(ErrorKind::Config, "parameter '" + std::string(name) + "' requires an integer value");
      *static_cast<int*>(target) = static_cast<int>(value);
      break;
    case ParamKind::Boolean: *static_cast<bool*>(target) = value != 0.0; break;
  }
}

TrackerConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");

  TrackerConfig cfg;
  if (auto it = doc.find("preset"); it != doc.end()) {
    if (!it->is_string()) throw Error(ErrorKind::Config, "preset must be a string");
    cfg = TrackerConfig::preset(it->get<std::string>());
  }

  const json* classes = nullptr;
  for (const auto& [section, body] : doc.items()) {
    if (section == "preset") continue;
    if (section == "classes") {
      classes = &body;
      continue;
    }
    bool known_section = false;
    for (const auto& p : param_table()) known_section = known_section || section == p.section;
    if (!known_section) throw Error(ErrorKind::Config, "unknown config section '" + section + "'");
    if (!body.is_object()) throw Error(ErrorKind::Config, "section '" + section + "' must be an object");

    for (const auto& [key, v] : body.items()) {
      const std::string where = section + "." + key;
      if (section == "motion" && key == "pi_stay") {
        cfg.class_defaults.pi_stay = parse_pi_stay(v, where);
        continue;
      }
      const Param* p = nullptr;
      for (const auto& cand : param_table())
        if (section == cand.section && key == cand.key && !is_pi_stay_component(key)) p = &cand;
      if (!p) throw Error(ErrorKind::Config, "unknown config key '" + where + "'");
      assign_from_json(cfg, *p, v, where);
    }
  }

  if (classes) {
    if (!classes->is_object()) throw Error(ErrorKind::Config, "classes must be an object keyed by class label");
    for (const auto& [label, body] : classes->items()) {
      int c = 0;
      try {
        std::size_t used = 0;
        c = std::stoi(label, &used);
        if (used != label.size()) throw std::invalid_argument(label);
      } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "class label '" + label + "' is not an integer");
      }
      cfg.class_overrides[c] = parse_class(body, cfg.class_defaults, "classes." + label);
    }
  }

  cfg.validate();
  return cfg;
}

TrackerConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const TrackerConfig& cfg) {
  json doc = json::object();
  auto& mut = const_cast<TrackerConfig&>(cfg);
  for (const auto& p : param_table()) {
    if (is_pi_stay_component(p.key)) continue;
    void* target = p.ref(mut);
    json& slot = doc[p.section][p.key];
    switch (p.kind) {
      case ParamKind::Real: slot = *static_cast<double*>(target); break;
      case ParamKind::Integer: slot = *static_cast<int*>(target); break;
      case ParamKind::Boolean: slot = *static_cast<bool*>(target); break;
    }
  }
  doc["motion"]["pi_stay"] = cfg.class_defaults.pi_stay;
  if (!cfg.class_overrides.empty()) {
    json classes = json::object();
    for (const auto& [c, p] : cfg.class_overrides) {
      classes[std::to_string(c)] = {{"p_S", p.p_S}, {"p_D", p.p_D},         {"sigma_v", p.sigma_v},
                                    {"Q_scale", p.Q_scale}, {"H_ref", p.H_ref}, {"pi_stay", p.pi_stay}};
    }
    doc["classes"] = classes;
  }
  return doc.dump(2);
}

}  // namespace bevtrack
