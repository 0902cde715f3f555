#include "bevtrack/sim.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace bevtrack {

using json = nlohmann::json;

namespace {

constexpr std::uint64_t kStreamSetup = 1;
constexpr std::uint64_t kStreamMotion = 2;
constexpr std::uint64_t kStreamCamera = 10;
constexpr std::uint64_t kStreamRadar = 20;
constexpr double kMinDepth = 0.5;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::Config, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end())
      throw Error(ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& field) {
  if (auto it = obj.find(key); it != obj.end()) field = it->get<T>();
}

void read_range(const json& obj, const char* key, double& lo, double& hi) {
  if (auto it = obj.find(key); it != obj.end()) {
    if (!it->is_array() || it->size() != 2) throw Error(ErrorKind::Config, std::string(key) + " must be [lo, hi]");
    lo = (*it)[0].get<double>();
    hi = (*it)[1].get<double>();
  }
}

VecX random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  VecX f(dim);
  for (int i = 0; i < dim; ++i) f[i] = n(rng);
  return f / f.norm();
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gauss(std::mt19937_64& rng, double sigma) {
  return sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(rng) : 0.0;
}

int poisson(std::mt19937_64& rng, double rate) {
  return rate > 0.0 ? std::poisson_distribution<int>(rate)(rng) : 0;
}

// Distance from p to the segment [a, b].
double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

// Height of the sight line from `eye` to the ground point `target` where it
// passes closest to `p` in the ground plane.
double sight_height(const Vec3& eye, const Vec2& target, const Vec2& p) {
  const Vec2 a = eye.head<2>();
  const Vec2 ab = target - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 1.0;
  return eye.z() * (1.0 - t);
}

MotionMode sample_mode(std::mt19937_64& rng, MotionMode from, const Mat3& chain) {
  const double u = uniform(rng, 0.0, 1.0);
  double acc = 0.0;
  for (MotionMode m : kAllModes) {
    acc += chain(mode_index(from), mode_index(m));
    if (u < acc) return m;
  }
  return MotionMode::Maneuvering;
}

void reflect(Vec4& s, const Arena& a) {
  for (int axis = 0; axis < 2; ++axis) {
    const double lo = axis == 0 ? a.x_min : a.y_min;
    const double hi = axis == 0 ? a.x_max : a.y_max;
    if (s[axis] < lo) {
      s[axis] = 2.0 * lo - s[axis];
      s[axis + 2] = std::abs(s[axis + 2]);
    } else if (s[axis] > hi) {
      s[axis] = 2.0 * hi - s[axis];
      s[axis + 2] = -std::abs(s[axis + 2]);
    }
    s[axis] = std::clamp(s[axis], lo, hi);
  }
}

std::vector<std::vector<const GtState*>> gt_by_frame(const Scenario& sc) {
  std::vector<std::vector<const GtState*>> out(static_cast<std::size_t>(std::max(sc.spec.frames, 0)));
  for (const auto& g : sc.gt) out[static_cast<std::size_t>(g.frame)].push_back(&g);
  return out;
}

const SimTarget& target_of(const Scenario& sc, TrackId id) {
  for (const auto& t : sc.targets)
    if (t.id == id) return t;
  throw Error(ErrorKind::Config, "unknown target id");
}

}  // namespace

std::mt19937_64 sim_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t sensor, std::uint64_t frame) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(stream ^ splitmix64(sensor ^ splitmix64(frame))));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

void ScenarioSpec::validate() const {
  if (frames < 0) throw Error(ErrorKind::Config, "frames must be nonnegative");
  if (!(dt > 0.0)) throw Error(ErrorKind::Config, "dt must be positive");
  if (!(arena.x_max > arena.x_min) || !(arena.y_max > arena.y_min))
    throw Error(ErrorKind::Config, "arena bounds are empty");
  if (feature_dim < 1) throw Error(ErrorKind::Config, "feature_dim must be positive");
  if (!(H_ref > 0.0)) throw Error(ErrorKind::Config, "H_ref must be positive");
  if (random_targets.count < 0) throw Error(ErrorKind::Config, "random target count must be nonnegative");
  if (random_targets.speed_min > random_targets.speed_max) throw Error(ErrorKind::Config, "speed range is inverted");
  const double inner_w = arena.x_max - arena.x_min - 2.0 * random_targets.margin;
  const double inner_h = arena.y_max - arena.y_min - 2.0 * random_targets.margin;
  if (random_targets.count > 0 && (inner_w <= 0.0 || inner_h <= 0.0))
    throw Error(ErrorKind::Config, "arena margin leaves no room for targets");
  for (const auto& t : targets)
    if (!arena.contains(t.initial.head<2>())) throw Error(ErrorKind::Config, "explicit target starts outside the arena");
  for (double p : {camera_noise.p_D, radar_noise.p_D})
    if (p < 0.0 || p > 1.0) throw Error(ErrorKind::Config, "detection probability must lie in [0, 1]");
  if (camera_noise.clutter_rate < 0.0 || radar_noise.clutter_rate < 0.0)
    throw Error(ErrorKind::Config, "clutter rate must be nonnegative");
  if (radar_noise.points_min < 1 || radar_noise.points_max < radar_noise.points_min)
    throw Error(ErrorKind::Config, "radar points range is invalid");
  for (double p : motion.pi_stay)
    if (p < 0.0 || p > 1.0) throw Error(ErrorKind::Config, "pi_stay entries must lie in [0, 1]");
}

ScenarioSpec parse_scenario_spec(const std::string& text) {
  ScenarioSpec s;
  try {
    const json j = json::parse(text);
    check_keys(j,
               {"name", "frames", "dt", "arena", "feature_dim", "H_ref", "targets", "random_targets", "motion",
                "cameras", "camera_noise", "radars", "radar_noise"},
               "scenario");
    read(j, "name", s.name);
    read(j, "frames", s.frames);
    read(j, "dt", s.dt);
    read(j, "feature_dim", s.feature_dim);
    read(j, "H_ref", s.H_ref);
    if (auto a = j.find("arena"); a != j.end()) {
      check_keys(*a, {"x_min", "y_min", "x_max", "y_max"}, "arena");
      read(*a, "x_min", s.arena.x_min);
      read(*a, "y_min", s.arena.y_min);
      read(*a, "x_max", s.arena.x_max);
      read(*a, "y_max", s.arena.y_max);
    }
    if (auto ts = j.find("targets"); ts != j.end()) {
      TrackId next = 1;
      for (const auto& t : *ts) {
        check_keys(t, {"id", "class", "birth", "death", "x", "y", "vx", "vy"}, "target");
        SimTarget st;
        st.id = t.value("id", next);
        next = std::max(next, st.id) + 1;
        st.class_label = t.value("class", 0);
        st.birth = t.value("birth", 0);
        st.death = t.value("death", -1);
        st.initial << t.at("x").get<double>(), t.at("y").get<double>(), t.value("vx", 0.0), t.value("vy", 0.0);
        s.targets.push_back(st);
      }
    }
    if (auto r = j.find("random_targets"); r != j.end()) {
      check_keys(*r, {"count", "speed", "min_separation", "margin"}, "random_targets");
      read(*r, "count", s.random_targets.count);
      read_range(*r, "speed", s.random_targets.speed_min, s.random_targets.speed_max);
      read(*r, "min_separation", s.random_targets.min_separation);
      read(*r, "margin", s.random_targets.margin);
    }
    if (auto m = j.find("motion"); m != j.end()) {
      check_keys(*m,
                 {"process_noise", "mode_switching", "pi_stay", "damping", "maneuver_factor", "max_speed",
                  "personal_space"},
                 "motion");
      read(*m, "process_noise", s.motion.process_noise);
      read(*m, "mode_switching", s.motion.mode_switching);
      read(*m, "pi_stay", s.motion.pi_stay);
      read(*m, "damping", s.motion.damping);
      read(*m, "maneuver_factor", s.motion.maneuver_factor);
      read(*m, "max_speed", s.motion.max_speed);
      read(*m, "personal_space", s.motion.personal_space);
    }
    if (auto c = j.find("cameras"); c != j.end()) {
      check_keys(*c, {"count", "radius", "height", "focal", "width", "image_height"}, "cameras");
      read(*c, "count", s.cameras.count);
      read(*c, "radius", s.cameras.radius);
      read(*c, "height", s.cameras.height);
      read(*c, "focal", s.cameras.focal);
      read(*c, "width", s.cameras.width);
      read(*c, "image_height", s.cameras.image_height);
    }
    if (auto c = j.find("camera_noise"); c != j.end()) {
      check_keys(*c,
                 {"p_D", "clutter_rate", "pixel_noise", "feature_noise", "hint_noise", "confidence",
                  "clutter_confidence", "occlusion", "occlusion_radius"},
                 "camera_noise");
      auto& n = s.camera_noise;
      read(*c, "p_D", n.p_D);
      read(*c, "clutter_rate", n.clutter_rate);
      read(*c, "pixel_noise", n.pixel_noise);
      read(*c, "feature_noise", n.feature_noise);
      read(*c, "hint_noise", n.hint_noise);
      read_range(*c, "confidence", n.confidence_min, n.confidence_max);
      read_range(*c, "clutter_confidence", n.clutter_confidence_min, n.clutter_confidence_max);
      read(*c, "occlusion", n.occlusion);
      read(*c, "occlusion_radius", n.occlusion_radius);
    }
    if (auto rs = j.find("radars"); rs != j.end()) {
      for (const auto& r : *rs) {
        check_keys(r, {"id", "yaw", "origin"}, "radar");
        RadarPose p;
        p.id = r.at("id").get<std::string>();
        p.yaw = r.value("yaw", 0.0);
        if (auto o = r.find("origin"); o != r.end()) p.origin = Vec2((*o)[0].get<double>(), (*o)[1].get<double>());
        s.radars.push_back(p);
      }
    }
    if (auto r = j.find("radar_noise"); r != j.end()) {
      check_keys(*r,
                 {"p_D", "clutter_rate", "sigma_r", "sigma_theta_deg", "doppler_noise", "points", "fov_deg",
                  "max_range", "moving_clutter_fraction", "v_min"},
                 "radar_noise");
      auto& n = s.radar_noise;
      read(*r, "p_D", n.p_D);
      read(*r, "clutter_rate", n.clutter_rate);
      read(*r, "sigma_r", n.sigma_r);
      read(*r, "sigma_theta_deg", n.sigma_theta_deg);
      read(*r, "doppler_noise", n.doppler_noise);
      if (auto p = r->find("points"); p != r->end()) {
        n.points_min = (*p)[0].get<int>();
        n.points_max = (*p)[1].get<int>();
      }
      read(*r, "fov_deg", n.fov_deg);
      read(*r, "max_range", n.max_range);
      read(*r, "moving_clutter_fraction", n.moving_clutter_fraction);
      read(*r, "v_min", n.v_min);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad scenario spec: ") + e.what());
  }
  s.validate();
  return s;
}

ScenarioSpec load_scenario_spec(const std::string& path) { return parse_scenario_spec(read_text_file(path)); }

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  Scenario sc;
  sc.spec = spec;
  sc.seed = seed;
  const int last = spec.frames - 1;

  std::mt19937_64 setup = sim_stream(seed, kStreamSetup, 0, 0);
  TrackId next_id = 1;
  for (auto t : spec.targets) {
    if (t.death < 0 || t.death > last) t.death = last;
    t.feature = random_unit(setup, spec.feature_dim);
    next_id = std::max(next_id, t.id + 1);
    sc.targets.push_back(std::move(t));
  }
  const RandomTargets& rt = spec.random_targets;
  for (int k = 0; k < rt.count; ++k) {
    SimTarget t;
    t.id = next_id++;
    t.birth = 0;
    t.death = last;
    Vec2 p = Vec2::Zero();
    for (int attempt = 0; attempt < 1000; ++attempt) {
      p = Vec2(uniform(setup, spec.arena.x_min + rt.margin, spec.arena.x_max - rt.margin),
               uniform(setup, spec.arena.y_min + rt.margin, spec.arena.y_max - rt.margin));
      bool clear = true;
      for (const auto& o : sc.targets) clear = clear && (o.initial.head<2>() - p).norm() >= rt.min_separation;
      if (clear) break;
    }
    const double speed = uniform(setup, rt.speed_min, rt.speed_max);
    const double heading = uniform(setup, 0.0, 2.0 * std::numbers::pi);
    t.initial << p, speed * std::cos(heading), speed * std::sin(heading);
    t.feature = random_unit(setup, spec.feature_dim);
    sc.targets.push_back(std::move(t));
  }

  const SimMotion& mo = spec.motion;
  const Mat3 chain = mode_transition_matrix(mo.pi_stay);
  struct Agent {
    std::mt19937_64 rng;
    Vec4 s;
    MotionMode mode = MotionMode::ConstantVelocity;
    double cruise = 0.0;
    Vec2 dv = Vec2::Zero();
    Vec2 half_accel = Vec2::Zero();
  };
  std::vector<Agent> agents;
  for (const auto& t : sc.targets)
    agents.push_back({sim_stream(seed, kStreamMotion, static_cast<std::uint64_t>(t.id), 0), t.initial,
                      MotionMode::ConstantVelocity, std::max(t.initial.tail<2>().norm(), rt.speed_min)});

  for (int f = 0; f <= last; ++f) {
    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const SimTarget& t = sc.targets[i];
      if (f < t.birth || f > t.death) continue;
      Agent& a = agents[i];
      sc.gt.push_back({f, t.id, t.class_label, a.s, a.mode});
      alive.push_back(i);

      const MotionMode prev = a.mode;
      if (mo.mode_switching) a.mode = sample_mode(a.rng, a.mode, chain);
      a.dv.setZero();
      a.half_accel.setZero();
      if (a.mode == MotionMode::Stationary) {
        a.s.tail<2>() *= mo.damping;
        continue;
      }
      if (prev == MotionMode::Stationary && a.s.tail<2>().norm() < 0.5 * a.cruise) {
        const double heading = uniform(a.rng, 0.0, 2.0 * std::numbers::pi);
        a.s.tail<2>() = a.cruise * Vec2(std::cos(heading), std::sin(heading));
      }
      const double sigma = mo.process_noise * (a.mode == MotionMode::Maneuvering ? std::sqrt(mo.maneuver_factor) : 1.0);
      const Vec2 acc(gauss(a.rng, sigma), gauss(a.rng, sigma));
      a.half_accel = 0.5 * acc * spec.dt;
      a.dv = acc * spec.dt;
    }

    // Personal space: pairs inside the radius lose their closing velocity.
    if (mo.personal_space > 0.0) {
      for (std::size_t x = 0; x < alive.size(); ++x)
        for (std::size_t y = x + 1; y < alive.size(); ++y) {
          Agent& a = agents[alive[x]];
          Agent& b = agents[alive[y]];
          const Vec2 gap = a.s.head<2>() - b.s.head<2>();
          const double d = gap.norm();
          if (d >= mo.personal_space || d <= 0.0) continue;
          const Vec2 u = gap / d;
          const double closing = (a.s.tail<2>() + a.dv - b.s.tail<2>() - b.dv).dot(u);
          if (closing >= 0.0) continue;
          const bool move_a = a.mode != MotionMode::Stationary;
          const bool move_b = b.mode != MotionMode::Stationary;
          if (move_a && move_b) {
            a.dv -= 0.5 * closing * u;
            b.dv += 0.5 * closing * u;
          } else if (move_a) {
            a.dv -= closing * u;
          } else if (move_b) {
            b.dv += closing * u;
          }
        }
    }

    for (std::size_t i : alive) {
      Agent& a = agents[i];
      if (a.mode == MotionMode::Stationary) continue;
      // dv - half_accel = a dt / 2 plus any avoidance change.
      a.s.head<2>() += (a.s.tail<2>() + a.dv - a.half_accel) * spec.dt;
      a.s.tail<2>() += a.dv;
      const double speed = a.s.tail<2>().norm();
      if (speed > mo.max_speed) a.s.tail<2>() *= mo.max_speed / speed;
      reflect(a.s, spec.arena);
    }
  }
  std::sort(sc.gt.begin(), sc.gt.end(),
            [](const GtState& a, const GtState& b) { return a.frame != b.frame ? a.frame < b.frame : a.id < b.id; });

  const Vec3 centre(0.5 * (spec.arena.x_min + spec.arena.x_max), 0.5 * (spec.arena.y_min + spec.arena.y_max), 0.0);
  Mat3 K;
  K << spec.cameras.focal, 0.0, 0.5 * spec.cameras.width, 0.0, spec.cameras.focal, 0.5 * spec.cameras.image_height,
      0.0, 0.0, 1.0;
  for (int i = 0; i < spec.cameras.count; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / spec.cameras.count;
    const Vec3 pos = centre + Vec3(spec.cameras.radius * std::cos(angle), spec.cameras.radius * std::sin(angle),
                                   spec.cameras.height);
    sc.calibration.cameras.push_back(CameraModel::look_at("cam" + std::to_string(i), K, pos, centre));
  }
  sc.calibration.radars = spec.radars;
  return sc;
}

std::vector<DetectionRecord> render_camera_detections(const Scenario& sc, std::size_t camera) {
  const CameraModel& cam = sc.calibration.cameras.at(camera);
  const CameraNoise& n = sc.spec.camera_noise;
  const double W = sc.spec.cameras.width;
  const double Himg = sc.spec.cameras.image_height;
  const Vec2 eye = cam.center().head<2>();
  const auto frames = gt_by_frame(sc);

  std::vector<DetectionRecord> out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    std::mt19937_64 rng = sim_stream(sc.seed, kStreamCamera, camera, f);
    const auto& here = frames[f];
    std::vector<double> depth(here.size());
    for (std::size_t k = 0; k < here.size(); ++k)
      depth[k] = cam.depth_of(Vec3(here[k]->state.x(), here[k]->state.y(), 0.0));

    for (std::size_t k = 0; k < here.size(); ++k) {
      const GtState& g = *here[k];
      const double detect_draw = uniform(rng, 0.0, 1.0);
      if (depth[k] < kMinDepth) continue;
      const Vec3 world(g.state.x(), g.state.y(), 0.0);
      const auto px = cam.project(world);
      if (!px || px->x() < 0.0 || px->x() > W || px->y() < 0.0 || px->y() > Himg) continue;
      if (n.occlusion) {
        bool hidden = false;
        for (std::size_t o = 0; o < here.size() && !hidden; ++o) {
          if (o == k || !(depth[o] < depth[k]) || depth[o] < kMinDepth) continue;
          const Vec2 p = here[o]->state.head<2>();
          if (segment_distance(p, eye, g.state.head<2>()) >= n.occlusion_radius) continue;
          hidden = sight_height(cam.center(), g.state.head<2>(), p) <= sc.spec.H_ref;
        }
        if (hidden) continue;
      }
      if (detect_draw >= n.p_D) continue;

      const double h = cam.f_y * sc.spec.H_ref / depth[k];
      const double w = 0.4 * h;
      DetectionRecord r;
      r.frame = static_cast<int>(f);
      r.sensor = cam.id;
      r.kind = DetectionKind::Camera;
      r.camera.u1 = px->x() - 0.5 * w + gauss(rng, n.pixel_noise);
      r.camera.u2 = px->x() + 0.5 * w + gauss(rng, n.pixel_noise);
      r.camera.v1 = px->y() - h + gauss(rng, n.pixel_noise);
      r.camera.v2 = px->y() + gauss(rng, n.pixel_noise);
      r.camera.confidence = uniform(rng, n.confidence_min, n.confidence_max);
      r.camera.class_label = g.class_label;
      VecX feat = target_of(sc, g.id).feature;
      for (Eigen::Index i = 0; i < feat.size(); ++i) feat[i] += gauss(rng, n.feature_noise);
      r.camera.feature = feat / feat.norm();
      r.camera.depth_hint = DepthHint{std::max(kMinDepth, depth[k] + gauss(rng, n.hint_noise)), true};
      r.camera.camera = static_cast<SensorId>(camera);
      out.push_back(std::move(r));
    }

    const int clutter = poisson(rng, n.clutter_rate);
    for (int c = 0; c < clutter; ++c) {
      const double u = uniform(rng, 0.0, W);
      const double v = uniform(rng, 0.5 * Himg, Himg);
      const double h = uniform(rng, 40.0, 250.0);
      DetectionRecord r;
      r.frame = static_cast<int>(f);
      r.sensor = cam.id;
      r.kind = DetectionKind::Camera;
      r.camera.u1 = u - 0.2 * h;
      r.camera.u2 = u + 0.2 * h;
      r.camera.v1 = v - h;
      r.camera.v2 = v;
      r.camera.confidence = uniform(rng, n.clutter_confidence_min, n.clutter_confidence_max);
      r.camera.feature = random_unit(rng, sc.spec.feature_dim);
      r.camera.camera = static_cast<SensorId>(camera);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<DetectionRecord> render_radar_detections(const Scenario& sc, std::size_t radar) {
  const RadarPose& pose = sc.calibration.radars.at(radar);
  const RadarNoise& n = sc.spec.radar_noise;
  const double sigma_theta = n.sigma_theta_deg * std::numbers::pi / 180.0;
  const double fov = n.fov_deg * std::numbers::pi / 180.0;
  const Mat2 to_local = rotation2(pose.yaw).transpose();
  const auto frames = gt_by_frame(sc);

  auto make = [&](int frame, double r, double theta, double doppler, double rcs) {
    DetectionRecord rec;
    rec.frame = frame;
    rec.sensor = pose.id;
    rec.kind = DetectionKind::Radar;
    rec.radar.range = r;
    rec.radar.azimuth = theta;
    rec.radar.doppler = doppler;
    rec.radar.rcs = rcs;
    rec.radar.yaw = pose.yaw;
    rec.radar.origin = pose.origin;
    return rec;
  };

  std::vector<DetectionRecord> out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    std::mt19937_64 rng = sim_stream(sc.seed, kStreamRadar, radar, f);
    for (const GtState* g : frames[f]) {
      const double detect_draw = uniform(rng, 0.0, 1.0);
      const Vec2 local = to_local * (g->state.head<2>() - pose.origin);
      const double r = local.norm();
      const double theta = std::atan2(local.x(), local.y());
      if (r <= 0.0 || r > n.max_range || std::abs(theta) > fov || detect_draw >= n.p_D) continue;
      const Vec2 radial(std::sin(theta), std::cos(theta));
      const double v_r = (to_local * g->state.tail<2>()).dot(radial);
      const int points = std::uniform_int_distribution<int>(n.points_min, n.points_max)(rng);
      const double rcs_mean = g->class_label == 1 ? 10.0 : -5.0;
      for (int p = 0; p < points; ++p) {
        const double rr = std::max(1e-3, r + gauss(rng, n.sigma_r));
        out.push_back(make(static_cast<int>(f), rr, theta + gauss(rng, sigma_theta), v_r + gauss(rng, n.doppler_noise),
                           rcs_mean + gauss(rng, 2.0)));
      }
    }
    const int clutter = poisson(rng, n.clutter_rate);
    for (int c = 0; c < clutter; ++c) {
      const Vec2 world(uniform(rng, sc.spec.arena.x_min, sc.spec.arena.x_max),
                       uniform(rng, sc.spec.arena.y_min, sc.spec.arena.y_max));
      const Vec2 local = to_local * (world - pose.origin);
      const double theta = std::atan2(local.x(), local.y());
      const bool moving = uniform(rng, 0.0, 1.0) < n.moving_clutter_fraction;
      const double speed = moving ? uniform(rng, n.v_min, 3.0 * n.v_min + 1.0) : uniform(rng, 0.0, 0.9 * n.v_min);
      const double sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      const double rcs = gauss(rng, 5.0);
      if (local.norm() <= 0.0 || std::abs(theta) > fov) continue;
      out.push_back(make(static_cast<int>(f), local.norm(), theta, sign * speed, rcs));
    }
  }
  return out;
}

std::vector<DetectionRecord> render_all(const Scenario& sc) {
  std::vector<DetectionRecord> out;
  for (std::size_t c = 0; c < sc.calibration.cameras.size(); ++c)
    for (auto& r : render_camera_detections(sc, c)) out.push_back(std::move(r));
  for (std::size_t r = 0; r < sc.calibration.radars.size(); ++r)
    for (auto& d : render_radar_detections(sc, r)) out.push_back(std::move(d));
  std::stable_sort(out.begin(), out.end(),
                   [](const DetectionRecord& a, const DetectionRecord& b) { return a.frame < b.frame; });
  return out;
}

std::vector<ObjectRecord> ground_truth_records(const Scenario& sc) {
  std::vector<ObjectRecord> out;
  out.reserve(sc.gt.size());
  for (const auto& g : sc.gt) out.push_back({g.frame, g.id, g.state.head<2>(), std::nullopt});
  return out;
}

}  // namespace bevtrack
