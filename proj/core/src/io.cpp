#include "bevtrack/io.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace bevtrack {

using json = nlohmann::json;

namespace {

[[noreturn]] void input_error(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::InputFormat, "line " + std::to_string(line_no) + ": " + what);
}

template <int N>
Eigen::Matrix<double, N, 1> vec_from(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != N)
    throw Error(ErrorKind::InputFormat, std::string("'") + key + "' must hold " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = a[i].get<double>();
  return v;
}

Mat2 mat2_from(const json& j, const char* key) {
  const Vec4 v = vec_from<4>(j, key);
  Mat2 m;
  m << v[0], v[1], v[2], v[3];
  return m;
}

Mat3 mat3_from(const json& j, const char* key) {
  const Eigen::Matrix<double, 9, 1> v = vec_from<9>(j, key);
  Mat3 m;
  m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  return m;
}

json mat_to_json(const auto& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

std::optional<VecX> feature_from(const json& j) {
  auto it = j.find("feature");
  if (it == j.end() || it->is_null()) return std::nullopt;
  VecX f(static_cast<Eigen::Index>(it->size()));
  for (std::size_t i = 0; i < it->size(); ++i) f[static_cast<Eigen::Index>(i)] = (*it)[i].get<double>();
  return f;
}

CameraModel camera_from(const json& j) {
  CameraModel c;
  c.id = j.at("id").get<std::string>();
  c.K = mat3_from(j, "K");
  c.rotation = mat3_from(j, "R");
  c.translation = vec_from<3>(j, "t");
  if (j.contains("n")) c.normal = vec_from<3>(j, "n");
  c.plane_offset = j.value("d_plane", 0.0);
  c.f_y = j.value("f_y", c.K(1, 1));
  c.validate();
  return c;
}

json camera_to_json(const CameraModel& c) {
  return json{{"id", c.id},
              {"K", mat_to_json(c.K)},
              {"R", mat_to_json(c.rotation)},
              {"t", mat_to_json(c.translation)},
              {"n", mat_to_json(c.normal)},
              {"d_plane", c.plane_offset},
              {"f_y", c.f_y}};
}

json parse_json_line(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    input_error(line_no, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InputFormat, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> Calibration::sensor_names() const {
  std::vector<std::string> out;
  for (const auto& c : cameras) out.push_back(c.id);
  for (const auto& r : radars) out.push_back(r.id);
  for (const auto& b : bev_sensors) out.push_back(b);
  return out;
}

SensorId Calibration::sensor_index(const std::string& id) const {
  const auto names = sensor_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == id) return static_cast<SensorId>(i);
  std::string known;
  for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
  throw Error(ErrorKind::InputFormat, "unknown sensor id '" + id + "'; known ids: [" + known + "]");
}

Calibration parse_calibration(const std::string& text) {
  Calibration calib;
  try {
    const json j = json::parse(text);
    const json* cams = &j;
    if (j.is_object()) {
      cams = j.contains("cameras") ? &j.at("cameras") : nullptr;
      if (j.contains("radars"))
        for (const auto& r : j.at("radars")) {
          RadarPose p;
          p.id = r.at("id").get<std::string>();
          p.yaw = r.value("yaw", 0.0);
          if (r.contains("origin")) p.origin = vec_from<2>(r, "origin");
          calib.radars.push_back(p);
        }
      if (j.contains("bev_sensors"))
        for (const auto& b : j.at("bev_sensors")) calib.bev_sensors.push_back(b.get<std::string>());
    } else if (!j.is_array()) {
      throw Error(ErrorKind::Calibration, "calibration must be an array or an object");
    }
    if (cams)
      for (const auto& c : *cams) calib.cameras.push_back(camera_from(c));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Calibration, std::string("bad calibration: ") + e.what());
  }
  const auto names = calib.sensor_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t k = i + 1; k < names.size(); ++k)
      if (names[i] == names[k]) throw Error(ErrorKind::Calibration, "duplicate sensor id '" + names[i] + "'");
  return calib;
}

Calibration load_calibration(const std::string& path) { return parse_calibration(read_text_file(path)); }

std::string calibration_to_json(const Calibration& calib) {
  json j;
  j["cameras"] = json::array();
  for (const auto& c : calib.cameras) j["cameras"].push_back(camera_to_json(c));
  j["radars"] = json::array();
  for (const auto& r : calib.radars)
    j["radars"].push_back({{"id", r.id}, {"yaw", r.yaw}, {"origin", mat_to_json(r.origin)}});
  j["bev_sensors"] = calib.bev_sensors;
  return j.dump(2);
}

DetectionRecord parse_detection(const std::string& line, std::size_t line_no) {
  const json j = parse_json_line(line, line_no);
  DetectionRecord r;
  try {
    r.frame = j.at("frame").get<int>();
    if (r.frame < 0) input_error(line_no, "frame must be nonnegative");
    r.sensor = j.at("sensor").is_string() ? j.at("sensor").get<std::string>() : j.at("sensor").dump();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "camera") {
      r.kind = DetectionKind::Camera;
      const Vec4 b = vec_from<4>(j, "bbox");
      r.camera.u1 = b[0];
      r.camera.v1 = b[1];
      r.camera.u2 = b[2];
      r.camera.v2 = b[3];
      r.camera.confidence = j.at("confidence").get<double>();
      r.camera.class_label = j.value("class", 0);
      r.camera.feature = feature_from(j);
      if (auto h = j.find("depth_hint"); h != j.end() && !h->is_null())
        r.camera.depth_hint = DepthHint{h->at("depth").get<double>(), h->value("confident", false)};
    } else if (kind == "radar") {
      r.kind = DetectionKind::Radar;
      r.radar.range = j.at("range").get<double>();
      r.radar.azimuth = j.at("azimuth").get<double>();
      r.radar.doppler = j.at("doppler").get<double>();
      r.radar.rcs = j.value("rcs", 0.0);
      if (j.contains("yaw")) r.radar_yaw = j.at("yaw").get<double>();
      if (j.contains("origin")) r.radar_origin = vec_from<2>(j, "origin");
    } else if (kind == "bev") {
      r.kind = DetectionKind::Bev;
      r.bev.z = vec_from<2>(j, "z");
      r.bev.r_indep = mat2_from(j, "R_indep");
      r.bev.r_pose = j.contains("R_pose") ? mat2_from(j, "R_pose") : Mat2::Zero();
      r.bev.confidence = j.value("confidence", 1.0);
      r.bev.class_label = j.value("class", 0);
      r.bev.feature = feature_from(j);
    } else {
      input_error(line_no, "unknown detection kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    input_error(line_no, std::string("incomplete record: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InputFormat && std::string_view(e.what()).starts_with("line ")) throw;
    input_error(line_no, e.what());
  }
  return r;
}

std::string detection_to_json(const DetectionRecord& r) {
  json j{{"frame", r.frame}, {"sensor", r.sensor}};
  auto put_feature = [&j](const std::optional<VecX>& f) {
    if (f) j["feature"] = mat_to_json(*f);
  };
  switch (r.kind) {
    case DetectionKind::Camera:
      j["kind"] = "camera";
      j["bbox"] = {r.camera.u1, r.camera.v1, r.camera.u2, r.camera.v2};
      j["confidence"] = r.camera.confidence;
      j["class"] = r.camera.class_label;
      put_feature(r.camera.feature);
      if (r.camera.depth_hint)
        j["depth_hint"] = {{"depth", r.camera.depth_hint->depth}, {"confident", r.camera.depth_hint->confident}};
      break;
    case DetectionKind::Radar:
      j["kind"] = "radar";
      j["range"] = r.radar.range;
      j["azimuth"] = r.radar.azimuth;
      j["doppler"] = r.radar.doppler;
      j["rcs"] = r.radar.rcs;
      if (r.radar_yaw) j["yaw"] = *r.radar_yaw;
      if (r.radar_origin) j["origin"] = mat_to_json(*r.radar_origin);
      break;
    case DetectionKind::Bev:
      j["kind"] = "bev";
      j["z"] = mat_to_json(r.bev.z);
      j["R_indep"] = mat_to_json(r.bev.r_indep);
      j["R_pose"] = mat_to_json(r.bev.r_pose);
      j["confidence"] = r.bev.confidence;
      j["class"] = r.bev.class_label;
      put_feature(r.bev.feature);
      break;
  }
  return j.dump();
}

std::optional<std::pair<int, std::vector<DetectionRecord>>> DetectionReader::next_frame() {
  std::string line;
  while (!pending_ && std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    pending_ = parse_detection(line, line_no_);
    if (pending_->frame < last_frame_) input_error(line_no_, "frames must be nondecreasing");
  }
  if (!pending_) return std::nullopt;

  const int frame = pending_->frame;
  last_frame_ = frame;
  std::vector<DetectionRecord> batch;
  batch.push_back(std::move(*pending_));
  pending_.reset();
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    DetectionRecord r = parse_detection(line, line_no_);
    if (r.frame < frame) input_error(line_no_, "frames must be nondecreasing");
    if (r.frame > frame) {
      pending_ = std::move(r);
      break;
    }
    batch.push_back(std::move(r));
  }
  return std::make_pair(frame, std::move(batch));
}

std::vector<ObjectRecord> parse_ground_truth(std::istream& in) {
  std::vector<ObjectRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = parse_json_line(line, line_no);
    try {
      out.push_back({j.at("frame").get<int>(), j.at("gt_id").get<std::int64_t>(),
                     Vec2(j.at("x").get<double>(), j.at("y").get<double>()), std::nullopt});
    } catch (const json::exception& e) {
      input_error(line_no, std::string("bad ground-truth record: ") + e.what());
    }
  }
  return out;
}

std::vector<ObjectRecord> load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InputFormat, "cannot open " + path);
  return parse_ground_truth(in);
}

std::string ground_truth_to_json(const ObjectRecord& r) {
  return json{{"frame", r.frame}, {"gt_id", r.id}, {"x", r.position.x()}, {"y", r.position.y()}}.dump();
}

std::string track_to_json(const TrackOutput& t) {
  return json{{"frame", t.frame},
              {"id", t.id},
              {"x", t.position.x()},
              {"y", t.position.y()},
              {"vx", t.velocity.x()},
              {"vy", t.velocity.y()},
              {"cov", mat_to_json(t.cov)},
              {"mode", to_string(t.mode)},
              {"state", to_string(t.state)}}
      .dump();
}

std::vector<ObjectRecord> parse_tracks(std::istream& in) {
  std::vector<ObjectRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = parse_json_line(line, line_no);
    try {
      ObjectRecord r{j.at("frame").get<int>(), j.at("id").get<std::int64_t>(),
                     Vec2(j.at("x").get<double>(), j.at("y").get<double>()), std::nullopt};
      if (j.contains("cov")) r.cov = mat2_from(j, "cov");
      out.push_back(r);
    } catch (const json::exception& e) {
      input_error(line_no, std::string("bad track record: ") + e.what());
    } catch (const Error& e) {
      input_error(line_no, e.what());
    }
  }
  return out;
}

std::vector<ObjectRecord> load_tracks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InputFormat, "cannot open " + path);
  return parse_tracks(in);
}

std::string report_to_json(const EvalReport& r) {
  json j{{"MOTA", r.clear.mota},
         {"MOTP", r.clear.motp},
         {"IDF1", r.id.idf1},
         {"mean_match_distance", r.clear.mean_distance},
         {"GOSPA_mean", r.gospa.mean},
         {"GOSPA_per_frame", r.gospa.values},
         {"frames", r.gospa.frames},
         {"counts",
          {{"gt", r.clear.gt_count},
           {"matches", r.clear.matches},
           {"FP", r.clear.false_positives},
           {"FN", r.clear.misses},
           {"IDSW", r.clear.id_switches},
           {"IDTP", r.id.idtp},
           {"IDFP", r.id.idfp},
           {"IDFN", r.id.idfn}}}};
  if (r.nees) {
    j["NEES"] = {{"verdict", to_string(r.nees->verdict)},
                 {"mean", r.nees->mean},
                 {"ci", {r.nees->ci_low, r.nees->ci_high}},
                 {"samples", r.nees->samples},
                 {"coverage_1sigma", r.nees->coverage_1sigma},
                 {"coverage_2sigma", r.nees->coverage_2sigma}};
  }
  return j.dump(2);
}

}  // namespace bevtrack
