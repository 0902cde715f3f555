#pragma once

#include "bevtrack/geometry.hpp"
#include "bevtrack/metrics.hpp"
#include "bevtrack/phd.hpp"
#include "bevtrack/types.hpp"

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace bevtrack {

struct RadarPose {
  std::string id;
  double yaw = 0.0;
  Vec2 origin = Vec2::Zero();
};

/// All sensors of a rig. Sensor indices run over cameras, then radars, then
/// BEV-only sensors, in file order.
struct Calibration {
  std::vector<CameraModel> cameras;
  std::vector<RadarPose> radars;
  std::vector<std::string> bev_sensors;

  std::size_t sensor_count() const { return cameras.size() + radars.size() + bev_sensors.size(); }
  std::vector<std::string> sensor_names() const;
  /// Throws Error(InputFormat) naming the known ids when `id` is unknown.
  SensorId sensor_index(const std::string& id) const;
};

/// Accepts either a bare array of cameras or an object with "cameras",
/// "radars" and "bev_sensors".
Calibration parse_calibration(const std::string& json_text);
Calibration load_calibration(const std::string& path);
std::string calibration_to_json(const Calibration& calib);

enum class DetectionKind { Camera, Radar, Bev };

struct DetectionRecord {
  int frame = 0;
  std::string sensor;
  DetectionKind kind = DetectionKind::Camera;
  PixelDetection camera;
  RadarPoint radar;
  /// Radar records may override the mounting pose per frame.
  std::optional<double> radar_yaw;
  std::optional<Vec2> radar_origin;
  BevMeasurement bev;
};

/// Parses one JSON line. Throws Error(InputFormat) mentioning `line_no`.
DetectionRecord parse_detection(const std::string& line, std::size_t line_no);
std::string detection_to_json(const DetectionRecord& rec);

/// Streams a detections file one frame at a time.
class DetectionReader {
 public:
  explicit DetectionReader(std::istream& in) : in_(in) {}

  /// Records of the next frame present in the stream, or nullopt at the end.
  /// Frames must be nondecreasing.
  std::optional<std::pair<int, std::vector<DetectionRecord>>> next_frame();

 private:
  std::istream& in_;
  std::optional<DetectionRecord> pending_;
  std::size_t line_no_ = 0;
  int last_frame_ = -1;
};

/// Ground truth lines {frame, gt_id, x, y}.
std::vector<ObjectRecord> load_ground_truth(const std::string& path);
std::vector<ObjectRecord> parse_ground_truth(std::istream& in);
std::string ground_truth_to_json(const ObjectRecord& r);

/// Track lines {frame, id, x, y, vx, vy, cov, mode, state}.
std::string track_to_json(const TrackOutput& t);
std::vector<ObjectRecord> load_tracks(const std::string& path);
std::vector<ObjectRecord> parse_tracks(std::istream& in);

std::string report_to_json(const EvalReport& report);

std::string read_text_file(const std::string& path);

}  // namespace bevtrack
