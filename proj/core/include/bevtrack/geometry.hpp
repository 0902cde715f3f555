#pragma once

#include "bevtrack/config.hpp"
#include "bevtrack/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bevtrack {

/// Calibrated pinhole camera over a horizontal ground plane.
///
/// `rotation` and `translation` map camera coordinates into the world frame
/// (X_w = R X_c + t). The world frame is defined so the ground plane normal is
/// +z; `plane_offset` is the plane height.
struct CameraModel {
  std::string id;
  Mat3 K = Mat3::Identity();
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double plane_offset = 0.0;
  double f_y = 1.0;

  /// Checks the calibration invariants; throws Error(Calibration).
  void validate() const;
  Mat3 K_inverse() const;
  Vec3 center() const { return translation; }

  /// Pinhole projection of a world point; nullopt when it lies behind the camera.
  std::optional<Vec2> project(const Vec3& world) const;
  /// Depth of a world point along the optical axis.
  double depth_of(const Vec3& world) const;

  /// Camera at `position` looking at `target` with the image y axis pointing
  /// towards the ground.
  static CameraModel look_at(std::string id, const Mat3& K, const Vec3& position, const Vec3& target);
};

struct DepthHint {
  double depth = 0.0;
  bool confident = false;
};

struct PixelDetection {
  double u1 = 0, v1 = 0, u2 = 0, v2 = 0;
  double confidence = 1.0;
  ClassLabel class_label = 0;
  std::optional<VecX> feature;
  SensorId camera = 0;
  std::optional<DepthHint> depth_hint;

  /// Bottom-centre pixel ((u1+u2)/2, v2).
  Vec2 footpoint() const { return {0.5 * (u1 + u2), v2}; }
  double height_px() const { return v2 - v1; }
};

struct DepthEstimate {
  double depth = 0.0;
  double variance = 0.0;
};

struct RadarPoint {
  double range = 0.0;
  /// Radians from the forward sensor axis.
  double azimuth = 0.0;
  double doppler = 0.0;
  double rcs = 0.0;
  /// Ego yaw plus mount angle.
  double yaw = 0.0;
  Vec2 origin = Vec2::Zero();
};

/// r_c = K^-1 [u, v, 1]^T, not normalised.
Vec3 backproject_ray(const Vec2& pixel, const CameraModel& camera);

/// Signed ray-plane intersection parameter of the pixel ray. Throws
/// Error(Geometry) when the ray is parallel to the plane.
double ray_plane_parameter(const Vec2& pixel, const CameraModel& camera);

DepthEstimate footpoint_depth(const PixelDetection& det, const CameraModel& camera,
                              const CameraPerceptionConfig& cfg);
DepthEstimate bbox_depth_prior(const PixelDetection& det, const CameraModel& camera, double H_ref,
                               const CameraPerceptionConfig& cfg);
DepthEstimate fuse_depth(const DepthEstimate& fp, const DepthEstimate& bbox, const std::optional<DepthHint>& hint,
                         const CameraPerceptionConfig& cfg);

/// Clamps the eigenvalues of a symmetric 2x2 matrix from below.
Mat2 floor_eigenvalues(const Mat2& m, double floor);

struct BevProjection {
  Vec2 z = Vec2::Zero();
  /// d z / d depth.
  Vec2 jacobian = Vec2::Zero();
  Mat2 r_depth = Mat2::Zero();
  Mat2 r_indep = Mat2::Zero();
  Mat2 r_pose = Mat2::Zero();
};

BevProjection project_to_bev(const Vec2& pixel, const DepthEstimate& depth, const CameraModel& camera,
                             const BevProjectionConfig& cfg);

/// Full camera front-end for one detection. Returns nullopt when the detection
/// is discarded (below tau_yolo, degenerate box, or a footpoint ray that does
/// not hit the ground in front of the camera).
std::optional<BevMeasurement> camera_detection_to_bev(const PixelDetection& det, const CameraModel& camera,
                                                      const TrackerConfig& cfg);

/// Sensor-local polar-to-Cartesian covariance J diag(sr^2, st^2) J^T.
Mat2 radar_sensor_covariance(double range, double azimuth, double sigma_r, double sigma_theta);
Mat2 rotation2(double angle);

BevMeasurement radar_point_to_bev(const RadarPoint& p, double sigma_r, double sigma_theta, double sigma_pose,
                                  const BevProjectionConfig& cfg);

/// DBSCAN labels (-1 = noise). `min_samples` counts the point itself.
std::vector<int> dbscan(std::span<const Vec2> points, double eps, int min_samples);

/// Moving-object filter, DBSCAN and precision-weighted reduction of one radar
/// sensor's frame.
std::vector<BevMeasurement> radar_frame_to_measurements(std::span<const RadarPoint> points, SensorId sensor,
                                                        const TrackerConfig& cfg);

}  // namespace bevtrack
