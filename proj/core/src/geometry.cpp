#include "bevtrack/geometry.hpp"

#include "bevtrack/fusion.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <deque>

namespace bevtrack {

namespace {

constexpr double kParallelTolerance = 1e-12;
// Keeps the independent term invertible when the configured floor is zero.
constexpr double kMinIndependentEigenvalue = 1e-9;

}  // namespace

void CameraModel::validate() const {
  if (std::abs(K.determinant()) < 1e-12) throw Error(ErrorKind::Calibration, "camera '" + id + "': K is singular");
  if (std::abs(normal.norm() - 1.0) > 1e-9)
    throw Error(ErrorKind::Calibration, "camera '" + id + "': plane normal must be unit length");
  if ((rotation.transpose() * rotation - Mat3::Identity()).norm() > 1e-6)
    throw Error(ErrorKind::Calibration, "camera '" + id + "': R is not orthonormal");
  if (!(f_y > 0.0)) throw Error(ErrorKind::Calibration, "camera '" + id + "': f_y must be positive");
}

Mat3 CameraModel::K_inverse() const {
  if (std::abs(K.determinant()) < 1e-12) throw Error(ErrorKind::Calibration, "camera '" + id + "': K is singular");
  return K.inverse();
}

double CameraModel::depth_of(const Vec3& world) const {
  return (rotation.transpose() * (world - translation)).z();
}

std::optional<Vec2> CameraModel::project(const Vec3& world) const {
  const Vec3 xc = rotation.transpose() * (world - translation);
  if (xc.z() <= 1e-9) return std::nullopt;
  const Vec3 p = K * xc;
  return Vec2(p.x() / p.z(), p.y() / p.z());
}

CameraModel CameraModel::look_at(std::string id, const Mat3& K, const Vec3& position, const Vec3& target) {
  const Vec3 forward = (target - position).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.norm() < 1e-9) throw Error(ErrorKind::Calibration, "camera '" + id + "': cannot look straight down");
  right.normalize();
  const Vec3 down = forward.cross(right);

  CameraModel cam;
  cam.id = std::move(id);
  cam.K = K;
  cam.rotation.col(0) = right;
  cam.rotation.col(1) = down;
  cam.rotation.col(2) = forward;
  cam.translation = position;
  cam.f_y = K(1, 1);
  return cam;
}

Vec3 backproject_ray(const Vec2& pixel, const CameraModel& camera) {
  return camera.K_inverse() * Vec3(pixel.x(), pixel.y(), 1.0);
}

double ray_plane_parameter(const Vec2& pixel, const CameraModel& camera) {
  const Vec3 ray_world = camera.rotation * backproject_ray(pixel, camera);
  const double denom = camera.normal.dot(ray_world);
  if (std::abs(denom) < kParallelTolerance)
    throw Error(ErrorKind::Geometry, "camera '" + camera.id + "': footpoint ray is parallel to the ground plane");
  return (camera.plane_offset - camera.normal.dot(camera.translation)) / denom;
}

DepthEstimate footpoint_depth(const PixelDetection& det, const CameraModel& camera,
                              const CameraPerceptionConfig& cfg) {
  const double d = std::abs(ray_plane_parameter(det.footpoint(), camera));
  const double sd = cfg.alpha_fp * d;
  return {d, std::max(sd * sd, cfg.sigma2_min_depth)};
}

DepthEstimate bbox_depth_prior(const PixelDetection& det, const CameraModel& camera, double H_ref,
                               const CameraPerceptionConfig& cfg) {
  const double h = det.height_px();
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidDetection, "bounding box height must be positive");
  const double d = camera.f_y * H_ref / h;
  const double sd = cfg.alpha_bbox * d;
  return {d, std::max(sd * sd, cfg.sigma2_min_depth)};
}

DepthEstimate fuse_depth(const DepthEstimate& fp, const DepthEstimate& bbox, const std::optional<DepthHint>& hint,
                         const CameraPerceptionConfig& cfg) {
  const double pi_fp = cfg.eta_fp / fp.variance;
  const double pi_bbox = 1.0 / bbox.variance;
  const double d = (pi_fp * fp.depth + pi_bbox * bbox.depth) / (pi_fp + pi_bbox);
  const double sd = cfg.alpha_fp * std::abs(d);
  double var = std::max(sd * sd, cfg.sigma2_min_depth);
  if (hint && hint->confident && std::abs(hint->depth - std::abs(d)) > cfg.hint_disagreement)
    var *= cfg.gamma_inflate;
  return {d, var};
}

Mat2 floor_eigenvalues(const Mat2& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(symmetrize(m));
  Vec2 ev = es.eigenvalues();
  ev = ev.cwiseMax(floor);
  return symmetrize(Mat2(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose()));
}

BevProjection project_to_bev(const Vec2& pixel, const DepthEstimate& depth, const CameraModel& camera,
                             const BevProjectionConfig& cfg) {
  const Vec3 ray = backproject_ray(pixel, camera);
  const Vec3 ray_world = camera.rotation * ray;
  const Vec3 xw = depth.depth * ray_world + camera.translation;
  const Vec3 xproj = xw + (camera.plane_offset - camera.normal.dot(xw)) * camera.normal;

  BevProjection out;
  out.z = xproj.head<2>();
  out.jacobian = ray_world.head<2>();
  out.r_depth = depth.variance * out.jacobian * out.jacobian.transpose();
  out.r_pose = cfg.r_pose();
  out.r_indep = floor_eigenvalues(out.r_depth, std::max(cfg.sigma2_min_indep(), kMinIndependentEigenvalue));
  return out;
}

std::optional<BevMeasurement> camera_detection_to_bev(const PixelDetection& det, const CameraModel& camera,
                                                      const TrackerConfig& cfg) {
  if (det.confidence < cfg.camera.tau_yolo) return std::nullopt;
  if (!(det.u2 > det.u1) || !(det.v2 > det.v1)) return std::nullopt;

  double lambda = 0.0;
  try {
    lambda = ray_plane_parameter(det.footpoint(), camera);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Geometry) return std::nullopt;
    throw;
  }
  if (lambda <= 0.0) return std::nullopt;

  const DepthEstimate fp = footpoint_depth(det, camera, cfg.camera);
  const DepthEstimate bb = bbox_depth_prior(det, camera, cfg.class_params(det.class_label).H_ref, cfg.camera);
  const DepthEstimate fused = fuse_depth(fp, bb, det.depth_hint, cfg.camera);
  const BevProjection proj = project_to_bev(det.footpoint(), fused, camera, cfg.projection);

  BevMeasurement m;
  m.z = proj.z;
  m.r_indep = proj.r_indep;
  m.r_pose = proj.r_pose;
  m.confidence = det.confidence;
  m.class_label = det.class_label;
  m.feature = det.feature;
  m.sensor = det.camera;
  return m;
}

Mat2 radar_sensor_covariance(double range, double azimuth, double sigma_r, double sigma_theta) {
  const double s = std::sin(azimuth);
  const double c = std::cos(azimuth);
  Mat2 J;
  J << s, range * c, c, -range * s;
  const Vec2 var(sigma_r * sigma_r, sigma_theta * sigma_theta);
  return symmetrize(Mat2(J * var.asDiagonal() * J.transpose()));
}

Mat2 rotation2(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

BevMeasurement radar_point_to_bev(const RadarPoint& p, double sigma_r, double sigma_theta, double sigma_pose,
                                  const BevProjectionConfig& cfg) {
  if (!(p.range > 0.0)) throw Error(ErrorKind::InvalidDetection, "radar point range must be positive");
  const Vec2 local(p.range * std::sin(p.azimuth), p.range * std::cos(p.azimuth));
  const Mat2 rs = radar_sensor_covariance(p.range, p.azimuth, sigma_r, sigma_theta);
  const Mat2 rot = rotation2(p.yaw);

  BevMeasurement m;
  m.z = p.origin + rot * local;
  m.r_pose = sigma_pose * sigma_pose * Mat2::Identity();
  const double floor = std::max(0.0, cfg.sigma2_min - sigma_pose * sigma_pose);
  m.r_indep = floor_eigenvalues(rot * rs * rot.transpose(), std::max(floor, kMinIndependentEigenvalue));
  m.confidence = 1.0;
  return m;
}

std::vector<int> dbscan(std::span<const Vec2> points, double eps, int min_samples) {
  const std::size_t n = points.size();
  const double eps2 = eps * eps;
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((points[i] - points[j]).squaredNorm() <= eps2) neighbours[i].push_back(j);

  constexpr int kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    if (static_cast<int>(neighbours[i].size()) < min_samples) {
      label[i] = -1;
      continue;
    }
    label[i] = cluster;
    std::deque<std::size_t> frontier(neighbours[i].begin(), neighbours[i].end());
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      if (label[j] == -1) label[j] = cluster;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      if (static_cast<int>(neighbours[j].size()) >= min_samples)
        frontier.insert(frontier.end(), neighbours[j].begin(), neighbours[j].end());
    }
    ++cluster;
  }
  return label;
}

std::vector<BevMeasurement> radar_frame_to_measurements(std::span<const RadarPoint> points, SensorId sensor,
                                                        const TrackerConfig& cfg) {
  std::vector<BevMeasurement> moving;
  std::vector<double> rcs;
  for (const auto& p : points) {
    if (std::abs(p.doppler) < cfg.radar.v_min || !(p.range > 0.0)) continue;
    BevMeasurement m = radar_point_to_bev(p, cfg.radar.sigma_r, cfg.radar.sigma_theta_rad(),
                                          cfg.projection.sigma_pose, cfg.projection);
    m.sensor = sensor;
    moving.push_back(std::move(m));
    rcs.push_back(p.rcs);
  }

  std::vector<Vec2> positions;
  positions.reserve(moving.size());
  for (const auto& m : moving) positions.push_back(m.z);
  const std::vector<int> labels = dbscan(positions, cfg.radar.eps_dbscan, cfg.radar.n_min);

  int num_clusters = 0;
  for (int l : labels) num_clusters = std::max(num_clusters, l + 1);

  std::vector<BevMeasurement> out;
  for (int c = 0; c < num_clusters; ++c) {
    std::vector<BevMeasurement> members;
    double rcs_sum = 0.0;
    for (std::size_t i = 0; i < moving.size(); ++i) {
      if (labels[i] != c) continue;
      members.push_back(moving[i]);
      rcs_sum += rcs[i];
    }
    const PrecisionFusion f = fuse_precision_weighted(members);
    const double pose_min = Eigen::SelfAdjointEigenSolver<Mat2>(f.r_pose).eigenvalues().minCoeff();
    const double floor = std::max(std::max(0.0, cfg.projection.sigma2_min - pose_min), kMinIndependentEigenvalue);
    BevMeasurement m;
    m.z = f.z;
    m.r_indep = floor_eigenvalues(f.p_indep, floor);
    m.r_pose = f.r_pose;
    m.confidence = std::min(1.0, static_cast<double>(members.size()) / 4.0);
    m.class_label = rcs_sum / static_cast<double>(members.size()) >= cfg.radar.rcs_vehicle_dbsm ? 1 : 0;
    m.sensor = sensor;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace bevtrack
