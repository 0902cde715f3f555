#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace bevtrack {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using VecX = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat24 = Eigen::Matrix<double, 2, 4>;
using Mat42 = Eigen::Matrix<double, 4, 2>;

/// Index of a sensor inside the loaded calibration.
using SensorId = int;
/// Persistent track identity; 0 is never issued.
using TrackId = std::int64_t;
using ClassLabel = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ErrorKind {
  Calibration,
  InvalidDetection,
  Geometry,
  Numerical,
  Config,
  InputFormat,
  Evaluation,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Calibrated BEV position with decomposed covariance. Every sensor front-end
/// reduces to this.
struct BevMeasurement {
  Vec2 z = Vec2::Zero();
  Mat2 r_indep = Mat2::Identity();
  Mat2 r_pose = Mat2::Zero();
  double confidence = 1.0;
  ClassLabel class_label = 0;
  std::optional<VecX> feature;
  SensorId sensor = 0;

  Mat2 total_covariance() const { return r_indep + r_pose; }
};

inline Mat2 symmetrize(const Mat2& m) { return 0.5 * (m + m.transpose()); }
inline Mat4 symmetrize(const Mat4& m) { return 0.5 * (m + m.transpose()); }

}  // namespace bevtrack
