#pragma once

#include "bevtrack/config.hpp"
#include "bevtrack/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bevtrack {

/// A labelled BEV position in one frame: a ground-truth object or a track
/// estimate. Track estimates may carry their position covariance.
struct ObjectRecord {
  int frame = 0;
  std::int64_t id = 0;
  Vec2 position = Vec2::Zero();
  std::optional<Mat2> cov;
};

struct ClearMotResult {
  double mota = 0.0;
  double motp = 0.0;
  /// Mean distance of matched pairs in metres.
  double mean_distance = 0.0;
  std::size_t gt_count = 0;
  std::size_t matches = 0;
  std::size_t false_positives = 0;
  std::size_t misses = 0;
  std::size_t id_switches = 0;
};

/// CLEAR MOT with correspondence persistence. Throws Evaluation when there
/// is no ground truth.
ClearMotResult clear_mot(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks,
                         const EvalConfig& cfg);

struct Idf1Result {
  double idf1 = 0.0;
  std::size_t idtp = 0;
  std::size_t idfp = 0;
  std::size_t idfn = 0;
};

/// Identity F1 from a global GT-to-track trajectory matching.
Idf1Result idf1(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks, const EvalConfig& cfg);

/// GOSPA between two point sets.
double gospa(std::span<const Vec2> truth, std::span<const Vec2> estimate, double p, double c, double alpha);

struct GospaSeries {
  std::vector<int> frames;
  std::vector<double> values;
  double mean = 0.0;
};

/// Per-frame GOSPA over the union of frames present in either input.
GospaSeries gospa_series(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks,
                         const EvalConfig& cfg);

double nees_value(const Vec2& error, const Mat2& cov);

enum class NeesVerdict { Calibrated, Overconfident, Conservative };
const char* to_string(NeesVerdict v);

struct NeesSample {
  Vec2 error = Vec2::Zero();
  Mat2 cov = Mat2::Identity();
};

struct NeesReport {
  std::size_t samples = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// Fraction of samples with NEES <= 1 (nominal 39.3%).
  double coverage_1sigma = 0.0;
  /// Fraction of samples with NEES <= 4 (nominal 86.5%).
  double coverage_2sigma = 0.0;
  NeesVerdict verdict = NeesVerdict::Calibrated;
};

/// Two-sided chi-square test of mean 2-D NEES at the given confidence level.
/// Throws Evaluation for an empty sample.
NeesReport nees_calibration(std::span<const NeesSample> samples, double level);

/// Per-frame Hungarian matching at the distance gate; each matched track
/// with a covariance contributes one sample.
std::vector<NeesSample> nees_samples(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks,
                                     const EvalConfig& cfg);

/// Stitches fragments whose start follows another's end by at most
/// `max_gap` frames and `max_distance` metres. Fragments are visited in
/// order of end frame; a merged fragment takes the id of its predecessor.
std::vector<ObjectRecord> merge_track_tubes(std::span<const ObjectRecord> tracks, double max_distance, int max_gap);

struct EvalReport {
  ClearMotResult clear;
  Idf1Result id;
  GospaSeries gospa;
  std::optional<NeesReport> nees;
};

/// Full report. Frames below `cfg.warmup_frames` are dropped from both
/// inputs first.
EvalReport evaluate(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks, const EvalConfig& cfg);

/// Fixed-width text table of the headline numbers.
std::string format_report(const EvalReport& report);

}  // namespace bevtrack
