#pragma once

#include "bevtrack/config.hpp"
#include "bevtrack/io.hpp"
#include "bevtrack/metrics.hpp"
#include "bevtrack/phd.hpp"
#include "bevtrack/sim.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace bevtrack {

using SensorSubset = std::optional<std::set<std::string>>;

struct StageTimes {
  double geometry = 0.0;
  double association = 0.0;
  double fusion = 0.0;
  double tracking = 0.0;
  double io = 0.0;
};

/// Converts one frame's records to BEV measurements. Records from sensors
/// outside `subset` are skipped.
std::vector<BevMeasurement> frame_measurements(std::span<const DetectionRecord> records, const Calibration& calib,
                                               const TrackerConfig& cfg, const SensorSubset& subset = std::nullopt);

/// Sequential per-frame pipeline: geometry, clustering, fusion, filter.
class TrackingSession {
 public:
  TrackingSession(TrackerConfig cfg, Calibration calib, SensorSubset subset = std::nullopt);

  std::vector<TrackOutput> process_frame(int frame, std::span<const DetectionRecord> records);

  const PhdTracker& tracker() const { return tracker_; }
  const StageTimes& times() const { return times_; }

 private:
  TrackerConfig cfg_;
  Calibration calib_;
  SensorSubset subset_;
  PhdTracker tracker_;
  StageTimes times_;
};

struct RunResult {
  std::size_t frames = 0;
  std::size_t outputs = 0;
  StageTimes times;
};

/// Streams detections frame by frame and writes one JSON line per confirmed
/// track and frame, flushing after each frame. Frames missing from the input
/// between the first and last frame are processed as empty frames.
RunResult run_tracking(std::istream& detections, const Calibration& calib, const TrackerConfig& cfg,
                       std::ostream& tracks_out, const SensorSubset& subset = std::nullopt);

/// In-memory variant over frame-sorted records.
std::vector<TrackOutput> track_records(std::span<const DetectionRecord> records, const Calibration& calib,
                                       const TrackerConfig& cfg, const SensorSubset& subset = std::nullopt);

std::vector<ObjectRecord> to_object_records(std::span<const TrackOutput> tracks);

/// Evaluates tracks, applying tube merging first when the config enables it.
EvalReport evaluate_tracks(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks,
                           const TrackerConfig& cfg);

std::string sha256_hex(std::string_view bytes);

struct RunManifest {
  std::string config_path;
  std::string config_sha256;
  std::vector<std::string> inputs;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sensors;
  std::vector<std::string> outputs;
  StageTimes times;
  double total_seconds = 0.0;
};

std::string manifest_to_json(const RunManifest& m);

/// Writes the tracks file and `<out>.manifest.json`.
RunResult run_tracking_files(const std::string& detections_path, const std::string& calib_path,
                             const std::string& config_path, const std::string& out_path,
                             const SensorSubset& subset = std::nullopt);

struct SweepMetrics {
  double idf1 = 0.0;
  double mota = 0.0;
  double motp = 0.0;
  double gospa = 0.0;
};

struct DropoutRun {
  std::vector<std::string> sensors;
  EvalReport report;
};

struct DropoutAggregate {
  std::size_t k = 0;
  std::size_t runs = 0;
  SweepMetrics mean;
  /// Population standard deviation over the subsets of size k.
  SweepMetrics stddev;
};

struct DropoutResult {
  std::vector<DropoutRun> runs;
  std::vector<DropoutAggregate> table;
};

/// All size-k subsets of `items` in lexicographic order.
std::vector<std::vector<std::string>> combinations(const std::vector<std::string>& items, std::size_t k);

/// Reruns tracking on every sensor subset of size k_min..k_max.
DropoutResult sweep_dropout(std::span<const DetectionRecord> records, const Calibration& calib,
                            std::span<const ObjectRecord> gt, const TrackerConfig& cfg, std::size_t k_min,
                            std::size_t k_max, unsigned workers = 1);

struct ParamRow {
  double value = 0.0;
  EvalReport report;
};

/// One run per value of the named parameter; everything else stays at `base`.
std::vector<ParamRow> sweep_param(const std::string& name, std::span<const double> values,
                                  std::span<const DetectionRecord> records, const Calibration& calib,
                                  std::span<const ObjectRecord> gt, const TrackerConfig& base, unsigned workers = 1);

/// NEES test of track covariances against ground truth. Throws Evaluation
/// when the frame ranges do not overlap or nothing matches.
NeesReport calibrate_nees(std::span<const ObjectRecord> tracks, std::span<const ObjectRecord> gt,
                          const EvalConfig& cfg);

/// Writes gt.jsonl, detections.jsonl and calib.json into `dir`.
void write_scenario(const Scenario& scenario, const std::string& dir);

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace bevtrack
