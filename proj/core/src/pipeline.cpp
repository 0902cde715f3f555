#include "bevtrack/pipeline.hpp"

#include "bevtrack/association.hpp"
#include "bevtrack/fusion.hpp"
#include "bevtrack/geometry.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace bevtrack {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool enabled(const SensorSubset& subset, const std::string& id) { return !subset || subset->contains(id); }

SweepMetrics metrics_of(const EvalReport& r) { return {r.id.idf1, r.clear.mota, r.clear.motp, r.gospa.mean}; }

}  // namespace

std::vector<BevMeasurement> frame_measurements(std::span<const DetectionRecord> records, const Calibration& calib,
                                               const TrackerConfig& cfg, const SensorSubset& subset) {
  std::vector<BevMeasurement> out;
  std::map<SensorId, std::vector<RadarPoint>> radar_points;
  const auto n_cam = static_cast<SensorId>(calib.cameras.size());
  const auto n_radar = static_cast<SensorId>(calib.radars.size());

  for (const auto& r : records) {
    const SensorId s = calib.sensor_index(r.sensor);
    if (!enabled(subset, r.sensor)) continue;
    switch (r.kind) {
      case DetectionKind::Camera: {
        if (s >= n_cam) throw Error(ErrorKind::InputFormat, "sensor '" + r.sensor + "' is not a camera");
        PixelDetection det = r.camera;
        det.camera = s;
        if (auto m = camera_detection_to_bev(det, calib.cameras[static_cast<std::size_t>(s)], cfg))
          out.push_back(std::move(*m));
        break;
      }
      case DetectionKind::Radar: {
        if (s < n_cam || s >= n_cam + n_radar)
          throw Error(ErrorKind::InputFormat, "sensor '" + r.sensor + "' is not a radar");
        const RadarPose& pose = calib.radars[static_cast<std::size_t>(s - n_cam)];
        RadarPoint p = r.radar;
        p.yaw = r.radar_yaw.value_or(pose.yaw);
        p.origin = r.radar_origin.value_or(pose.origin);
        radar_points[s].push_back(p);
        break;
      }
      case DetectionKind::Bev: {
        BevMeasurement m = r.bev;
        m.sensor = s;
        out.push_back(std::move(m));
        break;
      }
    }
  }
  for (const auto& [s, points] : radar_points)
    for (auto& m : radar_frame_to_measurements(points, s, cfg)) out.push_back(std::move(m));
  return out;
}

TrackingSession::TrackingSession(TrackerConfig cfg, Calibration calib, SensorSubset subset)
    : cfg_(std::move(cfg)), calib_(std::move(calib)), subset_(std::move(subset)), tracker_(cfg_) {
  if (subset_)
    for (const auto& id : *subset_) calib_.sensor_index(id);
}

std::vector<TrackOutput> TrackingSession::process_frame(int frame, std::span<const DetectionRecord> records) {
  auto t0 = Clock::now();
  const std::vector<BevMeasurement> meas = frame_measurements(records, calib_, cfg_, subset_);
  times_.geometry += seconds_since(t0);

  t0 = Clock::now();
  const std::vector<RawCluster> raw = cascaded_cluster(meas, cfg_.clustering);
  times_.association += seconds_since(t0);

  t0 = Clock::now();
  std::vector<FusedCluster> clusters = fuse_clusters(meas, raw);
  times_.fusion += seconds_since(t0);

  t0 = Clock::now();
  std::vector<TrackOutput> out = tracker_.step(frame, std::move(clusters));
  times_.tracking += seconds_since(t0);
  return out;
}

RunResult run_tracking(std::istream& detections, const Calibration& calib, const TrackerConfig& cfg,
                       std::ostream& tracks_out, const SensorSubset& subset) {
  TrackingSession session(cfg, calib, subset);
  DetectionReader reader(detections);
  RunResult result;
  double io = 0.0;
  std::optional<int> previous;

  auto emit = [&](int frame, std::span<const DetectionRecord> records) {
    const auto outputs = session.process_frame(frame, records);
    const auto t0 = Clock::now();
    for (const auto& t : outputs) tracks_out << track_to_json(t) << '\n';
    tracks_out.flush();
    io += seconds_since(t0);
    result.outputs += outputs.size();
    ++result.frames;
  };

  while (true) {
    const auto t0 = Clock::now();
    auto batch = reader.next_frame();
    io += seconds_since(t0);
    if (!batch) break;
    if (previous)
      for (int f = *previous + 1; f < batch->first; ++f) emit(f, {});
    emit(batch->first, batch->second);
    previous = batch->first;
  }
  result.times = session.times();
  result.times.io = io;
  return result;
}

std::vector<TrackOutput> track_records(std::span<const DetectionRecord> records, const Calibration& calib,
                                       const TrackerConfig& cfg, const SensorSubset& subset) {
  TrackingSession session(cfg, calib, subset);
  std::vector<TrackOutput> out;
  std::size_t i = 0;
  std::optional<int> previous;
  while (i < records.size()) {
    const int frame = records[i].frame;
    if (previous && frame < *previous) throw Error(ErrorKind::InputFormat, "records are not sorted by frame");
    std::size_t j = i;
    while (j < records.size() && records[j].frame == frame) ++j;
    if (previous)
      for (int f = *previous + 1; f < frame; ++f)
        for (auto& t : session.process_frame(f, {})) out.push_back(t);
    for (auto& t : session.process_frame(frame, records.subspan(i, j - i))) out.push_back(t);
    previous = frame;
    i = j;
  }
  return out;
}

std::vector<ObjectRecord> to_object_records(std::span<const TrackOutput> tracks) {
  std::vector<ObjectRecord> out;
  out.reserve(tracks.size());
  for (const auto& t : tracks) out.push_back({t.frame, t.id, t.position, t.cov});
  return out;
}

EvalReport evaluate_tracks(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks,
                           const TrackerConfig& cfg) {
  if (!cfg.post.tube_merge) return evaluate(gt, tracks, cfg.eval);
  const std::vector<ObjectRecord> merged = merge_track_tubes(tracks, cfg.post.d_merge, cfg.post.g_merge);
  return evaluate(gt, merged, cfg.eval);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Numerical, "SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string manifest_to_json(const RunManifest& m) {
  json j{{"config", {{"path", m.config_path}, {"sha256", m.config_sha256}}},
         {"inputs", m.inputs},
         {"seed", m.seed ? json(*m.seed) : json(nullptr)},
         {"sensors", m.sensors},
         {"outputs", m.outputs},
         {"wall_clock_s",
          {{"geometry", m.times.geometry},
           {"association", m.times.association},
           {"fusion", m.times.fusion},
           {"tracking", m.times.tracking},
           {"io", m.times.io},
           {"total", m.total_seconds}}}};
  return j.dump(2);
}

RunResult run_tracking_files(const std::string& detections_path, const std::string& calib_path,
                             const std::string& config_path, const std::string& out_path,
                             const SensorSubset& subset) {
  const auto t0 = Clock::now();
  const std::string config_text = read_text_file(config_path);
  const TrackerConfig cfg = parse_config(config_text);
  const Calibration calib = load_calibration(calib_path);

  std::ifstream in(detections_path);
  if (!in) throw Error(ErrorKind::InputFormat, "cannot open " + detections_path);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InputFormat, "cannot write " + out_path);
  const RunResult result = run_tracking(in, calib, cfg, out, subset);

  RunManifest m;
  m.config_path = config_path;
  m.config_sha256 = sha256_hex(config_text);
  m.inputs = {detections_path, calib_path};
  m.sensors = subset ? std::vector<std::string>(subset->begin(), subset->end()) : calib.sensor_names();
  const std::string manifest_path = out_path + ".manifest.json";
  m.outputs = {out_path, manifest_path};
  m.times = result.times;
  m.total_seconds = seconds_since(t0);
  std::ofstream mf(manifest_path, std::ios::binary);
  if (!mf) throw Error(ErrorKind::InputFormat, "cannot write " + manifest_path);
  mf << manifest_to_json(m) << '\n';
  return result;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::vector<std::string>> combinations(const std::vector<std::string>& items, std::size_t k) {
  std::vector<std::vector<std::string>> out;
  if (k > items.size()) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::vector<std::string> pick;
    for (std::size_t i : idx) pick.push_back(items[i]);
    out.push_back(std::move(pick));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == items.size() - k + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

DropoutResult sweep_dropout(std::span<const DetectionRecord> records, const Calibration& calib,
                            std::span<const ObjectRecord> gt, const TrackerConfig& cfg, std::size_t k_min,
                            std::size_t k_max, unsigned workers) {
  const std::vector<std::string> sensors = calib.sensor_names();
  if (k_min < 1 || k_min > k_max) throw Error(ErrorKind::Config, "dropout range needs 1 <= k_min <= k_max");
  if (k_max > sensors.size())
    throw Error(ErrorKind::Config, "k = " + std::to_string(k_max) + " exceeds the " + std::to_string(sensors.size()) +
                                       " available sensors");

  DropoutResult result;
  std::vector<std::size_t> sizes;
  for (std::size_t k = k_min; k <= k_max; ++k)
    for (auto& subset : combinations(sensors, k)) {
      result.runs.push_back({std::move(subset), {}});
      sizes.push_back(k);
    }

  parallel_for(result.runs.size(), workers, [&](std::size_t i) {
    auto& run = result.runs[i];
    const SensorSubset subset = std::set<std::string>(run.sensors.begin(), run.sensors.end());
    const auto tracks = to_object_records(track_records(records, calib, cfg, subset));
    run.report = evaluate_tracks(gt, tracks, cfg);
  });

  for (std::size_t k = k_min; k <= k_max; ++k) {
    DropoutAggregate agg;
    agg.k = k;
    std::vector<SweepMetrics> rows;
    for (std::size_t i = 0; i < result.runs.size(); ++i)
      if (sizes[i] == k) rows.push_back(metrics_of(result.runs[i].report));
    agg.runs = rows.size();
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
      agg.mean.idf1 += r.idf1 / n;
      agg.mean.mota += r.mota / n;
      agg.mean.motp += r.motp / n;
      agg.mean.gospa += r.gospa / n;
    }
    for (const auto& r : rows) {
      agg.stddev.idf1 += (r.idf1 - agg.mean.idf1) * (r.idf1 - agg.mean.idf1) / n;
      agg.stddev.mota += (r.mota - agg.mean.mota) * (r.mota - agg.mean.mota) / n;
      agg.stddev.motp += (r.motp - agg.mean.motp) * (r.motp - agg.mean.motp) / n;
      agg.stddev.gospa += (r.gospa - agg.mean.gospa) * (r.gospa - agg.mean.gospa) / n;
    }
    agg.stddev = {std::sqrt(agg.stddev.idf1), std::sqrt(agg.stddev.mota), std::sqrt(agg.stddev.motp),
                  std::sqrt(agg.stddev.gospa)};
    result.table.push_back(agg);
  }
  return result;
}

std::vector<ParamRow> sweep_param(const std::string& name, std::span<const double> values,
                                  std::span<const DetectionRecord> records, const Calibration& calib,
                                  std::span<const ObjectRecord> gt, const TrackerConfig& base, unsigned workers) {
  std::vector<TrackerConfig> configs;
  std::vector<ParamRow> rows;
  for (double v : values) {
    TrackerConfig cfg = base;
    set_parameter(cfg, name, v);
    cfg.validate();
    configs.push_back(std::move(cfg));
    rows.push_back({v, {}});
  }
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    const auto tracks = to_object_records(track_records(records, calib, configs[i]));
    rows[i].report = evaluate_tracks(gt, tracks, configs[i]);
  });
  return rows;
}

NeesReport calibrate_nees(std::span<const ObjectRecord> tracks, std::span<const ObjectRecord> gt,
                          const EvalConfig& cfg) {
  if (tracks.empty() || gt.empty()) throw Error(ErrorKind::Evaluation, "NEES calibration needs tracks and ground truth");
  auto range = [](std::span<const ObjectRecord> r) {
    int lo = r.front().frame, hi = r.front().frame;
    for (const auto& x : r) {
      lo = std::min(lo, x.frame);
      hi = std::max(hi, x.frame);
    }
    return std::pair{lo, hi};
  };
  const auto [t_lo, t_hi] = range(tracks);
  const auto [g_lo, g_hi] = range(gt);
  if (t_hi < g_lo || g_hi < t_lo) throw Error(ErrorKind::Evaluation, "track and ground-truth frame ranges are disjoint");
  return nees_calibration(nees_samples(gt, tracks, cfg), cfg.nees_level);
}

void write_scenario(const Scenario& sc, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path root(dir);
  {
    std::ofstream out(root / "gt.jsonl", std::ios::binary);
    for (const auto& r : ground_truth_records(sc)) out << ground_truth_to_json(r) << '\n';
  }
  {
    std::ofstream out(root / "detections.jsonl", std::ios::binary);
    for (const auto& r : render_all(sc)) out << detection_to_json(r) << '\n';
  }
  {
    std::ofstream out(root / "calib.json", std::ios::binary);
    out << calibration_to_json(sc.calibration) << '\n';
  }
  for (const char* name : {"gt.jsonl", "detections.jsonl", "calib.json"})
    if (!std::filesystem::exists(root / name)) throw Error(ErrorKind::InputFormat, "cannot write into " + dir);
}

}  // namespace bevtrack
