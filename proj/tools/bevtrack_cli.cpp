#include "bevtrack/pipeline.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace bevtrack;
using json = nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitEvaluation = 4;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Evaluation: return kExitEvaluation;
    case ErrorKind::InputFormat:
    case ErrorKind::Calibration:
    case ErrorKind::InvalidDetection: return kExitInput;
    default: return 1;
  }
}

std::vector<DetectionRecord> read_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InputFormat, "cannot open " + path);
  DetectionReader reader(in);
  std::vector<DetectionRecord> out;
  while (auto batch = reader.next_frame())
    for (auto& r : batch->second) out.push_back(std::move(r));
  return out;
}

TrackerConfig config_or_default(const std::string& path) {
  return path.empty() ? TrackerConfig::wildtrack() : load_config(path);
}

SensorSubset parse_subset(const std::string& csv) {
  if (csv.empty()) return std::nullopt;
  std::set<std::string> ids;
  std::stringstream ss(csv);
  for (std::string id; std::getline(ss, id, ',');)
    if (!id.empty()) ids.insert(id);
  return ids;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  for (std::string v; std::getline(ss, v, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(v, &used));
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Config, "not a number in --values: '" + v + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::Config, "--values is empty");
  return out;
}

json metrics_json(const EvalReport& r) {
  return {{"IDF1", r.id.idf1}, {"MOTA", r.clear.mota}, {"MOTP", r.clear.motp}, {"GOSPA", r.gospa.mean}};
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InputFormat, "cannot write " + path);
  out << text << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-sensor BEV multi-target tracker"};
  app.require_subcommand(1);

  std::string detections, calib, config, out, spec, out_dir, tracks, gt, name, values, sensors, report;
  std::uint64_t seed = 0;
  std::size_t k_min = 1, k_max = 1;
  unsigned workers = 1;

  auto* track = app.add_subcommand("track", "Run the tracker over a detections stream");
  track->add_option("--detections", detections)->required();
  track->add_option("--calib", calib)->required();
  track->add_option("--config", config)->required();
  track->add_option("--out", out)->required();
  track->add_option("--sensors", sensors, "Comma-separated subset of sensor ids");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario");
  simulate->add_option("--spec", spec)->required();
  simulate->add_option("--seed", seed)->required();
  simulate->add_option("--out-dir", out_dir)->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score tracks against ground truth");
  evaluate_cmd->add_option("--tracks", tracks)->required();
  evaluate_cmd->add_option("--gt", gt)->required();
  evaluate_cmd->add_option("--config", config);
  evaluate_cmd->add_option("--report", report, "Write the JSON report here");

  auto* dropout = app.add_subcommand("sweep-dropout", "Rerun over every sensor subset of size k");
  dropout->add_option("--k-min", k_min)->required();
  dropout->add_option("--k-max", k_max)->required();
  dropout->add_option("--detections", detections)->required();
  dropout->add_option("--calib", calib)->required();
  dropout->add_option("--gt", gt)->required();
  dropout->add_option("--config", config);
  dropout->add_option("--workers", workers);
  dropout->add_option("--report", report);

  auto* param = app.add_subcommand("sweep-param", "One-at-a-time parameter sensitivity");
  param->add_option("--name", name)->required();
  param->add_option("--values", values)->required();
  param->add_option("--detections", detections)->required();
  param->add_option("--calib", calib)->required();
  param->add_option("--gt", gt)->required();
  param->add_option("--config", config);
  param->add_option("--workers", workers);
  param->add_option("--report", report);

  auto* nees = app.add_subcommand("calibrate-nees", "Chi-square NEES test of track covariances");
  nees->add_option("--tracks", tracks)->required();
  nees->add_option("--gt", gt)->required();
  nees->add_option("--config", config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*track) {
      const RunResult r = run_tracking_files(detections, calib, config, out, parse_subset(sensors));
      std::fprintf(stderr, "%zu frames, %zu track records -> %s\n", r.frames, r.outputs, out.c_str());
    } else if (*simulate) {
      const Scenario sc = generate_scenario(load_scenario_spec(spec), seed);
      write_scenario(sc, out_dir);
      std::fprintf(stderr, "scenario '%s': %zu targets, %d frames -> %s\n", sc.spec.name.c_str(), sc.targets.size(),
                   sc.spec.frames, out_dir.c_str());
    } else if (*evaluate_cmd) {
      const TrackerConfig cfg = config_or_default(config);
      const EvalReport r = evaluate_tracks(load_ground_truth(gt), load_tracks(tracks), cfg);
      std::cout << format_report(r);
      if (!report.empty()) write_or_print(report, report_to_json(r));
    } else if (*dropout) {
      const TrackerConfig cfg = config_or_default(config);
      const DropoutResult r = sweep_dropout(read_detections(detections), load_calibration(calib),
                                            load_ground_truth(gt), cfg, k_min, k_max, workers);
      std::printf("%-3s %5s %16s %16s %16s %16s\n", "k", "runs", "IDF1", "MOTA", "MOTP", "GOSPA");
      json table = json::array();
      for (const auto& a : r.table) {
        std::printf("%-3zu %5zu %8.2f+-%-6.2f %8.2f+-%-6.2f %8.2f+-%-6.2f %8.3f+-%-6.3f\n", a.k, a.runs, a.mean.idf1,
                    a.stddev.idf1, a.mean.mota, a.stddev.mota, a.mean.motp, a.stddev.motp, a.mean.gospa,
                    a.stddev.gospa);
        table.push_back({{"k", a.k},
                         {"runs", a.runs},
                         {"mean", {{"IDF1", a.mean.idf1}, {"MOTA", a.mean.mota}, {"MOTP", a.mean.motp}, {"GOSPA", a.mean.gospa}}},
                         {"std",
                          {{"IDF1", a.stddev.idf1},
                           {"MOTA", a.stddev.mota},
                           {"MOTP", a.stddev.motp},
                           {"GOSPA", a.stddev.gospa}}}});
      }
      if (!report.empty()) {
        json runs = json::array();
        for (const auto& run : r.runs) runs.push_back({{"sensors", run.sensors}, {"metrics", metrics_json(run.report)}});
        write_or_print(report, json{{"table", table}, {"runs", runs}}.dump(2));
      }
    } else if (*param) {
      const TrackerConfig cfg = config_or_default(config);
      const std::vector<double> grid = parse_values(values);
      const auto rows = sweep_param(name, grid, read_detections(detections), load_calibration(calib),
                                    load_ground_truth(gt), cfg, workers);
      std::printf("%-12s %8s %8s %8s %8s\n", name.c_str(), "IDF1", "MOTA", "MOTP", "GOSPA");
      json out_rows = json::array();
      for (const auto& row : rows) {
        std::printf("%-12g %8.2f %8.2f %8.2f %8.3f\n", row.value, row.report.id.idf1, row.report.clear.mota,
                    row.report.clear.motp, row.report.gospa.mean);
        json m = metrics_json(row.report);
        m["value"] = row.value;
        out_rows.push_back(m);
      }
      if (!report.empty()) write_or_print(report, out_rows.dump(2));
    } else if (*nees) {
      const TrackerConfig cfg = config_or_default(config);
      const NeesReport r = calibrate_nees(load_tracks(tracks), load_ground_truth(gt), cfg.eval);
      std::printf("samples %zu  mean NEES %.4f  CI [%.4f, %.4f]  1sig %.1f%% (39.3%%)  2sig %.1f%% (86.5%%)\n%s\n",
                  r.samples, r.mean, r.ci_low, r.ci_high, 100.0 * r.coverage_1sigma, 100.0 * r.coverage_2sigma,
                  to_string(r.verdict));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
