#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <vector>

#include "isac/config.hpp"
#include "isac/csv.hpp"
#include "isac/detector.hpp"
#include "isac/metrics.hpp"
#include "isac/receiver.hpp"
#include "isac/tracker.hpp"

namespace isac {

/// Everything the detection and tracking chain produced for one sweep.
struct SweepResult {
  std::uint64_t sweep_index = 0;
  double t_s = 0.0;
  bool warm_up = false;
  std::vector<Detection> detections;
  DbscanResult clusters;
  std::vector<Measurement> measurements;  // one per cluster
  std::vector<TrackState> tracks;
  std::uint64_t cells_tested = 0;
  LatencySample latency;
};

/// MTI -> CA-CFAR -> DBSCAN -> tracker, one sweep at a time.
class SweepProcessor {
 public:
  explicit SweepProcessor(const PipelineConfig& cfg);

  SweepResult process(const RaTensor& tensor);

 private:
  MtiFilter mti_;
  CfarConfig cfar_;
  DbscanConfig dbscan_;
  Tracker tracker_;
};

/// Simulated tensors with the truth at each sweep start, in sweep order.
class SceneSimulator {
 public:
  explicit SceneSimulator(const PipelineConfig& cfg);

  bool done() const { return next_ >= static_cast<std::uint64_t>(cfg_.sweeps); }
  /// Simulates the next sweep; `truth` receives the scene it was taken from.
  RaTensor next(SweepTruth& truth);

 private:
  PipelineConfig cfg_;
  SceneConfig scene_;
  std::uint64_t next_ = 0;
};

/// Writes the per-sweep CSV files of a detection/tracking run into a
/// directory and keeps the logs needed for the report.
///
/// Files: detections.csv, clusters.csv, tracks.csv, sweeps.csv, latency.csv
/// and, when truth is recorded, truth.csv. Everything except latency.csv and
/// the latency block of report.json is a pure function of the inputs.
class RunRecorder {
 public:
  RunRecorder(const std::filesystem::path& out_dir, bool record_truth);

  void truth(const SweepTruth& s);
  void sweep(const SweepResult& r, const RaTensor& tensor);

  const RunLogs& logs() const { return logs_; }
  /// Flushes all files, computes the report and writes report.json and summary.csv.
  RunReport finish(const MetricsConfig& cfg);

 private:
  struct File {
    std::unique_ptr<std::ofstream> stream;  // heap-held so the writer's reference survives moves
    std::unique_ptr<CsvWriter> csv;
  };
  File open(const std::string& name, std::span<const std::string_view> columns);

  std::filesystem::path dir_;
  File detections_, clusters_, tracks_, sweeps_, latency_;
  std::optional<File> truth_;
  RunLogs logs_;
};

/// Output file names shared by the commands.
inline constexpr const char* kTensorFileName = "tensors.ratn";
inline constexpr const char* kTruthFileName = "truth.csv";
inline constexpr const char* kResolvedConfigName = "config.resolved.json";

/// Writes tensors.ratn, truth.csv and config.resolved.json.
void cmd_simulate(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

/// Streams a tensor file through the detection and tracking chain. Truth is
/// optional; without it the accuracy fields of the report are vacuous.
RunReport cmd_track(const PipelineConfig& cfg, std::istream& tensors, const std::filesystem::path& out_dir,
                    const std::optional<std::filesystem::path>& truth_csv);

/// simulate + track in one process, without reading the tensor file back.
RunReport cmd_e2e(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

/// Recomputes report.json and summary.csv from the CSV files of a run.
RunReport cmd_report(const std::filesystem::path& in_dir);

}  // namespace isac
