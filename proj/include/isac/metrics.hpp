#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isac/channel.hpp"
#include "isac/detector.hpp"
#include "isac/tracker.hpp"

namespace isac {

struct TruthEntry {
  int target_key = 0;
  double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;
};

struct SweepTruth {
  std::uint64_t sweep_index = 0;
  double t_s = 0.0;
  std::vector<TruthEntry> targets;
};
using TruthLog = std::vector<SweepTruth>;

/// Truth entries of `scene`; target_key is the index in scene.targets.
SweepTruth snapshot_truth(const SceneConfig& scene, std::uint64_t sweep_index);

struct SweepTracks {
  std::uint64_t sweep_index = 0;
  double t_s = 0.0;
  std::vector<TrackState> tracks;
};
using TrackLog = std::vector<SweepTracks>;

struct SweepMeasurements {
  std::uint64_t sweep_index = 0;
  std::vector<Measurement> measurements;
};
using MeasurementLog = std::vector<SweepMeasurements>;

struct TruthMatch {
  int target_key = 0;
  std::uint64_t track_id = 0;
  double position_error_m = 0.0;
  double velocity_error_mps = 0.0;
};

struct SweepCorrespondence {
  std::uint64_t sweep_index = 0;
  std::vector<TruthMatch> matches;
  std::vector<std::uint64_t> unmatched_tracks;  // confirmed tracks with no truth in radius
  std::vector<int> unmatched_truth;
};
using Correspondence = std::vector<SweepCorrespondence>;

/// Per-sweep minimum-distance matching between confirmed tracks and truth
/// targets, pairs farther apart than radius_m left unmatched. Sweeps are
/// paired by sweep_index; sweeps missing from either log are skipped.
Correspondence match_tracks_to_truth(const TrackLog& tracks, const TruthLog& truth, double radius_m);

struct LatencySample {
  std::uint64_t sweep_index = 0;
  double mti_ms = 0.0;
  double cfar_ms = 0.0;
  double dbscan_ms = 0.0;
  double track_ms = 0.0;
  double total_ms = 0.0;
};

struct LatencyStats {
  std::size_t samples = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
  double mean_mti_ms = 0.0;
  double mean_cfar_ms = 0.0;
  double mean_dbscan_ms = 0.0;
  double mean_track_ms = 0.0;
};

LatencyStats summarize_latency(const std::vector<LatencySample>& samples);

/// Detector bookkeeping for the false-alarm estimate.
struct DetectionCounts {
  std::uint64_t cells_tested = 0;
  std::uint64_t detections = 0;
};

struct MetricsConfig {
  double match_radius_m = 2.0;
  /// Velocity RMSE only counts sweeps with index >= this.
  std::uint64_t velocity_settle_sweeps = 15;

  void validate() const;
};

struct RunLogs {
  TruthLog truth;
  TrackLog tracks;
  MeasurementLog measurements;
  std::vector<LatencySample> latency;
  DetectionCounts counts;
};

struct RunReport {
  std::uint64_t sweeps = 0;
  double pos_rmse_m = 0.0;
  std::map<std::uint64_t, double> pos_rmse_per_track_m;
  double vel_rmse_mps = 0.0;
  int confirmed_track_count = 0;
  int id_switch_count = 0;
  int false_track_count = 0;
  int track_fragmentation = 0;
  std::optional<double> mean_confirm_delay_sweeps;
  /// detections / cells tested; only reported when the truth log has no targets.
  std::optional<double> empirical_pfa;
  DetectionCounts counts;
  LatencyStats latency;
};

RunReport compute_report(const Correspondence& correspondence, const RunLogs& logs, const MetricsConfig& cfg);

/// Human-readable JSON report.
std::string report_to_json(const RunReport& report);
/// One-line CSV summary. Timings are left out so that the line is a pure
/// function of the run's inputs.
std::string report_csv_header();
std::string report_csv_row(const RunReport& report);

}  // namespace isac
