#include "isac/pipeline.hpp"

#include <chrono>
#include <map>

#include <spdlog/spdlog.h>

#include "isac/tensor_file.hpp"

namespace isac {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out.flush()) throw IoError("failed writing " + path.string());
}

}  // namespace

SweepProcessor::SweepProcessor(const PipelineConfig& cfg)
    : mti_(cfg.mti_taps), cfar_(cfg.effective_cfar()), dbscan_(cfg.dbscan), tracker_(cfg.tracker) {}

SweepResult SweepProcessor::process(const RaTensor& tensor) {
  SweepResult r;
  r.sweep_index = tensor.sweep_index;
  r.t_s = tensor.t_start_s;

  const auto t0 = Clock::now();
  const auto filtered = mti_.apply(tensor);
  r.warm_up = filtered.warm_up;
  const auto t1 = Clock::now();
  if (!r.warm_up) {
    r.detections = ca_cfar(filtered.tensor, cfar_);
    const int tested = std::max(0, tensor.n_range() - cfar_.min_range_bin);
    r.cells_tested = static_cast<std::uint64_t>(tested) * static_cast<std::uint64_t>(tensor.power.cols());
  }
  const auto t2 = Clock::now();
  r.clusters = dbscan(r.detections, dbscan_);
  r.measurements = measure_clusters(r.clusters, filtered.tensor);
  const auto t3 = Clock::now();
  r.tracks = tracker_.step(r.measurements, r.t_s);
  const auto t4 = Clock::now();

  r.latency = {r.sweep_index, ms_between(t0, t1), ms_between(t1, t2), ms_between(t2, t3), ms_between(t3, t4),
               ms_between(t0, t4)};
  return r;
}

SceneSimulator::SceneSimulator(const PipelineConfig& cfg) : cfg_(cfg), scene_(cfg.scene) { scene_.time_s = 0.0; }

RaTensor SceneSimulator::next(SweepTruth& truth) {
  const std::uint64_t idx = next_++;
  RaTensor t = sweep(scene_, cfg_.codebook, cfg_.waveform, idx, cfg_.n_range);
  truth = snapshot_truth(scene_, idx);
  truth.t_s = t.t_start_s;
  scene_ = advance(scene_, scene_.sweep_period_s);
  return t;
}

RunRecorder::File RunRecorder::open(const std::string& name, std::span<const std::string_view> columns) {
  File f;
  f.stream = std::make_unique<std::ofstream>(open_output(dir_ / name));
  f.csv = std::make_unique<CsvWriter>(*f.stream, columns);
  return f;
}

RunRecorder::RunRecorder(const fs::path& out_dir, bool record_truth) : dir_(out_dir) {
  ensure_dir(dir_);
  detections_ = open("detections.csv", kDetectionColumns);
  clusters_ = open("clusters.csv", kClusterColumns);
  tracks_ = open("tracks.csv", kTrackColumns);
  sweeps_ = open("sweeps.csv", kSweepColumns);
  latency_ = open("latency.csv", kLatencyColumns);
  if (record_truth) truth_ = open(kTruthFileName, kTruthColumns);
}

void RunRecorder::truth(const SweepTruth& s) {
  if (!truth_) return;
  write_truth_rows(*truth_->csv, s);
  logs_.truth.push_back(s);
}

void RunRecorder::sweep(const SweepResult& r, const RaTensor& tensor) {
  for (std::size_t i = 0; i < r.detections.size(); ++i) {
    const auto& d = r.detections[i];
    detections_.csv->row(r.sweep_index, d.range_idx * tensor.bin_size_m,
                         beam_pair_angle_deg(tensor, d.tx_idx, d.rx_idx), d.power, r.clusters.labels[i], d.range_idx,
                         d.tx_idx, d.rx_idx);
  }
  for (std::size_t c = 0; c < r.clusters.clusters.size(); ++c) {
    const auto& cl = r.clusters.clusters[c];
    clusters_.csv->row(r.sweep_index, c, cl.centroid_range_m, cl.centroid_angle_deg, cl.total_power,
                       cl.members.size());
  }
  SweepTracks st{r.sweep_index, r.t_s, r.tracks};
  write_track_rows(*tracks_.csv, st);
  sweeps_.csv->row(r.sweep_index, r.t_s, r.warm_up ? 1 : 0, r.cells_tested, r.detections.size(),
                   r.clusters.clusters.size(), r.tracks.size());
  const auto& l = r.latency;
  latency_.csv->row(l.sweep_index, l.mti_ms, l.cfar_ms, l.dbscan_ms, l.track_ms, l.total_ms);

  logs_.tracks.push_back(std::move(st));
  logs_.measurements.push_back({r.sweep_index, r.measurements});
  logs_.latency.push_back(l);
  logs_.counts.cells_tested += r.cells_tested;
  logs_.counts.detections += r.detections.size();
}

RunReport RunRecorder::finish(const MetricsConfig& cfg) {
  for (File* f : {&detections_, &clusters_, &tracks_, &sweeps_, &latency_}) {
    if (!f->stream->flush()) throw IoError("failed writing run logs in " + dir_.string());
  }
  if (truth_ && !truth_->stream->flush()) throw IoError("failed writing truth log in " + dir_.string());

  const RunReport report = compute_report(match_tracks_to_truth(logs_.tracks, logs_.truth, cfg.match_radius_m),
                                          logs_, cfg);
  write_text(dir_ / "report.json", report_to_json(report));
  write_text(dir_ / "summary.csv", report_csv_header() + report_csv_row(report));
  return report;
}

void cmd_simulate(const PipelineConfig& cfg, const fs::path& out_dir) {
  ensure_dir(out_dir);
  write_text(out_dir / kResolvedConfigName, dump_config(cfg));
  auto tensor_out = open_output(out_dir / kTensorFileName, std::ios::out | std::ios::binary);
  auto truth_out = open_output(out_dir / kTruthFileName);
  CsvWriter truth_csv(truth_out, kTruthColumns);

  SceneSimulator sim(cfg);
  std::optional<TensorWriter> writer;
  while (!sim.done()) {
    SweepTruth truth;
    const RaTensor t = sim.next(truth);
    if (!writer) writer.emplace(tensor_out, TensorFileHeader::describe(t));
    writer->write(t);
    write_truth_rows(truth_csv, truth);
    spdlog::debug("simulated sweep {}", t.sweep_index);
  }
  if (!tensor_out.flush() || !truth_out.flush()) throw IoError("failed writing simulation output in " + out_dir.string());
  spdlog::info("simulated {} sweeps into {}", cfg.sweeps, out_dir.string());
}

RunReport cmd_track(const PipelineConfig& cfg, std::istream& tensors, const fs::path& out_dir,
                    const std::optional<fs::path>& truth_csv) {
  // Read truth before the recorder opens its own truth.csv, which may be the same file.
  std::map<std::uint64_t, SweepTruth> truth;
  if (truth_csv) {
    std::ifstream in(*truth_csv);
    if (!in) throw IoError("cannot open truth file " + truth_csv->string());
    for (auto& s : read_truth(in, {})) truth[s.sweep_index] = std::move(s);
  }

  TensorReader reader(tensors);
  ensure_dir(out_dir);
  write_text(out_dir / kResolvedConfigName, dump_config(cfg));
  RunRecorder recorder(out_dir, truth_csv.has_value());
  SweepProcessor processor(cfg);

  while (auto t = reader.next()) {
    if (truth_csv) {
      auto it = truth.find(t->sweep_index);
      recorder.truth(it != truth.end() ? it->second : SweepTruth{t->sweep_index, t->t_start_s, {}});
    }
    const SweepResult r = processor.process(*t);
    recorder.sweep(r, *t);
    spdlog::debug("sweep {}: {} detections, {} clusters, {} tracks, {:.2f} ms", r.sweep_index, r.detections.size(),
                  r.clusters.clusters.size(), r.tracks.size(), r.latency.total_ms);
  }
  const RunReport report = recorder.finish(cfg.metrics);
  spdlog::info("tracked {} sweeps: {} confirmed tracks, median latency {:.2f} ms", report.sweeps,
               report.confirmed_track_count, report.latency.median_ms);
  return report;
}

RunReport cmd_e2e(const PipelineConfig& cfg, const fs::path& out_dir) {
  ensure_dir(out_dir);
  write_text(out_dir / kResolvedConfigName, dump_config(cfg));
  auto tensor_out = open_output(out_dir / kTensorFileName, std::ios::out | std::ios::binary);
  RunRecorder recorder(out_dir, true);
  SweepProcessor processor(cfg);
  SceneSimulator sim(cfg);
  std::optional<TensorWriter> writer;

  while (!sim.done()) {
    SweepTruth truth;
    const RaTensor t = sim.next(truth);
    if (!writer) writer.emplace(tensor_out, TensorFileHeader::describe(t));
    writer->write(t);
    recorder.truth(truth);
    const SweepResult r = processor.process(t);
    recorder.sweep(r, t);
    spdlog::debug("sweep {}: {} detections, {} clusters, {} tracks, {:.2f} ms", r.sweep_index, r.detections.size(),
                  r.clusters.clusters.size(), r.tracks.size(), r.latency.total_ms);
  }
  if (!tensor_out.flush()) throw IoError("failed writing " + (out_dir / kTensorFileName).string());
  const RunReport report = recorder.finish(cfg.metrics);
  spdlog::info("e2e: {} sweeps, {} confirmed tracks, pos rmse {:.3f} m, median latency {:.2f} ms", report.sweeps,
               report.confirmed_track_count, report.pos_rmse_m, report.latency.median_ms);
  return report;
}

RunReport cmd_report(const fs::path& in_dir) {
  auto open_input = [&](const char* name) {
    std::ifstream in(in_dir / name);
    if (!in) throw IoError("cannot open " + (in_dir / name).string());
    return in;
  };

  MetricsConfig metrics;
  if (fs::exists(in_dir / kResolvedConfigName)) metrics = load_config(in_dir / kResolvedConfigName).metrics;

  auto sweeps_in = open_input("sweeps.csv");
  const auto sweeps = read_sweeps(sweeps_in);

  RunLogs logs;
  if (fs::exists(in_dir / kTruthFileName)) {
    auto in = open_input(kTruthFileName);
    logs.truth = read_truth(in, sweeps);
  }
  auto tracks_in = open_input("tracks.csv");
  logs.tracks = read_tracks(tracks_in, sweeps);
  auto clusters_in = open_input("clusters.csv");
  logs.measurements = read_cluster_measurements(clusters_in, sweeps);
  auto latency_in = open_input("latency.csv");
  logs.latency = read_latency(latency_in);
  for (const auto& s : sweeps) {
    logs.counts.cells_tested += s.cells_tested;
    logs.counts.detections += s.detections;
  }

  const RunReport report =
      compute_report(match_tracks_to_truth(logs.tracks, logs.truth, metrics.match_radius_m), logs, metrics);
  write_text(in_dir / "report.json", report_to_json(report));
  write_text(in_dir / "summary.csv", report_csv_header() + report_csv_row(report));
  return report;
}

}  // namespace isac
