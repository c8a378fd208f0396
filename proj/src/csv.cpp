#include "isac/csv.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace isac {

CsvWriter::CsvWriter(std::ostream& out, std::span<const std::string_view> columns) : out_(out) {
  std::size_t i = 0;
  for (auto c : columns) {
    out_ << c;
    out_.put(++i == columns.size() ? '\n' : ',');
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable::CsvTable(std::istream& in, std::string name) : name_(std::move(name)) {
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line)) throw FormatError(name_ + ": missing header line", 0);
  offset += line.size() + 1;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  header_ = split(line);
  while (std::getline(in, line)) {
    const std::uint64_t start = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Row row{start, split(line)};
    if (row.fields.size() != header_.size()) {
      throw FormatError(name_ + ": expected " + std::to_string(header_.size()) + " fields, found " +
                            std::to_string(row.fields.size()),
                        start);
    }
    rows_.push_back(std::move(row));
  }
}

std::size_t CsvTable::column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw FormatError(name_ + ": missing column '" + std::string(name) + "'", 0);
  return static_cast<std::size_t>(it - header_.begin());
}

void CsvTable::fail(std::size_t row, const std::string& what) const {
  throw FormatError(name_ + ": " + what, rows_[row].offset);
}

std::string_view CsvTable::text(std::size_t row, std::size_t col) const { return rows_[row].fields[col]; }

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& f = rows_[row].fields[col];
  double v = 0.0;
  auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || end != f.data() + f.size()) fail(row, "bad number '" + f + "'");
  return v;
}

std::uint64_t CsvTable::integer(std::size_t row, std::size_t col) const {
  const std::string& f = rows_[row].fields[col];
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || end != f.data() + f.size()) fail(row, "bad integer '" + f + "'");
  return v;
}

void write_truth_rows(CsvWriter& w, const SweepTruth& s) {
  for (const auto& t : s.targets) w.row(s.sweep_index, s.t_s, t.target_key, t.x, t.y, t.vx, t.vy);
}

void write_track_rows(CsvWriter& w, const SweepTracks& s) {
  for (const auto& t : s.tracks) {
    w.row(s.sweep_index, s.t_s, t.id, to_string(t.status), t.x(0), t.x(1), t.x(2), t.x(3), std::sqrt(t.P(0, 0)),
          std::sqrt(t.P(1, 1)));
  }
}

std::vector<SweepSummary> read_sweeps(std::istream& in) {
  CsvTable t(in, "sweeps.csv");
  const auto c_idx = t.column("sweep_index"), c_t = t.column("t_s"), c_w = t.column("warm_up"),
             c_cells = t.column("cells_tested"), c_det = t.column("detections"), c_cl = t.column("clusters"),
             c_tr = t.column("tracks");
  std::vector<SweepSummary> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    out.push_back({t.integer(r, c_idx), t.number(r, c_t), t.integer(r, c_w) != 0, t.integer(r, c_cells),
                   t.integer(r, c_det), t.integer(r, c_cl), t.integer(r, c_tr)});
  }
  return out;
}

namespace {

// Sweep-indexed log with an entry for every listed sweep, in ascending order.
template <typename Entry>
class SweepIndexed {
 public:
  explicit SweepIndexed(const std::vector<SweepSummary>& sweeps) {
    for (const auto& s : sweeps) at(s.sweep_index, s.t_s);
  }

  Entry& at(std::uint64_t sweep_index, double t_s) {
    auto [it, inserted] = entries_.try_emplace(sweep_index);
    if (inserted) {
      it->second.sweep_index = sweep_index;
      if constexpr (requires { it->second.t_s; }) it->second.t_s = t_s;
    }
    return it->second;
  }

  std::vector<Entry> take() {
    std::vector<Entry> out;
    for (auto& [k, v] : entries_) out.push_back(std::move(v));
    return out;
  }

 private:
  std::map<std::uint64_t, Entry> entries_;
};

}  // namespace

TruthLog read_truth(std::istream& in, const std::vector<SweepSummary>& sweeps) {
  CsvTable t(in, "truth.csv");
  const auto c_idx = t.column("sweep_index"), c_t = t.column("t_s"), c_key = t.column("target_key"),
             c_x = t.column("x"), c_y = t.column("y"), c_vx = t.column("vx"), c_vy = t.column("vy");
  SweepIndexed<SweepTruth> log(sweeps);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    log.at(t.integer(r, c_idx), t.number(r, c_t))
        .targets.push_back({static_cast<int>(t.integer(r, c_key)), t.number(r, c_x), t.number(r, c_y),
                            t.number(r, c_vx), t.number(r, c_vy)});
  }
  return log.take();
}

TrackLog read_tracks(std::istream& in, const std::vector<SweepSummary>& sweeps) {
  CsvTable t(in, "tracks.csv");
  const auto c_idx = t.column("sweep_index"), c_t = t.column("t_s"), c_id = t.column("track_id"),
             c_status = t.column("status"), c_x = t.column("x"), c_y = t.column("y"), c_vx = t.column("vx"),
             c_vy = t.column("vy"), c_sx = t.column("sigma_x"), c_sy = t.column("sigma_y");
  SweepIndexed<SweepTracks> log(sweeps);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    TrackState s;
    s.id = t.integer(r, c_id);
    try {
      s.status = track_status_from_string(t.text(r, c_status));
    } catch (const Error& e) {
      throw FormatError(std::string("tracks.csv: ") + e.what(), 0);
    }
    s.x << t.number(r, c_x), t.number(r, c_y), t.number(r, c_vx), t.number(r, c_vy);
    s.P(0, 0) = t.number(r, c_sx) * t.number(r, c_sx);
    s.P(1, 1) = t.number(r, c_sy) * t.number(r, c_sy);
    s.time_s = t.number(r, c_t);
    log.at(t.integer(r, c_idx), s.time_s).tracks.push_back(s);
  }
  return log.take();
}

MeasurementLog read_cluster_measurements(std::istream& in, const std::vector<SweepSummary>& sweeps) {
  CsvTable t(in, "clusters.csv");
  const auto c_idx = t.column("sweep_index"), c_r = t.column("range_m"), c_a = t.column("angle_deg"),
             c_p = t.column("power");
  SweepIndexed<SweepMeasurements> log(sweeps);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    log.at(t.integer(r, c_idx), 0.0).measurements.push_back({t.number(r, c_r), t.number(r, c_a), t.number(r, c_p)});
  }
  return log.take();
}

std::vector<LatencySample> read_latency(std::istream& in) {
  CsvTable t(in, "latency.csv");
  const auto c_idx = t.column("sweep_index"), c_mti = t.column("mti_ms"), c_cfar = t.column("cfar_ms"),
             c_db = t.column("dbscan_ms"), c_tr = t.column("track_ms"), c_tot = t.column("total_ms");
  std::vector<LatencySample> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    out.push_back({t.integer(r, c_idx), t.number(r, c_mti), t.number(r, c_cfar), t.number(r, c_db),
                   t.number(r, c_tr), t.number(r, c_tot)});
  }
  return out;
}

}  // namespace isac
