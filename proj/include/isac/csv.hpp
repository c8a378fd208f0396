#pragma once

#include <charconv>
#include <cstdint>
#include <array>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "isac/core.hpp"
#include "isac/metrics.hpp"

namespace isac {

/// Comma-separated writer. Floating-point fields use the shortest text that
/// parses back to the same value, so a CSV round trip is exact.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::span<const std::string_view> columns);

  template <typename... Fields>
  void row(const Fields&... fields) {
    std::size_t i = 0;
    ((put(fields), out_.put(++i == sizeof...(Fields) ? '\n' : ',')), ...);
  }

 private:
  template <typename T>
  void put(const T& v) {
    if constexpr (std::is_convertible_v<const T&, std::string_view>) {
      out_ << std::string_view(v);
    } else {
      char buf[32];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out_.write(buf, end - buf);
    }
  }

  std::ostream& out_;
};

/// Whole-file CSV reader addressed by column name. Throws FormatError with
/// the byte offset of the offending line.
class CsvTable {
 public:
  CsvTable(std::istream& in, std::string name);

  std::size_t rows() const { return rows_.size(); }
  std::size_t column(std::string_view name) const;

  std::string_view text(std::size_t row, std::size_t col) const;
  double number(std::size_t row, std::size_t col) const;
  std::uint64_t integer(std::size_t row, std::size_t col) const;

 private:
  struct Row {
    std::uint64_t offset = 0;
    std::vector<std::string> fields;
  };

  [[noreturn]] void fail(std::size_t row, const std::string& what) const;

  std::string name_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

// Run log tables. The column lists live with the readers so the two cannot
// drift apart.

inline constexpr std::array<std::string_view, 7> kTruthColumns = {
    "sweep_index", "t_s", "target_key", "x", "y", "vx", "vy"};
inline constexpr std::array<std::string_view, 10> kTrackColumns = {
    "sweep_index", "t_s", "track_id", "status", "x", "y", "vx", "vy", "sigma_x", "sigma_y"};
inline constexpr std::array<std::string_view, 8> kDetectionColumns = {
    "sweep_index", "range_m", "angle_deg", "power", "cluster_id", "range_idx", "tx_idx", "rx_idx"};
inline constexpr std::array<std::string_view, 6> kClusterColumns = {
    "sweep_index", "cluster_id", "range_m", "angle_deg", "power", "members"};
inline constexpr std::array<std::string_view, 7> kSweepColumns = {
    "sweep_index", "t_s", "warm_up", "cells_tested", "detections", "clusters", "tracks"};
inline constexpr std::array<std::string_view, 6> kLatencyColumns = {
    "sweep_index", "mti_ms", "cfar_ms", "dbscan_ms", "track_ms", "total_ms"};

void write_truth_rows(CsvWriter& w, const SweepTruth& s);
void write_track_rows(CsvWriter& w, const SweepTracks& s);

/// One row of sweeps.csv.
struct SweepSummary {
  std::uint64_t sweep_index = 0;
  double t_s = 0.0;
  bool warm_up = false;
  std::uint64_t cells_tested = 0;
  std::uint64_t detections = 0;
  std::uint64_t clusters = 0;
  std::uint64_t tracks = 0;
};

std::vector<SweepSummary> read_sweeps(std::istream& in);

// The readers below take the sweep list so that sweeps without any rows
// still appear in the log, exactly as they do in memory.
TruthLog read_truth(std::istream& in, const std::vector<SweepSummary>& sweeps);
TrackLog read_tracks(std::istream& in, const std::vector<SweepSummary>& sweeps);
MeasurementLog read_cluster_measurements(std::istream& in, const std::vector<SweepSummary>& sweeps);
std::vector<LatencySample> read_latency(std::istream& in);

}  // namespace isac
