#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "isac/channel.hpp"
#include "isac/detector.hpp"
#include "isac/metrics.hpp"
#include "isac/tracker.hpp"
#include "isac/waveform.hpp"

namespace isac {

/// Everything a simulate / track / e2e run needs. Every field has a default;
/// a configuration file only overrides what it names.
struct PipelineConfig {
  std::uint64_t seed = 1;
  int sweeps = 50;
  int n_range = kDefaultRangeBins;

  WaveformConfig waveform;
  BeamCodebook codebook = BeamCodebook::uniform(21, 21, 90.0);
  SceneConfig scene = default_scene();

  std::vector<double> mti_taps{1.0, -1.0};
  CfarConfig cfar;
  /// Near-range blind zone; converted to CfarConfig::min_range_bin.
  double cfar_min_range_m = 1.5;
  DbscanConfig dbscan;
  TrackerConfig tracker;
  MetricsConfig metrics;

  static SceneConfig default_scene();

  /// CFAR settings with the blind zone resolved to range bins.
  CfarConfig effective_cfar() const;

  /// Throws ConfigError with the offending section.
  void validate() const;
};

/// Parses a JSON document; // and /* */ comments are allowed. Unknown keys
/// are rejected. Throws ConfigError.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// The fully resolved configuration, loadable by parse_config.
std::string dump_config(const PipelineConfig& cfg);

}  // namespace isac
