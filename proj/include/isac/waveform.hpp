#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "isac/core.hpp"

namespace isac {

/// CP-OFDM parameters of the known sensing waveform.
///
/// Defaults are the 5G NR FR2 numerology of the sensing chain: 275 resource
/// blocks at 120 kHz (3300 active subcarriers, 396 MHz occupied inside a
/// 400 MHz channel) on a 28 GHz carrier. FFT length, CP length and the
/// number of symbols per beam dwell are free parameters of the simulator.
struct WaveformConfig {
  int n_rb = 275;
  double scs_hz = 120e3;
  int n_symbols = 14;
  int fft_size = 4096;
  int cp_len = 288;
  double carrier_hz = 28e9;
  std::uint64_t seed = 1;

  int active_subcarriers() const { return 12 * n_rb; }
  double bandwidth_hz() const { return active_subcarriers() * scs_hz; }
  double sample_rate_hz() const { return scs_hz * fft_size; }
  int frame_length() const { return n_symbols * (fft_size + cp_len); }
  /// Range extent of one IFFT output bin, c / (2 * scs * fft_size).
  double range_bin_m() const { return kSpeedOfLight / (2.0 * scs_hz * fft_size); }

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;
};

/// Frequency-domain transmit grid, rows are active subcarriers (lowest
/// frequency first), columns are OFDM symbols.
struct ResourceGrid {
  Eigen::MatrixXcd data;
  WaveformConfig config;
};

struct IqFrame {
  Eigen::VectorXcd samples;
  double sample_rate_hz = 0.0;
};

/// Signed frequency index of active subcarrier `k` relative to DC; the grid is
/// centered, so row 0 sits at -K/2 and row K-1 at K/2 - 1.
inline int subcarrier_offset(int k, int active) { return k - active / 2; }

/// Baseband frequency of grid row `k`.
inline double subcarrier_frequency_hz(int k, const WaveformConfig& cfg) {
  return subcarrier_offset(k, cfg.active_subcarriers()) * cfg.scs_hz;
}

/// Uniform QPSK payload, deterministic in cfg.seed.
ResourceGrid build_grid(const WaveformConfig& cfg);

/// Per-symbol unitary inverse DFT (1/sqrt(fft_size)) with cyclic prefix.
IqFrame modulate(const ResourceGrid& grid);

/// Inverse of modulate: strips the CP, applies the unitary DFT and extracts
/// the active subcarriers. Throws FrameError on a length mismatch.
ResourceGrid demodulate(const IqFrame& frame, const WaveformConfig& cfg);

}  // namespace isac
