#include "isac/waveform.hpp"

#include <cmath>
#include <random>
#include <string>

#include <unsupported/Eigen/FFT>

namespace isac {

void WaveformConfig::validate() const {
  if (n_rb < 1) throw ConfigError("waveform.n_rb must be >= 1");
  if (!(scs_hz > 0.0)) throw ConfigError("waveform.scs_hz must be positive");
  if (n_symbols < 1) throw ConfigError("waveform.n_symbols must be >= 1");
  if (cp_len < 0) throw ConfigError("waveform.cp_len must be >= 0");
  if (active_subcarriers() > fft_size) {
    throw ConfigError("waveform: 12 * n_rb = " + std::to_string(active_subcarriers()) +
                      " exceeds fft_size = " + std::to_string(fft_size));
  }
}

namespace {

int fft_bin(int k, int active, int fft_size) {
  const int offset = subcarrier_offset(k, active);
  return offset >= 0 ? offset : offset + fft_size;
}

}  // namespace

ResourceGrid build_grid(const WaveformConfig& cfg) {
  cfg.validate();
  const int active = cfg.active_subcarriers();
  ResourceGrid grid{Eigen::MatrixXcd(active, cfg.n_symbols), cfg};

  const double a = 1.0 / std::sqrt(2.0);
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x9e1dULL));
  // Two bits per symbol, fill column by column.
  std::uint64_t bits = 0;
  int remaining = 0;
  for (int l = 0; l < cfg.n_symbols; ++l) {
    for (int k = 0; k < active; ++k) {
      if (remaining == 0) {
        bits = rng();
        remaining = 32;
      }
      const double re = (bits & 1u) ? -a : a;
      const double im = (bits & 2u) ? -a : a;
      bits >>= 2;
      --remaining;
      grid.data(k, l) = {re, im};
    }
  }
  return grid;
}

IqFrame modulate(const ResourceGrid& grid) {
  const WaveformConfig& cfg = grid.config;
  cfg.validate();
  const int active = cfg.active_subcarriers();
  const int n = cfg.fft_size;
  const int sym_len = n + cfg.cp_len;
  if (grid.data.rows() != active || grid.data.cols() != cfg.n_symbols) {
    throw FrameError("modulate: grid shape does not match its configuration");
  }

  Eigen::FFT<double> fft;
  const double scale = std::sqrt(static_cast<double>(n));  // inv() applies 1/n
  IqFrame frame{Eigen::VectorXcd::Zero(cfg.frame_length()), cfg.sample_rate_hz()};
  Eigen::VectorXcd freq(n);
  Eigen::VectorXcd time(n);
  for (int l = 0; l < cfg.n_symbols; ++l) {
    freq.setZero();
    for (int k = 0; k < active; ++k) freq(fft_bin(k, active, n)) = grid.data(k, l);
    fft.inv(time, freq);
    time *= scale;
    auto symbol = frame.samples.segment(static_cast<Eigen::Index>(l) * sym_len, sym_len);
    symbol.head(cfg.cp_len) = time.tail(cfg.cp_len);
    symbol.tail(n) = time;
  }
  return frame;
}

ResourceGrid demodulate(const IqFrame& frame, const WaveformConfig& cfg) {
  cfg.validate();
  if (frame.samples.size() != cfg.frame_length()) {
    throw FrameError("demodulate: frame has " + std::to_string(frame.samples.size()) +
                     " samples, configuration expects " + std::to_string(cfg.frame_length()));
  }
  const int active = cfg.active_subcarriers();
  const int n = cfg.fft_size;
  const int sym_len = n + cfg.cp_len;

  Eigen::FFT<double> fft;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ResourceGrid grid{Eigen::MatrixXcd(active, cfg.n_symbols), cfg};
  Eigen::VectorXcd time(n);
  Eigen::VectorXcd freq(n);
  for (int l = 0; l < cfg.n_symbols; ++l) {
    time = frame.samples.segment(static_cast<Eigen::Index>(l) * sym_len + cfg.cp_len, n);
    fft.fwd(freq, time);
    for (int k = 0; k < active; ++k) grid.data(k, l) = freq(fft_bin(k, active, n)) * scale;
  }
  return grid;
}

}  // namespace isac
