#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "isac/channel.hpp"
#include "isac/waveform.hpp"

namespace isac {

/// Least-squares channel estimate H = Y ./ X. Throws FrameError on a shape
/// mismatch.
Eigen::MatrixXcd estimate_channel(const Eigen::MatrixXcd& rx_grid, const Eigen::MatrixXcd& tx_grid);

struct RangeProfile {
  Eigen::VectorXd power;  // |IDFT|^2 per range bin, fft_size entries
  double bin_size_m = 0.0;
};

/// Coherent average over symbols, zero-pad to fft_size, unitary IDFT, |.|^2.
RangeProfile range_profile(const Eigen::MatrixXcd& channel, const WaveformConfig& cfg);

/// One sweep's range / tx-angle / rx-angle power tensor.
///
/// Storage is an (n_range x n_tx*n_rx) matrix so that each beam pair's range
/// profile is a contiguous column; column index is tx * n_rx + rx. Values and
/// angle tables are single precision, the precision of the on-disk format.
struct RaTensor {
  Eigen::MatrixXf power;
  std::vector<float> tx_angles_deg;
  std::vector<float> rx_angles_deg;
  std::uint64_t sweep_index = 0;
  double t_start_s = 0.0;
  double bin_size_m = 0.0;

  int n_range() const { return static_cast<int>(power.rows()); }
  int n_tx() const { return static_cast<int>(tx_angles_deg.size()); }
  int n_rx() const { return static_cast<int>(rx_angles_deg.size()); }
  Eigen::Index beam(int tx, int rx) const { return static_cast<Eigen::Index>(tx) * n_rx() + rx; }

  float& operator()(int r, int tx, int rx) { return power(r, beam(tx, rx)); }
  float operator()(int r, int tx, int rx) const { return power(r, beam(tx, rx)); }

  bool same_shape(const RaTensor& other) const {
    return power.rows() == other.power.rows() && tx_angles_deg.size() == other.tx_angles_deg.size() &&
           rx_angles_deg.size() == other.rx_angles_deg.size();
  }

  static RaTensor zeros(int n_range, std::vector<float> tx_angles, std::vector<float> rx_angles);
};

inline constexpr int kDefaultRangeBins = 512;

/// Simulates every (tx, rx) beam pair against `scene` (already positioned at
/// the sweep start) and stacks the range profiles, cropped to n_range bins.
RaTensor sweep(const SceneConfig& scene, const BeamCodebook& codebook, const WaveformConfig& wf,
               std::uint64_t sweep_index, int n_range = kDefaultRangeBins);

}  // namespace isac
