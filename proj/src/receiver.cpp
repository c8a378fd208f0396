#include "isac/receiver.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/FFT>

namespace isac {

Eigen::MatrixXcd estimate_channel(const Eigen::MatrixXcd& rx_grid, const Eigen::MatrixXcd& tx_grid) {
  if (rx_grid.rows() != tx_grid.rows() || rx_grid.cols() != tx_grid.cols()) {
    throw FrameError("estimate_channel: received grid is " + std::to_string(rx_grid.rows()) + "x" +
                     std::to_string(rx_grid.cols()) + ", reference is " +
                     std::to_string(tx_grid.rows()) + "x" + std::to_string(tx_grid.cols()));
  }
  return rx_grid.cwiseQuotient(tx_grid);
}

RangeProfile range_profile(const Eigen::MatrixXcd& channel, const WaveformConfig& cfg) {
  const int n = cfg.fft_size;
  if (channel.rows() > n) throw FrameError("range_profile: more subcarriers than fft_size");

  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(n);
  padded.head(channel.rows()) = channel.rowwise().mean();

  Eigen::FFT<double> fft;
  Eigen::VectorXcd taps(n);
  fft.inv(taps, padded);
  taps *= std::sqrt(static_cast<double>(n));
  return {taps.cwiseAbs2(), cfg.range_bin_m()};
}

RaTensor RaTensor::zeros(int n_range, std::vector<float> tx_angles, std::vector<float> rx_angles) {
  RaTensor t;
  t.power = Eigen::MatrixXf::Zero(n_range, static_cast<Eigen::Index>(tx_angles.size() * rx_angles.size()));
  t.tx_angles_deg = std::move(tx_angles);
  t.rx_angles_deg = std::move(rx_angles);
  return t;
}

RaTensor sweep(const SceneConfig& scene, const BeamCodebook& codebook, const WaveformConfig& wf,
               std::uint64_t sweep_index, int n_range) {
  scene.validate();
  codebook.validate();
  wf.validate();
  if (n_range < 1 || n_range > wf.fft_size) {
    throw ConfigError("sweep: n_range must lie in [1, fft_size]");
  }

  RaTensor tensor = RaTensor::zeros(
      n_range, std::vector<float>(codebook.tx_angles_deg.begin(), codebook.tx_angles_deg.end()),
      std::vector<float>(codebook.rx_angles_deg.begin(), codebook.rx_angles_deg.end()));
  tensor.sweep_index = sweep_index;
  tensor.t_start_s = static_cast<double>(sweep_index) * scene.sweep_period_s;
  tensor.bin_size_m = wf.range_bin_m();

  const ResourceGrid grid = build_grid(wf);
  for (int tx = 0; tx < codebook.n_tx(); ++tx) {
    for (int rx = 0; rx < codebook.n_rx(); ++rx) {
      const auto received = propagate(grid, scene, codebook, tx, rx, sweep_index);
      const auto profile = range_profile(estimate_channel(received, grid.data), wf);
      tensor.power.col(tensor.beam(tx, rx)) = profile.power.head(n_range).cast<float>();
    }
  }
  return tensor;
}

}  // namespace isac
