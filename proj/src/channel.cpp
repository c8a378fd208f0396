#include "isac/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace isac {

void SceneConfig::validate() const {
  if (!(sweep_period_s > 0.0)) throw ConfigError("scene.sweep_period_s must be positive");
  if (!(noise_power >= 0.0)) throw ConfigError("scene.noise_power must be >= 0");
  if (!(leakage_amplitude >= 0.0)) throw ConfigError("scene.leakage_amplitude must be >= 0");
  if (!(leakage_range_m >= 0.0)) throw ConfigError("scene.leakage_range_m must be >= 0");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i].pos.y() > 0.0)) {
      throw ConfigError("scene.targets[" + std::to_string(i) + "]: y must be > 0");
    }
    if (!(targets[i].reflectivity > 0.0)) {
      throw ConfigError("scene.targets[" + std::to_string(i) + "]: reflectivity must be > 0");
    }
  }
}

double default_leakage_amplitude(const std::vector<TargetTruth>& targets) {
  double strongest = 0.0;
  for (const auto& t : targets) strongest = std::max(strongest, t.reflectivity);
  return 30.0 * strongest;
}

BeamCodebook BeamCodebook::uniform(int n_tx, int n_rx, double span_deg) {
  auto spaced = [span_deg](int n) {
    std::vector<double> a(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) {
      a[static_cast<std::size_t>(i)] = n == 1 ? 0.0 : -span_deg / 2 + span_deg * i / (n - 1);
    }
    return a;
  };
  BeamCodebook cb;
  cb.tx_angles_deg = spaced(n_tx);
  cb.rx_angles_deg = spaced(n_rx);
  return cb;
}

void BeamCodebook::validate() const {
  if (tx_angles_deg.empty() || rx_angles_deg.empty()) {
    throw ConfigError("codebook: need at least one tx and one rx angle");
  }
  if (n_elements < 1) throw ConfigError("codebook.n_elements must be >= 1");
  if (!(element_spacing_wavelengths > 0.0)) {
    throw ConfigError("codebook.element_spacing_wavelengths must be positive");
  }
  for (const auto* table : {&tx_angles_deg, &rx_angles_deg}) {
    if (!std::is_sorted(table->begin(), table->end())) {
      throw ConfigError("codebook: angle tables must be sorted");
    }
    for (double a : *table) {
      if (!(a > -90.0 && a < 90.0)) throw ConfigError("codebook: angles must lie in (-90, 90)");
    }
  }
}

Eigen::MatrixXcd propagate(const ResourceGrid& grid, const SceneConfig& scene,
                           const BeamCodebook& codebook, int tx_idx, int rx_idx,
                           std::uint64_t sweep_index) {
  if (tx_idx < 0 || tx_idx >= codebook.n_tx() || rx_idx < 0 || rx_idx >= codebook.n_rx()) {
    throw ConfigError("propagate: beam index (" + std::to_string(tx_idx) + ", " +
                      std::to_string(rx_idx) + ") outside the codebook");
  }
  const WaveformConfig& cfg = grid.config;
  const int active = cfg.active_subcarriers();
  const double steer_tx = codebook.tx_angles_deg[static_cast<std::size_t>(tx_idx)];
  const double steer_rx = codebook.rx_angles_deg[static_cast<std::size_t>(rx_idx)];

  // Frequency response of all paths, one value per subcarrier.
  Eigen::VectorXcd response = Eigen::VectorXcd::Zero(active);
  auto add_path = [&](std::complex<double> gain, double range_m) {
    const double tau = 2.0 * range_m / kSpeedOfLight;
    const double slope = -2.0 * std::numbers::pi * cfg.scs_hz * tau;
    for (int k = 0; k < active; ++k) {
      response(k) += gain * std::polar(1.0, slope * subcarrier_offset(k, active));
    }
  };
  for (const auto& target : scene.targets) {
    const double bearing = target.bearing_deg();
    const auto g_tx = array_factor(steer_tx, bearing, codebook.n_elements,
                                   codebook.element_spacing_wavelengths);
    const auto g_rx = array_factor(steer_rx, bearing, codebook.n_elements,
                                   codebook.element_spacing_wavelengths);
    add_path(target.reflectivity * g_tx * g_rx, target.range());
  }
  if (scene.leakage_amplitude > 0.0) add_path(scene.leakage_amplitude, scene.leakage_range_m);

  Eigen::MatrixXcd received = grid.data.array().colwise() * response.array();

  if (scene.noise_power > 0.0) {
    boost::random::mt19937_64 rng(derive_seed(scene.seed, sweep_index, tx_idx, rx_idx));
    boost::random::normal_distribution<double> normal(0.0, std::sqrt(scene.noise_power / 2.0));
    for (Eigen::Index l = 0; l < received.cols(); ++l) {
      for (Eigen::Index k = 0; k < received.rows(); ++k) {
        const double re = normal(rng);
        const double im = normal(rng);
        received(k, l) += std::complex<double>(re, im);
      }
    }
  }
  return received;
}

SceneConfig advance(SceneConfig scene, double dt_s) {
  for (auto& t : scene.targets) t.pos += t.vel * dt_s;
  scene.time_s += dt_s;
  return scene;
}

}  // namespace isac
