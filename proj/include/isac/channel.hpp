#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "isac/core.hpp"
#include "isac/waveform.hpp"

namespace isac {

/// Normalized azimuth array factor of a uniform linear array steered to
/// `steer_deg`, evaluated for a plane wave arriving from `target_deg`:
///
///   AF = (1/n) * sum_m exp(j 2 pi m d (sin(target) - sin(steer)))
///
/// |AF| <= 1 with equality iff the two sines coincide.
template <typename Scalar>
std::complex<Scalar> array_factor(Scalar steer_deg, Scalar target_deg, int n_elements,
                                  Scalar spacing_wavelengths) {
  const Scalar psi = Scalar(2) * std::numbers::pi_v<Scalar> * spacing_wavelengths *
                     (std::sin(deg2rad(target_deg)) - std::sin(deg2rad(steer_deg)));
  std::complex<Scalar> sum{0, 0};
  for (int m = 0; m < n_elements; ++m) sum += std::polar(Scalar(1), psi * Scalar(m));
  return sum / Scalar(n_elements);
}

/// Ground-truth point reflector. x is cross-range, y is down-range.
struct TargetTruth {
  Eigen::Vector2d pos{0.0, 1.0};
  Eigen::Vector2d vel{0.0, 0.0};
  double reflectivity = 1.0;

  double range() const { return pos.norm(); }
  /// Bearing from boresight (+y) toward +x, degrees.
  double bearing_deg() const { return rad2deg(std::atan2(pos.x(), pos.y())); }
};

struct SceneConfig {
  std::vector<TargetTruth> targets;
  double leakage_amplitude = 0.0;
  double leakage_range_m = 0.5;
  double noise_power = 0.0;
  double sweep_period_s = 0.2;
  std::uint64_t seed = 1;
  /// Time the target positions refer to.
  double time_s = 0.0;

  void validate() const;
};

/// Self-interference amplitude used when a configuration does not set one:
/// 30x the strongest target, zero for an empty scene.
double default_leakage_amplitude(const std::vector<TargetTruth>& targets);

struct BeamCodebook {
  std::vector<double> tx_angles_deg;
  std::vector<double> rx_angles_deg;
  int n_elements = 8;
  double element_spacing_wavelengths = 0.5;

  int n_tx() const { return static_cast<int>(tx_angles_deg.size()); }
  int n_rx() const { return static_cast<int>(rx_angles_deg.size()); }

  /// Evenly spaced tx and rx angles over [-span/2, span/2].
  static BeamCodebook uniform(int n_tx, int n_rx, double span_deg);

  void validate() const;
};

/// Received frequency-domain grid for one (tx, rx) beam pair. Target
/// positions are taken from `scene` as-is (frozen for the whole sweep).
/// Each path contributes a * G_tx * G_rx * X[k,l] * exp(-j 2 pi f_k tau)
/// with f_k the signed baseband subcarrier frequency and tau = 2 r / c; the
/// leakage path has unit beam gains. The AWGN realization is a pure function
/// of (scene.seed, sweep_index, tx_idx, rx_idx).
Eigen::MatrixXcd propagate(const ResourceGrid& grid, const SceneConfig& scene,
                           const BeamCodebook& codebook, int tx_idx, int rx_idx,
                           std::uint64_t sweep_index);

/// Constant-velocity motion of every target over dt_s.
SceneConfig advance(SceneConfig scene, double dt_s);

}  // namespace isac
