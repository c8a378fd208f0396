#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "isac/detector.hpp"

namespace isac {

using StateVector = Eigen::Matrix<double, 4, 1>;  // [x, y, vx, vy]
using StateCovariance = Eigen::Matrix<double, 4, 4>;
using MeasurementJacobian = Eigen::Matrix<double, 2, 4>;

enum class TrackStatus { Tentative, Confirmed, Dead };

std::string_view to_string(TrackStatus s);
TrackStatus track_status_from_string(std::string_view s);

struct TrackState {
  std::uint64_t id = 0;
  StateVector x = StateVector::Zero();
  StateCovariance P = StateCovariance::Identity();
  TrackStatus status = TrackStatus::Tentative;
  int hits = 0;
  int misses = 0;  // consecutive
  int age = 0;     // sweeps since birth, birth sweep counts as 1
  double time_s = 0.0;          // epoch of x and P
  double last_update_s = 0.0;   // time of the last associated measurement
  std::uint32_t hit_history = 0;  // bit 0 = latest sweep
};

/// Measurement space of the filter. Polar runs the EKF on (r, theta) with a
/// nonlinear h(x); Cartesian converts each measurement to (x, y) first and
/// runs a linear update with the converted covariance.
enum class MeasurementSpace { Polar, Cartesian };

struct TrackerConfig {
  double q_accel = 1.0;                   // m^2/s^3
  double r_range_var = 0.09;              // m^2
  double r_angle_var = deg2rad(2.0) * deg2rad(2.0);  // rad^2
  double gate_m = 2.0;
  int confirm_m = 3;
  int confirm_n = 4;
  int max_misses = 5;
  double p0_pos_var = 1.0;   // m^2
  double p0_vel_var = 25.0;  // (m/s)^2
  MeasurementSpace space = MeasurementSpace::Polar;

  void validate() const;
};

/// x = r sin(theta), y = r cos(theta); theta measured from +y toward +x.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> polar_to_cartesian(Scalar r, Scalar theta) {
  return {r * std::sin(theta), r * std::cos(theta)};
}

/// Constant-velocity prediction with white-acceleration process noise.
TrackState ekf_predict(TrackState track, double dt_s, const TrackerConfig& cfg);

struct MeasurementModel {
  Eigen::Vector2d z;  // (r, theta)
  MeasurementJacobian H;
};

/// Polar measurement map and its Jacobian. Throws GeometryError at the origin.
MeasurementModel measurement_model(const StateVector& x);

/// EKF update with z = (range m, bearing rad). Joseph-form covariance,
/// re-symmetrized. Throws NumericalError if the innovation covariance is
/// not positive definite.
TrackState ekf_update(TrackState track, const Eigen::Vector2d& z, const TrackerConfig& cfg);

struct AssociationResult {
  std::vector<std::pair<int, int>> matches;  // (track index, measurement index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_measurements;
};

/// Global nearest neighbour on Euclidean distance between predicted track
/// positions and measurement positions; pairs beyond cfg.gate_m never match.
AssociationResult associate(std::span<const TrackState> tracks, std::span<const Measurement> measurements,
                            const TrackerConfig& cfg);

/// Multi-target tracker: predict, associate, update, M-of-N lifecycle.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg);

  /// Processes one sweep's measurements at time t_s (strictly increasing,
  /// StreamError otherwise). Returns every live track plus the tracks that
  /// died in this step (status Dead, reported once).
  std::vector<TrackState> step(std::span<const Measurement> measurements, double t_s);

  const std::vector<TrackState>& live_tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackState spawn(const Measurement& m, double t_s);

  TrackerConfig cfg_;
  std::vector<TrackState> tracks_;
  std::uint64_t next_id_ = 0;
  double last_time_s_ = 0.0;
  bool started_ = false;
};

}  // namespace isac
