#include "isac/tracker.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "isac/hungarian.hpp"

namespace isac {

std::string_view to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::Tentative: return "tentative";
    case TrackStatus::Confirmed: return "confirmed";
    case TrackStatus::Dead: return "dead";
  }
  return "unknown";
}

TrackStatus track_status_from_string(std::string_view s) {
  if (s == "tentative") return TrackStatus::Tentative;
  if (s == "confirmed") return TrackStatus::Confirmed;
  if (s == "dead") return TrackStatus::Dead;
  throw ConfigError("unknown track status '" + std::string(s) + "'");
}

void TrackerConfig::validate() const {
  if (!(q_accel >= 0.0)) throw ConfigError("tracker.q_accel must be >= 0");
  if (!(r_range_var > 0.0) || !(r_angle_var > 0.0)) throw ConfigError("tracker: measurement variances must be > 0");
  if (!(p0_pos_var > 0.0) || !(p0_vel_var > 0.0)) throw ConfigError("tracker: initial variances must be > 0");
  if (!(gate_m > 0.0)) throw ConfigError("tracker.gate_m must be > 0");
  if (confirm_m < 1 || confirm_n < confirm_m || confirm_n > 32) {
    throw ConfigError("tracker: need 1 <= confirm_m <= confirm_n <= 32");
  }
  if (max_misses < 0) throw ConfigError("tracker.max_misses must be >= 0");
}

namespace {

void symmetrize(StateCovariance& P) { P = (0.5 * (P + P.transpose())).eval(); }

}  // namespace

TrackState ekf_predict(TrackState track, double dt_s, const TrackerConfig& cfg) {
  if (dt_s < 0.0) throw StreamError("ekf_predict: negative time step");
  StateCovariance F = StateCovariance::Identity();
  F(0, 2) = dt_s;
  F(1, 3) = dt_s;

  const double dt2 = dt_s * dt_s;
  const double dt3 = dt2 * dt_s;
  StateCovariance Q = StateCovariance::Zero();
  Q(0, 0) = Q(1, 1) = dt3 / 3.0;
  Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = dt2 / 2.0;
  Q(2, 2) = Q(3, 3) = dt_s;
  Q *= cfg.q_accel;

  track.x = F * track.x;
  track.P = F * track.P * F.transpose() + Q;
  symmetrize(track.P);
  track.time_s += dt_s;
  return track;
}

MeasurementModel measurement_model(const StateVector& x) {
  const double px = x(0);
  const double py = x(1);
  const double r2 = px * px + py * py;
  if (!(r2 > 0.0)) throw GeometryError("measurement_model: state at the sensor origin");
  const double r = std::sqrt(r2);

  MeasurementModel m;
  m.z << r, std::atan2(px, py);
  m.H << px / r, py / r, 0.0, 0.0,
         py / r2, -px / r2, 0.0, 0.0;
  return m;
}

TrackState ekf_update(TrackState track, const Eigen::Vector2d& z, const TrackerConfig& cfg) {
  Eigen::Matrix2d R = Eigen::Vector2d(cfg.r_range_var, cfg.r_angle_var).asDiagonal();

  Eigen::Vector2d innovation;
  MeasurementJacobian H;
  if (cfg.space == MeasurementSpace::Polar) {
    const MeasurementModel model = measurement_model(track.x);
    H = model.H;
    innovation = z - model.z;
    innovation(1) = wrap_angle(innovation(1));
  } else {
    const double s = std::sin(z(1));
    const double c = std::cos(z(1));
    Eigen::Matrix2d J;
    J << s, z(0) * c,
         c, -z(0) * s;
    R = J * R * J.transpose();
    H.setZero();
    H.leftCols<2>().setIdentity();
    innovation = polar_to_cartesian(z(0), z(1)) - track.x.head<2>();
  }

  const Eigen::Matrix2d S = H * track.P * H.transpose() + R;
  const Eigen::LLT<Eigen::Matrix2d> llt(S);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("ekf_update: innovation covariance is not positive definite (track " +
                         std::to_string(track.id) + ")");
  }
  const Eigen::Matrix<double, 4, 2> K = llt.solve(H * track.P).transpose();

  track.x += K * innovation;
  const StateCovariance I_KH = StateCovariance::Identity() - K * H;
  track.P = I_KH * track.P * I_KH.transpose() + K * R * K.transpose();
  symmetrize(track.P);
  ++track.hits;
  track.last_update_s = track.time_s;
  return track;
}

AssociationResult associate(std::span<const TrackState> tracks, std::span<const Measurement> measurements,
                            const TrackerConfig& cfg) {
  AssociationResult out;
  const auto n = static_cast<Eigen::Index>(tracks.size());
  const auto m = static_cast<Eigen::Index>(measurements.size());

  Eigen::MatrixXd distance(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& meas = measurements[static_cast<std::size_t>(j)];
    const Eigen::Vector2d pos = polar_to_cartesian(meas.range_m, deg2rad(meas.angle_deg));
    for (Eigen::Index i = 0; i < n; ++i) {
      distance(i, j) = (tracks[static_cast<std::size_t>(i)].x.head<2>() - pos).norm();
    }
  }
  const double sentinel = 1e6 * cfg.gate_m;
  const Eigen::MatrixXd cost = (distance.array() > cfg.gate_m).select(sentinel, distance);

  std::vector<char> track_used(static_cast<std::size_t>(n), 0);
  std::vector<char> meas_used(static_cast<std::size_t>(m), 0);
  for (const auto& [i, j] : hungarian(cost).pairs) {
    if (distance(i, j) > cfg.gate_m) continue;
    out.matches.emplace_back(i, j);
    track_used[static_cast<std::size_t>(i)] = 1;
    meas_used[static_cast<std::size_t>(j)] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (!track_used[static_cast<std::size_t>(i)]) out.unmatched_tracks.push_back(i);
  }
  for (int j = 0; j < m; ++j) {
    if (!meas_used[static_cast<std::size_t>(j)]) out.unmatched_measurements.push_back(j);
  }
  return out;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

TrackState Tracker::spawn(const Measurement& m, double t_s) {
  TrackState t;
  t.id = next_id_++;
  t.x << polar_to_cartesian(m.range_m, deg2rad(m.angle_deg)), 0.0, 0.0;
  t.P = StateVector(cfg_.p0_pos_var, cfg_.p0_pos_var, cfg_.p0_vel_var, cfg_.p0_vel_var).asDiagonal();
  t.status = cfg_.confirm_m <= 1 ? TrackStatus::Confirmed : TrackStatus::Tentative;
  t.hits = 1;
  t.age = 1;
  t.time_s = t_s;
  t.last_update_s = t_s;
  t.hit_history = 1;
  return t;
}

std::vector<TrackState> Tracker::step(std::span<const Measurement> measurements, double t_s) {
  if (started_ && !(t_s > last_time_s_)) {
    throw StreamError("tracker: timestamp " + std::to_string(t_s) + " does not follow " +
                      std::to_string(last_time_s_));
  }
  started_ = true;
  last_time_s_ = t_s;

  for (auto& t : tracks_) t = ekf_predict(t, t_s - t.time_s, cfg_);

  const AssociationResult assoc = associate(tracks_, measurements, cfg_);
  for (const auto& [ti, mi] : assoc.matches) {
    auto& t = tracks_[static_cast<std::size_t>(ti)];
    const auto& m = measurements[static_cast<std::size_t>(mi)];
    t = ekf_update(t, Eigen::Vector2d(m.range_m, deg2rad(m.angle_deg)), cfg_);
    t.misses = 0;
    t.hit_history = (t.hit_history << 1) | 1u;
  }
  for (int ti : assoc.unmatched_tracks) {
    auto& t = tracks_[static_cast<std::size_t>(ti)];
    ++t.misses;
    t.hit_history <<= 1;
  }

  const int n = cfg_.confirm_n;
  for (auto& t : tracks_) {
    ++t.age;
    const int window = std::min(t.age, n);
    const std::uint32_t mask = window >= 32 ? ~0u : ((1u << window) - 1u);
    const int window_hits = std::popcount(t.hit_history & mask);
    if (t.status == TrackStatus::Tentative) {
      if (window_hits >= cfg_.confirm_m) {
        t.status = TrackStatus::Confirmed;
      } else if (window - window_hits > n - cfg_.confirm_m || t.misses > cfg_.max_misses) {
        t.status = TrackStatus::Dead;
      }
    } else if (t.status == TrackStatus::Confirmed && t.misses > cfg_.max_misses) {
      t.status = TrackStatus::Dead;
    }
  }

  std::vector<TrackState> out;
  std::vector<TrackState> survivors;
  for (auto& t : tracks_) {
    out.push_back(t);
    if (t.status != TrackStatus::Dead) survivors.push_back(std::move(t));
  }
  tracks_ = std::move(survivors);

  for (int mi : assoc.unmatched_measurements) {
    tracks_.push_back(spawn(measurements[static_cast<std::size_t>(mi)], t_s));
    out.push_back(tracks_.back());
  }
  return out;
}

}  // namespace isac
