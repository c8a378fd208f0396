#include "isac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "isac/hungarian.hpp"

namespace isac {

SweepTruth snapshot_truth(const SceneConfig& scene, std::uint64_t sweep_index) {
  SweepTruth s;
  s.sweep_index = sweep_index;
  s.t_s = scene.time_s;
  for (std::size_t i = 0; i < scene.targets.size(); ++i) {
    const auto& t = scene.targets[i];
    s.targets.push_back({static_cast<int>(i), t.pos.x(), t.pos.y(), t.vel.x(), t.vel.y()});
  }
  return s;
}

void MetricsConfig::validate() const {
  if (!(match_radius_m > 0.0)) throw ConfigError("metrics.match_radius_m must be > 0");
}

Correspondence match_tracks_to_truth(const TrackLog& tracks, const TruthLog& truth, double radius_m) {
  std::unordered_map<std::uint64_t, const SweepTracks*> by_sweep;
  for (const auto& s : tracks) by_sweep[s.sweep_index] = &s;

  Correspondence out;
  for (const auto& sweep_truth : truth) {
    auto it = by_sweep.find(sweep_truth.sweep_index);
    if (it == by_sweep.end()) continue;

    std::vector<const TrackState*> confirmed;
    for (const auto& t : it->second->tracks) {
      if (t.status == TrackStatus::Confirmed) confirmed.push_back(&t);
    }

    const auto n = static_cast<Eigen::Index>(confirmed.size());
    const auto m = static_cast<Eigen::Index>(sweep_truth.targets.size());
    Eigen::MatrixXd distance(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto& g = sweep_truth.targets[static_cast<std::size_t>(j)];
        distance(i, j) = (confirmed[static_cast<std::size_t>(i)]->x.head<2>() - Eigen::Vector2d(g.x, g.y)).norm();
      }
    }
    const Eigen::MatrixXd cost = (distance.array() > radius_m).select(1e6 * radius_m, distance);

    SweepCorrespondence sc;
    sc.sweep_index = sweep_truth.sweep_index;
    std::vector<char> track_used(static_cast<std::size_t>(n), 0);
    std::vector<char> truth_used(static_cast<std::size_t>(m), 0);
    for (const auto& [i, j] : hungarian(cost).pairs) {
      if (distance(i, j) > radius_m) continue;
      const TrackState& t = *confirmed[static_cast<std::size_t>(i)];
      const auto& g = sweep_truth.targets[static_cast<std::size_t>(j)];
      sc.matches.push_back({g.target_key, t.id, distance(i, j),
                            (t.x.tail<2>() - Eigen::Vector2d(g.vx, g.vy)).norm()});
      track_used[static_cast<std::size_t>(i)] = 1;
      truth_used[static_cast<std::size_t>(j)] = 1;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!track_used[static_cast<std::size_t>(i)]) sc.unmatched_tracks.push_back(confirmed[static_cast<std::size_t>(i)]->id);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!truth_used[static_cast<std::size_t>(j)]) sc.unmatched_truth.push_back(sweep_truth.targets[static_cast<std::size_t>(j)].target_key);
    }
    out.push_back(std::move(sc));
  }
  return out;
}

LatencyStats summarize_latency(const std::vector<LatencySample>& samples) {
  LatencyStats s;
  s.samples = samples.size();
  if (samples.empty()) return s;
  std::vector<double> totals;
  for (const auto& l : samples) {
    totals.push_back(l.total_ms);
    s.mean_mti_ms += l.mti_ms;
    s.mean_cfar_ms += l.cfar_ms;
    s.mean_dbscan_ms += l.dbscan_ms;
    s.mean_track_ms += l.track_ms;
  }
  const double n = static_cast<double>(samples.size());
  s.mean_mti_ms /= n;
  s.mean_cfar_ms /= n;
  s.mean_dbscan_ms /= n;
  s.mean_track_ms /= n;
  std::sort(totals.begin(), totals.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, totals.size() - 1);
    return totals[lo] + (pos - static_cast<double>(lo)) * (totals[hi] - totals[lo]);
  };
  s.median_ms = quantile(0.5);
  s.p95_ms = quantile(0.95);
  s.max_ms = totals.back();
  return s;
}

RunReport compute_report(const Correspondence& correspondence, const RunLogs& logs, const MetricsConfig& cfg) {
  RunReport r;
  r.sweeps = std::max(logs.truth.size(), logs.tracks.size());
  r.counts = logs.counts;
  r.latency = summarize_latency(logs.latency);

  std::set<std::uint64_t> confirmed_ids;
  for (const auto& s : logs.tracks) {
    for (const auto& t : s.tracks) {
      if (t.status == TrackStatus::Confirmed) confirmed_ids.insert(t.id);
    }
  }
  r.confirmed_track_count = static_cast<int>(confirmed_ids.size());

  double pos_sq = 0.0;
  std::size_t pos_n = 0;
  double vel_sq = 0.0;
  std::size_t vel_n = 0;
  std::map<std::uint64_t, std::pair<double, std::size_t>> per_track;
  std::set<std::uint64_t> ever_matched;
  std::map<int, std::uint64_t> last_id;          // truth key -> last matched track id
  std::map<int, std::uint64_t> first_confirmed;  // truth key -> first matched sweep
  std::map<int, bool> in_gap;
  std::map<int, bool> seen;

  for (const auto& sc : correspondence) {
    std::set<int> matched_keys;
    for (const auto& m : sc.matches) {
      matched_keys.insert(m.target_key);
      pos_sq += m.position_error_m * m.position_error_m;
      ++pos_n;
      auto& pt = per_track[m.track_id];
      pt.first += m.position_error_m * m.position_error_m;
      ++pt.second;
      if (sc.sweep_index >= cfg.velocity_settle_sweeps) {
        vel_sq += m.velocity_error_mps * m.velocity_error_mps;
        ++vel_n;
      }
      ever_matched.insert(m.track_id);

      auto prev = last_id.find(m.target_key);
      if (prev != last_id.end() && prev->second != m.track_id) ++r.id_switch_count;
      last_id[m.target_key] = m.track_id;
      first_confirmed.emplace(m.target_key, sc.sweep_index);
      if (in_gap[m.target_key]) ++r.track_fragmentation;
      in_gap[m.target_key] = false;
      seen[m.target_key] = true;
    }
    for (int key : sc.unmatched_truth) {
      if (seen[key]) in_gap[key] = true;
    }
  }
  r.pos_rmse_m = pos_n ? std::sqrt(pos_sq / static_cast<double>(pos_n)) : 0.0;
  r.vel_rmse_mps = vel_n ? std::sqrt(vel_sq / static_cast<double>(vel_n)) : 0.0;
  for (const auto& [id, acc] : per_track) {
    r.pos_rmse_per_track_m[id] = std::sqrt(acc.first / static_cast<double>(acc.second));
  }
  for (std::uint64_t id : confirmed_ids) {
    if (!ever_matched.count(id)) ++r.false_track_count;
  }

  // Confirmation delay: first sweep with a measurement near the target to the
  // first sweep it is held by a confirmed track.
  std::unordered_map<std::uint64_t, const SweepMeasurements*> meas_by_sweep;
  for (const auto& s : logs.measurements) meas_by_sweep[s.sweep_index] = &s;
  std::map<int, std::uint64_t> first_detected;
  for (const auto& st : logs.truth) {
    auto it = meas_by_sweep.find(st.sweep_index);
    if (it == meas_by_sweep.end()) continue;
    for (const auto& g : st.targets) {
      if (first_detected.count(g.target_key)) continue;
      for (const auto& m : it->second->measurements) {
        const Eigen::Vector2d p = polar_to_cartesian(m.range_m, deg2rad(m.angle_deg));
        if ((p - Eigen::Vector2d(g.x, g.y)).norm() <= cfg.match_radius_m) {
          first_detected[g.target_key] = st.sweep_index;
          break;
        }
      }
    }
  }
  double delay_sum = 0.0;
  int delay_n = 0;
  for (const auto& [key, confirmed_sweep] : first_confirmed) {
    auto it = first_detected.find(key);
    if (it == first_detected.end() || it->second > confirmed_sweep) continue;
    delay_sum += static_cast<double>(confirmed_sweep - it->second);
    ++delay_n;
  }
  if (delay_n) r.mean_confirm_delay_sweeps = delay_sum / delay_n;

  const bool noise_only = !logs.truth.empty() &&
                          std::all_of(logs.truth.begin(), logs.truth.end(),
                                      [](const SweepTruth& s) { return s.targets.empty(); });
  if (noise_only && logs.counts.cells_tested > 0) {
    r.empirical_pfa = static_cast<double>(logs.counts.detections) / static_cast<double>(logs.counts.cells_tested);
  }
  return r;
}

std::string report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["sweeps"] = r.sweeps;
  j["confirmed_track_count"] = r.confirmed_track_count;
  j["pos_rmse_m"] = r.pos_rmse_m;
  j["vel_rmse_mps"] = r.vel_rmse_mps;
  j["id_switch_count"] = r.id_switch_count;
  j["false_track_count"] = r.false_track_count;
  j["track_fragmentation"] = r.track_fragmentation;
  j["mean_confirm_delay_sweeps"] =
      r.mean_confirm_delay_sweeps ? nlohmann::ordered_json(*r.mean_confirm_delay_sweeps) : nlohmann::ordered_json();
  j["empirical_pfa"] = r.empirical_pfa ? nlohmann::ordered_json(*r.empirical_pfa) : nlohmann::ordered_json();
  j["cells_tested"] = r.counts.cells_tested;
  j["detections"] = r.counts.detections;
  auto& per_track = j["pos_rmse_per_track_m"] = nlohmann::ordered_json::object();
  for (const auto& [id, v] : r.pos_rmse_per_track_m) per_track[std::to_string(id)] = v;
  j["latency_ms"] = {{"samples", r.latency.samples},         {"median", r.latency.median_ms},
                     {"p95", r.latency.p95_ms},              {"max", r.latency.max_ms},
                     {"mean_mti", r.latency.mean_mti_ms},    {"mean_cfar", r.latency.mean_cfar_ms},
                     {"mean_dbscan", r.latency.mean_dbscan_ms}, {"mean_track", r.latency.mean_track_ms}};
  return j.dump(2) + "\n";
}

std::string report_csv_header() {
  return "sweeps,confirmed_tracks,pos_rmse_m,vel_rmse_mps,id_switches,false_tracks,fragmentation,"
         "confirm_delay_sweeps,empirical_pfa,cells_tested,detections\n";
}

std::string report_csv_row(const RunReport& r) {
  std::ostringstream os;
  os.precision(9);
  auto opt = [&](const std::optional<double>& v) {
    if (v) os << *v;
  };
  os << r.sweeps << ',' << r.confirmed_track_count << ',' << r.pos_rmse_m << ',' << r.vel_rmse_mps << ','
     << r.id_switch_count << ',' << r.false_track_count << ',' << r.track_fragmentation << ',';
  opt(r.mean_confirm_delay_sweeps);
  os << ',';
  opt(r.empirical_pfa);
  os << ',' << r.counts.cells_tested << ',' << r.counts.detections << '\n';
  return os.str();
}

}  // namespace isac
