#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "isac/metrics.hpp"

using namespace isac;

namespace {

// One target moving along +x at 1 m/s from (0, 10), sampled every 0.2 s.
TruthLog straight_line(int sweeps) {
  TruthLog log;
  for (int k = 0; k < sweeps; ++k) {
    SweepTruth s{static_cast<std::uint64_t>(k), 0.2 * k, {}};
    s.targets.push_back({0, 0.2 * k, 10.0, 1.0, 0.0});
    log.push_back(s);
  }
  return log;
}

TrackState confirmed(std::uint64_t id, double x, double y, double vx = 1.0, double vy = 0.0) {
  TrackState t;
  t.id = id;
  t.status = TrackStatus::Confirmed;
  t.x << x, y, vx, vy;
  return t;
}

// Tracks that follow the truth with a fixed offset; `id_of(k)` picks the id.
template <typename IdOf>
TrackLog follow(const TruthLog& truth, Eigen::Vector2d offset, IdOf id_of) {
  TrackLog log;
  for (const auto& s : truth) {
    SweepTracks st{s.sweep_index, s.t_s, {}};
    for (const auto& g : s.targets) {
      st.tracks.push_back(confirmed(id_of(s.sweep_index), g.x + offset.x(), g.y + offset.y(), g.vx, g.vy));
    }
    log.push_back(st);
  }
  return log;
}

RunReport evaluate(const RunLogs& logs, MetricsConfig cfg = {}) {
  return compute_report(match_tracks_to_truth(logs.tracks, logs.truth, cfg.match_radius_m), logs, cfg);
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("a perfect track scores zero error and one confirmed track") {
  RunLogs logs;
  logs.truth = straight_line(40);
  logs.tracks = follow(logs.truth, {0.0, 0.0}, [](std::uint64_t) { return 7; });
  const RunReport r = evaluate(logs);
  CHECK(r.sweeps == 40);
  CHECK(r.pos_rmse_m == 0.0);
  CHECK(r.vel_rmse_mps == 0.0);
  CHECK(r.confirmed_track_count == 1);
  CHECK(r.id_switch_count == 0);
  CHECK(r.false_track_count == 0);
  CHECK(r.track_fragmentation == 0);
  CHECK_FALSE(r.empirical_pfa.has_value());
  CHECK(r.pos_rmse_per_track_m.at(7) == 0.0);
}

TEST_CASE("a constant 0.3 m offset gives 0.3 m position RMSE") {
  RunLogs logs;
  logs.truth = straight_line(30);
  logs.tracks = follow(logs.truth, {0.18, -0.24}, [](std::uint64_t) { return 0; });
  CHECK(evaluate(logs).pos_rmse_m == doctest::Approx(0.3));
}

TEST_CASE("tracks outside the match radius are false tracks") {
  RunLogs logs;
  logs.truth = straight_line(10);
  logs.tracks = follow(logs.truth, {2.5, 0.0}, [](std::uint64_t) { return 0; });
  const RunReport r = evaluate(logs);
  CHECK(r.confirmed_track_count == 1);
  CHECK(r.false_track_count == 1);
  CHECK(r.pos_rmse_m == 0.0);

  MetricsConfig wide;
  wide.match_radius_m = 3.0;
  CHECK(evaluate(logs, wide).false_track_count == 0);
  CHECK(evaluate(logs, wide).pos_rmse_m == doctest::Approx(2.5));
}

TEST_CASE("velocity error only counts after the settling sweeps") {
  RunLogs logs;
  logs.truth = straight_line(20);
  logs.tracks = follow(logs.truth, {0.0, 0.0}, [](std::uint64_t) { return 0; });
  for (auto& s : logs.tracks) s.tracks[0].x(2) = s.sweep_index < 15 ? 6.0 : 1.5;
  CHECK(evaluate(logs).vel_rmse_mps == doctest::Approx(0.5));
}

TEST_CASE("a handover between track ids is one id switch") {
  RunLogs logs;
  logs.truth = straight_line(20);
  logs.tracks = follow(logs.truth, {0.0, 0.0}, [](std::uint64_t k) { return k < 10 ? 0 : 1; });
  const RunReport r = evaluate(logs);
  CHECK(r.id_switch_count == 1);
  CHECK(r.confirmed_track_count == 2);
  CHECK(r.false_track_count == 0);

  logs.tracks = follow(logs.truth, {0.0, 0.0}, [](std::uint64_t k) { return k % 2; });
  CHECK(evaluate(logs).id_switch_count == 19);
}

TEST_CASE("a gap in coverage counts as one fragmentation") {
  RunLogs logs;
  logs.truth = straight_line(20);
  logs.tracks = follow(logs.truth, {0.0, 0.0}, [](std::uint64_t) { return 3; });
  for (std::size_t k = 8; k < 11; ++k) logs.tracks[k].tracks.clear();
  const RunReport r = evaluate(logs);
  CHECK(r.track_fragmentation == 1);
  CHECK(r.id_switch_count == 0);
}

TEST_CASE("tentative tracks are ignored") {
  RunLogs logs;
  logs.truth = straight_line(5);
  logs.tracks = follow(logs.truth, {5.0, 0.0}, [](std::uint64_t) { return 0; });
  for (auto& s : logs.tracks) s.tracks[0].status = TrackStatus::Tentative;
  const RunReport r = evaluate(logs);
  CHECK(r.confirmed_track_count == 0);
  CHECK(r.false_track_count == 0);
}

TEST_CASE("nearest pairing across two targets and two tracks") {
  TruthLog truth{{0, 0.0, {{0, 0.0, 10.0, 0, 0}, {1, 1.0, 10.0, 0, 0}}}};
  TrackLog tracks{{0, 0.0, {confirmed(5, 0.9, 10.0, 0, 0), confirmed(6, 0.2, 10.0, 0, 0)}}};
  const Correspondence c = match_tracks_to_truth(tracks, truth, 2.0);
  REQUIRE(c.size() == 1);
  REQUIRE(c[0].matches.size() == 2);
  for (const auto& m : c[0].matches) CHECK(m.track_id == (m.target_key == 0 ? 6u : 5u));
}

TEST_CASE("confirmation delay runs from first detection to first confirmed match") {
  RunLogs logs;
  logs.truth = straight_line(10);
  logs.tracks = follow(logs.truth, {0.0, 0.0}, [](std::uint64_t) { return 0; });
  for (std::size_t k = 0; k < 4; ++k) logs.tracks[k].tracks.clear();
  for (const auto& s : logs.truth) {
    const auto& g = s.targets[0];
    logs.measurements.push_back({s.sweep_index, {{std::hypot(g.x, g.y), rad2deg(std::atan2(g.x, g.y)), 1.0}}});
  }
  logs.measurements[0].measurements.clear();
  const RunReport r = evaluate(logs);
  REQUIRE(r.mean_confirm_delay_sweeps.has_value());
  CHECK(*r.mean_confirm_delay_sweeps == doctest::Approx(3.0));
}

TEST_CASE("empirical false-alarm rate only for runs without targets") {
  RunLogs logs;
  logs.truth = {{0, 0.0, {}}, {1, 0.2, {}}};
  logs.tracks = {{0, 0.0, {}}, {1, 0.2, {}}};
  logs.counts = {200000, 190};
  const RunReport r = evaluate(logs);
  REQUIRE(r.empirical_pfa.has_value());
  CHECK(*r.empirical_pfa == doctest::Approx(9.5e-4));

  logs.truth = straight_line(2);
  CHECK_FALSE(evaluate(logs).empirical_pfa.has_value());
}

TEST_CASE("latency summary") {
  std::vector<LatencySample> samples;
  for (int i = 1; i <= 100; ++i) samples.push_back({static_cast<std::uint64_t>(i), 1.0, 2.0, 0.5, 0.5, double(i)});
  const LatencyStats s = summarize_latency(samples);
  CHECK(s.samples == 100);
  CHECK(s.median_ms == doctest::Approx(50.5));
  CHECK(s.p95_ms == doctest::Approx(95.05));
  CHECK(s.max_ms == 100.0);
  CHECK(s.mean_cfar_ms == doctest::Approx(2.0));
  CHECK(summarize_latency({}).samples == 0);
}

TEST_CASE("report serializations") {
  RunLogs logs;
  logs.truth = straight_line(3);
  logs.tracks = follow(logs.truth, {0.0, 0.3}, [](std::uint64_t) { return 2; });
  const RunReport r = evaluate(logs);
  const auto j = nlohmann::json::parse(report_to_json(r));
  CHECK(j.at("sweeps") == 3);
  CHECK(j.at("pos_rmse_m").get<double>() == doctest::Approx(0.3));
  CHECK(j.at("empirical_pfa").is_null());
  CHECK(j.at("pos_rmse_per_track_m").contains("2"));
  CHECK(j.at("latency_ms").contains("median"));

  const std::string header = report_csv_header();
  const std::string row = report_csv_row(r);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(row.rfind("3,1,", 0) == 0);
}

TEST_CASE("snapshot of a scene") {
  SceneConfig scene;
  TargetTruth t;
  t.pos = {1.0, 2.0};
  t.vel = {0.5, -0.5};
  scene.targets = {t, t};
  scene.time_s = 1.4;
  const SweepTruth s = snapshot_truth(scene, 7);
  CHECK(s.sweep_index == 7);
  CHECK(s.t_s == doctest::Approx(1.4));
  REQUIRE(s.targets.size() == 2);
  CHECK(s.targets[1].target_key == 1);
  CHECK(s.targets[1].vy == -0.5);
}

}  // TEST_SUITE
