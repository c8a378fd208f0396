#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "isac/detector.hpp"
#include "oracles.hpp"

using namespace isac;

namespace {

RaTensor tensor(int n_range, int n_tx, int n_rx, float fill = 0.0f) {
  std::vector<float> tx(static_cast<std::size_t>(n_tx)), rx(static_cast<std::size_t>(n_rx));
  for (int i = 0; i < n_tx; ++i) tx[static_cast<std::size_t>(i)] = -10.0f + 5.0f * i;
  for (int i = 0; i < n_rx; ++i) rx[static_cast<std::size_t>(i)] = -10.0f + 5.0f * i;
  RaTensor t = RaTensor::zeros(n_range, tx, rx);
  t.power.setConstant(fill);
  t.bin_size_m = 0.3;
  return t;
}

RaTensor exponential_noise(int n_range, int beams, std::mt19937_64& rng) {
  std::exponential_distribution<float> expo(1.0f);
  RaTensor t = tensor(n_range, beams, 1);
  for (Eigen::Index i = 0; i < t.power.size(); ++i) t.power(i) = expo(rng);
  return t;
}

std::vector<Detection> random_detections(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> r(0, 40), a(0, 8);
  std::vector<Detection> dets;
  for (int i = 0; i < n; ++i) dets.push_back({r(rng), a(rng), a(rng), 1.0f});
  return dets;
}

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("MTI taps must sum to zero") {
  CHECK_NOTHROW(MtiFilter({1.0, -1.0}));
  CHECK_NOTHROW(MtiFilter({1.0, -2.0, 1.0}));
  CHECK_THROWS_AS(MtiFilter({1.0, -0.9}), ConfigError);
  CHECK_THROWS_AS(MtiFilter({1.0}), ConfigError);
  CHECK_THROWS_AS(MtiFilter({std::nan(""), 1.0}), ConfigError);
}

TEST_CASE("MTI warms up with zeros, then cancels a static stream exactly") {
  for (const std::vector<double>& taps : {std::vector<double>{1.0, -1.0}, std::vector<double>{1.0, -2.0, 1.0}}) {
    MtiFilter mti(taps);
    std::mt19937_64 rng(1);
    const RaTensor still = exponential_noise(64, 6, rng);
    for (std::size_t k = 0; k < 6; ++k) {
      RaTensor in = still;
      in.sweep_index = k;
      const auto out = mti.apply(in);
      CHECK(out.warm_up == (k + 1 < taps.size()));
      CHECK(out.tensor.power.isZero(0.0));
      CHECK(out.tensor.sweep_index == k);
      CHECK(out.tensor.same_shape(still));
    }
  }
}

TEST_CASE("MTI output is |p_k - p_(k-1)| for the two-pulse canceller") {
  MtiFilter mti;
  RaTensor a = tensor(8, 2, 2, 1.0f), b = tensor(8, 2, 2, 1.0f);
  b(3, 1, 0) = 5.0f;  // target arrives
  a(6, 0, 1) = 4.0f;  // target leaves
  mti.apply(a);
  const auto out = mti.apply(b);
  CHECK_FALSE(out.warm_up);
  CHECK(out.tensor(3, 1, 0) == 4.0f);
  CHECK(out.tensor(6, 0, 1) == 3.0f);
  CHECK(out.tensor.power.sum() == 7.0f);
}

TEST_CASE("two-pulse MTI output on exponential noise is exponential with the same mean") {
  MtiFilter mti;
  std::mt19937_64 rng(41);
  mti.apply(exponential_noise(512, 64, rng));
  const RaTensor out = mti.apply(exponential_noise(512, 64, rng)).tensor;
  const double n = static_cast<double>(out.power.size());
  const double mean = out.power.cast<double>().sum() / n;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
  // Exponential tail: P(x > 4.6) = 1%.
  const double tail = static_cast<double>((out.power.array() > 4.6f).count()) / n;
  CHECK(tail == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("MTI rejects a tensor of a different shape") {
  MtiFilter mti;
  mti.apply(tensor(8, 2, 2));
  CHECK_THROWS_AS(mti.apply(tensor(8, 2, 3)), StreamError);
  CHECK_THROWS_AS(mti.apply(tensor(9, 2, 2)), StreamError);
}

TEST_CASE("CFAR threshold factor") {
  CHECK(cfar_threshold_factor(16, 1e-2) == doctest::Approx(5.33634).epsilon(1e-5));
  CHECK(cfar_threshold_factor(1, 0.5) == doctest::Approx(1.0));
  CHECK(cfar_threshold_factor(16, 1e-3) == doctest::Approx(8.63882).epsilon(1e-4));
  double prev = 1e300;
  for (double pfa : {1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5}) {
    const double a = cfar_threshold_factor(16, pfa);
    CHECK(a < prev);
    prev = a;
  }
  CHECK(cfar_threshold_factor(16.0f, 1e-3f) == doctest::Approx(8.63882f).epsilon(1e-4));
}

TEST_CASE("CFAR: no detections in an all-zero tensor, impulse found in noise") {
  const CfarConfig cfg;
  CHECK(ca_cfar(tensor(64, 3, 3), cfg).empty());

  std::mt19937_64 rng(9);
  RaTensor t = exponential_noise(128, 1, rng);
  t.power(70, 0) = 1000.0f;
  const auto dets = ca_cfar(t, cfg);
  CHECK(std::find(dets.begin(), dets.end(), Detection{70, 0, 0, 1000.0f}) != dets.end());
}

TEST_CASE("CFAR edge cells use the training cells that exist") {
  CfarConfig cfg;
  cfg.n_train = 4;
  cfg.n_guard = 1;
  RaTensor t = tensor(32, 1, 1, 1.0f);
  t.power(0, 0) = 9.0f;  // only the 4 lagging cells train: alpha(4, 1e-3) = 18.5
  CHECK(ca_cfar(t, cfg).empty());
  t.power(0, 0) = 19.0f;
  const auto dets = ca_cfar(t, cfg);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].range_idx == 0);
}

TEST_CASE("CFAR detections are ordered by range, then tx, then rx") {
  RaTensor t = tensor(64, 2, 2, 1.0f);
  t(40, 1, 1) = 500.0f;
  t(40, 0, 1) = 500.0f;
  t(20, 1, 0) = 500.0f;
  const auto dets = ca_cfar(t, CfarConfig{});
  REQUIRE(dets.size() == 3);
  CHECK(dets[0] == Detection{20, 1, 0, 500.0f});
  CHECK(dets[1] == Detection{40, 0, 1, 500.0f});
  CHECK(dets[2] == Detection{40, 1, 1, 500.0f});
}

TEST_CASE("CFAR blind zone skips near cells") {
  CfarConfig cfg;
  cfg.min_range_bin = 5;
  RaTensor t = tensor(64, 1, 1, 1.0f);
  t.power(2, 0) = 1000.0f;
  t.power(30, 0) = 1000.0f;
  const auto dets = ca_cfar(t, cfg);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].range_idx == 30);
}

TEST_CASE("CFAR is scale invariant") {
  std::mt19937_64 rng(2);
  RaTensor t = exponential_noise(256, 4, rng);
  const auto base = ca_cfar(t, CfarConfig{});
  RaTensor scaled = t;
  scaled.power *= 8.0f;  // a power of two keeps float scaling exact
  auto dets = ca_cfar(scaled, CfarConfig{});
  REQUIRE(dets.size() == base.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    CHECK(dets[i].range_idx == base[i].range_idx);
    CHECK(dets[i].tx_idx == base[i].tx_idx);
  }
}

TEST_CASE("CFAR false-alarm rate on exponential noise") {
  std::mt19937_64 rng(17);
  std::uint64_t cells = 0, hits = 0;
  while (cells < 1'000'000) {
    const RaTensor t = exponential_noise(512, 64, rng);
    hits += ca_cfar(t, CfarConfig{}).size();
    cells += static_cast<std::uint64_t>(t.power.size());
  }
  const double rate = static_cast<double>(hits) / static_cast<double>(cells);
  CHECK(rate >= 5e-4);
  CHECK(rate <= 2e-3);
}

TEST_CASE("CFAR rejects a window longer than the range axis") {
  CHECK_THROWS_AS(ca_cfar(tensor(20, 1, 1), CfarConfig{}), ConfigError);  // needs 21 cells
  CHECK_NOTHROW(ca_cfar(tensor(21, 1, 1), CfarConfig{}));
  CfarConfig bad;
  bad.pfa = 1.0;
  CHECK_THROWS_AS(ca_cfar(tensor(64, 1, 1), bad), ConfigError);
}

TEST_CASE("DBSCAN: two groups of five, 20 bins apart") {
  std::vector<Detection> dets;
  for (int r = 10; r < 15; ++r) dets.push_back({r, 3, 3, 1.0f});
  for (int r = 35; r < 40; ++r) dets.push_back({r, 3, 3, 1.0f});
  const DbscanResult res = dbscan(dets, DbscanConfig{});
  CHECK(res.clusters.size() == 2);
  CHECK(res.noise.empty());
  CHECK(res.clusters[0].members.size() == 5);
  CHECK(res.clusters[0].members.front().range_idx == 10);
  CHECK(res.clusters[1].members.front().range_idx == 35);
}

TEST_CASE("DBSCAN trivial inputs") {
  DbscanConfig cfg;
  cfg.min_pts = 2;
  const std::vector<Detection> one{{5, 1, 1, 2.0f}};
  const DbscanResult res = dbscan(one, cfg);
  CHECK(res.clusters.empty());
  CHECK(res.noise.size() == 1);
  CHECK(res.labels == std::vector<int>{-1});

  const DbscanResult empty = dbscan({}, cfg);
  CHECK(empty.clusters.empty());
  CHECK(empty.noise.empty());

  cfg.eps = 0.0;
  CHECK_THROWS_AS(dbscan(one, cfg), ConfigError);
}

TEST_CASE("DBSCAN matches the brute-force reference") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> count(0, 200);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dets = random_detections(rng, count(rng));
    const DbscanResult res = dbscan(dets, DbscanConfig{});
    CHECK(res.labels == oracle::reference_dbscan_labels(dets, DbscanConfig{}));

    // Every detection is in exactly one cluster or in the noise list.
    std::size_t members = res.noise.size();
    for (const auto& c : res.clusters) members += c.members.size();
    CHECK(members == dets.size());
  }
}

TEST_CASE("DBSCAN core memberships do not depend on input order") {
  std::mt19937_64 rng(31);
  const auto dets = random_detections(rng, 150);
  auto shuffled = dets;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const DbscanResult a = dbscan(dets, DbscanConfig{});
  const DbscanResult b = dbscan(shuffled, DbscanConfig{});
  CHECK(a.clusters.size() == b.clusters.size());
  CHECK(a.noise.size() == b.noise.size());
}

TEST_CASE("cluster measurement is the power-weighted centroid") {
  RaTensor t = tensor(256, 5, 5);  // angles -10, -5, 0, 5, 10
  t.bin_size_m = 0.3049;
  Cluster c;
  c.members = {{164, 2, 2, 3.0f}};
  Measurement m = cluster_to_measurement(c, t);
  CHECK(m.range_m == doctest::Approx(50.0036));
  CHECK(m.angle_deg == doctest::Approx(0.0));
  CHECK(m.power == doctest::Approx(3.0));

  // -2.5 and +2.5 degree pairs of equal power.
  c.members = {{100, 1, 2, 2.0f}, {100, 3, 2, 2.0f}};
  CHECK(cluster_to_measurement(c, t).angle_deg == doctest::Approx(0.0));

  c.members = {{100, 0, 0, 1.0f}, {104, 4, 4, 3.0f}};
  m = cluster_to_measurement(c, t);
  CHECK(m.range_m == doctest::Approx(103.0 * 0.3049));
  CHECK(m.angle_deg == doctest::Approx(5.0));
  for (auto& d : c.members) d.power *= 2.0f;
  CHECK(cluster_to_measurement(c, t).angle_deg == doctest::Approx(5.0));
  CHECK(cluster_to_measurement(c, t).range_m == doctest::Approx(m.range_m));

  CHECK_THROWS_AS(cluster_to_measurement(Cluster{}, t), ConfigError);
}

}  // TEST_SUITE
