#include "isac/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

namespace isac {

// ---------------------------------------------------------------------------
// MTI

MtiFilter::MtiFilter(std::vector<double> taps) : taps_(std::move(taps)) {
  if (taps_.size() < 2) throw ConfigError("mti: need at least two taps");
  double sum = 0.0;
  double abs_sum = 0.0;
  for (double t : taps_) {
    if (!std::isfinite(t)) throw ConfigError("mti: taps must be finite");
    sum += t;
    abs_sum += std::abs(t);
  }
  if (std::abs(sum) > 1e-12 * abs_sum) throw ConfigError("mti: taps must sum to zero");
}

MtiFilter::Output MtiFilter::apply(const RaTensor& tensor) {
  if (!history_.empty() && !history_.front().same_shape(tensor)) {
    throw StreamError("mti: tensor of sweep " + std::to_string(tensor.sweep_index) +
                      " does not match the shape of the filter history");
  }

  Output out;
  if (!settled()) {
    out.tensor = RaTensor::zeros(tensor.n_range(), tensor.tx_angles_deg, tensor.rx_angles_deg);
    out.warm_up = true;
  } else {
    Eigen::ArrayXXd acc = taps_[0] * tensor.power.array().cast<double>();
    for (std::size_t i = 1; i < taps_.size(); ++i) {
      acc += taps_[i] * history_[i - 1].power.array().cast<double>();
    }
    out.tensor.power = acc.abs().cast<float>().matrix();
    out.tensor.tx_angles_deg = tensor.tx_angles_deg;
    out.tensor.rx_angles_deg = tensor.rx_angles_deg;
  }
  out.tensor.sweep_index = tensor.sweep_index;
  out.tensor.t_start_s = tensor.t_start_s;
  out.tensor.bin_size_m = tensor.bin_size_m;

  history_.push_front(tensor);
  while (history_.size() > taps_.size() - 1) history_.pop_back();
  return out;
}

// ---------------------------------------------------------------------------
// CA-CFAR

void CfarConfig::validate() const {
  if (n_train < 1) throw ConfigError("cfar.n_train must be >= 1");
  if (n_guard < 0) throw ConfigError("cfar.n_guard must be >= 0");
  if (!(pfa > 0.0 && pfa < 1.0)) throw ConfigError("cfar.pfa must lie in (0, 1)");
  if (min_range_bin < 0) throw ConfigError("cfar.min_range_bin must be >= 0");
}

std::vector<Detection> ca_cfar(const RaTensor& tensor, const CfarConfig& cfg) {
  cfg.validate();
  const int n = tensor.n_range();
  const int window = 2 * (cfg.n_train + cfg.n_guard) + 1;
  if (window > n) {
    throw ConfigError("cfar: window of " + std::to_string(window) + " cells exceeds the " +
                      std::to_string(n) + "-bin range axis");
  }

  std::vector<double> alpha(static_cast<std::size_t>(2 * cfg.n_train + 1), 0.0);
  for (int c = 1; c <= 2 * cfg.n_train; ++c) {
    alpha[static_cast<std::size_t>(c)] = cfar_threshold_factor(c, cfg.pfa);
  }

  const Eigen::Index beams = tensor.power.cols();
  Eigen::MatrixXd prefix(n + 1, beams);
  prefix.row(0).setZero();
  for (int r = 0; r < n; ++r) prefix.row(r + 1) = prefix.row(r) + tensor.power.row(r).cast<double>();

  std::vector<Detection> out;
  const int g = cfg.n_guard;
  const int t = cfg.n_train;
  for (int r = cfg.min_range_bin; r < n; ++r) {
    const int lead_lo = std::max(0, r - g - t);
    const int lead_hi = std::max(0, r - g);
    const int lag_lo = std::min(n, r + g + 1);
    const int lag_hi = std::min(n, r + g + t + 1);
    const int count = (lead_hi - lead_lo) + (lag_hi - lag_lo);
    if (count == 0) continue;
    const double a = alpha[static_cast<std::size_t>(count)] / count;
    for (Eigen::Index b = 0; b < beams; ++b) {
      const double train = prefix(lead_hi, b) - prefix(lead_lo, b) + prefix(lag_hi, b) - prefix(lag_lo, b);
      const float p = tensor.power(r, b);
      if (static_cast<double>(p) > a * train) {
        out.push_back({r, static_cast<int>(b / tensor.n_rx()), static_cast<int>(b % tensor.n_rx()), p});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// DBSCAN

void DbscanConfig::validate() const {
  if (!(eps > 0.0)) throw ConfigError("dbscan.eps must be positive");
  if (min_pts < 1) throw ConfigError("dbscan.min_pts must be >= 1");
  if (!(scale.array() > 0.0).all()) throw ConfigError("dbscan.scale entries must be positive");
}

namespace {

// Uniform grid with eps-sized cells; a radius query only inspects the 27
// surrounding cells.
class NeighborGrid {
 public:
  NeighborGrid(const std::vector<Eigen::Vector3d>& pts, double eps) : pts_(pts), eps_(eps) {
    for (std::size_t i = 0; i < pts_.size(); ++i) cells_[key(cell_of(pts_[i]))].push_back(static_cast<int>(i));
  }

  std::vector<int> query(int i) const {
    std::vector<int> found;
    const Eigen::Vector3i c = cell_of(pts_[static_cast<std::size_t>(i)]);
    const double eps2 = eps_ * eps_;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key(c + Eigen::Vector3i(dx, dy, dz)));
          if (it == cells_.end()) continue;
          for (int j : it->second) {
            if ((pts_[static_cast<std::size_t>(j)] - pts_[static_cast<std::size_t>(i)]).squaredNorm() <= eps2) {
              found.push_back(j);
            }
          }
        }
      }
    }
    std::sort(found.begin(), found.end());
    return found;
  }

 private:
  Eigen::Vector3i cell_of(const Eigen::Vector3d& p) const { return (p / eps_).array().floor().cast<int>(); }

  static std::uint64_t key(const Eigen::Vector3i& c) {
    auto u = [](int v) { return static_cast<std::uint64_t>(static_cast<std::uint32_t>(v) & 0x1fffffu); };
    return (u(c.x()) << 42) | (u(c.y()) << 21) | u(c.z());
  }

  const std::vector<Eigen::Vector3d>& pts_;
  double eps_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

}  // namespace

DbscanResult dbscan(std::span<const Detection> dets, const DbscanConfig& cfg) {
  cfg.validate();
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;

  const std::size_t n = dets.size();
  std::vector<Eigen::Vector3d> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = Eigen::Vector3d(dets[i].range_idx, dets[i].tx_idx, dets[i].rx_idx).cwiseProduct(cfg.scale);
  }
  const NeighborGrid grid(pts, cfg.eps);

  DbscanResult result;
  result.labels.assign(n, kUnvisited);
  auto& labels = result.labels;
  int next_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    std::vector<int> seeds = grid.query(static_cast<int>(i));
    if (static_cast<int>(seeds.size()) < cfg.min_pts) {
      labels[i] = kNoise;
      continue;
    }
    const int id = next_id++;
    labels[i] = id;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto q = static_cast<std::size_t>(seeds[s]);
      if (labels[q] == kNoise) labels[q] = id;  // border point
      if (labels[q] != kUnvisited) continue;
      labels[q] = id;
      auto more = grid.query(static_cast<int>(q));
      if (static_cast<int>(more.size()) >= cfg.min_pts) seeds.insert(seeds.end(), more.begin(), more.end());
    }
  }

  result.clusters.resize(static_cast<std::size_t>(next_id));
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == kNoise) {
      result.noise.push_back(dets[i]);
    } else {
      auto& c = result.clusters[static_cast<std::size_t>(labels[i])];
      c.members.push_back(dets[i]);
      c.total_power += dets[i].power;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Measurements

Measurement cluster_to_measurement(const Cluster& cluster, const RaTensor& tensor) {
  if (cluster.members.empty()) throw ConfigError("cluster_to_measurement: empty cluster");
  double total = 0.0;
  for (const auto& d : cluster.members) total += d.power;
  const bool uniform = !(total > 0.0);

  Measurement m;
  double weight_sum = 0.0;
  for (const auto& d : cluster.members) {
    const double w = uniform ? 1.0 : static_cast<double>(d.power);
    m.range_m += w * d.range_idx * tensor.bin_size_m;
    m.angle_deg += w * beam_pair_angle_deg(tensor, d.tx_idx, d.rx_idx);
    weight_sum += w;
  }
  m.range_m /= weight_sum;
  m.angle_deg /= weight_sum;
  m.power = total;
  return m;
}

std::vector<Measurement> measure_clusters(DbscanResult& result, const RaTensor& tensor) {
  std::vector<Measurement> out;
  out.reserve(result.clusters.size());
  for (auto& c : result.clusters) {
    const Measurement m = cluster_to_measurement(c, tensor);
    c.centroid_range_m = m.range_m;
    c.centroid_angle_deg = m.angle_deg;
    c.total_power = m.power;
    out.push_back(m);
  }
  return out;
}

}  // namespace isac
