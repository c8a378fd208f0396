#pragma once

#include <cmath>
#include <deque>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "isac/receiver.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// MTI

/// Slow-time high-pass FIR across consecutive sweeps.
///
/// For each cell the output is |sum_i taps[i] * p_{k-i}| on the power
/// tensor. Taps must sum to zero, so any return that is constant across
/// sweeps cancels exactly. For the default two-pulse canceller the output on
/// exponentially distributed noise is again exponential with the same mean,
/// which keeps the downstream CA-CFAR calibrated. The price: a strong static
/// return S in noise leaves a residue of order |S| |n| rather than |n|^2.
class MtiFilter {
 public:
  struct Output {
    RaTensor tensor;
    bool warm_up = false;  // history not yet full; tensor is all zeros
  };

  explicit MtiFilter(std::vector<double> taps = {1.0, -1.0});

  /// Throws StreamError when `tensor` does not match the history's shape.
  Output apply(const RaTensor& tensor);

  bool settled() const { return history_.size() + 1 >= taps_.size(); }
  const std::vector<double>& taps() const { return taps_; }
  void reset() { history_.clear(); }

 private:
  std::vector<double> taps_;
  std::deque<RaTensor> history_;  // most recent first
};

// ---------------------------------------------------------------------------
// CA-CFAR

struct CfarConfig {
  int n_train = 8;  // per side
  int n_guard = 2;  // per side
  double pfa = 1e-3;
  /// Cells nearer than this are used for training but never tested.
  int min_range_bin = 0;

  void validate() const;
};

/// CA-CFAR multiplier for `n_total_train` averaged exponential cells:
/// alpha = n * (pfa^(-1/n) - 1).
template <typename Scalar>
Scalar cfar_threshold_factor(int n_total_train, Scalar pfa) {
  const Scalar n = static_cast<Scalar>(n_total_train);
  return n * (std::pow(pfa, Scalar(-1) / n) - Scalar(1));
}

struct Detection {
  int range_idx = 0;
  int tx_idx = 0;
  int rx_idx = 0;
  float power = 0.0f;

  bool operator==(const Detection&) const = default;
};

/// 1-D CA-CFAR along range for each beam pair. Cells near the ends use the
/// training cells that exist, with alpha recomputed for that count.
/// Detections are ordered by (range, tx, rx). Throws ConfigError when the
/// window does not fit the range axis.
std::vector<Detection> ca_cfar(const RaTensor& tensor, const CfarConfig& cfg);

// ---------------------------------------------------------------------------
// DBSCAN

struct Cluster {
  std::vector<Detection> members;
  double centroid_range_m = 0.0;
  double centroid_angle_deg = 0.0;
  double total_power = 0.0;
};

struct DbscanResult {
  std::vector<Cluster> clusters;
  std::vector<Detection> noise;
  /// Cluster id per input detection, -1 for noise.
  std::vector<int> labels;
};

struct DbscanConfig {
  double eps = 3.0;
  int min_pts = 3;
  /// Distance weights for (range bin, tx index, rx index).
  Eigen::Vector3d scale{1.0, 2.0, 2.0};

  void validate() const;
};

/// Scaled-coordinate DBSCAN (min_pts counts the point itself). Points are
/// visited in input order; a border point joins the first cluster that
/// reaches it.
DbscanResult dbscan(std::span<const Detection> dets, const DbscanConfig& cfg);

// ---------------------------------------------------------------------------
// Measurements

struct Measurement {
  double range_m = 0.0;
  double angle_deg = 0.0;
  double power = 0.0;
};

/// Bearing of a beam pair: the mean of its tx and rx steering angles.
inline double beam_pair_angle_deg(const RaTensor& t, int tx, int rx) {
  return 0.5 * (static_cast<double>(t.tx_angles_deg[static_cast<std::size_t>(tx)]) +
                static_cast<double>(t.rx_angles_deg[static_cast<std::size_t>(rx)]));
}

/// Power-weighted centroid of a nonempty cluster.
Measurement cluster_to_measurement(const Cluster& cluster, const RaTensor& tensor);

/// Fills every cluster's centroid fields and returns the measurements in
/// cluster order.
std::vector<Measurement> measure_clusters(DbscanResult& result, const RaTensor& tensor);

}  // namespace isac
