#pragma once

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace isac {

template <typename Scalar>
struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), ascending row
  Scalar total_cost = Scalar(0);
};

namespace detail {

// Shortest augmenting path (Kuhn-Munkres with potentials) for rows <= cols.
// Rows are inserted in ascending order and ties in the reduced cost pick the
// lowest column, so the result is deterministic.
template <typename Scalar, typename Derived>
Eigen::VectorXi solve_rows_le_cols(const Eigen::MatrixBase<Derived>& cost) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();

  // 1-based potentials; owner(j) is the row matched to column j, 0 if free.
  Vec u = Vec::Zero(n + 1);
  Vec v = Vec::Zero(m + 1);
  Eigen::VectorXi owner = Eigen::VectorXi::Zero(m + 1);
  Eigen::VectorXi way = Eigen::VectorXi::Zero(m + 1);
  Vec minv(m + 1);
  Eigen::Array<bool, Eigen::Dynamic, 1> used(m + 1);

  for (int i = 1; i <= n; ++i) {
    owner(0) = i;
    int j0 = 0;
    minv.setConstant(inf);
    used.setConstant(false);
    do {
      used(j0) = true;
      const int i0 = owner(j0);
      Scalar delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used(j)) continue;
        const Scalar cur = cost(i0 - 1, j - 1) - u(i0) - v(j);
        if (cur < minv(j)) {
          minv(j) = cur;
          way(j) = j0;
        }
        if (minv(j) < delta) {
          delta = minv(j);
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used(j)) {
          u(owner(j)) += delta;
          v(j) -= delta;
        } else {
          minv(j) -= delta;
        }
      }
      j0 = j1;
    } while (owner(j0) != 0);
    do {
      const int j1 = way(j0);
      owner(j0) = owner(j1);
      j0 = j1;
    } while (j0 != 0);
  }

  Eigen::VectorXi row_to_col = Eigen::VectorXi::Constant(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (owner(j) != 0) row_to_col(owner(j) - 1) = j - 1;
  }
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost one-to-one assignment of min(rows, cols) pairs for a finite
/// rectangular cost matrix. O(n^2 m).
template <typename Derived>
Assignment<typename Derived::Scalar> hungarian(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  Assignment<Scalar> result;
  if (cost.rows() == 0 || cost.cols() == 0) return result;

  if (cost.rows() <= cost.cols()) {
    const auto row_to_col = detail::solve_rows_le_cols<Scalar>(cost);
    for (int r = 0; r < row_to_col.size(); ++r) result.pairs.emplace_back(r, row_to_col(r));
  } else {
    const auto col_to_row = detail::solve_rows_le_cols<Scalar>(cost.transpose());
    for (int c = 0; c < col_to_row.size(); ++c) result.pairs.emplace_back(col_to_row(c), c);
    std::sort(result.pairs.begin(), result.pairs.end());
  }
  for (const auto& [r, c] : result.pairs) result.total_cost += cost(r, c);
  return result;
}

}  // namespace isac
