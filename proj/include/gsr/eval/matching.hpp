#pragma once

#include <gsr/core/error.hpp>

#include <Eigen/Core>

#include <limits>
#include <vector>

namespace gsr {

// Maximum-weight assignment on a rectangular matrix (rows x cols, any
// shape). Returns, for each row, the matched column or -1. Pairs with
// non-positive weight are never reported as matched. O(n^3) Hungarian
// method on the padded square cost matrix.
inline std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight) {
  const int rows = static_cast<int>(weight.rows());
  const int cols = static_cast<int>(weight.cols());
  std::vector<int> result(rows, -1);
  if (rows == 0 || cols == 0) return result;
  const int n = std::max(rows, cols);
  const double big = weight.maxCoeff();
  // cost[i][j] = big - weight, padded entries cost `big` (weight 0).
  auto cost = [&](int i, int j) { return (i < rows && j < cols) ? big - weight(i, j) : big; };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  for (int j = 1; j <= n; ++j) {
    const int i = p[j] - 1;
    if (i >= 0 && i < rows && j - 1 < cols && weight(i, j - 1) > 0) result[i] = j - 1;
  }
  return result;
}

}  // namespace gsr
