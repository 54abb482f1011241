#pragma once

// Minimum-cost assignment (Hungarian method with potentials).

#include <limits>
#include <vector>

#include "udgp/error.hpp"

namespace udgp {

struct Assignment {
  std::vector<std::size_t> row_to_col;  // one column per row
  double cost = 0.0;
};

/// cost is rows x cols with rows <= cols. Every row receives a distinct column
/// and the total cost is minimal. O(rows^2 * cols).
inline Assignment hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const std::size_t m = cost[0].size();
  require(n <= m, "assignment needs rows <= cols");
  for (const auto& row : cost) require(row.size() == m, "ragged cost matrix");

  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual start column
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
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
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment a;
  a.row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) a.row_to_col[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) a.cost += cost[i][a.row_to_col[i]];
  return a;
}

}  // namespace udgp
