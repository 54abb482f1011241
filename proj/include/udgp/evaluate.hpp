#pragma once

// Scoring of reconstructions and comparison of distance distributions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "udgp/domain.hpp"
#include "udgp/hungarian.hpp"

namespace udgp {

struct CongruenceTransform {
  double shift = 0.0;
  bool reflected = false;
};

struct RecoveryScore {
  std::size_t matched = 0;
  std::vector<std::pair<std::size_t, std::size_t>> assignment;  // (truth index, estimate index)
  std::vector<double> errors;                                    // per assignment pair
  PointConfig aligned_estimate;
  CongruenceTransform transform;
  double total_cost = 0.0;
};

namespace detail {

inline double geometry_distance(const Geometry& g, double a, double b) {
  return g.is_loop() ? std::abs(circular_offset(a, b, g.loop_length())) : std::abs(a - b);
}

inline double apply_transform(const Geometry& g, double x, const CongruenceTransform& t) {
  const double v = (t.reflected ? -x : x) + t.shift;
  return g.is_loop() ? wrap(v, g.loop_length()) : v;
}

// Distance from x to the nearest entry of sorted, plus that entry's index.
inline std::pair<double, std::size_t> nearest_sorted(const Geometry& g, const std::vector<double>& sorted, double x) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  std::size_t cand[4];
  std::size_t k = 0;
  const auto pos = static_cast<std::size_t>(it - sorted.begin());
  if (pos < sorted.size()) cand[k++] = pos;
  if (pos > 0) cand[k++] = pos - 1;
  if (g.is_loop()) {
    cand[k++] = 0;
    cand[k++] = sorted.size() - 1;
  }
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = geometry_distance(g, x, sorted[cand[i]]);
    if (d < best) {
      best = d;
      arg = cand[i];
    }
  }
  return {best, arg};
}

constexpr std::size_t kTieEvaluations = 32;

}  // namespace detail

/// Aligns the estimate to the truth over translations (rotations on a loop)
/// and reflections, then matches points with the Hungarian method. A truth
/// point counts as recovered when its partner is closer than d_min / 2; the
/// assignment maximises that count, then minimises the matched distance.
///
/// Candidate alignments put one estimated point exactly on one truth point.
/// They are visited in order of an optimistic count (distinct truth points
/// with an estimate nearby); a tie in the final count is settled by the
/// smaller total matched cost, examining at most a few dozen alignments per
/// count level.
inline RecoveryScore score_recovery(const PointConfig& truth, const PointConfig& estimate, double d_min) {
  const Geometry& g = truth.geometry();
  require(g == estimate.geometry(), "truth and estimate geometries differ");
  require(estimate.size() <= truth.size(), "estimate has more points than truth");
  require(d_min > 0.0, "d_min must be positive");
  const double radius = 0.5 * d_min;
  const auto& t = truth.locations();
  const auto& e = estimate.locations();

  std::vector<std::size_t> t_order(t.size());
  std::iota(t_order.begin(), t_order.end(), std::size_t{0});
  std::sort(t_order.begin(), t_order.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
  std::vector<double> t_sorted(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) t_sorted[i] = t[t_order[i]];

  struct Candidate {
    CongruenceTransform tr;
    std::size_t bound;
    double near_cost;
  };
  std::vector<Candidate> cands;
  cands.reserve(2 * e.size() * t.size());
  std::vector<char> hit(t.size());
  for (int refl = 0; refl < 2; ++refl) {
    for (std::size_t j = 0; j < e.size(); ++j) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        CongruenceTransform tr{t[i] - (refl ? -e[j] : e[j]), refl == 1};
        std::fill(hit.begin(), hit.end(), 0);
        std::size_t bound = 0;
        double near_cost = 0.0;
        for (double x : e) {
          const auto [d, k] = detail::nearest_sorted(g, t_sorted, detail::apply_transform(g, x, tr));
          if (d < radius && !hit[k]) {
            hit[k] = 1;
            ++bound;
            near_cost += d;
          }
        }
        cands.push_back({tr, bound, near_cost});
      }
    }
  }
  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cands[a].bound != cands[b].bound) return cands[a].bound > cands[b].bound;
    return cands[a].near_cost < cands[b].near_cost;
  });

  // Pairs farther than the radius cost more than any set of in-radius pairs,
  // so the assignment maximises the matched count first. Raw distances tie
  // often on a line and would let rounding pick the count.
  const double miss = radius * static_cast<double>(e.size() + 1);
  std::vector<std::vector<double>> cost(e.size(), std::vector<double>(t.size()));
  auto dist = cost;
  std::vector<double> moved(e.size());
  bool have = false;
  RecoveryScore best{0, {}, {}, estimate, {}, std::numeric_limits<double>::infinity()};
  double best_matched_cost = std::numeric_limits<double>::infinity();
  std::size_t level_bound = std::numeric_limits<std::size_t>::max(), level_count = 0;
  for (std::size_t idx : order) {
    const auto& c = cands[idx];
    if (have && c.bound < best.matched) break;
    if (c.bound != level_bound) {
      level_bound = c.bound;
      level_count = 0;
    }
    if (have && c.bound == best.matched && ++level_count > detail::kTieEvaluations) continue;

    for (std::size_t j = 0; j < e.size(); ++j) {
      moved[j] = detail::apply_transform(g, e[j], c.tr);
      for (std::size_t i = 0; i < t.size(); ++i) {
        dist[j][i] = detail::geometry_distance(g, moved[j], t[i]);
        cost[j][i] = dist[j][i] < radius ? dist[j][i] : miss;
      }
    }
    const auto a = hungarian(cost);
    std::size_t matched = 0;
    double matched_cost = 0.0, raw_cost = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
      const double d = dist[j][a.row_to_col[j]];
      raw_cost += d;
      if (d < radius) {
        ++matched;
        matched_cost += d;
      }
    }
    if (!have || matched > best.matched || (matched == best.matched && matched_cost < best_matched_cost)) {
      have = true;
      best_matched_cost = matched_cost;
      best.matched = matched;
      best.transform = c.tr;
      best.total_cost = raw_cost;
      best.assignment.clear();
      best.errors.clear();
      for (std::size_t j = 0; j < e.size(); ++j) {
        best.assignment.emplace_back(a.row_to_col[j], j);
        best.errors.push_back(dist[j][a.row_to_col[j]]);
      }
      best.aligned_estimate = PointConfig(moved, g);
    }
  }
  return best;
}

/// Earth mover's distance between two lag distributions on the same grid.
/// Line: sum_y |P(y) - Q(y)| * dl over the cumulative sums. Loop: the same
/// with the cumulative difference shifted by its median, which is the
/// optimal rotation of the cut point.
inline double emd_1d(const DistDistribution& p, const DistDistribution& q) {
  require(p.grid() == q.grid(), "distributions live on different grids");
  const std::size_t m = p.size();
  double sp = 0.0, sq = 0.0;
  for (std::size_t y = 0; y < m; ++y) {
    sp += p[y];
    sq += q[y];
  }
  require(sp > 0.0 && sq > 0.0, "distributions must carry mass");
  std::vector<double> diff(m);
  double cp = 0.0, cq = 0.0;
  for (std::size_t y = 0; y < m; ++y) {
    cp += p[y] / sp;
    cq += q[y] / sq;
    diff[y] = cp - cq;
  }
  double shift = 0.0;
  if (p.grid().geometry().is_loop()) {
    std::vector<double> s = diff;
    std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(m / 2), s.end());
    shift = s[m / 2];
  }
  double total = 0.0;
  for (double d : diff) total += std::abs(d - shift);
  return total * p.grid().step();
}

}  // namespace udgp
