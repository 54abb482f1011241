#pragma once

// Point estimates from a density by agglomerative clustering of grid cells.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <vector>

#include "udgp/domain.hpp"

namespace udgp {

struct Cluster {
  double weight = 0.0;
  double centroid = 0.0;
  std::vector<std::size_t> member_cells;
};

struct Extraction {
  std::vector<double> locations;  // ascending
  std::vector<double> weights;    // aligned with locations
  std::vector<Cluster> clusters;  // the kept clusters, same order
  bool deficient = false;         // fewer than N clusters were available
};

namespace detail {

constexpr double kDustThreshold = 1e-12;

struct PairKey {
  double dist;
  std::uint64_t tiebreak;
  std::size_t a, b;
  std::uint64_t va, vb;  // versions at insertion, for lazy deletion
  bool operator>(const PairKey& o) const {
    if (dist != o.dist) return dist > o.dist;
    return tiebreak > o.tiebreak;
  }
};

}  // namespace detail

/// Starts with one cluster per cell holding mass, then repeatedly merges the
/// closest pair whose weights are both below 1 and whose centroids are
/// closer than d_min (ties broken by a seeded draw). Stops at N clusters or
/// when nothing can merge, and keeps the N heaviest clusters. On a loop,
/// distances and centroids use the shorter arc.
inline Extraction extract_points(const Density& z, double d_min, std::size_t n, std::uint64_t seed) {
  require(d_min > 0.0 && std::isfinite(d_min), "d_min must be positive");
  require(n >= 1, "N must be positive");
  const Grid& grid = z.grid();
  const bool loop = grid.geometry().is_loop();
  const double len = loop ? grid.geometry().loop_length() : 0.0;

  std::vector<Cluster> cl;
  for (std::size_t m = 0; m < z.size(); ++m)
    if (z.values()[m] >= detail::kDustThreshold) cl.push_back({z.values()[m], grid.cell_center(m), {m}});
  require(cl.size() >= n, "density has fewer than N cells holding mass", ErrorCode::Data);

  auto dist = [&](double a, double b) { return loop ? std::abs(circular_offset(a, b, len)) : std::abs(b - a); };

  // Clusters below weight 1, linked in centroid order (circularly on a loop).
  // The closest mergeable pair is always adjacent in this order and a merged
  // centroid stays between its parts, so only adjacent pairs are queued.
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> prev(cl.size(), none), next(cl.size(), none);
  std::vector<std::uint64_t> version(cl.size(), 0);
  std::vector<bool> linked(cl.size(), false), alive(cl.size(), true);
  std::size_t first = none, last = none, list_size = 0;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    if (cl[i].weight >= 1.0) continue;
    linked[i] = true;
    prev[i] = last;
    if (last != none) next[last] = i;
    else first = i;
    last = i;
    ++list_size;
  }
  if (loop && list_size >= 2) {
    next[last] = first;
    prev[first] = last;
  }

  std::mt19937_64 rng(seed);
  std::priority_queue<detail::PairKey, std::vector<detail::PairKey>, std::greater<>> heap;
  auto push_pair = [&](std::size_t a, std::size_t b) {
    if (a == none || b == none || a == b) return;
    const double d = dist(cl[a].centroid, cl[b].centroid);
    if (d < d_min) heap.push({d, rng(), a, b, version[a], version[b]});
  };
  auto unlink = [&](std::size_t i) {
    const std::size_t p = prev[i], q = next[i];
    if (p != none) next[p] = q == p ? none : q;
    if (q != none) prev[q] = p == q ? none : p;
    if (first == i) first = q;
    linked[i] = false;
    prev[i] = next[i] = none;
    return std::pair{p, q};
  };

  for (std::size_t i = first; i != none; i = next[i]) {
    push_pair(i, next[i]);
    if (next[i] == first) break;
  }

  std::size_t live = cl.size();
  while (live > n && !heap.empty()) {
    const auto top = heap.top();
    heap.pop();
    if (!linked[top.a] || !linked[top.b] || next[top.a] != top.b || version[top.a] != top.va ||
        version[top.b] != top.vb)
      continue;
    const std::size_t k = std::min(top.a, top.b), g = std::max(top.a, top.b);
    Cluster& keep = cl[k];
    Cluster& gone = cl[g];
    const double w = keep.weight + gone.weight;
    if (loop) {
      keep.centroid = wrap(keep.centroid + (gone.weight / w) * circular_offset(keep.centroid, gone.centroid, len), len);
    } else {
      keep.centroid = (keep.weight * keep.centroid + gone.weight * gone.centroid) / w;
    }
    keep.weight = w;
    keep.member_cells.insert(keep.member_cells.end(), gone.member_cells.begin(), gone.member_cells.end());
    gone.member_cells.clear();
    alive[g] = false;
    unlink(g);
    ++version[k];
    --live;
    if (keep.weight >= 1.0) {
      const auto [p, q] = unlink(k);
      push_pair(p, q);
    } else {
      push_pair(prev[k], k);
      push_pair(k, next[k]);
    }
  }

  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < cl.size(); ++i)
    if (alive[i]) ids.push_back(i);
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return cl[a].weight > cl[b].weight; });
  Extraction out;
  out.deficient = ids.size() < n;
  if (ids.size() > n) ids.resize(n);
  std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    return cl[a].centroid != cl[b].centroid ? cl[a].centroid < cl[b].centroid : a < b;
  });
  for (std::size_t i : ids) {
    std::sort(cl[i].member_cells.begin(), cl[i].member_cells.end());
    out.locations.push_back(cl[i].centroid);
    out.weights.push_back(cl[i].weight);
    out.clusters.push_back(std::move(cl[i]));
  }
  return out;
}

}  // namespace udgp
