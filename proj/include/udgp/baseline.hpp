#pragma once

// Depth-first backtracking for the (noisy) turnpike problem: the largest
// unassigned distance always connects a new point to one of the two ends.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "udgp/domain.hpp"

namespace udgp {

struct BacktrackConfig {
  double delta_d = 0.0;                 // match tolerance on every distance
  std::uint64_t node_budget = 10'000'000;
  bool find_all = false;

  void validate() const {
    require(std::isfinite(delta_d) && delta_d >= 0.0, "delta_d must be non-negative");
    require(node_budget >= 1, "node budget must be positive");
  }
};

enum class BacktrackStatus { Found, Infeasible, BudgetExhausted };

inline std::string to_string(BacktrackStatus s) {
  switch (s) {
    case BacktrackStatus::Found: return "found";
    case BacktrackStatus::Infeasible: return "infeasible";
    case BacktrackStatus::BudgetExhausted: return "budget_exhausted";
  }
  return "infeasible";
}

struct BacktrackResult {
  std::vector<PointConfig> solutions;  // locations ascending, first point at 0
  BacktrackStatus status = BacktrackStatus::Infeasible;
  std::uint64_t nodes = 0;
};

namespace detail {

class Backtracker {
 public:
  Backtracker(const DistanceMultiset& dm, const BacktrackConfig& cfg)
      : cfg_(cfg), remaining_(dm.values().begin(), dm.values().end()), n_(dm.points()) {
    d_max_ = *remaining_.rbegin();
    tol_ = std::max(cfg.delta_d, 1e-9 * d_max_);
  }

  BacktrackResult run() {
    BacktrackResult res;
    remaining_.erase(std::prev(remaining_.end()));
    placed_ = {0.0, d_max_};
    search(res);
    if (budget_hit_) res.status = BacktrackStatus::BudgetExhausted;
    else res.status = res.solutions.empty() ? BacktrackStatus::Infeasible : BacktrackStatus::Found;
    res.nodes = nodes_;
    return res;
  }

  std::size_t remaining_size() const { return remaining_.size(); }

 private:
  // Removes the entry nearest to d if it lies within tol; ties go to the
  // smaller value.
  bool take(double d, std::vector<double>& taken) {
    auto hi = remaining_.lower_bound(d);
    auto best = remaining_.end();
    if (hi != remaining_.end()) best = hi;
    if (hi != remaining_.begin()) {
      auto lo = std::prev(hi);
      if (best == remaining_.end() || d - *lo <= *best - d) best = lo;
    }
    if (best == remaining_.end() || std::abs(*best - d) > tol_) return false;
    taken.push_back(*best);
    remaining_.erase(best);
    return true;
  }

  void restore(const std::vector<double>& taken) { remaining_.insert(taken.begin(), taken.end()); }

  // true when the search should stop
  bool search(BacktrackResult& res) {
    if (remaining_.empty()) {
      if (placed_.size() == n_) record(res);
      return !cfg_.find_all;
    }
    if (placed_.size() >= n_) return false;
    const double d = *remaining_.rbegin();
    const double candidates[2] = {d_max_ - d, d};
    for (int k = 0; k < 2; ++k) {
      const double y = candidates[k];
      if (k == 1 && candidates[1] == candidates[0]) break;
      if (++nodes_ > cfg_.node_budget) {
        budget_hit_ = true;
        return true;
      }
      std::vector<double> taken;
      taken.reserve(placed_.size());
      bool ok = true;
      for (double p : placed_)
        if (!take(std::abs(y - p), taken)) {
          ok = false;
          break;
        }
      if (ok) {
        placed_.push_back(y);
        const bool stop = search(res);
        placed_.pop_back();
        restore(taken);
        if (stop) return true;
      } else {
        restore(taken);
      }
    }
    return false;
  }

  void record(BacktrackResult& res) {
    std::vector<double> u = placed_;
    std::sort(u.begin(), u.end());
    if (std::adjacent_find(u.begin(), u.end()) != u.end()) return;  // coincident points
    for (const auto& s : res.solutions) {
      bool same = true;
      for (std::size_t i = 0; i < u.size() && same; ++i) same = std::abs(s.locations()[i] - u[i]) <= 1e-9 * d_max_;
      if (same) return;
    }
    res.solutions.emplace_back(std::move(u), Geometry::line());
  }

  BacktrackConfig cfg_;
  std::multiset<double> remaining_;
  std::vector<double> placed_;
  std::size_t n_;
  double d_max_ = 0.0;
  double tol_ = 0.0;
  std::uint64_t nodes_ = 0;
  bool budget_hit_ = false;
};

// W1 between two equal-size multisets of reals (mean gap after sorting).
inline double multiset_w1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

}  // namespace detail

/// Places the ends at 0 and d_max, then repeatedly takes the largest
/// remaining distance d and tries a new point at d_max - d, then at d. A
/// placement is kept when every distance to an already placed point matches
/// a remaining entry within delta_d (nearest entry consumed, restored on
/// backtrack).
inline BacktrackResult backtrack_turnpike(const DistanceMultiset& dm, const BacktrackConfig& cfg) {
  cfg.validate();
  require(dm.kind() == MultisetKind::TurnpikeRaw, "backtracking expects a raw turnpike multiset");
  require(dm.max() > 0.0, "largest distance must be positive", ErrorCode::Data);
  return detail::Backtracker(dm, cfg).run();
}

struct RankedSolution {
  PointConfig config;
  double emd;  // W1 between its distances and the measured ones
};

constexpr std::size_t kExhaustiveMaxPoints = 12;

/// Backtracking with tolerance d_max (every branch matches), all solutions,
/// ranked best first by the W1 distance between each solution's distance
/// multiset and the measured one.
inline std::vector<RankedSolution> exhaustive_turnpike(const DistanceMultiset& dm, double d_max,
                                                       std::uint64_t node_budget = 10'000'000) {
  require(dm.points() <= kExhaustiveMaxPoints, "exhaustive search is limited to N <= 12");
  BacktrackConfig cfg;
  cfg.delta_d = d_max;
  cfg.find_all = true;
  cfg.node_budget = node_budget;
  auto res = backtrack_turnpike(dm, cfg);
  if (res.status == BacktrackStatus::BudgetExhausted)
    throw Error(ErrorCode::Budget, "exhaustive search exceeded its node budget");
  std::vector<RankedSolution> ranked;
  for (auto& s : res.solutions) {
    const double e = detail::multiset_w1(pairwise_distances(s).values(), dm.values());
    ranked.push_back({std::move(s), e});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.emd < b.emd; });
  return ranked;
}

}  // namespace udgp
