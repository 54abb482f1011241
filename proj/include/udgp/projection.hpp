#pragma once

// Euclidean projection onto S = { s : 0 <= s_m <= 1, sum(s) = N }.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "udgp/error.hpp"

namespace udgp {

enum class ProjectionCase { Interior, AllSaturated };

struct ProjectionResult {
  std::vector<double> s;
  std::optional<std::size_t> r;    // 1-based index of the first non-saturated sorted entry
  std::optional<std::size_t> rho;  // number of non-zero entries
  std::optional<double> kappa;     // threshold, in the caller's (unshifted) coordinates
  ProjectionCase kind = ProjectionCase::AllSaturated;
};

namespace detail {

constexpr double kProjectionMargin = 1e-12;

struct SortedInput {
  std::vector<std::size_t> order;  // order[k] = original index of the k-th largest entry
  std::vector<double> w;           // shifted values, non-increasing
  std::vector<long double> prefix; // prefix[k] = w[0] + ... + w[k-1]
  double shift = 0.0;
  bool complete = true;            // false: only the largest w.size() entries are sorted
  std::vector<std::pair<double, std::size_t>> pool;  // (-z, index); [0, w.size()) sorted

  // Sorts the next largest entries until `keep` of them (or all) are in order.
  void extend(std::size_t keep) {
    const std::size_t m = pool.size();
    const std::size_t from = w.size();
    keep = std::min(keep, m);
    if (keep <= from) return;
    auto first = pool.begin() + static_cast<std::ptrdiff_t>(from);
    auto last = pool.begin() + static_cast<std::ptrdiff_t>(keep);
    if (keep < m) std::nth_element(first, last, pool.end());
    std::sort(first, last);
    order.resize(keep);
    w.resize(keep);
    prefix.resize(keep + 1);
    for (std::size_t j = from; j < keep; ++j) {
      order[j] = pool[j].second;
      w[j] = -pool[j].first + shift;
      prefix[j + 1] = prefix[j] + static_cast<long double>(w[j]);
    }
    complete = keep == m;
  }
};

// Ties keep their original index order, as a stable sort would.
inline SortedInput sort_shifted(std::span<const double> z, std::size_t n, std::size_t keep) {
  SortedInput in;
  const std::size_t m = z.size();
  // any shift leaves the projection unchanged; this one makes every entry >= N
  in.shift = static_cast<double>(n) - *std::min_element(z.begin(), z.end());
  in.pool.resize(m);
  for (std::size_t i = 0; i < m; ++i) in.pool[i] = {-z[i], i};
  in.prefix.assign(1, 0.0L);
  in.complete = false;
  in.extend(keep);
  return in;
}

inline SortedInput sort_shifted(std::span<const double> z, std::size_t n) { return sort_shifted(z, n, z.size()); }

struct Candidate {
  std::size_t rho_v;
  double kappa;
  double s_r;
  double s_rm1;            // +inf when r == 1
  bool truncated = false;  // the support may extend past the sorted prefix
};

// Largest-to-smallest simplex threshold for the tail v = w[r-1:], target N - r + 1.
inline Candidate candidate_for(const SortedInput& in, std::size_t n, std::size_t r) {
  const std::size_t o = r - 1;
  const std::size_t len = in.w.size() - o;
  const long double c = static_cast<long double>(n - r + 1);
  auto positive = [&](std::size_t l) {
    const long double sum = in.prefix[o + l] - in.prefix[o];
    return static_cast<long double>(l) * in.w[o + l - 1] - sum + c > 0.0L;
  };
  // positive(l) holds for l <= rho_v and fails afterwards
  std::size_t lo = 1, hi = len;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (positive(mid)) lo = mid;
    else hi = mid - 1;
  }
  const long double kappa = (in.prefix[o + lo] - in.prefix[o] - c) / static_cast<long double>(lo);
  Candidate cand;
  cand.rho_v = lo;
  cand.kappa = static_cast<double>(kappa);
  cand.s_r = static_cast<double>(static_cast<long double>(in.w[o]) - kappa);
  cand.s_rm1 = r >= 2 ? static_cast<double>(static_cast<long double>(in.w[o - 1]) - kappa)
                      : std::numeric_limits<double>::infinity();
  cand.truncated = !in.complete && lo == len;
  return cand;
}

// Positive margin: strict interior test. Negative margin: tolerant retry.
inline bool accepts(const Candidate& c, double margin) {
  return c.s_r > margin && c.s_r < 1.0 - margin && c.s_rm1 >= 1.0 - std::abs(margin);
}

// With inputs far above 1 in magnitude, w - kappa loses digits and the sum
// drifts off N. The residual is spread over the interior entries.
inline void polish_sum(std::vector<double>& s, const SortedInput& in, std::size_t n) {
  for (int pass = 0; pass < 3; ++pass) {
    long double sum = 0.0L;
    std::size_t free = 0;
    for (std::size_t k = 0; k < in.w.size(); ++k) {
      const double v = s[in.order[k]];
      sum += v;
      free += v > 0.0 && v < 1.0;
    }
    const double resid = static_cast<double>(static_cast<long double>(n) - sum);
    if (free == 0 || std::abs(resid) <= 1e-13 * static_cast<double>(n)) return;
    const double share = resid / static_cast<double>(free);
    for (std::size_t k = 0; k < in.w.size(); ++k) {
      double& v = s[in.order[k]];
      if (v > 0.0 && v < 1.0) v = std::clamp(v + share, 0.0, 1.0);
    }
  }
}

}  // namespace detail

/// Number of r in {1..N} whose (rho, kappa) pass both sortedness checks.
/// Exactly one whenever the projection has an entry strictly inside (0,1).
inline std::size_t count_valid_r(std::span<const double> z, std::size_t n) {
  require(n >= 1 && n <= z.size(), "projection needs 1 <= N <= M");
  const auto in = detail::sort_shifted(z, n);
  std::size_t count = 0;
  for (std::size_t r = 1; r <= n; ++r)
    if (detail::accepts(detail::candidate_for(in, n, r), detail::kProjectionMargin)) ++count;
  return count;
}

/// Projection onto the l1 ball with [0,1] box constraints. Sorts once, then
/// tries each saturation prefix length r - 1 with a closed-form threshold.
/// Only the largest entries are sorted at first; the sorted prefix doubles
/// whenever a threshold search runs into its end.
inline ProjectionResult project_l1_box(std::span<const double> z, std::size_t n) {
  const std::size_t m = z.size();
  require(n >= 1 && n <= m, "projection needs 1 <= N <= M");
  ProjectionResult res;
  res.s.assign(m, 0.0);
  if (n == m) {
    res.s.assign(m, 1.0);
    return res;
  }

  auto in = detail::sort_shifted(z, n, std::max<std::size_t>(4 * n + 64, 1024));
  for (;; in.extend(2 * in.w.size())) {
    auto finish = [&](std::size_t r, const detail::Candidate& c) {
      res.kind = ProjectionCase::Interior;
      res.r = r;
      res.rho = c.rho_v + r - 1;
      res.kappa = c.kappa - in.shift;
      for (std::size_t k = 0; k < in.w.size(); ++k) res.s[in.order[k]] = std::clamp(in.w[k] - c.kappa, 0.0, 1.0);
      detail::polish_sum(res.s, in, n);
    };
    // 1: accepted, 0: nothing accepted, -1: needs a longer sorted prefix
    auto attempt = [&](double margin) {
      for (std::size_t r = 1; r <= n; ++r) {
        const auto c = detail::candidate_for(in, n, r);
        if (c.truncated) return -1;
        if (detail::accepts(c, margin)) {
          finish(r, c);
          return 1;
        }
      }
      return 0;
    };

    int state = attempt(detail::kProjectionMargin);
    if (state == 0) {
      // No interior candidate. The saturated answer is optimal iff the N-th
      // and (N+1)-th largest entries are at least 1 apart; otherwise rounding
      // hid an interior solution and a tolerant pass recovers it.
      const double gap = in.w[n - 1] - in.w[n];
      if (gap < 1.0 - 1e-9) state = attempt(-1e-9);
      if (state == 0) {
        for (std::size_t k = 0; k < n; ++k) res.s[in.order[k]] = 1.0;
        return res;
      }
    }
    if (state == 1) return res;
    if (in.complete) throw Error(ErrorCode::Data, "projection search failed on a fully sorted input");
  }
}

/// Reference projection: walks every threshold interval between the
/// breakpoints {z_i, z_i - 1}, derives the pinning pattern (entries at 0, at
/// 1, free) it induces, solves the free entries in closed form and keeps the
/// pattern whose threshold is consistent with its interval. O(M^2); meant for
/// tests on small M.
inline std::vector<double> project_oracle(std::span<const double> z, std::size_t n) {
  const std::size_t m = z.size();
  require(n >= 1 && n <= m, "projection needs 1 <= N <= M");
  std::vector<double> bp;
  bp.reserve(2 * m + 2);
  for (double v : z) {
    bp.push_back(v);
    bp.push_back(v - 1.0);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  bp.insert(bp.begin(), bp.front() - 1.0);
  bp.push_back(bp.back() + 1.0);

  const double target = static_cast<double>(n);
  for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
    const double a = bp[k], b = bp[k + 1];
    const double mid = 0.5 * (a + b);
    std::size_t ones = 0, free_count = 0;
    double free_sum = 0.0;
    for (double v : z) {
      if (v - mid >= 1.0) ++ones;
      else if (v - mid > 0.0) {
        ++free_count;
        free_sum += v;
      }
    }
    if (free_count == 0) {
      if (ones == n) {
        std::vector<double> s(m);
        for (std::size_t i = 0; i < m; ++i) s[i] = z[i] - mid >= 1.0 ? 1.0 : 0.0;
        return s;
      }
      continue;
    }
    const double kappa = (free_sum - (target - static_cast<double>(ones))) / static_cast<double>(free_count);
    const double tol = 1e-12 * (1.0 + std::abs(a) + std::abs(b));
    if (kappa >= a - tol && kappa <= b + tol) {
      std::vector<double> s(m);
      for (std::size_t i = 0; i < m; ++i) s[i] = std::clamp(z[i] - kappa, 0.0, 1.0);
      return s;
    }
  }
  throw Error(ErrorCode::Data, "projection oracle found no consistent pattern");
}

}  // namespace udgp
