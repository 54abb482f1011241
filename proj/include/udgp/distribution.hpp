#pragma once

// Observed (smoothed, binned) distance distributions and the model
// distribution of a density.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "udgp/domain.hpp"
#include "udgp/lag_operator.hpp"

namespace udgp {

struct SmoothingParams {
  double sigma;  // Gaussian std, continuous units
  Grid grid;
};

namespace detail {

// Mass of N(mu, sigma^2) on [a, b], computed from the tail nearer to mu.
inline double gaussian_mass(double mu, double sigma, double a, double b) {
  const double s = sigma * std::numbers::sqrt2;
  if (a >= mu) return 0.5 * (std::erfc((a - mu) / s) - std::erfc((b - mu) / s));
  if (b <= mu) return 0.5 * (std::erfc((mu - b) / s) - std::erfc((mu - a) / s));
  return 1.0 - 0.5 * std::erfc((mu - a) / s) - 0.5 * std::erfc((b - mu) / s);
}

inline double upper_tail(double mu, double sigma, double a) {
  return 0.5 * std::erfc((a - mu) / (sigma * std::numbers::sqrt2));
}

constexpr double kWindowSigmas = 10.0;

}  // namespace detail

/// Smooths each measured distance with N(d_k, sigma^2), integrates over the
/// bins [(y-0.5)dl, (y+0.5)dl] and normalises. On a line, mass below the
/// first bin edge is reflected about zero and mass past the last edge lands
/// in the last bin; on a loop the bins wrap.
inline DistDistribution observed_distribution(const DistanceMultiset& dm, const SmoothingParams& params) {
  require(std::isfinite(params.sigma) && params.sigma > 0.0, "sigma must be positive");
  require(is_augmented(dm.kind()), "observed distribution expects an augmented multiset");
  require(dm.size() > 0, "empty multiset");
  const Grid& grid = params.grid;
  require(is_beltway(dm.kind()) == grid.geometry().is_loop(), "multiset kind does not match grid geometry");

  const double dl = grid.step();
  const double sigma = params.sigma;
  const auto m = static_cast<long long>(grid.size());
  std::vector<double> p(grid.size(), 0.0);
  const double half_window = detail::kWindowSigmas * sigma;

  auto bin_mass = [&](double mu, long long y) {
    return detail::gaussian_mass(mu, sigma, (static_cast<double>(y) - 0.5) * dl, (static_cast<double>(y) + 0.5) * dl);
  };

  for (double d : dm.values()) {
    const long long lo = static_cast<long long>(std::floor((d - half_window) / dl)) - 1;
    const long long hi = static_cast<long long>(std::ceil((d + half_window) / dl)) + 1;
    if (grid.geometry().is_loop()) {
      for (long long y = lo; y <= hi; ++y) {
        const double w = bin_mass(d, y);
        if (w > 0.0) p[static_cast<std::size_t>(((y % m) + m) % m)] += w;
      }
      continue;
    }
    require(std::llround(d / dl) <= m - 1,
            "distance " + std::to_string(d) + " quantises beyond the last grid cell", ErrorCode::Data);
    const double top_edge = (static_cast<double>(m) - 0.5) * dl;
    for (long long y = std::max(lo, 0LL); y <= std::min(hi, m - 1); ++y) p[static_cast<std::size_t>(y)] += bin_mass(d, y);
    // reflected part, landing on bins y >= 1
    const long long rhi = std::min(static_cast<long long>(std::ceil((half_window - d) / dl)) + 1, m - 1);
    for (long long y = 1; y <= rhi; ++y) p[static_cast<std::size_t>(y)] += bin_mass(-d, y);
    p[static_cast<std::size_t>(m - 1)] += detail::upper_tail(d, sigma, top_edge) + detail::upper_tail(-d, sigma, top_edge);
  }

  double total = 0.0;
  for (double v : p) total += v;
  require(total > 0.0, "observed distribution has no mass", ErrorCode::Data);
  for (double& v : p) v /= total;
  return {std::move(p), grid};
}

/// Raw lag sums a_y = z^T A_y z (line) or z^T R_y z (loop).
inline std::vector<double> lag_sums(const Density& z, const LagOperatorPlan& plan) {
  require(plan.size() == z.size() && plan.geometry() == z.grid().geometry(), "plan does not match density grid");
  return plan.autocorrelation(z.values());
}

/// q(y) = z^T A_y z / K on a line, g(y) = z^T R_y z / Z on a loop.
inline DistDistribution model_distribution(const Density& z, const LagOperatorPlan& plan) {
  std::vector<double> a = lag_sums(z, plan);
  const double k = distance_count(z.grid().geometry(), z.points());
  for (double& v : a) v = std::max(0.0, v) / k;
  return {std::move(a), z.grid()};
}

inline DistDistribution model_distribution(const Density& z) {
  return model_distribution(z, LagOperatorPlan(z.grid()));
}

namespace dense {

inline DistDistribution model_distribution(const Density& z) {
  std::vector<double> a = autocorrelation(z.grid().geometry(), z.values());
  const double k = distance_count(z.grid().geometry(), z.points());
  for (double& v : a) v = std::max(0.0, v) / k;
  return {std::move(a), z.grid()};
}

}  // namespace dense
}  // namespace udgp
