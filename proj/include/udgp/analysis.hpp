#pragma once

// Local convergence diagnostics around a binary optimizer x: the quadratic
// form of E = sum_y B_y x x^T B_y^T, its minimum lambda_E over the polytope G
// of normalised feasible directions, and the basin radius tau.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "udgp/lag_operator.hpp"
#include "udgp/projection.hpp"

namespace udgp {

/// h^T E h = sum_y (h^T B_y x)^2, from one cross-lag correlation.
inline double quadratic_E(const LagOperatorPlan& plan, std::span<const double> x, std::span<const double> h) {
  require(x.size() == plan.size() && h.size() == plan.size(), "quadratic_E: length mismatch");
  double s = 0.0;
  for (double w : plan.cross_lag(h, x)) s += w * w;
  return s;
}

inline double quadratic_E(const Density& x, std::span<const double> h) {
  return quadratic_E(LagOperatorPlan(x.grid()), x.values(), h);
}

namespace dense {

/// E materialised column by column (M x M); for tests on small M.
inline std::vector<std::vector<double>> matrix_E(const Geometry& g, std::span<const double> x) {
  const std::size_t m = x.size();
  std::vector<std::vector<double>> bx(m);  // bx[y] = B_y x
  std::vector<double> e(m);
  for (std::size_t y = 0; y < m; ++y) {
    e.assign(m, 0.0);
    e[y] = 1.0;
    bx[y] = lag_correlate(g, x, e);
  }
  std::vector<std::vector<double>> E(m, std::vector<double>(m, 0.0));
  for (std::size_t y = 0; y < m; ++y)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) E[i][j] += bx[y][i] * bx[y][j];
  return E;
}

}  // namespace dense

struct LambdaConfig {
  double tol = 1e-12;               // relative objective change
  std::size_t max_iterations = 100000;
};

struct LambdaEstimate {
  double lambda_E = 0.0;
  std::vector<double> h;  // minimiser found, a point of G
  std::size_t iterations = 0;
  bool converged = false;
};

/// Euclidean projection onto G = { sum h = 0, sum |h| = 1, h_i in [0, 1/2]
/// where x_i = 0, h_i in [-1/2, 0] where x_i = 1 }. Together the two sums
/// fix the mass of each part to +1/2 and -1/2, so G splits into two scaled
/// capped simplices that are projected independently and exactly.
inline std::vector<double> project_G(std::span<const double> x, std::span<const double> v) {
  require(x.size() == v.size(), "project_G: length mismatch");
  std::vector<std::size_t> zeros, ones;
  for (std::size_t i = 0; i < x.size(); ++i) (x[i] > 0.5 ? ones : zeros).push_back(i);
  require(!zeros.empty() && !ones.empty(), "G is empty unless 0 < N < M");
  std::vector<double> h(x.size(), 0.0);
  auto part = [&](const std::vector<std::size_t>& idx, double sign) {
    std::vector<double> w(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) w[k] = 2.0 * sign * v[idx[k]];
    const auto s = project_l1_box(w, 1).s;
    for (std::size_t k = 0; k < idx.size(); ++k) h[idx[k]] = 0.5 * sign * s[k];
  };
  part(zeros, 1.0);
  part(ones, -1.0);
  return h;
}

/// Checks membership of G within tol.
inline bool in_G(std::span<const double> x, std::span<const double> h, double tol = 1e-9) {
  double sum = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool one = x[i] > 0.5;
    if (one ? (h[i] < -0.5 - tol || h[i] > tol) : (h[i] < -tol || h[i] > 0.5 + tol)) return false;
    sum += h[i];
    l1 += std::abs(h[i]);
  }
  return std::abs(sum) <= tol && std::abs(l1 - 1.0) <= tol;
}

/// lambda_E = min over G of h^T E h, by accelerated projected gradient with
/// a backtracked step (restarted whenever the objective rises).
inline LambdaEstimate estimate_lambda_E(const Density& x, const LambdaConfig& cfg = {}) {
  const auto& xv = x.values();
  for (double v : xv) require(v == 0.0 || v == 1.0, "lambda_E needs a binary x");
  require(x.points() < x.size(), "G is empty unless 0 < N < M");
  const LagOperatorPlan plan(x.grid());

  auto value = [&](const std::vector<double>& h) { return quadratic_E(plan, xv, h); };
  auto grad = [&](const std::vector<double>& h) {
    auto g = plan.lag_correlate(xv, plan.cross_lag(h, xv));
    for (double& v : g) v *= 2.0;
    return g;
  };

  const std::size_t m = xv.size();
  std::vector<double> h = project_G(xv, std::vector<double>(m, 0.0));
  double f = value(h);
  std::vector<double> y = h;
  double t = 1.0;
  double lip = 1.0;
  LambdaEstimate out;
  std::vector<double> trial(m);
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    const auto g = grad(y);
    const double fy = value(y);
    std::vector<double> next;
    double fn = 0.0;
    for (int ls = 0; ls < 100; ++ls) {
      for (std::size_t i = 0; i < m; ++i) trial[i] = y[i] - g[i] / lip;
      next = project_G(xv, trial);
      fn = value(next);
      double lin = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = next[i] - y[i];
        lin += g[i] * d;
        sq += d * d;
      }
      if (fn <= fy + lin + 0.5 * lip * sq + 1e-15 * std::abs(fy)) break;
      lip *= 2.0;
    }
    out.iterations = it + 1;
    if (fn > f) {  // restart momentum
      y = h;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < m; ++i) y[i] = next[i] + ((t - 1.0) / t_next) * (next[i] - h[i]);
    t = t_next;
    const double change = std::abs(f - fn);
    h = std::move(next);
    f = fn;
    if (change <= cfg.tol * std::max(f, 1e-300) && it > 0) {
      out.converged = true;
      break;
    }
  }
  out.lambda_E = f;
  out.h = std::move(h);
  return out;
}

/// tau = (2 - 1/q) * sqrt(lambda_E / 4).
inline double convergence_radius(double lambda_E, double q) {
  require(q > 0.5 && q < 1.0, "q must lie in (0.5, 1)");
  require(lambda_E >= 0.0, "lambda_E must be non-negative");
  return (2.0 - 1.0 / q) * std::sqrt(lambda_E / 4.0);
}

struct ConvergenceCert {
  double lambda_E = 0.0;
  double q = 0.75;
  double tau = 0.0;
  Density x;
};

inline ConvergenceCert certify(const Density& x, double q = 0.75, const LambdaConfig& cfg = {}) {
  const double lambda = estimate_lambda_E(x, cfg).lambda_E;
  return {lambda, q, convergence_radius(lambda, q), x};
}

constexpr std::size_t kNullSpaceMaxCells = 64;

/// Dense check that S = [x^T B_0; ...; x^T B_{M-1}] has no null vector with
/// zero sum, which rules out a feasible z != x with S(z - x) = 0. Returns
/// nullopt ("not certified") above 64 cells.
inline std::optional<bool> null_space_certified(const Grid& grid, std::span<const double> x) {
  const std::size_t m = grid.size();
  require(x.size() == m, "null-space check: length mismatch");
  if (m > kNullSpaceMaxCells) return std::nullopt;
  if (m == 1) return true;
  Eigen::MatrixXd S(m, m);
  std::vector<double> e(m);
  for (std::size_t y = 0; y < m; ++y) {
    e.assign(m, 0.0);
    e[y] = 1.0;
    const auto row = dense::lag_correlate(grid.geometry(), x, e);  // B_y x, and B_y is symmetric
    for (std::size_t i = 0; i < m; ++i) S(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(i)) = row[i];
  }
  // basis of the zero-sum subspace: e_i - e_{i+1}
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m - 1));
  for (Eigen::Index i = 0; i + 1 < static_cast<Eigen::Index>(m); ++i) {
    U(i, i) = 1.0;
    U(i + 1, i) = -1.0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S * U);
  qr.setThreshold(1e-10);
  return qr.rank() == static_cast<Eigen::Index>(m - 1);
}

}  // namespace udgp
