#pragma once

// Initial densities for the solver: spectral (leading eigenvector of the
// symmetrised least-squares estimate of x x^T), random and uniform.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "udgp/distribution.hpp"
#include "udgp/projection.hpp"

namespace udgp {

struct SpectralConfig {
  std::size_t max_power_iters = 200;
  double power_tol = 1e-8;
  std::uint64_t seed = 0;

  void validate() const {
    require(max_power_iters >= 1, "max_power_iters must be positive");
    require(power_tol > 0.0, "power_tol must be positive");
  }
};

struct SpectralResult {
  Density z0;
  std::vector<double> eigenvector;      // unit norm, entry sum >= 0
  double eigenvalue = 0.0;              // Rayleigh quotient on Xhat + Xhat^T
  std::vector<double> rayleigh_trace;   // one value per power step
  std::size_t iterations = 0;
  bool converged = false;
  bool perturbed = false;               // the seeded restart was used
  bool anchored = false;                // z0 built from the anchored row (loop)
};

/// ||A_y||_F on a line (sqrt(M - y)) and ||R_y||_F on a loop (sqrt(M)).
inline double lag_frobenius(const Geometry& g, std::size_t m, std::size_t y) {
  return std::sqrt(static_cast<double>(g.is_loop() ? m : m - y));
}

/// beta_y = p(y) * count / ||A_y||_F, with count = K (line) or Z (loop).
inline std::vector<double> spectral_coefficients(const DistDistribution& p, double count) {
  const Grid& grid = p.grid();
  std::vector<double> beta(grid.size());
  for (std::size_t y = 0; y < beta.size(); ++y) beta[y] = p[y] * count / lag_frobenius(grid.geometry(), grid.size(), y);
  return beta;
}

namespace detail {

// Xhat + Xhat^T = sum_y c_y B_y with c_y = beta_y / ||A_y||_F.
inline std::vector<double> symmetric_estimate_weights(const DistDistribution& p, double count) {
  auto c = spectral_coefficients(p, count);
  const Grid& grid = p.grid();
  for (std::size_t y = 0; y < c.size(); ++y) c[y] /= lag_frobenius(grid.geometry(), grid.size(), y);
  return c;
}

struct PowerRun {
  std::vector<double> v;
  double lambda = 0.0;
  std::vector<double> trace;
  std::size_t iterations = 0;
  bool converged = false;
};

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Power iteration on S + mu I. The Gershgorin shift mu makes the operator
// positive semidefinite so the iteration targets the algebraically largest
// eigenvalue of S and the Rayleigh quotient cannot decrease.
inline PowerRun power_iteration(const LagOperatorPlan& plan, const std::vector<double>& c, std::vector<double> v,
                                const SpectralConfig& cfg) {
  double off = 0.0;
  for (std::size_t y = 1; y < c.size(); ++y) off += std::abs(c[y]);
  const double mu = std::max(0.0, 2.0 * off - 2.0 * c[0]);

  PowerRun run;
  double nv = norm2(v);
  for (double& x : v) x /= nv;
  for (std::size_t it = 0; it < cfg.max_power_iters; ++it) {
    auto w = plan.lag_correlate(v, c);
    double rq = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) rq += v[i] * w[i];
    run.trace.push_back(rq);
    run.lambda = rq;
    for (std::size_t i = 0; i < v.size(); ++i) w[i] += mu * v[i];
    const double nw = norm2(w);
    run.iterations = it + 1;
    if (nw == 0.0) break;
    double diff = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      w[i] /= nw;
      diff += (w[i] - v[i]) * (w[i] - v[i]);
    }
    v = std::move(w);
    if (std::sqrt(diff) < cfg.power_tol) {
      run.converged = true;
      break;
    }
  }
  run.v = std::move(v);
  return run;
}

}  // namespace detail

/// Spectral initializer: z0 = P_S(sqrt(N) e_max) where e_max is the leading
/// eigenvector of Xhat + Xhat^T found by power iteration from the all-ones
/// vector. If that does not settle, one restart from a seeded 1e-6
/// perturbation of the start vector is tried.
///
/// On a loop Xhat + Xhat^T is circulant, so e_max is the constant vector and
/// P_S(sqrt(N) e_max) is the flat density, a fixed point of the solver. Since
/// a loop solution is only defined up to rotation, a point may be pinned to
/// cell 0; z0 then comes from row 0 of Xhat + Xhat^T, i.e. one power step
/// from e_0. The eigen data in the result still describe the full matrix.
inline SpectralResult spectral_init(const DistDistribution& p, std::size_t n, const SpectralConfig& cfg,
                                    const LagOperatorPlan& plan) {
  cfg.validate();
  const Grid& grid = p.grid();
  require(n >= 1 && n <= grid.size(), "spectral init needs 1 <= N <= M");
  const auto c = detail::symmetric_estimate_weights(p, distance_count(grid.geometry(), n));

  std::vector<double> start(grid.size(), 1.0);
  auto run = detail::power_iteration(plan, c, start, cfg);
  bool perturbed = false;
  if (!run.converged) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 1e-6);
    for (double& x : start) x += noise(rng);
    auto retry = detail::power_iteration(plan, c, start, cfg);
    if (retry.converged) {
      run = std::move(retry);
      perturbed = true;
    }
  }

  double sum = 0.0;
  for (double x : run.v) sum += x;
  if (sum < 0.0)
    for (double& x : run.v) x = -x;

  const bool anchored = grid.geometry().is_loop();
  std::vector<double> scaled(run.v);
  if (anchored) {
    std::vector<double> e0(grid.size(), 0.0);
    e0[0] = 1.0;
    scaled = plan.lag_correlate(e0, c);
    const double nr = detail::norm2(scaled);
    if (nr > 0.0)
      for (double& x : scaled) x /= nr;
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  for (double& x : scaled) x *= root_n;

  SpectralResult res{Density(project_l1_box(scaled, n).s, n, grid), std::move(run.v), run.lambda, std::move(run.trace),
                     run.iterations, run.converged, perturbed, anchored};
  return res;
}

inline SpectralResult spectral_init(const DistDistribution& p, std::size_t n, const SpectralConfig& cfg = {}) {
  return spectral_init(p, n, cfg, LagOperatorPlan(p.grid()));
}

/// Entries drawn from N(0, 0.01), i.e. standard deviation 0.1, then projected.
inline Density random_init(const Grid& grid, std::size_t n, std::uint64_t seed) {
  require(n >= 1 && n <= grid.size(), "init needs 1 <= N <= M");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.1);
  std::vector<double> z(grid.size());
  for (double& x : z) x = dist(rng);
  return Density(project_l1_box(z, n).s, n, grid);
}

/// All-ones start; its projection is the flat density N/M.
inline Density uniform_init(const Grid& grid, std::size_t n) {
  require(n >= 1 && n <= grid.size(), "init needs 1 <= N <= M");
  std::vector<double> z(grid.size(), 1.0);
  return Density(project_l1_box(z, n).s, n, grid);
}

enum class InitScheme { Spectral, Random, Uniform };

inline std::string to_string(InitScheme s) {
  switch (s) {
    case InitScheme::Spectral: return "spectral";
    case InitScheme::Random: return "random";
    case InitScheme::Uniform: return "uniform";
  }
  return "spectral";
}

inline InitScheme parse_init_scheme(const std::string& s) {
  if (s == "spectral") return InitScheme::Spectral;
  if (s == "random") return InitScheme::Random;
  if (s == "uniform") return InitScheme::Uniform;
  throw Error(ErrorCode::InvalidArgument, "unknown init scheme '" + s + "'");
}

inline Density initial_density(InitScheme scheme, const DistDistribution& p, std::size_t n, std::uint64_t seed,
                               const LagOperatorPlan& plan) {
  switch (scheme) {
    case InitScheme::Random: return random_init(p.grid(), n, seed);
    case InitScheme::Uniform: return uniform_init(p.grid(), n);
    case InitScheme::Spectral: break;
  }
  SpectralConfig cfg;
  cfg.seed = seed;
  return spectral_init(p, n, cfg, plan).z0;
}

}  // namespace udgp
