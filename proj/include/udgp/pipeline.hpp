#pragma once

// Measured distances -> smoothed distribution -> init -> solve -> extract,
// and the choice of the smoothing width by earth mover's distance.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "udgp/distribution.hpp"
#include "udgp/evaluate.hpp"
#include "udgp/extract.hpp"
#include "udgp/parallel.hpp"
#include "udgp/solver.hpp"
#include "udgp/spectral.hpp"

namespace udgp {

struct PipelineConfig {
  InitScheme init = InitScheme::Spectral;
  SolveConfig solve;
  SpectralConfig spectral;
  double d_min = 0.0;
  std::uint64_t seed = 0;
};

struct PipelineRun {
  double sigma = 0.0;
  std::optional<SolveResult> solve;
  std::optional<Extraction> extraction;
  double emd = std::numeric_limits<double>::infinity();
  bool ok = false;
  std::string error;
};

struct SigmaSelection {
  std::size_t best = 0;
  double sigma_ref = 0.0;
  std::vector<PipelineRun> runs;  // one per sigma, in grid order

  const PipelineRun& chosen() const { return runs[best]; }
};

/// 8 log-spaced widths from min(d_min / 50, delta_l / 5) to 0.9 d_min. The
/// lower end stays below a grid cell so exact (integer) data can be matched
/// almost as a histogram.
inline std::vector<double> default_sigma_grid(double d_min, double delta_l, std::size_t count = 8) {
  require(d_min > 0.0, "d_min must be positive");
  require(delta_l > 0.0, "grid step must be positive");
  require(count >= 1, "sigma grid needs at least one value");
  const double lo = std::min(d_min / 50.0, delta_l / 5.0), hi = 0.9 * d_min;
  if (count == 1) return {lo};
  std::vector<double> s(count);
  for (std::size_t i = 0; i < count; ++i)
    s[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1));
  return s;
}

inline Geometry geometry_of(const DistanceMultiset& dm, const Grid& grid) {
  require(is_beltway(dm.kind()) == grid.geometry().is_loop(), "multiset kind does not match grid geometry");
  return grid.geometry();
}

/// One smoothing width through init, solve and extraction.
inline PipelineRun run_pipeline(const DistanceMultiset& raw, const Grid& grid, double sigma, const PipelineConfig& cfg,
                                const LagOperatorPlan& plan) {
  PipelineRun run;
  run.sigma = sigma;
  const std::size_t n = raw.points();
  const auto p = observed_distribution(raw.augmented(), {sigma, grid});
  SpectralConfig sc = cfg.spectral;
  sc.seed = cfg.seed;
  Density z0 = cfg.init == InitScheme::Spectral ? spectral_init(p, n, sc, plan).z0
                                                 : initial_density(cfg.init, p, n, cfg.seed, plan);
  run.solve = solve(MatchingObjective(p, n, plan), z0, cfg.solve);
  run.extraction = extract_points(run.solve->z, cfg.d_min, n, cfg.seed);
  run.ok = !run.extraction->deficient;
  if (!run.ok) run.error = "extraction returned fewer than N clusters";
  return run;
}

/// Runs the pipeline for every width (in parallel) and keeps the one whose
/// reconstructed configuration has the distance distribution closest, in
/// EMD, to the measured distances binned with the smallest width. Ties go
/// to the smaller width.
inline SigmaSelection select_sigma(const DistanceMultiset& raw, const Grid& grid, const std::vector<double>& sigma_grid,
                                   const PipelineConfig& cfg, std::size_t jobs = 1) {
  require(!is_augmented(raw.kind()), "select_sigma expects a raw multiset");
  require(!sigma_grid.empty(), "sigma grid is empty");
  require(cfg.d_min > 0.0, "d_min must be positive");
  for (double s : sigma_grid) require(s > 0.0 && s < cfg.d_min, "sigma values must lie in (0, d_min)");
  const Geometry geometry = geometry_of(raw, grid);

  SigmaSelection sel;
  sel.sigma_ref = *std::min_element(sigma_grid.begin(), sigma_grid.end());
  const auto reference = observed_distribution(raw.augmented(), {sel.sigma_ref, grid});
  const LagOperatorPlan plan(grid);

  sel.runs = parallel_map<PipelineRun>(sigma_grid.size(), jobs, [&](std::size_t i) {
    PipelineConfig c = cfg;
    c.seed = derive_seed(cfg.seed, i);
    PipelineRun run;
    try {
      run = run_pipeline(raw, grid, sigma_grid[i], c, plan);
      if (run.ok) {
        const PointConfig est(run.extraction->locations, geometry);
        const auto q = observed_distribution(pairwise_distances(est).augmented(), {sel.sigma_ref, grid});
        run.emd = emd_1d(reference, q);
      }
    } catch (const Error& e) {
      run.sigma = sigma_grid[i];
      run.ok = false;
      run.error = e.what();
    }
    return run;
  });

  bool any = false;
  for (std::size_t i = 0; i < sel.runs.size(); ++i) {
    const auto& r = sel.runs[i];
    if (!r.ok) continue;
    const auto& b = sel.runs[sel.best];
    if (!any || r.emd < b.emd || (r.emd == b.emd && r.sigma < b.sigma)) sel.best = i;
    any = true;
  }
  if (!any) {
    std::string msg = "every sigma candidate failed:";
    for (const auto& r : sel.runs) msg += " [sigma=" + std::to_string(r.sigma) + ": " + r.error + "]";
    throw Error(ErrorCode::Data, msg);
  }
  return sel;
}

}  // namespace udgp
