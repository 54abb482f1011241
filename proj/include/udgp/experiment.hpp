#pragma once

// Simulation protocols and the benchmark harness comparing the gradient
// pipeline with backtracking.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "udgp/baseline.hpp"
#include "udgp/evaluate.hpp"
#include "udgp/parallel.hpp"
#include "udgp/pipeline.hpp"

namespace udgp {

struct ExperimentSpec {
  GeometryKind geometry = GeometryKind::Line;
  std::size_t n = 10;
  double d_min = 1e-2;
  double d_max = 1.0;
  double delta_l = 1e-3;
  std::vector<double> xi_list = {0.0};
  std::size_t num_runs = 100;
  std::uint64_t seed = 0;
  InitScheme init_scheme = InitScheme::Spectral;
  std::vector<double> sigma_grid;  // empty: default grid for d_min
  SolveConfig solve;
  std::optional<double> backtrack_delta_d;  // default 5 * d_min
  std::uint64_t backtrack_budget = 10'000'000;

  double loop_length() const { return d_min + d_max; }

  Geometry make_geometry() const {
    return geometry == GeometryKind::Loop ? Geometry::loop(loop_length()) : Geometry::line();
  }

  std::vector<double> sigmas() const { return sigma_grid.empty() ? default_sigma_grid(d_min, delta_l) : sigma_grid; }

  double delta_d() const { return backtrack_delta_d.value_or(5.0 * d_min); }

  void validate() const {
    require(n >= 2, "N must be at least 2");
    require(d_min > 0.0 && d_min < d_max, "need 0 < d_min < d_max");
    require(delta_l > 0.0 && delta_l <= d_min, "grid step must not exceed d_min");
    require(num_runs >= 1, "num_runs must be positive");
    require(!xi_list.empty(), "xi list is empty");
    for (double xi : xi_list) require(xi >= 0.0 && xi < d_min, "noise levels must lie in [0, d_min)");
    for (double s : sigmas()) require(s > 0.0 && s < d_min, "sigma values must lie in (0, d_min)");
  }
};

/// Parameter tables of the four standard protocols.
inline ExperimentSpec preset(const std::string& name) {
  ExperimentSpec s;
  if (name == "n10-line" || name == "n10-loop") {
    s.n = 10;
    s.d_min = 1e-2;
    s.delta_l = 1e-3;
    s.xi_list = {0.0, 1e-3, 3e-3, 5e-3, 7e-3, 9e-3};
  } else if (name == "n100-line" || name == "n100-loop") {
    s.n = 100;
    s.d_min = 1e-4;
    s.delta_l = 1e-5;
    s.xi_list = {0.0, 1e-5, 3e-5, 5e-5, 7e-5, 9e-5};
    s.solve.max_iterations = 300;  // the objective plateaus well before this at M = 1e5
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
  }
  s.d_max = 1.0;
  s.num_runs = 100;
  s.geometry = name.ends_with("loop") ? GeometryKind::Loop : GeometryKind::Line;
  return s;
}

inline Grid make_grid(const ExperimentSpec& spec) {
  return spec.geometry == GeometryKind::Loop ? Grid::loop_for(spec.loop_length(), spec.delta_l)
                                             : Grid::line_for(spec.d_max, spec.delta_l);
}

constexpr std::size_t kMaxRejections = 1'000'000;

/// Uniform points with separation >= d_min. Line: the ends sit at 0 and
/// d_max and the other N - 2 points are uniform in between. Loop (length
/// d_min + d_max): one point at 0, the rest uniform on the loop, separation
/// measured along the shorter arc, so no clockwise distance exceeds d_max.
template <class Rng>
PointConfig sample_config(const ExperimentSpec& spec, Rng& rng) {
  const Geometry g = spec.make_geometry();
  const double span = g.is_loop() ? g.loop_length() : spec.d_max;
  std::uniform_real_distribution<double> unif(0.0, span);
  std::vector<double> u(spec.n);
  for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
    u[0] = 0.0;
    std::size_t k = 1;
    if (!g.is_loop()) u[k++] = spec.d_max;
    for (; k < spec.n; ++k) u[k] = unif(rng);
    std::vector<double> s = u;
    std::sort(s.begin(), s.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < s.size(); ++i) gap = std::min(gap, s[i] - s[i - 1]);
    if (g.is_loop()) gap = std::min(gap, s.front() + g.loop_length() - s.back());
    if (gap >= spec.d_min) return PointConfig(std::move(s), g);
  }
  throw Error(ErrorCode::Budget, "rejection sampling failed after 1e6 attempts");
}

struct Instance {
  std::size_t xi_index = 0;
  double xi = 0.0;
  std::size_t run = 0;
  PointConfig truth;
  DistanceMultiset distances;  // raw, noisy
};

/// The truth of run r is shared by every noise level; noise is drawn per
/// (noise level, run).
inline Instance make_instance(const ExperimentSpec& spec, std::size_t xi_index, std::size_t run) {
  std::mt19937_64 truth_rng(derive_seed(spec.seed, run));
  PointConfig truth = sample_config(spec, truth_rng);
  std::mt19937_64 noise_rng(derive_seed(derive_seed(spec.seed, 0x5eedULL + xi_index), run));
  const double xi = spec.xi_list[xi_index];
  auto d = add_noise(pairwise_distances(truth), xi, noise_rng);
  return {xi_index, xi, run, std::move(truth), std::move(d)};
}

/// Grid for a measured multiset: line grids grow to cover the largest
/// measured distance; loop grids are fixed by the loop length.
inline Grid grid_for(const ExperimentSpec& spec, const DistanceMultiset& d) {
  if (spec.geometry == GeometryKind::Loop) return make_grid(spec);
  return Grid::line_for(std::max(spec.d_max, d.max()), spec.delta_l);
}

enum class Method { Pgd, PgdSpectral, PgdRandom, PgdUniform, Backtrack, Exhaustive };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Pgd: return "pgd";
    case Method::PgdSpectral: return "pgd-spectral";
    case Method::PgdRandom: return "pgd-random";
    case Method::PgdUniform: return "pgd-uniform";
    case Method::Backtrack: return "backtrack";
    case Method::Exhaustive: return "exhaustive";
  }
  return "pgd";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::Pgd, Method::PgdSpectral, Method::PgdRandom, Method::PgdUniform, Method::Backtrack,
                   Method::Exhaustive})
    if (to_string(m) == s) return m;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + s + "'");
}

struct BenchRecord {
  Method method = Method::Pgd;
  std::size_t xi_index = 0;
  double xi = 0.0;
  std::size_t run = 0;
  std::size_t matched = 0;
  bool failed = false;
  double runtime_ms = 0.0;
  std::optional<double> sigma;  // chosen width (gradient methods)
};

inline std::optional<InitScheme> init_of(Method m, InitScheme fallback) {
  switch (m) {
    case Method::Pgd: return fallback;
    case Method::PgdSpectral: return InitScheme::Spectral;
    case Method::PgdRandom: return InitScheme::Random;
    case Method::PgdUniform: return InitScheme::Uniform;
    default: return std::nullopt;
  }
}

/// Solves one instance with one method and scores it against the truth.
inline BenchRecord run_method(const ExperimentSpec& spec, const Instance& inst, Method method) {
  BenchRecord rec{method, inst.xi_index, inst.xi, inst.run, 0, false, 0.0, std::nullopt};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (auto init = init_of(method, spec.init_scheme)) {
      PipelineConfig cfg;
      cfg.init = *init;
      cfg.solve = spec.solve;
      cfg.d_min = spec.d_min;
      cfg.seed = derive_seed(spec.seed, 1000003ULL * inst.xi_index + inst.run);
      const Grid grid = grid_for(spec, inst.distances);
      const auto sel = select_sigma(inst.distances, grid, spec.sigmas(), cfg, 1);
      const PointConfig est(sel.chosen().extraction->locations, spec.make_geometry());
      rec.matched = score_recovery(inst.truth, est, spec.d_min).matched;
      rec.sigma = sel.chosen().sigma;
    } else if (method == Method::Backtrack) {
      require(spec.geometry == GeometryKind::Line, "backtracking is only defined on a line");
      BacktrackConfig bc;
      bc.delta_d = spec.delta_d();
      bc.node_budget = spec.backtrack_budget;
      const auto res = backtrack_turnpike(inst.distances, bc);
      if (res.solutions.empty()) rec.failed = true;
      else rec.matched = score_recovery(inst.truth, res.solutions.front(), spec.d_min).matched;
    } else {
      require(spec.geometry == GeometryKind::Line, "exhaustive search is only defined on a line");
      const auto ranked = exhaustive_turnpike(inst.distances, inst.distances.max(), spec.backtrack_budget);
      if (ranked.empty()) rec.failed = true;
      else rec.matched = score_recovery(inst.truth, ranked.front().config, spec.d_min).matched;
    }
  } catch (const Error&) {
    rec.failed = true;
    rec.matched = 0;
  }
  rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

/// Every (method, noise level, run) combination; records come back ordered
/// by method, then noise level, then run.
inline std::vector<BenchRecord> run_bench(const ExperimentSpec& spec, const std::vector<Method>& methods,
                                          std::size_t jobs) {
  spec.validate();
  const std::size_t nx = spec.xi_list.size(), nr = spec.num_runs;
  const std::size_t per_method = nx * nr;
  return parallel_map<BenchRecord>(methods.size() * per_method, jobs, [&](std::size_t t) {
    const Method m = methods[t / per_method];
    const std::size_t rest = t % per_method;
    const Instance inst = make_instance(spec, rest / nr, rest % nr);
    return run_method(spec, inst, m);
  });
}

struct BenchSummary {
  Method method;
  std::size_t xi_index;
  double xi;
  double mean_matched;
  double full_fraction;  // share of runs with every point recovered
  std::size_t failures;
};

inline std::vector<BenchSummary> summarize(const ExperimentSpec& spec, const std::vector<BenchRecord>& recs) {
  std::vector<BenchSummary> out;
  for (std::size_t i = 0; i < recs.size();) {
    std::size_t j = i;
    double sum = 0.0;
    std::size_t full = 0, fail = 0;
    while (j < recs.size() && recs[j].method == recs[i].method && recs[j].xi_index == recs[i].xi_index) {
      sum += static_cast<double>(recs[j].matched);
      full += recs[j].matched == spec.n;
      fail += recs[j].failed;
      ++j;
    }
    const double cnt = static_cast<double>(j - i);
    out.push_back({recs[i].method, recs[i].xi_index, recs[i].xi, sum / cnt, static_cast<double>(full) / cnt, fail});
    i = j;
  }
  return out;
}

}  // namespace udgp
