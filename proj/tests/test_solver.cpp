#include <gtest/gtest.h>

#include <random>

#include "udgp/analysis.hpp"
#include "udgp/experiment.hpp"
#include "udgp/solver.hpp"
#include "udgp/spectral.hpp"

using namespace udgp;

namespace {

Density random_feasible(const Grid& grid, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> z(grid.size());
  for (double& v : z) v = u(rng);
  return Density(project_l1_box(z, n).s, n, grid);
}

DistDistribution random_distribution(const Grid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(grid.size());
  double s = 0.0;
  for (double& v : p) s += (v = u(rng));
  for (double& v : p) v /= s;
  return {p, grid};
}

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

TEST(Objective, ZeroAtTruth) {
  const Grid grid(5, 1.0, Geometry::line());
  const Density x({1, 0, 1, 0, 1}, 3, grid);
  const auto p = model_distribution(x);
  EXPECT_NEAR(objective(x, p), 0.0, 1e-30);
  double g2 = 0.0;
  for (double v : gradient(x, p)) g2 += v * v;
  EXPECT_LE(std::sqrt(g2), 1e-12);
}

TEST(Objective, FastEqualsDenseOnToy) {
  const Grid grid(5, 1.0, Geometry::line());
  const auto p = model_distribution(Density({1, 0, 1, 0, 1}, 3, grid));
  const Density u(std::vector<double>(5, 0.6), 3, grid);
  const double fast = objective(u, p);
  EXPECT_GT(fast, 0.0);
  EXPECT_NEAR(fast, dense::objective(u.values(), 3, p), 1e-12 * fast + 1e-18);
}

TEST(Gradient, CentralDifferences) {
  std::mt19937_64 rng(1);
  for (bool loop : {false, true}) {
    const Grid grid(64, 1.0, loop ? Geometry::loop(64.0) : Geometry::line());
    const auto z = random_feasible(grid, 6, rng);
    const auto p = random_distribution(grid, rng);
    const MatchingObjective f(p, 6);
    const auto g = f.gradient(f.evaluate(z.values()));
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    const double h = 1e-6;
    for (int k = 0; k < 20; ++k) {
      const std::size_t i = rng() % 64;
      auto zp = z.values(), zm = z.values();
      zp[i] += h;
      zm[i] -= h;
      const double fd = (f.evaluate(zp).value - f.evaluate(zm).value) / (2.0 * h);
      EXPECT_LE(std::abs(fd - g[i]), 1e-5 * std::max(std::abs(g[i]), 1e-3 * gmax)) << "i=" << i;
    }
  }
}

TEST(Gradient, FastEqualsDense) {
  std::mt19937_64 rng(2);
  for (bool loop : {false, true}) {
    for (std::size_t m : {5u, 33u, 64u}) {
      const Grid grid(m, 1.0, loop ? Geometry::loop(static_cast<double>(m)) : Geometry::line());
      const auto z = random_feasible(grid, 3, rng);
      const auto p = random_distribution(grid, rng);
      const auto fast = gradient(z, p);
      const auto ref = dense::gradient(z.values(), 3, p);
      double scale = 0.0, diff = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        scale = std::max(scale, std::abs(ref[i]));
        diff = std::max(diff, std::abs(fast[i] - ref[i]));
      }
      EXPECT_LE(diff, 1e-10 * scale);
      EXPECT_NEAR(objective(z, p), dense::objective(z.values(), 3, p), 1e-10 * dense::objective(z.values(), 3, p));
    }
  }
}

TEST(Solve, TruthIsFixedPoint) {
  const Grid grid(40, 1.0, Geometry::line());
  const auto x = Density::indicator({0, 3, 11, 25, 39}, grid);
  const auto p = model_distribution(x);
  const auto r = solve(p, 5, x, {});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.z.values(), x.values());
  for (double f : r.objective_trace) EXPECT_LE(f, 1e-30);
}

TEST(Solve, ToyTurnpike) {
  const Grid grid(5, 1.0, Geometry::line());
  const DistanceMultiset d({0, 0, 0, 2, 2, 4}, MultisetKind::TurnpikeAugmented, 3);
  const auto p = observed_distribution(d, {1e-6, grid});
  const auto z0 = spectral_init(p, 3).z0;
  const auto r = solve(p, 3, z0, {});
  EXPECT_TRUE(r.converged);
  const std::vector<double> want = {1, 0, 1, 0, 1};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(r.z.values()[i], want[i], 1e-6);
}

TEST(Solve, TraceMonotoneAndIteratesFeasible) {
  std::mt19937_64 rng(3);
  const Grid grid(120, 1.0, Geometry::line());
  const auto p = model_distribution(Density::indicator({0, 9, 30, 31, 77, 119}, grid));
  SolveConfig cfg;
  cfg.max_iterations = 300;
  bool feasible = true;
  const auto r = solve(MatchingObjective(p, 6), random_feasible(grid, 6, rng), cfg,
                       [&](std::size_t, std::span<const double> z) {
                         double s = 0.0;
                         for (double v : z) {
                           feasible &= v >= 0.0 && v <= 1.0;
                           s += v;
                         }
                         feasible &= std::abs(s - 6.0) <= 1e-8 * 6.0;
                       });
  EXPECT_TRUE(feasible);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
    EXPECT_LE(r.objective_trace[i], r.objective_trace[i - 1]);
}

TEST(Solve, LineSearchExhaustionIsNotConvergence) {
  const Grid grid(30, 1.0, Geometry::line());
  const auto p = model_distribution(Density::indicator({0, 4, 13, 29}, grid));
  SolveConfig cfg;
  cfg.max_linesearch = 1;
  cfg.eta0 = 1e12;
  const auto r = solve(p, 4, uniform_init(grid, 4), cfg);
  EXPECT_FALSE(r.converged);
}

// A noiseless global optimum is binary, so ||z||_2^2 = ||z||_1 = N.
TEST(Solve, NoiselessOptimaAreBinary) {
  auto spec = preset("n10-line");
  spec.xi_list = {0.0};
  int hits = 0;
  for (std::size_t run = 0; run < 10; ++run) {
    const auto inst = make_instance(spec, 0, run);
    const Grid grid = grid_for(spec, inst.distances);
    const auto x = Density::indicator(quantize_config(inst.truth, grid), grid);
    const auto p = model_distribution(x);
    const auto r = solve(p, spec.n, spectral_init(p, spec.n).z0, {});
    if (r.objective_trace.back() < 1e-12) {
      ++hits;
      EXPECT_LT(std::abs(sq_norm(r.z.values()) - static_cast<double>(spec.n)), 1e-6);
    }
  }
  EXPECT_GE(hits, 5);
}

// Starts inside tau contract towards x.
TEST(Solve, LocalLinearConvergenceInsideTau) {
  std::mt19937_64 rng(4);
  int tested = 0;
  for (int t = 0; t < 12; ++t) {
    const std::size_t m = 12 + rng() % 19, n = 2 + rng() % 4;
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(n);
    const Grid grid(m, 1.0, Geometry::line());
    const auto x = Density::indicator(idx, grid);
    const auto cert = certify(x, 0.75);
    ASSERT_GT(cert.lambda_E, 0.0);
    // a feasible start at distance just under tau
    std::vector<double> h(m);
    for (double& v : h) v = std::normal_distribution<double>(0.0, 1.0)(rng);
    std::vector<double> start(m);
    double scale = 0.5 * cert.tau;
    Density z0 = x;
    for (int shrink = 0; shrink < 60; ++shrink, scale *= 0.7) {
      const double hn = std::sqrt(sq_norm(h));
      for (std::size_t i = 0; i < m; ++i) start[i] = x.values()[i] + scale * h[i] / hn;
      z0 = Density(project_l1_box(start, n).s, n, grid);
      std::vector<double> d(m);
      for (std::size_t i = 0; i < m; ++i) d[i] = z0.values()[i] - x.values()[i];
      if (std::sqrt(sq_norm(d)) < cert.tau && std::sqrt(sq_norm(d)) > 0.0) break;
    }
    std::vector<double> err = {0.0};
    for (std::size_t i = 0; i < m; ++i) err[0] += std::pow(z0.values()[i] - x.values()[i], 2);
    err[0] = std::sqrt(err[0]);
    if (err[0] == 0.0 || err[0] >= cert.tau) continue;
    SolveConfig cfg;
    cfg.max_iterations = 2000;
    cfg.epsilon = 1e-14;
    const auto p = model_distribution(x);
    solve(MatchingObjective(p, n), z0, cfg, [&](std::size_t, std::span<const double> z) {
      double e = 0.0;
      for (std::size_t i = 0; i < m; ++i) e += (z[i] - x.values()[i]) * (z[i] - x.values()[i]);
      err.push_back(std::sqrt(e));
    });
    ++tested;
    std::size_t windows = 0;
    for (std::size_t k = 0; k + 10 < err.size(); k += 10) {
      if (err[k] < 1e-10) break;
      EXPECT_LT(err[k + 10] / err[k], 1.0) << "t=" << t << " k=" << k;
      ++windows;
    }
    EXPECT_LT(err.back(), 1e-6 * err.front() + 1e-12);
  }
  EXPECT_GE(tested, 8);
}
