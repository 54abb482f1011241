#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <numbers>
#include <random>

#include "udgp/experiment.hpp"
#include "udgp/spectral.hpp"

using namespace udgp;

namespace {

// Dense Xhat + Xhat^T = sum_y c_y (A_y + A_y^T).
Eigen::MatrixXd dense_symmetric(const Geometry& g, const std::vector<double>& c) {
  const auto m = static_cast<Eigen::Index>(c.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index y = 0; y < m; ++y)
    for (Eigen::Index i = 0; i < m; ++i) {
      Eigen::Index j = i + y;
      if (g.is_loop()) j %= m;
      else if (j >= m) continue;
      s(i, j) += c[static_cast<std::size_t>(y)];
      s(j, i) += c[static_cast<std::size_t>(y)];
    }
  return s;
}

DistDistribution exact_distribution(const std::vector<std::size_t>& cells, const Grid& grid) {
  return model_distribution(Density::indicator(cells, grid));
}

std::vector<std::size_t> random_cells(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(n);
  return idx;
}

}  // namespace

TEST(SpectralCoefficients, Examples) {
  const Grid line(5, 1.0, Geometry::line());
  std::vector<double> e0(5, 0.0);
  e0[0] = 1.0;
  auto beta = spectral_coefficients(DistDistribution(e0, line), 6.0);
  EXPECT_NEAR(beta[0], 6.0 / std::sqrt(5.0), 1e-12);
  for (std::size_t y = 1; y < 5; ++y) EXPECT_EQ(beta[y], 0.0);

  const auto p = exact_distribution({0, 2, 4}, line);
  beta = spectral_coefficients(p, 6.0);
  EXPECT_NEAR(beta[2], 2.0 / std::sqrt(3.0), 1e-12);

  const Grid loop(5, 1.0, Geometry::loop(5.0));
  const auto g = exact_distribution({0, 2, 4}, loop);
  beta = spectral_coefficients(g, 9.0);
  EXPECT_NEAR(beta[2], 2.0 / std::sqrt(5.0), 1e-12);
}

TEST(SpectralCoefficients, OrthonormalBasisReconstruction) {
  std::mt19937_64 rng(1);
  for (bool is_loop : {false, true}) {
    const std::size_t m = 9;
    const Grid grid(m, 1.0, is_loop ? Geometry::loop(9.0) : Geometry::line());
    const auto p = exact_distribution(random_cells(m, 4, rng), grid);
    const auto beta = spectral_coefficients(p, distance_count(grid.geometry(), 4));
    // Xhat = sum beta_y H_y with H_y = A_y / ||A_y||_F
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(9, 9);
    std::vector<Eigen::MatrixXd> H;
    for (std::size_t y = 0; y < m; ++y) {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(9, 9);
      for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + y;
        if (is_loop) j %= m;
        else if (j >= m) continue;
        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
      }
      H.push_back(A / A.norm());
      X += beta[y] * H.back();
    }
    for (std::size_t y = 0; y < m; ++y) {
      EXPECT_NEAR((X.array() * H[y].array()).sum(), beta[y], 1e-12);
      for (std::size_t k = 0; k < m; ++k)
        EXPECT_NEAR((H[k].array() * H[y].array()).sum(), k == y ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(SpectralInit, ImplicitMatvecMatchesDense) {
  std::mt19937_64 rng(2);
  for (bool is_loop : {false, true}) {
    const std::size_t m = 12;
    const Grid grid(m, 1.0, is_loop ? Geometry::loop(12.0) : Geometry::line());
    const auto p = exact_distribution(random_cells(m, 5, rng), grid);
    const auto c = detail::symmetric_estimate_weights(p, distance_count(grid.geometry(), 5));
    const Eigen::MatrixXd S = dense_symmetric(grid.geometry(), c);
    std::vector<double> v(m);
    for (double& x : v) x = std::uniform_real_distribution<double>(-1, 1)(rng);
    const auto fast = LagOperatorPlan(grid).lag_correlate(v, c);
    const Eigen::VectorXd ref = S * Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(fast[i], ref(static_cast<Eigen::Index>(i)), 1e-10);
  }
}

TEST(SpectralInit, PowerIterationMatchesDenseEigenvector) {
  std::mt19937_64 rng(3);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    const std::size_t m = 6 + rng() % 7, n = 2 + rng() % 3;
    const Grid grid(m, 1.0, Geometry::line());
    const auto p = exact_distribution(random_cells(m, n, rng), grid);
    const auto c = detail::symmetric_estimate_weights(p, distance_count(grid.geometry(), n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_symmetric(grid.geometry(), c));
    const auto& ev = es.eigenvalues();
    const auto k = static_cast<Eigen::Index>(m) - 1;
    if (ev(k) - ev(k - 1) < 1e-3 * std::abs(ev(k))) continue;  // degenerate top pair
    SpectralConfig cfg;
    cfg.max_power_iters = 100000;
    cfg.power_tol = 1e-13;
    const auto res = spectral_init(p, n, cfg);
    const Eigen::VectorXd top = es.eigenvectors().col(k);
    double cosine = 0.0;
    for (std::size_t i = 0; i < m; ++i) cosine += res.eigenvector[i] * top(static_cast<Eigen::Index>(i));
    EXPECT_GE(std::abs(cosine), 1.0 - 1e-6) << "t=" << t;
    EXPECT_NEAR(res.eigenvalue, ev(k), 1e-8 * std::max(1.0, std::abs(ev(k))));
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(SpectralInit, RayleighNondecreasing) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const Grid grid(200, 1.0, Geometry::line());
    const auto p = exact_distribution(random_cells(200, 8, rng), grid);
    const auto res = spectral_init(p, 8);
    for (std::size_t i = 1; i < res.rayleigh_trace.size(); ++i)
      EXPECT_GE(res.rayleigh_trace[i], res.rayleigh_trace[i - 1] - 1e-12 * std::abs(res.rayleigh_trace[i - 1]));
  }
}

TEST(SpectralInit, LoopTopModeIsConstant) {
  std::mt19937_64 rng(5);
  for (std::size_t m : {8u, 17u, 40u, 64u}) {
    const Grid grid(m, 1.0, Geometry::loop(static_cast<double>(m)));
    const auto p = exact_distribution(random_cells(m, 5, rng), grid);
    const auto c = detail::symmetric_estimate_weights(p, 25.0);
    // eigenvalues of the circulant: lambda_k = 2 sum_y c_y cos(2 pi k y / M)
    double best = -1e300;
    for (std::size_t k = 0; k < m; ++k) {
      double l = 0.0;
      for (std::size_t y = 0; y < m; ++y)
        l += 2.0 * c[y] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * y) / static_cast<double>(m));
      best = std::max(best, l);
    }
    const auto res = spectral_init(p, 5);
    EXPECT_NEAR(res.eigenvalue, best, 1e-9 * best);
    for (double v : res.eigenvector) EXPECT_NEAR(v, 1.0 / std::sqrt(static_cast<double>(m)), 1e-9);
  }
}

TEST(SpectralInit, BeatsUniformOverlap) {
  for (const char* name : {"n10-line", "n10-loop"}) {
    auto spec = preset(name);
    spec.xi_list = {0.0};
    int wins = 0;
    for (std::size_t run = 0; run < 50; ++run) {
      const auto inst = make_instance(spec, 0, run);
      const Grid grid = grid_for(spec, inst.distances);
      const auto p = observed_distribution(inst.distances.augmented(), {1e-6, grid});
      const auto cells = quantize_config(inst.truth, grid);
      const auto z0 = spectral_init(p, spec.n).z0;
      double overlap = 0.0;
      for (auto cidx : cells) overlap += z0.values()[cidx];
      // uniform density overlap is N * N / M; the line truth may come back mirrored
      double mirrored = 0.0;
      if (!grid.geometry().is_loop())
        for (auto cidx : cells) mirrored += z0.values()[grid.size() - 1 - cidx];
      const double flat = static_cast<double>(spec.n * spec.n) / static_cast<double>(grid.size());
      wins += std::max(overlap, mirrored) > flat;
    }
    EXPECT_EQ(wins, 50) << name;
  }
}

TEST(SpectralInit, DeterministicAndFeasible) {
  const Grid grid(300, 1.0, Geometry::line());
  const auto p = exact_distribution({0, 17, 90, 151, 299}, grid);
  const auto a = spectral_init(p, 5);
  const auto b = spectral_init(p, 5);
  EXPECT_EQ(a.z0.values(), b.z0.values());
  double s = 0.0;
  for (double v : a.z0.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    s += v;
  }
  EXPECT_NEAR(s, 5.0, 1e-8 * 5.0);
}

TEST(OtherInits, UniformAndRandom) {
  const Grid grid(50, 1.0, Geometry::line());
  const auto flat = uniform_init(grid, 5);
  for (double v : flat.values()) EXPECT_NEAR(v, 0.1, 1e-12);
  const auto r1 = random_init(grid, 5, 9);
  EXPECT_EQ(r1.values(), random_init(grid, 5, 9).values());
  EXPECT_NE(r1.values(), random_init(grid, 5, 10).values());
  EXPECT_EQ(parse_init_scheme("random"), InitScheme::Random);
  EXPECT_THROW(parse_init_scheme("bogus"), Error);
}
