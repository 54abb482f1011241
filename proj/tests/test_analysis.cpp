#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "udgp/analysis.hpp"

using namespace udgp;

namespace {

Density random_binary(std::size_t m, std::size_t n, bool loop, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(n);
  return Density::indicator(idx, Grid(m, 1.0, loop ? Geometry::loop(static_cast<double>(m)) : Geometry::line()));
}

}  // namespace

TEST(QuadraticE, HandValueAndDenseMatrix) {
  const auto x = Density::indicator({0}, Grid(2, 1.0, Geometry::line()));
  const std::vector<double> h = {-0.5, 0.5};
  EXPECT_NEAR(quadratic_E(x, h), 1.25, 1e-12);
  std::mt19937_64 rng(31);
  for (bool loop : {false, true}) {
    const auto xr = random_binary(11, 4, loop, rng);
    const auto E = dense::matrix_E(xr.grid().geometry(), xr.values());
    std::vector<double> v(11);
    for (double& a : v) a = std::uniform_real_distribution<double>(-1, 1)(rng);
    double ref = 0.0;
    for (std::size_t i = 0; i < 11; ++i)
      for (std::size_t j = 0; j < 11; ++j) ref += v[i] * E[i][j] * v[j];
    EXPECT_NEAR(quadratic_E(xr, v), ref, 1e-10 * ref);
  }
}

TEST(LambdaE, TwoCellExample) {
  const auto x = Density::indicator({0}, Grid(2, 1.0, Geometry::line()));
  const auto est = estimate_lambda_E(x);
  EXPECT_NEAR(est.lambda_E, 1.25, 1e-9);
  EXPECT_NEAR(convergence_radius(1.25, 0.75), 0.372678, 1e-6);
}

TEST(LambdaE, ProjectionOntoG) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 200; ++t) {
    const auto x = random_binary(3 + rng() % 20, 1, false, rng);
    const auto& xv = x.values();
    std::vector<double> xs(xv.begin(), xv.end());
    const std::size_t n = 1 + rng() % (xs.size() - 1);
    std::fill(xs.begin(), xs.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) xs[k] = 1.0;
    std::shuffle(xs.begin(), xs.end(), rng);
    std::vector<double> v(xs.size());
    for (double& a : v) a = std::normal_distribution<double>(0.0, 1.0)(rng);
    const auto h = project_G(xs, v);
    EXPECT_TRUE(in_G(xs, h));
    // variational inequality against random points of G
    for (int k = 0; k < 20; ++k) {
      std::vector<double> w(xs.size());
      for (double& a : w) a = std::normal_distribution<double>(0.0, 3.0)(rng);
      const auto g = project_G(xs, w);
      double ip = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) ip += (v[i] - h[i]) * (g[i] - h[i]);
      EXPECT_LE(ip, 1e-9);
    }
  }
}

TEST(LambdaE, PositiveAndBelowSampledPoints) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 40; ++t) {
    const std::size_t m = 3 + rng() % 10;
    const std::size_t n = 1 + rng() % (m - 1);
    const auto x = random_binary(m, n, t % 2 == 1, rng);
    const auto est = estimate_lambda_E(x);
    EXPECT_TRUE(in_G(x.values(), est.h));
    EXPECT_NEAR(quadratic_E(x, est.h), est.lambda_E, 1e-12 * std::max(1.0, est.lambda_E));
    if (t % 2 == 0) {
      EXPECT_GT(est.lambda_E, 0.0);
    }
    for (int k = 0; k < 500; ++k) {
      std::vector<double> v(m);
      for (double& a : v) a = std::normal_distribution<double>(0.0, 1.0)(rng);
      const auto g = project_G(x.values(), v);
      EXPECT_LE(est.lambda_E, quadratic_E(x, g) + 1e-9);
    }
    // first-order optimality: a projected gradient step returns to h
    const auto E = dense::matrix_E(x.grid().geometry(), x.values());
    std::vector<double> step(m);
    for (std::size_t i = 0; i < m; ++i) {
      double gi = 0.0;
      for (std::size_t j = 0; j < m; ++j) gi += 2.0 * E[i][j] * est.h[j];
      step[i] = est.h[i] - 1e-3 * gi;
    }
    const auto back = project_G(x.values(), step);
    double moved = 0.0;
    for (std::size_t i = 0; i < m; ++i) moved = std::max(moved, std::abs(back[i] - est.h[i]));
    EXPECT_LE(moved, 1e-5) << "t=" << t;
  }
}

TEST(ConvergenceRadius, Limits) {
  EXPECT_NEAR(convergence_radius(4.0, 0.999999), 1.0, 1e-5);
  EXPECT_NEAR(convergence_radius(4.0, 0.500001), 0.0, 1e-5);
  EXPECT_THROW(convergence_radius(1.0, 0.5), Error);
  EXPECT_THROW(convergence_radius(1.0, 1.0), Error);
}

TEST(NullSpace, MatchesExplicitRank) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 40; ++t) {
    const std::size_t m = 3 + rng() % 14;
    const bool loop = t % 2 == 1;
    const auto x = random_binary(m, 1 + rng() % (m - 1), loop, rng);
    // rows x^T (A_y + A_y^T) built from explicit shift matrices
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t y = 0; y < m; ++y)
      for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + y;
        if (loop) j %= m;
        else if (j >= m) continue;
        S(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(j)) += x.values()[i];
        S(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(i)) += x.values()[j];
      }
    // restrict to zero-sum vectors: S (I - 11^T/M)
    const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) -
                              Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m),
                                                        1.0 / static_cast<double>(m));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S * P);
    const auto& sv = svd.singularValues();
    const bool full = sv(static_cast<Eigen::Index>(m) - 2) > 1e-8 * sv(0);
    const auto got = null_space_certified(x.grid(), x.values());
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(*got, full) << "t=" << t;
  }
  const auto big = Density::indicator({0, 5}, Grid(65, 1.0, Geometry::line()));
  EXPECT_FALSE(null_space_certified(big.grid(), big.values()).has_value());
}
