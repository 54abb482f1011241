#pragma once

// Distance-distribution matching objective, its gradient, and projected
// gradient descent with an adaptive step.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "udgp/distribution.hpp"
#include "udgp/lag_operator.hpp"
#include "udgp/projection.hpp"

namespace udgp {

struct SolveConfig {
  double eta0 = 1.0;
  double beta = 0.5;
  double epsilon = 1e-9;
  std::size_t max_iterations = 10000;
  std::size_t max_linesearch = 60;

  void validate() const {
    require(eta0 > 0.0, "eta0 must be positive");
    require(beta > 0.0 && beta < 1.0, "beta must lie in (0,1)");
    require(epsilon > 0.0, "epsilon must be positive");
    require(max_iterations >= 1 && max_linesearch >= 1, "iteration caps must be positive");
  }
};

struct SolveResult {
  Density z;
  std::vector<double> objective_trace;  // f(z_0), then f after each accepted step
  std::size_t iterations = 0;
  bool converged = false;
  double final_eta = 0.0;
};

/// f(z) = (1/M) sum_y (a_y / K - p_y)^2 bound to one observed distribution.
class MatchingObjective {
 public:
  struct Evaluation {
    double value = 0.0;
    std::vector<double> residual;  // a_y - K p_y
    LagOperatorPlan::Spectrum spectrum;
  };

  MatchingObjective(const DistDistribution& p, std::size_t n)
      : MatchingObjective(p, n, LagOperatorPlan(p.grid())) {}

  MatchingObjective(const DistDistribution& p, std::size_t n, LagOperatorPlan plan)
      : target_(p.values()),
        grid_(p.grid()),
        plan_(std::move(plan)),
        n_(n),
        k_(distance_count(p.grid().geometry(), n)) {
    require(plan_.size() == grid_.size() && plan_.geometry() == grid_.geometry(), "plan does not match grid");
    require(n_ >= 1 && n_ <= grid_.size(), "objective needs 1 <= N <= M");
  }

  Evaluation evaluate(std::span<const double> z) const {
    Evaluation ev;
    ev.spectrum = plan_.transform(z);
    ev.residual = plan_.autocorrelation(ev.spectrum);
    double sum = 0.0;
    for (std::size_t y = 0; y < ev.residual.size(); ++y) {
      ev.residual[y] -= k_ * target_[y];
      sum += ev.residual[y] * ev.residual[y];
    }
    ev.value = sum / (static_cast<double>(grid_.size()) * k_ * k_);
    return ev;
  }

  /// (2 / (M K^2)) sum_y r_y B_y z, reusing the transform of z.
  std::vector<double> gradient(const Evaluation& ev) const {
    std::vector<double> g = plan_.lag_correlate(ev.spectrum, ev.residual);
    const double scale = 2.0 / (static_cast<double>(grid_.size()) * k_ * k_);
    for (double& v : g) v *= scale;
    return g;
  }

  const Grid& grid() const { return grid_; }
  std::size_t points() const { return n_; }
  double count() const { return k_; }
  const LagOperatorPlan& plan() const { return plan_; }

 private:
  std::vector<double> target_;
  Grid grid_;
  LagOperatorPlan plan_;
  std::size_t n_;
  double k_;
};

inline double objective(const Density& z, const DistDistribution& p) {
  require(z.grid() == p.grid(), "density and distribution grids differ");
  return MatchingObjective(p, z.points()).evaluate(z.values()).value;
}

inline std::vector<double> gradient(const Density& z, const DistDistribution& p) {
  require(z.grid() == p.grid(), "density and distribution grids differ");
  const MatchingObjective f(p, z.points());
  return f.gradient(f.evaluate(z.values()));
}

namespace dense {

/// O(M^2) objective straight from the lag sums.
inline double objective(std::span<const double> z, std::size_t n, const DistDistribution& p) {
  const Geometry& g = p.grid().geometry();
  const double k = distance_count(g, n);
  const auto a = autocorrelation(g, z);
  double sum = 0.0;
  for (std::size_t y = 0; y < a.size(); ++y) {
    const double d = a[y] / k - p[y];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

/// Gradient assembled from explicit B_y z products, one lag at a time.
inline std::vector<double> gradient(std::span<const double> z, std::size_t n, const DistDistribution& p) {
  const Geometry& g = p.grid().geometry();
  const std::size_t m = z.size();
  const double k = distance_count(g, n);
  const auto a = autocorrelation(g, z);
  std::vector<double> grad(m, 0.0);
  std::vector<double> e(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    const double r = a[y] - k * p[y];
    if (r == 0.0) continue;
    e.assign(m, 0.0);
    e[y] = 1.0;
    const auto by = lag_correlate(g, z, e);
    for (std::size_t i = 0; i < m; ++i) grad[i] += r * by[i];
  }
  const double scale = 2.0 / (static_cast<double>(m) * k * k);
  for (double& v : grad) v *= scale;
  return grad;
}

}  // namespace dense

/// Projected gradient descent. A trial step is accepted when it does not
/// increase f (the step then grows by 1/beta); otherwise the step shrinks by
/// beta and the trial is repeated. Stops when the relative iterate change
/// drops below epsilon, after max_iterations accepted steps, or when the
/// line search runs out (reported as not converged).
///
/// The gradient carries a 1/(M K^2) factor, so for large problems an eta0 of
/// order one gives steps far below epsilon. The change test is therefore
/// armed only once some trial step has been rejected (eta has reached the
/// scale of the problem) or when a step leaves z exactly unchanged.
/// The optional observer sees every accepted iterate.
using IterateObserver = std::function<void(std::size_t, std::span<const double>)>;

inline SolveResult solve(const MatchingObjective& f, const Density& z0, const SolveConfig& cfg,
                         const IterateObserver& observe = {}) {
  cfg.validate();
  require(z0.grid() == f.grid() && z0.points() == f.points(), "initial density does not match the problem");
  const std::size_t n = f.points();

  std::vector<double> z = z0.values();
  auto ev = f.evaluate(z);
  SolveResult res{z0, {ev.value}, 0, false, cfg.eta0};
  double eta = cfg.eta0;
  std::vector<double> step(z.size());
  bool armed = false;

  for (std::size_t t = 0; t < cfg.max_iterations; ++t) {
    const auto g = f.gradient(ev);
    bool accepted = false;
    std::vector<double> trial;
    MatchingObjective::Evaluation trial_ev;
    for (std::size_t ls = 0; ls < cfg.max_linesearch; ++ls) {
      for (std::size_t i = 0; i < z.size(); ++i) step[i] = z[i] - eta * g[i];
      trial = project_l1_box(step, n).s;
      trial_ev = f.evaluate(trial);
      if (trial_ev.value <= ev.value) {
        eta /= cfg.beta;
        accepted = true;
        break;
      }
      eta *= cfg.beta;
      armed = true;
    }
    if (!accepted) break;

    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      diff += (trial[i] - z[i]) * (trial[i] - z[i]);
      norm += z[i] * z[i];
    }
    z = std::move(trial);
    ev = std::move(trial_ev);
    res.objective_trace.push_back(ev.value);
    res.iterations = t + 1;
    if (observe) observe(res.iterations, z);
    if ((armed || diff == 0.0) && std::sqrt(diff) < cfg.epsilon * std::sqrt(norm)) {
      res.converged = true;
      break;
    }
  }
  res.final_eta = eta;
  res.z = Density(std::move(z), n, f.grid());
  return res;
}

inline SolveResult solve(const DistDistribution& p, std::size_t n, const Density& z0, const SolveConfig& cfg) {
  return solve(MatchingObjective(p, n), z0, cfg);
}

}  // namespace udgp
