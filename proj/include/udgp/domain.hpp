#pragma once

// Core value types: geometry, grids, point sets, distance multisets,
// densities and lag distributions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "udgp/error.hpp"

namespace udgp {

enum class GeometryKind { Line, Loop };

/// Points live either on an open line or on a loop of fixed circumference.
class Geometry {
 public:
  static Geometry line() { return Geometry(GeometryKind::Line, 0.0); }
  static Geometry loop(double length) {
    require(std::isfinite(length) && length > 0.0, "loop length must be positive");
    return Geometry(GeometryKind::Loop, length);
  }

  GeometryKind kind() const { return kind_; }
  bool is_loop() const { return kind_ == GeometryKind::Loop; }
  /// Circumference; zero for a line.
  double loop_length() const { return length_; }

  bool operator==(const Geometry&) const = default;

 private:
  Geometry(GeometryKind k, double l) : kind_(k), length_(l) {}
  GeometryKind kind_;
  double length_;
};

inline std::string to_string(GeometryKind k) { return k == GeometryKind::Line ? "line" : "loop"; }

/// Number of (augmented) distances: C(N,2)+N on a line, N^2 on a loop.
inline double distance_count(const Geometry& g, std::size_t n) {
  const double nn = static_cast<double>(n);
  return g.is_loop() ? nn * nn : nn * (nn - 1.0) / 2.0 + nn;
}

/// Uniform discretisation of the domain into M cells of width delta_l.
/// Cell m is centred at m * delta_l.
class Grid {
 public:
  Grid(std::size_t cells, double delta_l, Geometry geometry)
      : cells_(cells), delta_l_(delta_l), geometry_(geometry) {
    require(cells_ >= 1, "grid needs at least one cell");
    require(std::isfinite(delta_l_) && delta_l_ > 0.0, "grid step must be positive");
    if (geometry_.is_loop()) {
      const double l = geometry_.loop_length();
      require(std::abs(static_cast<double>(cells_) * delta_l_ - l) <= 1e-9 * l,
              "loop grid must tile the loop exactly (M * delta_l == L)");
    }
  }

  /// Line grid just large enough that d_max quantises inside it.
  static Grid line_for(double d_max, double delta_l) {
    require(std::isfinite(d_max) && d_max >= 0.0, "d_max must be finite and non-negative");
    require(std::isfinite(delta_l) && delta_l > 0.0, "grid step must be positive");
    const auto cells = static_cast<std::size_t>(std::ceil(d_max / delta_l - 1e-9)) + 1;
    return Grid(cells, delta_l, Geometry::line());
  }

  /// Loop grid with M = round(L / delta_l); the step is adjusted so M * step == L.
  static Grid loop_for(double length, double delta_l) {
    require(std::isfinite(delta_l) && delta_l > 0.0, "grid step must be positive");
    const Geometry g = Geometry::loop(length);
    const auto cells = static_cast<std::size_t>(std::llround(length / delta_l));
    require(cells >= 1, "loop shorter than one cell");
    return Grid(cells, length / static_cast<double>(cells), g);
  }

  std::size_t size() const { return cells_; }
  double step() const { return delta_l_; }
  const Geometry& geometry() const { return geometry_; }
  double cell_center(std::size_t m) const { return static_cast<double>(m) * delta_l_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t cells_;
  double delta_l_;
  Geometry geometry_;
};

/// Signed shortest arc from a to b on a loop of length l, in (-l/2, l/2].
inline double circular_offset(double a, double b, double l) {
  double d = std::fmod(b - a, l);
  if (d <= -l / 2) d += l;
  if (d > l / 2) d -= l;
  return d;
}

inline double wrap(double u, double l) {
  double w = std::fmod(u, l);
  if (w < 0) w += l;
  if (w >= l) w -= l;
  return w;
}

/// N point locations with their geometry.
class PointConfig {
 public:
  PointConfig(std::vector<double> locations, Geometry geometry)
      : u_(std::move(locations)), geometry_(geometry) {
    require(u_.size() >= 2, "a configuration needs at least two points");
    for (double& u : u_) {
      require(std::isfinite(u), "point locations must be finite");
      if (geometry_.is_loop()) {
        const double l = geometry_.loop_length();
        require(u >= -1e-12 * l && u < l * (1 + 1e-12), "loop locations must lie in [0, L)");
        u = wrap(u, l);
      }
    }
    require(min_separation() > 0.0, "points must be distinct");
  }

  const std::vector<double>& locations() const { return u_; }
  const Geometry& geometry() const { return geometry_; }
  std::size_t size() const { return u_.size(); }

  /// Smallest distance between two different points (shortest arc on a loop).
  double min_separation() const {
    std::vector<double> s = u_;
    std::sort(s.begin(), s.end());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < s.size(); ++i) best = std::min(best, s[i] - s[i - 1]);
    if (geometry_.is_loop()) best = std::min(best, s.front() + geometry_.loop_length() - s.back());
    return best;
  }

 private:
  std::vector<double> u_;
  Geometry geometry_;
};

enum class MultisetKind { TurnpikeRaw, TurnpikeAugmented, BeltwayRaw, BeltwayAugmented };

inline bool is_augmented(MultisetKind k) {
  return k == MultisetKind::TurnpikeAugmented || k == MultisetKind::BeltwayAugmented;
}
inline bool is_beltway(MultisetKind k) {
  return k == MultisetKind::BeltwayRaw || k == MultisetKind::BeltwayAugmented;
}

inline std::size_t expected_count(MultisetKind k, std::size_t n) {
  switch (k) {
    case MultisetKind::TurnpikeRaw: return n * (n - 1) / 2;
    case MultisetKind::TurnpikeAugmented: return n * (n - 1) / 2 + n;
    case MultisetKind::BeltwayRaw: return n * (n - 1);
    case MultisetKind::BeltwayAugmented: return n * n;
  }
  return 0;
}

/// Unassigned distances. Augmented kinds carry the N self-distances (zeros).
class DistanceMultiset {
 public:
  DistanceMultiset(std::vector<double> values, MultisetKind kind, std::size_t n)
      : d_(std::move(values)), kind_(kind), n_(n) {
    require(n_ >= 2, "distance multiset needs N >= 2");
    require(d_.size() == expected_count(kind_, n_),
            "distance count " + std::to_string(d_.size()) + " does not match N=" + std::to_string(n_),
            ErrorCode::Data);
    for (double v : d_) require(std::isfinite(v) && v >= 0.0, "distances must be finite and >= 0", ErrorCode::Data);
  }

  const std::vector<double>& values() const { return d_; }
  MultisetKind kind() const { return kind_; }
  std::size_t points() const { return n_; }
  std::size_t size() const { return d_.size(); }

  double max() const { return d_.empty() ? 0.0 : *std::max_element(d_.begin(), d_.end()); }

  /// Appends the N zero self-distances.
  DistanceMultiset augmented() const {
    require(!is_augmented(kind_), "multiset is already augmented");
    std::vector<double> v = d_;
    v.insert(v.end(), n_, 0.0);
    return {std::move(v), is_beltway(kind_) ? MultisetKind::BeltwayAugmented : MultisetKind::TurnpikeAugmented, n_};
  }

  bool operator==(const DistanceMultiset&) const = default;

 private:
  std::vector<double> d_;
  MultisetKind kind_;
  std::size_t n_;
};

/// Relaxed N-hot encoding: z in [0,1]^M with sum N.
class Density {
 public:
  Density(std::vector<double> z, std::size_t n, Grid grid) : z_(std::move(z)), n_(n), grid_(std::move(grid)) {
    require(z_.size() == grid_.size(), "density length must equal the grid size");
    require(n_ >= 1 && n_ <= z_.size(), "density needs 1 <= N <= M");
    double sum = 0.0;
    for (double v : z_) {
      require(v >= -1e-12 && v <= 1.0 + 1e-12, "density entries must lie in [0,1]");
      sum += v;
    }
    require(std::abs(sum - static_cast<double>(n_)) <= 1e-8 * static_cast<double>(n_),
            "density must sum to N");
    for (double& v : z_) v = std::clamp(v, 0.0, 1.0);
  }

  /// Binary density with ones at the given cells.
  static Density indicator(const std::vector<std::size_t>& cells, const Grid& grid) {
    std::vector<double> z(grid.size(), 0.0);
    for (std::size_t c : cells) {
      require(c < grid.size(), "cell index outside grid");
      require(z[c] == 0.0, "duplicate cell in indicator");
      z[c] = 1.0;
    }
    return Density(std::move(z), cells.size(), grid);
  }

  const std::vector<double>& values() const { return z_; }
  std::size_t points() const { return n_; }
  const Grid& grid() const { return grid_; }
  std::size_t size() const { return z_.size(); }

 private:
  std::vector<double> z_;
  std::size_t n_;
  Grid grid_;
};

/// Probability mass over quantised lags y = 0..M-1.
class DistDistribution {
 public:
  DistDistribution(std::vector<double> p, Grid grid) : p_(std::move(p)), grid_(std::move(grid)) {
    require(p_.size() == grid_.size(), "distribution length must equal the grid size");
    for (double v : p_) require(std::isfinite(v) && v >= 0.0, "distribution mass must be non-negative");
  }

  const std::vector<double>& values() const { return p_; }
  const Grid& grid() const { return grid_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t y) const { return p_[y]; }

 private:
  std::vector<double> p_;
  Grid grid_;
};

/// Nearest cell (round half away from zero); wraps modulo M on a loop.
inline std::size_t quantize_location(double u, const Grid& grid) {
  require(std::isfinite(u) && u >= -0.5 * grid.step(), "location outside the domain");
  const long long v = std::llround(u / grid.step());
  const auto m = static_cast<long long>(grid.size());
  if (grid.geometry().is_loop()) return static_cast<std::size_t>(((v % m) + m) % m);
  require(v < m, "location beyond the last grid cell");
  return static_cast<std::size_t>(v);
}

/// Quantises every point; rejects configurations whose points share a cell.
inline std::vector<std::size_t> quantize_config(const PointConfig& config, const Grid& grid) {
  std::vector<std::size_t> cells;
  cells.reserve(config.size());
  for (double u : config.locations()) cells.push_back(quantize_location(u, grid));
  std::vector<std::size_t> sorted = cells;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          "minimum separation violated: two points quantise to the same cell", ErrorCode::Data);
  return cells;
}

/// Line: all C(N,2) absolute differences. Loop: all N(N-1) clockwise distances.
inline DistanceMultiset pairwise_distances(const PointConfig& config) {
  const auto& u = config.locations();
  const std::size_t n = u.size();
  std::vector<double> d;
  if (config.geometry().is_loop()) {
    const double l = config.geometry().loop_length();
    d.reserve(n * (n - 1));
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t k = 0; k < n; ++k)
        if (m != k) d.push_back(wrap(u[k] - u[m], l));
    return {std::move(d), MultisetKind::BeltwayRaw, n};
  }
  d.reserve(n * (n - 1) / 2);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = m + 1; k < n; ++k) d.push_back(std::abs(u[k] - u[m]));
  return {std::move(d), MultisetKind::TurnpikeRaw, n};
}

/// Adds iid N(0, xi^2) noise to every raw distance; negative results clamp to 0.
template <class Rng>
DistanceMultiset add_noise(const DistanceMultiset& dm, double xi, Rng& rng) {
  require(!is_augmented(dm.kind()), "noise applies to raw multisets");
  require(std::isfinite(xi) && xi >= 0.0, "noise level must be non-negative");
  std::vector<double> v = dm.values();
  if (xi > 0.0) {
    std::normal_distribution<double> noise(0.0, xi);
    for (double& d : v) d = std::max(0.0, d + noise(rng));
  }
  return {std::move(v), dm.kind(), dm.points()};
}

inline DistanceMultiset add_noise(const DistanceMultiset& dm, double xi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return add_noise(dm, xi, rng);
}

}  // namespace udgp
