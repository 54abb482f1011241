#pragma once

// Fast evaluation of the lag quadratic forms z^T A_y z (line) / z^T R_y z
// (loop) and of the symmetrised lag operators B_y = A_y + A_y^T, using
// real-to-complex FFTs. Dense O(M^2) reference versions live in udgp::dense.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "udgp/domain.hpp"

namespace udgp {

namespace detail {

// FFTW planning is not thread safe; execution with the new-array API is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
inline ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

// Per-thread transform scratch, grown on demand. Large buffers are reused
// rather than reallocated on every call.
struct FftScratch {
  RealBuffer real;
  ComplexBuffer complex;
  std::size_t real_size = 0, complex_size = 0;

  double* real_at_least(std::size_t n) {
    if (real_size < n) {
      real = alloc_real(n);
      real_size = n;
    }
    return real.get();
  }
  fftw_complex* complex_at_least(std::size_t n) {
    if (complex_size < n) {
      complex = alloc_complex(n);
      complex_size = n;
    }
    return complex.get();
  }
};

inline FftScratch& fft_scratch() {
  thread_local FftScratch s;
  return s;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace detail

/// Precomputed transforms for one (geometry, M) pair. Immutable and cheap to
/// copy; evaluations allocate their own scratch so a plan may be shared
/// across threads.
class LagOperatorPlan {
 public:
  /// Frequency-domain image of a length-M signal (zero padded on a line).
  using Spectrum = std::vector<std::complex<double>>;

  LagOperatorPlan(const Geometry& geometry, std::size_t m) : impl_(std::make_shared<Impl>(geometry, m)) {}
  explicit LagOperatorPlan(const Grid& grid) : LagOperatorPlan(grid.geometry(), grid.size()) {}

  std::size_t size() const { return impl_->m; }
  const Geometry& geometry() const { return impl_->geometry; }
  std::size_t transform_size() const { return impl_->n; }

  Spectrum transform(std::span<const double> z) const {
    require(z.size() == impl_->m, "lag operator: length mismatch");
    const std::size_t n = impl_->n;
    auto& scratch = detail::fft_scratch();
    double* in = scratch.real_at_least(n);
    fftw_complex* out = scratch.complex_at_least(n / 2 + 1);
    std::copy(z.begin(), z.end(), in);
    std::fill(in + z.size(), in + n, 0.0);
    fftw_execute_dft_r2c(impl_->forward, in, out);
    Spectrum s(n / 2 + 1);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = {out[k][0], out[k][1]};
    return s;
  }

  /// a_y = sum_i z_i z_{i+y} for y = 0..M-1 (indices mod M on a loop).
  std::vector<double> autocorrelation(std::span<const double> z) const {
    return autocorrelation(transform(z));
  }

  std::vector<double> autocorrelation(const Spectrum& zf) const {
    Spectrum prod(zf.size());
    for (std::size_t k = 0; k < zf.size(); ++k) prod[k] = std::norm(zf[k]);
    return inverse(prod);
  }

  /// out_i = sum_y r_y (z_{i+y} + z_{i-y}), i.e. sum_y r_y B_y z.
  std::vector<double> lag_correlate(std::span<const double> z, std::span<const double> r) const {
    require(r.size() == impl_->m, "lag operator: length mismatch");
    return lag_correlate(transform(z), r);
  }

  std::vector<double> lag_correlate(const Spectrum& zf, std::span<const double> r) const {
    require(r.size() == impl_->m, "lag operator: length mismatch");
    const Spectrum rf = transform(r);
    Spectrum prod(zf.size());
    for (std::size_t k = 0; k < zf.size(); ++k) prod[k] = zf[k] * (2.0 * rf[k].real());
    return inverse(prod);
  }

  /// w_y = h^T B_y x for every lag y.
  std::vector<double> cross_lag(std::span<const double> h, std::span<const double> x) const {
    const Spectrum hf = transform(h);
    const Spectrum xf = transform(x);
    Spectrum prod(hf.size());
    for (std::size_t k = 0; k < hf.size(); ++k) prod[k] = 2.0 * (xf[k] * std::conj(hf[k])).real();
    return inverse(prod);
  }

 private:
  struct Impl {
    Geometry geometry;
    std::size_t m;
    std::size_t n;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    Impl(const Geometry& g, std::size_t cells)
        : geometry(g), m(cells), n(g.is_loop() ? cells : detail::next_pow2(2 * cells)) {
      require(m >= 1, "lag operator needs M >= 1");
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      auto r = detail::alloc_real(n);
      auto c = detail::alloc_complex(n / 2 + 1);
      forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), r.get(), c.get(), FFTW_ESTIMATE);
      backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), c.get(), r.get(), FFTW_ESTIMATE);
    }
    ~Impl() {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(forward);
      fftw_destroy_plan(backward);
    }
    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;
  };

  std::vector<double> inverse(const Spectrum& s) const {
    const std::size_t n = impl_->n;
    auto& scratch = detail::fft_scratch();
    fftw_complex* in = scratch.complex_at_least(n / 2 + 1);
    double* out = scratch.real_at_least(n);
    for (std::size_t k = 0; k < s.size(); ++k) {
      in[k][0] = s[k].real();
      in[k][1] = s[k].imag();
    }
    fftw_execute_dft_c2r(impl_->backward, in, out);
    std::vector<double> res(impl_->m);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < impl_->m; ++i) res[i] = out[i] * scale;
    return res;
  }

  std::shared_ptr<const Impl> impl_;
};

/// Dense O(M^2) reference implementations.
namespace dense {

inline std::vector<double> autocorrelation(const Geometry& g, std::span<const double> z) {
  const std::size_t m = z.size();
  std::vector<double> a(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t j = i + y;
      if (j >= m) {
        if (!g.is_loop()) break;
        j -= m;
      }
      s += z[i] * z[j];
    }
    a[y] = s;
  }
  return a;
}

inline std::vector<double> lag_correlate(const Geometry& g, std::span<const double> z, std::span<const double> r) {
  const std::size_t m = z.size();
  require(r.size() == m, "lag operator: length mismatch");
  const auto mm = static_cast<long long>(m);
  std::vector<double> out(m, 0.0);
  for (long long i = 0; i < mm; ++i) {
    double s = 0.0;
    for (long long y = 0; y < mm; ++y) {
      long long up = i + y, down = i - y;
      if (g.is_loop()) {
        up %= mm;
        down = ((down % mm) + mm) % mm;
        s += r[y] * (z[up] + z[down]);
      } else {
        if (up < mm) s += r[y] * z[up];
        if (down >= 0) s += r[y] * z[down];
      }
    }
    out[i] = s;
  }
  return out;
}

inline std::vector<double> cross_lag(const Geometry& g, std::span<const double> h, std::span<const double> x) {
  const std::size_t m = h.size();
  std::vector<double> w(m, 0.0);
  std::vector<double> e(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    e.assign(m, 0.0);
    e[y] = 1.0;
    const auto bx = lag_correlate(g, x, e);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += h[i] * bx[i];
    w[y] = s;
  }
  return w;
}

}  // namespace dense
}  // namespace udgp
