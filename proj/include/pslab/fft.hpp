#pragma once

// FFTW-backed transforms with Fourier-series normalization:
//   coefficients c_k = (1/N_total) sum_x f(x) exp(-i k.x)
// so a unit plane wave has a single unit coefficient and multipliers act
// diagonally on c_k. Plans are cached per (shape, direction); plan creation
// is serialized because the FFTW planner is not thread-safe, execution via
// the new-array interface is.

#include <fftw3.h>

#include <map>
#include <mutex>

#include "pslab/core.hpp"

namespace pslab {
namespace detail {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  void execute(const std::vector<int>& dims, int sign, cplx* in, cplx* out) {
    fftw_plan p = acquire(dims, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in), reinterpret_cast<fftw_complex*>(out));
  }

 private:
  std::mutex mu_;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;

  fftw_plan acquire(const std::vector<int>& dims, int sign) {
    std::scoped_lock lock(mu_);
    auto key = std::make_pair(dims, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int d : dims) total *= (std::size_t)d;
    std::vector<cplx> a(total), b(total);
    fftw_plan p = fftw_plan_dft((int)dims.size(), dims.data(), reinterpret_cast<fftw_complex*>(a.data()),
                                reinterpret_cast<fftw_complex*>(b.data()), sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    require(p != nullptr, "fft: planner failed");
    plans_[key] = p;
    return p;
  }
};

}  // namespace detail

// Spectrum of a field: coefficients indexed like the grid (FFT layout).
struct Spectrum {
  GridSpec spec;
  std::vector<cplx> coef;
};

inline Spectrum fft_forward(const Field& f) {
  Spectrum s{f.spec, std::vector<cplx>(f.values.size())};
  std::vector<cplx> in = f.values;  // out-of-place; FFTW may not read from const
  detail::PlanCache::instance().execute(f.spec.sizes, FFTW_FORWARD, in.data(), s.coef.data());
  double inv = 1.0 / (double)f.values.size();
  for (cplx& c : s.coef) c *= inv;
  return s;
}

inline Field fft_inverse(const Spectrum& s) {
  Field f(s.spec);
  std::vector<cplx> in = s.coef;
  detail::PlanCache::instance().execute(s.spec.sizes, FFTW_BACKWARD, in.data(), f.values.data());
  return f;
}

// 1D transform along one axis only; lines along the other axes are
// independent. Used by the half-space machinery which expands in y1 per
// transverse node.
inline void fft_axis(std::vector<cplx>& values, const GridSpec& spec, int axis, int sign, bool normalize) {
  const int N = spec.sizes[axis];
  std::size_t stride = 1;
  for (int a = spec.n - 1; a > axis; --a) stride *= (std::size_t)spec.sizes[a];
  std::size_t block = stride * (std::size_t)N;
  std::size_t nlines = values.size() / (std::size_t)N;
  std::vector<cplx> line(N), out(N);
  std::vector<int> dims{N};
  for (std::size_t l = 0; l < nlines; ++l) {
    std::size_t base = (l / stride) * block + (l % stride);
    for (int i = 0; i < N; ++i) line[i] = values[base + stride * (std::size_t)i];
    detail::PlanCache::instance().execute(dims, sign, line.data(), out.data());
    double scale = normalize ? 1.0 / N : 1.0;
    for (int i = 0; i < N; ++i) values[base + stride * (std::size_t)i] = out[i] * scale;
  }
}

}  // namespace pslab
