#pragma once

// Fourier multiplier calculus on the periodic grid: fractional Laplacians
// D^s, Riesz transforms, derivatives, spectral projectors, Sobolev norms and
// the <x>^a weights.

#include <limits>

#include "pslab/fft.hpp"

namespace pslab {

// Visit every lattice mode: fn(flat_index, integer_modes, wavenumbers).
template <class Fn>
inline void for_each_mode(const GridSpec& spec, Fn&& fn) {
  std::vector<std::vector<int>> mint(spec.n);
  std::vector<std::vector<double>> wav(spec.n);
  for (int a = 0; a < spec.n; ++a) {
    mint[a].resize(spec.sizes[a]);
    wav[a].resize(spec.sizes[a]);
    for (int i = 0; i < spec.sizes[a]; ++i) {
      mint[a][i] = spec.mode_index(a, i);
      wav[a][i] = spec.wavenumber(a, i);
    }
  }
  IndexWalker w(spec);
  std::vector<int> m(spec.n);
  std::vector<double> k(spec.n);
  const std::size_t total = spec.total();
  for (std::size_t i = 0; i < total; ++i, w.step()) {
    for (int a = 0; a < spec.n; ++a) {
      m[a] = mint[a][w.digits[a]];
      k[a] = wav[a][w.digits[a]];
    }
    fn(i, std::span<const int>(m), std::span<const double>(k));
  }
}

// Symbol m(k) evaluated on physical wavenumbers, with an explicit value at
// the zero mode (homogeneous symbols are undefined there).
struct FourierMultiplier {
  std::string name;
  std::function<cplx(std::span<const double>)> symbol;
  cplx zero_mode{0.0, 0.0};
};

inline Field apply_multiplier(const Field& f, const FourierMultiplier& m) {
  detail::require(f.finite(), "apply_multiplier: field has non-finite entries");
  Spectrum s = fft_forward(f);
  for_each_mode(f.spec, [&](std::size_t i, std::span<const int> mi, std::span<const double> k) {
    bool zero = true;
    for (int v : mi) zero = zero && v == 0;
    cplx sym = zero ? m.zero_mode : m.symbol(k);
    if (!std::isfinite(sym.real()) || !std::isfinite(sym.imag())) {
      std::ostringstream os;
      os << "apply_multiplier: symbol '" << m.name << "' non-finite at k = (";
      for (std::size_t a = 0; a < mi.size(); ++a) os << (a ? "," : "") << mi[a];
      os << ")";
      throw std::invalid_argument(os.str());
    }
    s.coef[i] *= sym;
  });
  return fft_inverse(s);
}

inline double norm_k(std::span<const double> k) {
  double s = 0.0;
  for (double v : k) s += v * v;
  return std::sqrt(s);
}

// |k|^s with the zero mode annihilated (for s < 0 this is the only sane
// choice; for s > 0 it matches the homogeneous symbol's limit).
inline FourierMultiplier fractional_symbol(double s) {
  return {"D^" + std::to_string(s), [s](std::span<const double> k) { return cplx{std::pow(norm_k(k), s), 0.0}; }, {0.0, 0.0}};
}

inline Field fractional_laplacian(const Field& f, double s) { return apply_multiplier(f, fractional_symbol(s)); }

// Riesz transform R_j, symbol -i k_j / |k|, axes numbered from 0.
inline Field riesz(const Field& f, int axis) {
  detail::require(axis >= 0 && axis < f.spec.n, "riesz: axis out of range");
  FourierMultiplier m{"R_" + std::to_string(axis + 1),
                      [axis](std::span<const double> k) { return cplx{0.0, -k[axis] / norm_k(k)}; },
                      {0.0, 0.0}};
  return apply_multiplier(f, m);
}

inline Field derivative(const Field& f, int axis) {
  detail::require(axis >= 0 && axis < f.spec.n, "derivative: axis out of range");
  FourierMultiplier m{"d/dx_" + std::to_string(axis + 1),
                      [axis](std::span<const double> k) { return cplx{0.0, k[axis]}; },
                      {0.0, 0.0}};
  return apply_multiplier(f, m);
}

inline Field laplacian(const Field& f) {
  FourierMultiplier m{"laplacian", [](std::span<const double> k) {
                        double n = norm_k(k);
                        return cplx{-n * n, 0.0};
                      },
                      {0.0, 0.0}};
  return apply_multiplier(f, m);
}

// Sharp projector onto modes with |k| <= cutoff (cutoff < 0 keeps nothing).
inline Field project_below(const Field& f, double cutoff) {
  Spectrum s = fft_forward(f);
  for_each_mode(f.spec, [&](std::size_t i, std::span<const int>, std::span<const double> k) {
    if (norm_k(k) > cutoff) s.coef[i] = 0.0;
  });
  return fft_inverse(s);
}

// Sharp per-axis projection onto |m_a| < N_a/4. The convolution of two such
// spectra stays strictly below the Nyquist mode, so grid products of
// projected factors carry no fold-over and spectral derivatives obey the
// product rule exactly.
inline Field project_product_band(const Field& f) {
  Spectrum s = fft_forward(f);
  for_each_mode(f.spec, [&](std::size_t i, std::span<const int> mi, std::span<const double>) {
    for (int a = 0; a < f.spec.n; ++a)
      if (std::abs(mi[a]) >= f.spec.sizes[a] / 4) {
        s.coef[i] = 0.0;
        return;
      }
  });
  return fft_inverse(s);
}

inline Field remove_mean(const Field& f) {
  Field out = f;
  cplx mu = mean(f);
  for (cplx& v : out.values) v -= mu;
  return out;
}

// Fraction of spectral energy beyond the 2/3 dealiasing band; pointwise
// products of two fields clean to this band are alias-free.
inline double band_excess_fraction(const Field& f) {
  Spectrum s = fft_forward(f);
  double total = 0.0, high = 0.0;
  for_each_mode(f.spec, [&](std::size_t i, std::span<const int> mi, std::span<const double>) {
    double e = std::norm(s.coef[i]);
    total += e;
    for (int a = 0; a < f.spec.n; ++a)
      if (std::abs(mi[a]) > f.spec.sizes[a] / 3) {
        high += e;
        return;
      }
  });
  return total > 0.0 ? high / total : 0.0;
}

// Homogeneous Sobolev norm: ( vol * sum_{k != 0} |k|^{2s} |c_k|^2 )^{1/2}.
inline double sobolev_norm(const Field& f, double s) {
  Spectrum sp = fft_forward(f);
  double acc = 0.0;
  for_each_mode(f.spec, [&](std::size_t i, std::span<const int> mi, std::span<const double> k) {
    bool zero = true;
    for (int v : mi) zero = zero && v == 0;
    if (zero) return;
    acc += std::pow(norm_k(k), 2.0 * s) * std::norm(sp.coef[i]);
  });
  double out = std::sqrt(acc * f.spec.volume());
  detail::require(std::isfinite(out), "sobolev_norm: non-finite result");
  return out;
}

// Inhomogeneous variant (1 + |k|^2)^{s/2}, zero mode included.
inline double sobolev_norm_inhom(const Field& f, double s) {
  Spectrum sp = fft_forward(f);
  double acc = 0.0;
  for_each_mode(f.spec, [&](std::size_t i, std::span<const int>, std::span<const double> k) {
    double kk = 0.0;
    for (double v : k) kk += v * v;
    acc += std::pow(1.0 + kk, s) * std::norm(sp.coef[i]);
  });
  double out = std::sqrt(acc * f.spec.volume());
  detail::require(std::isfinite(out), "sobolev_norm_inhom: non-finite result");
  return out;
}

// <x - center>^a where center is the box midpoint, so the weight is smallest
// at the center and the periodization seam carries the largest values.
inline Field weight_multiply(const Field& f, double a) {
  Field out = f;
  IndexWalker w(f.spec);
  for (std::size_t i = 0; i < out.values.size(); ++i, w.step()) {
    double r2 = 0.0;
    for (int ax = 0; ax < f.spec.n; ++ax) {
      double d = f.spec.coord(ax, w.digits[ax]) - 0.5 * f.spec.box[ax];
      r2 += d * d;
    }
    out.values[i] *= std::pow(1.0 + r2, 0.5 * a);
  }
  return out;
}

inline std::vector<double> weight_values(const GridSpec& spec, double a) {
  std::vector<double> w(spec.total());
  IndexWalker iw(spec);
  for (std::size_t i = 0; i < w.size(); ++i, iw.step()) {
    double r2 = 0.0;
    for (int ax = 0; ax < spec.n; ++ax) {
      double d = spec.coord(ax, iw.digits[ax]) - 0.5 * spec.box[ax];
      r2 += d * d;
    }
    w[i] = std::pow(1.0 + r2, 0.5 * a);
  }
  return w;
}

}  // namespace pslab
