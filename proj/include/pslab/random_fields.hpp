#pragma once

// Seeded test-data families: band-limited random fields, periodized
// Gaussians, compactly supported bumps and half-space data built from them.
// Everything is a pure function of (spec, parameters, seed).

#include <random>

#include "pslab/halfspace.hpp"

namespace pslab {

namespace detail {

// splitmix64 over (seed, mode vector): coefficients are a function of the
// mode alone, so the same field reappears on any grid that can hold it.
inline std::uint64_t mode_hash(std::uint64_t h, std::span<const int> mi) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  h = mix(h);
  for (int v : mi) h = mix(h ^ (std::uint64_t)(std::int64_t)v);
  return h;
}

inline cplx mode_gaussian(std::uint64_t h) {
  double u1 = ((h >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  double u2 = (h & 0xfffffffful) * 0x1.0p-32;
  double r = std::sqrt(-2.0 * std::log(u1));
  return cplx{r * std::cos(2.0 * pi * u2), r * std::sin(2.0 * pi * u2)};
}

}  // namespace detail

// Random field with spectrum supported in |k_a| <= K per axis, coefficients
// decaying like exp(-|k|/K) with unit-scale random amplitudes keyed to the
// mode vector. real = true keeps the real part of the synthesis.
inline Field random_band_limited(const GridSpec& spec, int K, unsigned seed, bool real = false,
                                 bool mean_zero = true) {
  detail::require(K >= 1, "random_band_limited: K >= 1");
  for (int a = 0; a < spec.n; ++a)
    detail::require(K <= spec.sizes[a] / 4, "random_band_limited: K beyond the dealiasing band");

  Spectrum s{spec, std::vector<cplx>(spec.total(), cplx{0.0, 0.0})};
  for_each_mode(spec, [&](std::size_t i, std::span<const int> mi, std::span<const double>) {
    bool in_band = true;
    double kk = 0.0;
    for (int v : mi) {
      in_band = in_band && std::abs(v) <= K;
      kk += (double)v * v;
    }
    if (!in_band) return;
    bool zero = kk == 0.0;
    if (zero && mean_zero) return;
    double amp = std::exp(-std::sqrt(kk) / K);
    s.coef[i] = amp * detail::mode_gaussian(detail::mode_hash(seed, mi));
  });
  if (real) {
    Field tmp = fft_inverse(s);
    for (auto& v : tmp.values) v = cplx{v.real(), 0.0};
    return tmp;
  }
  return fft_inverse(s);
}

// Periodized centered Gaussian exp(-|x - c|^2 / (2 sigma^2)).
inline Field gaussian_field(const GridSpec& spec, double sigma, std::vector<double> center = {},
                            double amplitude = 1.0) {
  if (center.empty()) {
    center.resize((std::size_t)spec.n);
    for (int a = 0; a < spec.n; ++a) center[(std::size_t)a] = 0.5 * spec.box[a];
  }
  return Field::sample(spec, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (int a = 0; a < spec.n; ++a) {
      double d = x[a] - center[(std::size_t)a];
      d = std::min(std::abs(d), spec.box[a] - std::abs(d));  // min-image
      r2 += d * d;
    }
    return cplx{amplitude * std::exp(-0.5 * r2 / (sigma * sigma)), 0.0};
  });
}

// Smooth compactly supported radial bump centered at c with support radius
// rho: exp(beta (1 - 1/(1 - (r/rho)^2))).
inline Field bump_field(const GridSpec& spec, std::vector<double> center, double rho, double amplitude = 1.0,
                        double beta = 1.0) {
  if (center.empty()) {
    center.resize((std::size_t)spec.n);
    for (int a = 0; a < spec.n; ++a) center[(std::size_t)a] = 0.5 * spec.box[a];
  }
  return Field::sample(spec, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (int a = 0; a < spec.n; ++a) {
      double d = x[a] - center[(std::size_t)a];
      d = std::min(std::abs(d), spec.box[a] - std::abs(d));
      r2 += d * d;
    }
    double u2 = r2 / (rho * rho);
    return cplx{u2 < 1.0 ? amplitude * std::exp(beta * (1.0 - 1.0 / (1.0 - u2))) : 0.0, 0.0};
  });
}

// Half-space bump data: product of a y1 bump exp(beta (1 - 1/(1 - u^2)))
// supported in [margin, pi - margin] and a smooth random transverse profile.
// Larger beta buys faster Fourier decay of the compactly supported factor.
inline HalfField halfspace_bump(const GridSpec& spec, unsigned seed, double margin = pi / 16.0,
                                double beta = 4.0) {
  const double center = 0.5 * pi;
  const double rho = 0.5 * pi - margin;
  GridSpec tspec = detail::transverse_spec(spec);
  Field profile = random_band_limited(tspec, std::max(1, tspec.sizes[0] / 8), seed, false, false);
  // keep the transverse profile O(1) but bounded away from wild peaks
  double scale = 1.0 / std::max(1.0, linf_norm(profile));
  const std::size_t line = tspec.total();
  std::vector<cplx> vals(spec.total() / 2);
  for (int i = 0; i < spec.sizes[0] / 2; ++i) {
    double u = (spec.coord(0, i) - center) / rho;
    double u2 = u * u;
    double b = u2 < 1.0 ? std::exp(beta * (1.0 - 1.0 / (1.0 - u2))) : 0.0;
    for (std::size_t j = 0; j < line; ++j) vals[(std::size_t)i * line + j] = b * scale * profile.values[j];
  }
  return HalfField::from_samples(spec, std::move(vals), pi - margin * 0.5, 1e-13);
}

// Band-limited D/N data built directly from decaying random coefficients;
// the idealized (non-compactly-supported) interval data the parity and
// commutation identities are exact on. K_trans < 0 defaults to a quarter of
// the dealiasing band of the transverse grid.
inline DNDecomposition random_dn_data(const GridSpec& spec, int K, unsigned seed, int K_trans = -1) {
  detail::require(K <= spec.sizes[0] / 4, "random_dn_data: K beyond the dealiasing band");
  DNDecomposition d = DNDecomposition::zeros(spec);
  GridSpec tspec = detail::transverse_spec(spec);
  if (K_trans < 0) K_trans = std::max(1, tspec.sizes[0] / 8);
  for (int k = 0; k <= K; ++k) {
    double amp = std::exp(-(double)k / K);
    Field a = random_band_limited(tspec, K_trans, seed + 2u * (unsigned)k, false, false);
    Field b = random_band_limited(tspec, K_trans, seed + 2u * (unsigned)k + 1u, false, false);
    for (std::size_t j = 0; j < d.slab(); ++j) {
      d.cos_c[(std::size_t)k][j] = amp * a.values[j];
      if (k >= 1) d.sin_c[(std::size_t)k][j] = amp * b.values[j];
    }
  }
  return d;
}

}  // namespace pslab
