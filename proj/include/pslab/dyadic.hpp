#pragma once

// Littlewood-Paley machinery: a smooth dyadic partition of unity on (0,inf),
// frequency blocks, and the Besov norms built from them.

#include "pslab/spectral.hpp"

namespace pslab {

namespace detail {

// Smooth cutoff: 1 for lambda <= 1, 0 for lambda >= 2, monotone between.
inline double dyadic_cutoff(double lambda) { return smooth_step(2.0 - lambda); }

}  // namespace detail

// phi0(lambda) = cutoff(lambda) - cutoff(2 lambda): nonnegative, smooth,
// supported in [1/2, 2], and sum_j phi0(2^-j lambda) telescopes to exactly 1
// for every lambda > 0. The a-posteriori normalization below divides by that
// telescoped sum, so the partition identity holds to round-off by
// construction.
struct DyadicPartition {
  int j_min = 0;
  int j_max = 0;

  static double profile_raw(double lambda) {
    return std::max(0.0, detail::dyadic_cutoff(lambda) - detail::dyadic_cutoff(2.0 * lambda));
  }

  double profile(double lambda) const {
    double p = profile_raw(lambda);
    if (p == 0.0) return 0.0;
    double sum = 0.0;  // only the two blocks overlapping lambda contribute
    for (int j = -2; j <= 2; ++j) sum += profile_raw(std::ldexp(lambda, j));
    return p / sum;
  }

  double partition_sum(double lambda) const {
    double s = 0.0;
    for (int j = j_min; j <= j_max; ++j) s += profile(std::ldexp(lambda, -j));
    return s;
  }

  // Blocks covering every nonzero wavenumber of the grid with one block of
  // slack on each side.
  static DyadicPartition for_grid(const GridSpec& spec) {
    DyadicPartition p;
    p.j_min = (int)std::floor(std::log2(spec.min_wavenumber())) - 1;
    p.j_max = (int)std::ceil(std::log2(spec.max_wavenumber())) + 1;
    return p;
  }

  bool contains(int j) const { return j >= j_min && j <= j_max; }
};

// Frequency-localized piece phi0(2^-j |k|) f; band-limited to the dyadic
// shell 2^{j-1} <= |k| <= 2^{j+1}.
inline Field dyadic_block(const Field& f, int j, const DyadicPartition& part) {
  detail::require(part.contains(j), "dyadic_block: j outside representable range");
  FourierMultiplier m{"phi_" + std::to_string(j),
                      [&part, j](std::span<const double> k) { return cplx{part.profile(std::ldexp(norm_k(k), -j)), 0.0}; },
                      {0.0, 0.0}};
  return apply_multiplier(f, m);
}

// Besov norm: l^q over j of 2^{sj} ||block_j f||_{L^p}. p or q may be inf.
inline double besov_norm(const Field& f, double s, double p, double q, const DyadicPartition& part) {
  detail::require(p >= 1.0 && q >= 1.0, "besov_norm: exponents must be >= 1");
  Spectrum sp = fft_forward(f);
  double acc = 0.0, sup = 0.0;
  for (int j = part.j_min; j <= part.j_max; ++j) {
    Spectrum blk = sp;
    for_each_mode(f.spec, [&](std::size_t i, std::span<const int>, std::span<const double> k) {
      blk.coef[i] *= part.profile(std::ldexp(norm_k(k), -j));
    });
    double term = std::pow(2.0, s * j) * lp_norm(fft_inverse(blk), p);
    if (std::isinf(q))
      sup = std::max(sup, term);
    else
      acc += std::pow(term, q);
  }
  double out = std::isinf(q) ? sup : std::pow(acc, 1.0 / q);
  detail::require(std::isfinite(out), "besov_norm: non-finite result");
  return out;
}

// min / max over a lambda sweep of sum_j phi0(2^-j lambda)^2; these bracket
// ||f||_{B^0_{2,2}}^2 / ||f - mean||_{L2}^2 for any field.
struct ProfileOverlap {
  double lo;
  double hi;
};

inline ProfileOverlap profile_overlap_constants(const DyadicPartition& part, int samples = 1000) {
  // stay one block inside the representable range so the sweep sees the full
  // overlap structure rather than truncated edges
  double lam_lo = std::ldexp(1.0, part.j_min + 1);
  double lam_hi = std::ldexp(1.0, part.j_max - 1);
  ProfileOverlap c{std::numeric_limits<double>::infinity(), 0.0};
  for (int i = 0; i < samples; ++i) {
    double t = (double)i / (samples - 1);
    double lam = lam_lo * std::pow(lam_hi / lam_lo, t);
    double s = 0.0;
    for (int j = part.j_min; j <= part.j_max; ++j) {
      double v = part.profile(std::ldexp(lam, -j));
      s += v * v;
    }
    c.lo = std::min(c.lo, s);
    c.hi = std::max(c.hi, s);
  }
  return c;
}

}  // namespace pslab
