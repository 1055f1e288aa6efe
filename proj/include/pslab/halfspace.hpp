#pragma once

// Dirichlet/Neumann splitting of half-space data and the reflection
// extension built from it.
//
// A function g on the half-grid y1 in [0,pi) is zero-padded to the full
// period [0,2pi) and expanded there as
//   g = a_0/2 + sum a_k(y') cos(k y1) + sum b_k(y') sin(k y1).
// The sine part g_D carries the Dirichlet trace (g_D = 0 at y1 = 0), the
// cosine part g_N the Neumann one (d/dy1 g_N = 0 at y1 = 0, termwise).
// Evaluating the two series on the whole torus realizes the odd extension of
// g_D and the even extension of g_N; their sum is the extension E[g].
//
// The variable-coefficient operator
//   hat_Delta = Delta_{y'} + alpha(y') d^2/dy1^2
//             + sum_j beta_j(y') d/dy_j d/dy1 + gamma(y') d/dy1
// maps the sine family to itself where it keeps even y1-order and swaps the
// families where it differentiates once in y1. Tracking that bookkeeping on
// the coefficients gives a half-space evaluation of hat_Delta that never
// leaves the D/N representation; comparing its extension against hat_Delta
// applied to E[g] on the torus is the commutation check.

#include "pslab/spectral.hpp"

namespace pslab {

// Half-space sample set: values on the half-grid y1 in [0,pi), certified to
// vanish beyond support_radius. Axis 0 is y1.
struct HalfField {
  GridSpec spec;                 // full-torus grid the data embeds into
  std::vector<cplx> values;      // size total/2, y1-major like Field
  double support_radius = 0.0;   // certified: |g| <= tol for y1 >= radius

  std::size_t half_count() const { return spec.total() / 2; }

  static HalfField from_samples(const GridSpec& spec, std::vector<cplx> vals, double support_radius,
                                double tol = 1e-13) {
    detail::require(spec.box[0] > 0.0 && std::abs(spec.box[0] - 2.0 * pi) < 1e-12,
                    "HalfField: axis-1 box length must be 2*pi");
    HalfField h{spec, std::move(vals), support_radius};
    detail::require(h.values.size() == h.half_count(), "HalfField: value count must be half the grid");
    detail::require(support_radius < pi, "HalfField: support_radius must be < pi");
    double leak = h.leakage();
    if (leak > tol) {
      std::ostringstream os;
      os << "HalfField: support violation, |g| = " << leak << " beyond y1 = " << support_radius;
      throw std::invalid_argument(os.str());
    }
    return h;
  }

  static HalfField sample(const GridSpec& spec, double support_radius,
                          const std::function<cplx(std::span<const double>)>& f, double tol = 1e-13) {
    std::vector<cplx> vals(spec.total() / 2);
    IndexWalker w(spec);
    std::vector<double> x(spec.n);
    for (std::size_t i = 0; i < vals.size(); ++i, w.step()) {
      for (int a = 0; a < spec.n; ++a) x[a] = spec.coord(a, w.digits[a]);
      vals[i] = f(x);
    }
    return from_samples(spec, std::move(vals), support_radius, tol);
  }

  // Largest |g| at or beyond the support radius.
  double leakage() const {
    const int n1 = spec.sizes[0];
    const std::size_t line = values.size() / (std::size_t)(n1 / 2);
    double worst = 0.0;
    for (int i = 0; i < n1 / 2; ++i) {
      if (spec.coord(0, i) < support_radius) continue;
      for (std::size_t j = 0; j < line; ++j) worst = std::max(worst, std::abs(values[(std::size_t)i * line + j]));
    }
    return worst;
  }

  // Restriction of a full field to the half-grid; leakage above tol on the
  // padded half is rejected with the measured value.
  static HalfField restrict_field(const Field& f, double support_radius, double tol = 1e-13) {
    const int n1 = f.spec.sizes[0];
    const std::size_t line = f.values.size() / (std::size_t)n1;
    double leak = 0.0;
    for (int i = n1 / 2; i < n1; ++i)
      for (std::size_t j = 0; j < line; ++j) leak = std::max(leak, std::abs(f.values[(std::size_t)i * line + j]));
    if (leak > tol) {
      std::ostringstream os;
      os << "HalfField: restriction leakage " << leak << " on y1 in [pi, 2pi)";
      throw std::invalid_argument(os.str());
    }
    std::vector<cplx> vals(f.values.begin(), f.values.begin() + (std::ptrdiff_t)(f.values.size() / 2));
    return from_samples(f.spec, std::move(vals), support_radius, tol);
  }

  // The zero extension to the full torus (the analysis-side carrier).
  Field zero_padded() const {
    Field out(spec);
    std::copy(values.begin(), values.end(), out.values.begin());
    return out;
  }
};

// Sine/cosine coefficient stack: cos_c[k] for k = 0..K (cos_c[0] holds
// a_0/2), sin_c[k] for k = 1..K, each a function of y' stored as a flat
// transverse slab. K = N1/2, with the Nyquist cosine folded into cos_c[K].
struct DNDecomposition {
  GridSpec spec;
  std::vector<std::vector<cplx>> cos_c;
  std::vector<std::vector<cplx>> sin_c;

  int max_mode() const { return (int)cos_c.size() - 1; }
  std::size_t slab() const { return spec.total() / (std::size_t)spec.sizes[0]; }

  static DNDecomposition zeros(const GridSpec& spec) {
    DNDecomposition d;
    d.spec = spec;
    const int K = spec.sizes[0] / 2;
    const std::size_t s = spec.total() / (std::size_t)spec.sizes[0];
    d.cos_c.assign((std::size_t)K + 1, std::vector<cplx>(s, cplx{0.0, 0.0}));
    d.sin_c.assign((std::size_t)K + 1, std::vector<cplx>(s, cplx{0.0, 0.0}));
    return d;
  }

  // Neumann part a_0/2 + sum a_k cos(k y1) on the full torus.
  Field even_field() const { return resum(true); }
  // Dirichlet part sum b_k sin(k y1) on the full torus.
  Field odd_field() const { return resum(false); }

  // Resummation via the exponential layout: A_k cos + B_k sin maps to
  // c_{+-k} = A_k/2 -+ i B_k/2, then one backward FFT along y1 per line.
  // sin((N/2) y1) vanishes at every node, so the Nyquist sine is dropped.
  Field resum(bool even) const {
    Field out(spec);
    const int n1 = spec.sizes[0];
    const int K = max_mode();
    const std::size_t line = slab();
    for (int k = 0; k <= K; ++k) {
      const auto& a = cos_c[(std::size_t)k];
      const auto& b = sin_c[(std::size_t)k];
      for (std::size_t j = 0; j < line; ++j) {
        if (k == 0) {
          if (even) out.values[j] = a[j];
          continue;
        }
        if (k == n1 / 2) {
          if (even) out.values[(std::size_t)k * line + j] = a[j];
          continue;
        }
        cplx ah = even ? 0.5 * a[j] : cplx{0.0, 0.0};
        cplx bh = even ? cplx{0.0, 0.0} : cplx{0.0, -0.5} * b[j];
        out.values[(std::size_t)k * line + j] = ah + bh;
        out.values[(std::size_t)(n1 - k) * line + j] = ah - bh;
      }
    }
    fft_axis(out.values, spec, 0, FFTW_BACKWARD, false);
    return out;
  }
};

// Fourier expansion in y1 of the zero-padded samples; O(N log N) per
// transverse line via the axis FFT. Rejected if the support certificate is
// violated (checked at HalfField construction).
inline DNDecomposition dn_decompose(const HalfField& g) {
  Field padded = g.zero_padded();
  DNDecomposition d = DNDecomposition::zeros(g.spec);
  std::vector<cplx> work = padded.values;
  fft_axis(work, g.spec, 0, FFTW_FORWARD, true);
  const int n1 = g.spec.sizes[0];
  const std::size_t line = d.slab();
  // c_k exp(i k y) + c_-k exp(-i k y) = (c_k + c_-k) cos + i (c_k - c_-k) sin
  for (int k = 0; k <= n1 / 2; ++k) {
    for (std::size_t j = 0; j < line; ++j) {
      cplx cp = work[(std::size_t)k * line + j];
      if (k == 0) {
        d.cos_c[0][j] = cp;
        continue;
      }
      if (k == n1 / 2) {  // Nyquist: exp(-i(N/2)y) sampled equals cos((N/2)y)
        d.cos_c[(std::size_t)k][j] = cp;
        continue;
      }
      cplx cm = work[(std::size_t)(n1 - k) * line + j];
      d.cos_c[(std::size_t)k][j] = cp + cm;
      d.sin_c[(std::size_t)k][j] = cplx{0.0, 1.0} * (cp - cm);
    }
  }
  return d;
}

// Split an arbitrary full-torus field into its sine/cosine families in y1
// (no zero padding). Used for parity-exact test data and H^s(H) norms of
// reflected evolutions.
inline DNDecomposition dn_decompose_periodic(const Field& f) {
  DNDecomposition d = DNDecomposition::zeros(f.spec);
  std::vector<cplx> work = f.values;
  fft_axis(work, f.spec, 0, FFTW_FORWARD, true);
  const int n1 = f.spec.sizes[0];
  const std::size_t line = d.slab();
  for (int k = 0; k <= n1 / 2; ++k) {
    for (std::size_t j = 0; j < line; ++j) {
      if (k == 0) {
        d.cos_c[0][j] = work[j];
        continue;
      }
      if (k == n1 / 2) {
        d.cos_c[(std::size_t)k][j] = work[(std::size_t)(n1 / 2) * line + j];
        continue;
      }
      cplx cp = work[(std::size_t)k * line + j];
      cplx cm = work[(std::size_t)(n1 - k) * line + j];
      d.cos_c[(std::size_t)k][j] = cp + cm;
      d.sin_c[(std::size_t)k][j] = cplx{0.0, 1.0} * (cp - cm);
    }
  }
  return d;
}

// Odd extension of the Dirichlet part: the sine series summed on the torus.
inline Field odd_extend(const DNDecomposition& d) { return d.odd_field(); }
// Even extension of the Neumann part: the cosine series summed on the torus.
inline Field even_extend(const DNDecomposition& d) { return d.even_field(); }

// E[g] = odd extension of g_D plus even extension of g_N.
inline Field extend(const HalfField& g) {
  DNDecomposition d = dn_decompose(g);
  return d.odd_field() + d.even_field();
}

inline Field extend(const DNDecomposition& d) { return d.odd_field() + d.even_field(); }

// Max-norm mismatch of the reconstruction against the half-grid samples.
inline double reconstruction_error(const HalfField& g, const DNDecomposition& d) {
  Field r = d.odd_field() + d.even_field();
  const std::size_t line = d.slab();
  const int n1 = g.spec.sizes[0];
  double worst = 0.0;
  for (int i = 0; i < n1 / 2; ++i)
    for (std::size_t j = 0; j < line; ++j)
      worst = std::max(worst, std::abs(r.values[(std::size_t)i * line + j] - g.values[(std::size_t)i * line + j]));
  return worst;
}

// --- coefficient calculus -------------------------------------------------

// d/dy1 on the series: sin(k y1) -> k cos(k y1) and cos(k y1) -> -k sin(k y1),
// i.e. the Dirichlet family lands in the Neumann one and vice versa.
inline DNDecomposition d1(const DNDecomposition& d) {
  DNDecomposition out = DNDecomposition::zeros(d.spec);
  const std::size_t line = d.slab();
  for (int k = 1; k <= d.max_mode(); ++k)
    for (std::size_t j = 0; j < line; ++j) {
      out.cos_c[(std::size_t)k][j] = (double)k * d.sin_c[(std::size_t)k][j];
      out.sin_c[(std::size_t)k][j] = -(double)k * d.cos_c[(std::size_t)k][j];
    }
  return out;
}

namespace detail {

// Transverse grid: the y' slab of a full grid (n-1 dimensional, or a single
// point when n = 1).
inline GridSpec transverse_spec(const GridSpec& spec) {
  detail::require(spec.n >= 2, "transverse_spec: need n >= 2");
  std::vector<int> sz(spec.sizes.begin() + 1, spec.sizes.end());
  std::vector<double> bx(spec.box.begin() + 1, spec.box.end());
  return GridSpec(sz, bx);
}

template <class Fn>
inline void map_coefficients(const DNDecomposition& in, DNDecomposition& out, Fn&& fn) {
  for (int k = 0; k <= in.max_mode(); ++k) {
    fn(in.cos_c[(std::size_t)k], out.cos_c[(std::size_t)k]);
    if (k >= 1) fn(in.sin_c[(std::size_t)k], out.sin_c[(std::size_t)k]);
  }
}

}  // namespace detail

// Apply a transverse spectral multiplier slabwise (Delta_{y'}, d/dy_j, ...).
template <class SymbolFn>
inline DNDecomposition transverse_multiplier(const DNDecomposition& d, SymbolFn&& symbol) {
  GridSpec tspec = detail::transverse_spec(d.spec);
  DNDecomposition out = DNDecomposition::zeros(d.spec);
  detail::map_coefficients(d, out, [&](const std::vector<cplx>& src, std::vector<cplx>& dst) {
    Field slab(tspec, src);
    Spectrum sp = fft_forward(slab);
    for_each_mode(tspec, [&](std::size_t i, std::span<const int>, std::span<const double> k) {
      sp.coef[i] *= symbol(k);
    });
    dst = fft_inverse(sp).values;
  });
  return out;
}

// Multiply every coefficient line by a function of y' (sampled on the slab).
inline DNDecomposition transverse_scale(const DNDecomposition& d, const std::vector<cplx>& factor) {
  detail::require(factor.size() == d.slab(), "transverse_scale: slab size mismatch");
  DNDecomposition out = DNDecomposition::zeros(d.spec);
  detail::map_coefficients(d, out, [&](const std::vector<cplx>& src, std::vector<cplx>& dst) {
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j] * factor[j];
  });
  return out;
}

inline DNDecomposition dn_add(const DNDecomposition& a, const DNDecomposition& b) {
  DNDecomposition out = a;
  for (int k = 0; k <= a.max_mode(); ++k) {
    for (std::size_t j = 0; j < a.slab(); ++j) {
      out.cos_c[(std::size_t)k][j] += b.cos_c[(std::size_t)k][j];
      out.sin_c[(std::size_t)k][j] += b.sin_c[(std::size_t)k][j];
    }
  }
  return out;
}

// Flattened-Laplacian coefficients alpha = 1 + |grad phi|^2, beta_j = -2
// d_j phi, gamma = -Delta' phi, all functions of y' only.
struct PullbackCoefficients {
  GridSpec tspec;                        // transverse grid carrying the samples
  std::vector<double> alpha;             // >= 1 pointwise
  std::vector<std::vector<double>> beta; // one slab per transverse axis
  std::vector<double> gamma;

  static PullbackCoefficients flat(const GridSpec& tspec) {
    PullbackCoefficients c;
    c.tspec = tspec;
    c.alpha.assign(tspec.total(), 1.0);
    c.beta.assign((std::size_t)tspec.n, std::vector<double>(tspec.total(), 0.0));
    c.gamma.assign(tspec.total(), 0.0);
    return c;
  }

  void validate() const {
    for (double a : alpha) detail::require(a >= 1.0, "PullbackCoefficients: alpha must be >= 1");
  }

  bool is_flat() const {
    for (double a : alpha)
      if (a != 1.0) return false;
    for (const auto& bj : beta)
      for (double b : bj)
        if (b != 0.0) return false;
    for (double g : gamma)
      if (g != 0.0) return false;
    return true;
  }
};

namespace detail {

inline std::vector<cplx> to_cplx(const std::vector<double>& v) {
  std::vector<cplx> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = cplx{v[i], 0.0};
  return out;
}

// Broadcast a transverse slab over the y1 axis.
inline Field broadcast_transverse(const GridSpec& spec, const std::vector<double>& slab) {
  Field out(spec);
  const std::size_t line = spec.total() / (std::size_t)spec.sizes[0];
  detail::require(slab.size() == line, "broadcast_transverse: slab size mismatch");
  for (int i = 0; i < spec.sizes[0]; ++i)
    for (std::size_t j = 0; j < line; ++j) out.values[(std::size_t)i * line + j] = slab[j];
  return out;
}

}  // namespace detail

// hat_Delta applied spectrally to a full-torus field. Derivatives are exact
// on the band; the coefficient products are pointwise, so `warn` reports
// spectral mass beyond the 2/3 band of the inputs when requested.
inline Field hat_laplacian(const Field& g, const PullbackCoefficients& c, double* alias_excess = nullptr) {
  detail::require(g.spec.n >= 2, "hat_laplacian: need n >= 2");
  c.validate();

  if (alias_excess) *alias_excess = band_excess_fraction(g);

  // Delta_{y'} g
  FourierMultiplier lap_t{"Delta_y'", [](std::span<const double> k) {
                            double s = 0.0;
                            for (std::size_t a = 1; a < k.size(); ++a) s += k[a] * k[a];
                            return cplx{-s, 0.0};
                          },
                          {0.0, 0.0}};
  Field out = apply_multiplier(g, lap_t);

  Field d1g = derivative(g, 0);
  Field d11g = derivative(d1g, 0);

  out += hadamard(detail::broadcast_transverse(g.spec, c.alpha), d11g);
  for (int a = 1; a < g.spec.n; ++a)
    out += hadamard(detail::broadcast_transverse(g.spec, c.beta[(std::size_t)a - 1]), derivative(d1g, a));
  out += hadamard(detail::broadcast_transverse(g.spec, c.gamma), d1g);
  return out;
}

// hat_Delta evaluated entirely inside the D/N representation. Even y1-order
// terms stay in their family; the d/dy1 and mixed terms swap families, which
// is exactly the bookkeeping behind the commutation identity.
inline DNDecomposition hat_laplacian_dn(const DNDecomposition& g, const PullbackCoefficients& c) {
  auto lap_t = [](std::span<const double> k) {
    double s = 0.0;
    for (double v : k) s += v * v;
    return cplx{-s, 0.0};
  };
  DNDecomposition out = transverse_multiplier(g, lap_t);

  DNDecomposition d1g = d1(g);
  DNDecomposition d11g = d1(d1g);

  out = dn_add(out, transverse_scale(d11g, detail::to_cplx(c.alpha)));
  for (std::size_t a = 0; a + 1 < (std::size_t)g.spec.n; ++a) {
    auto dj = [a](std::span<const double> k) { return cplx{0.0, k[a]}; };
    out = dn_add(out, transverse_scale(transverse_multiplier(d1g, dj), detail::to_cplx(c.beta[a])));
  }
  out = dn_add(out, transverse_scale(d1g, detail::to_cplx(c.gamma)));
  return out;
}

// --- verification reports --------------------------------------------------

struct CommutationReport {
  double residual_rel = 0.0;   // ||E[hat_Delta g] - hat_Delta E[g]|| / ||hat_Delta g||
  double alias_excess = 0.0;
  double support_leakage = 0.0;  // |hat_Delta g| beyond the support radius, relative
};

// Proposition-style commutation check. Route A extends first and applies
// hat_Delta on the torus; route B applies hat_Delta in the half-space via
// the coefficient calculus and extends the result.
//
// hat_Delta is local, so hat_Delta g must still live inside the certified
// support; leakage there (relative to the field scale) beyond the escape
// tolerance marks data whose support genuinely reaches y1 = pi. Spectral
// ringing sits orders of magnitude below that and is part of the residual.
inline CommutationReport verify_commutation(const HalfField& g, const PullbackCoefficients& c,
                                            double support_escape_tol = 1e-3) {
  CommutationReport rep;

  Field extended = extend(g);
  Field route_a = hat_laplacian(extended, c, &rep.alias_excess);

  DNDecomposition dn = dn_decompose(g);
  DNDecomposition dh = hat_laplacian_dn(dn, c);
  Field h_full = dh.odd_field() + dh.even_field();

  const int n1 = g.spec.sizes[0];
  const std::size_t line = dn.slab();
  double denom_sq = 0.0, scale = 0.0, leak = 0.0;
  for (int i = 0; i < n1 / 2; ++i) {
    double y = g.spec.coord(0, i);
    for (std::size_t j = 0; j < line; ++j) {
      double v = std::abs(h_full.values[(std::size_t)i * line + j]);
      denom_sq += v * v;
      scale = std::max(scale, v);
      if (y >= g.support_radius) leak = std::max(leak, v);
    }
  }
  rep.support_leakage = scale > 0.0 ? leak / scale : leak;
  if (rep.support_leakage > support_escape_tol)
    throw std::invalid_argument("verify_commutation: hat_Delta g escapes the half-space support");

  // Route B: zero-extend the half-grid values of hat_Delta g (identical to
  // re-expanding them in the D/N series and resumming).
  Field route_b(g.spec);
  std::copy(h_full.values.begin(), h_full.values.begin() + (std::ptrdiff_t)(g.spec.total() / 2),
            route_b.values.begin());

  double num = l2_norm(route_a - route_b);
  double den = std::sqrt(denom_sq * g.spec.cell_volume());
  rep.residual_rel = den > 0.0 ? num / den : num;
  return rep;
}

// Commutation check on idealized band-limited D/N data (no support
// constraint): route A extends then differentiates on the torus, route B
// differentiates inside the series calculus and extends; for such data the
// two routes are the same linear algebra up to round-off.
inline double verify_commutation_dn(const DNDecomposition& g, const PullbackCoefficients& c) {
  Field extended = g.odd_field() + g.even_field();
  Field route_a = hat_laplacian(extended, c);
  DNDecomposition dh = hat_laplacian_dn(g, c);
  Field route_b = dh.odd_field() + dh.even_field();
  double den = l2_norm(route_b);
  return den > 0.0 ? l2_norm(route_a - route_b) / den : l2_norm(route_a - route_b);
}

// Parity/derivative relation table: spectral derivative of the resummed
// extension against the resummed derivative series.
struct ParityRelation {
  std::string name;
  double max_error;
};

inline std::vector<ParityRelation> verify_parity_relations(const DNDecomposition& dn) {
  std::vector<ParityRelation> out;
  Field odd = dn.odd_field();
  Field even = dn.even_field();
  DNDecomposition d1dn = d1(dn);
  auto check = [&](const std::string& name, const Field& lhs, const Field& rhs) {
    out.push_back({name, linf_norm(lhs - rhs)});
  };

  // pure transverse derivatives preserve parity; the slab symbol sees only
  // the transverse axes, so full axis a maps to slab axis a - 1
  for (int a = 1; a < dn.spec.n; ++a) {
    auto dj = [a](std::span<const double> k) { return cplx{0.0, k[a - 1]}; };
    std::string ax = std::to_string(a + 1);
    check("d" + ax + " gD_odd = (d" + ax + " gD)_odd", derivative(odd, a), transverse_multiplier(dn, dj).odd_field());
    check("d" + ax + " gN_even = (d" + ax + " gN)_even", derivative(even, a),
          transverse_multiplier(dn, dj).even_field());
    check("d" + ax + ax + " gD_odd = (d" + ax + ax + " gD)_odd", derivative(derivative(odd, a), a),
          transverse_multiplier(transverse_multiplier(dn, dj), dj).odd_field());
    check("d" + ax + ax + " gN_even = (d" + ax + ax + " gN)_even", derivative(derivative(even, a), a),
          transverse_multiplier(transverse_multiplier(dn, dj), dj).even_field());
  }

  // one y1 derivative swaps the parity families
  check("d1 gD_odd = (d1 gD)_even", derivative(odd, 0), d1dn.even_field());
  check("d1 gN_even = (d1 gN)_odd", derivative(even, 0), d1dn.odd_field());

  // two y1 derivatives restore them
  DNDecomposition d11dn = d1(d1dn);
  check("d11 gD_odd = (d11 gD)_odd", derivative(derivative(odd, 0), 0), d11dn.odd_field());
  check("d11 gN_even = (d11 gN)_even", derivative(derivative(even, 0), 0), d11dn.even_field());

  // mixed d_j d_1 swaps the families
  for (int a = 1; a < dn.spec.n; ++a) {
    auto dj = [a](std::span<const double> k) { return cplx{0.0, k[a - 1]}; };
    std::string ax = std::to_string(a + 1);
    check("d" + ax + "d1 gD_odd = (d" + ax + "d1 gD)_even", derivative(derivative(odd, 0), a),
          transverse_multiplier(d1dn, dj).even_field());
    check("d" + ax + "d1 gN_even = (d" + ax + "d1 gN)_odd", derivative(derivative(even, 0), a),
          transverse_multiplier(d1dn, dj).odd_field());
  }
  return out;
}

// H^s norm on the D/N series side: each parity family resummed on the torus
// contributes half its squared torus norm (the mirror copy doubles it).
inline double dn_sobolev_norm(const DNDecomposition& dn, double s, bool homogeneous = false) {
  Field odd = dn.odd_field();
  Field even = dn.even_field();
  double no = homogeneous ? sobolev_norm(odd, s) : sobolev_norm_inhom(odd, s);
  double ne = homogeneous ? sobolev_norm(even, s) : sobolev_norm_inhom(even, s);
  return std::sqrt(0.5 * (no * no + ne * ne));
}

}  // namespace pslab
