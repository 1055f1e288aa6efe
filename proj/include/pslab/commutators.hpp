#pragma once

// Fractional commutators and their supporting machinery: [D^s, f], [R_j, f],
// the weight commutator [<x>^a, D^{-1/2} grad] with its two-term
// decomposition, the principal-value integral realization of D^s, sampled
// Lipschitz norms and the Peetre K-functional.

#include <algorithm>
#include <random>

#include "pslab/estimates.hpp"

namespace pslab {

// --- spectral commutators -----------------------------------------------

// [D^s, f] g = D^s(fg) - f D^s g.
inline Field commutator_Ds(const Field& f, const Field& g, double s, double* alias_excess = nullptr) {
  detail::require(s > 0.0 && s < 1.0, "commutator_Ds: s in (0,1)");
  if (alias_excess) *alias_excess = std::max(band_excess_fraction(f), band_excess_fraction(g));
  return fractional_laplacian(hadamard(f, g), s) - hadamard(f, fractional_laplacian(g, s));
}

// [R_j, f] g = R_j(fg) - f R_j g.
inline Field commutator_riesz(const Field& f, const Field& g, int axis) {
  return riesz(hadamard(f, g), axis) - hadamard(f, riesz(g, axis));
}

// [w, A] g for a pointwise weight w and multiplier A.
inline Field commutator_weight_multiplier(const std::vector<double>& w, const Field& g,
                                          const FourierMultiplier& m) {
  Field wg = g;
  for (std::size_t i = 0; i < wg.values.size(); ++i) wg.values[i] *= w[i];
  Field lhs = apply_multiplier(wg, m);
  Field rhs = apply_multiplier(g, m);
  for (std::size_t i = 0; i < rhs.values.size(); ++i) rhs.values[i] *= w[i];
  return rhs - lhs;  // w A g - A (w g)
}

// --- exponent bookkeeping for the weighted commutator estimate -----------

// 1/2 < a < a0 <= 1 with
//   1/q = 1/p - (a - 1/2)/n = 1/p0 - (a0 - 1/2)/n,
//   1/q = 1/r - a/n,  1/r0 = 1/2 + (a0 - 1/2)/n,
// all exponents in (1, inf), held in exact rationals.
struct CommutatorExponents {
  int n;
  Rational a, a0;
  Rational inv_p, inv_p0, inv_q, inv_r, inv_r0;

  CommutatorExponents(int dim, Rational aa, Rational aa0, Rational invq) : n(dim), a(aa), a0(aa0), inv_q(invq) {
    detail::require(Rational(1, 2) < a && a < a0 && a0 <= Rational(1), "CommutatorExponents: need 1/2 < a < a0 <= 1");
    inv_p = inv_q + (a - Rational(1, 2)) / Rational(n);
    inv_p0 = inv_q + (a0 - Rational(1, 2)) / Rational(n);
    inv_r = inv_q + a / Rational(n);
    inv_r0 = Rational(1, 2) + (a0 - Rational(1, 2)) / Rational(n);
    for (Rational inv : {inv_p, inv_p0, inv_q, inv_r, inv_r0})
      detail::require(Rational(0) < inv && inv < Rational(1), "CommutatorExponents: exponent outside (1, inf)");
    // defining relations, re-checked exactly
    detail::require(inv_q == inv_p - (a - Rational(1, 2)) / Rational(n), "CommutatorExponents: p relation");
    detail::require(inv_q == inv_p0 - (a0 - Rational(1, 2)) / Rational(n), "CommutatorExponents: p0 relation");
    detail::require(inv_q == inv_r - a / Rational(n), "CommutatorExponents: r relation");
  }

  double p() const { return 1.0 / inv_p.value(); }
  double p0() const { return 1.0 / inv_p0.value(); }
  double q() const { return 1.0 / inv_q.value(); }
  double r() const { return 1.0 / inv_r.value(); }
  double r0() const { return 1.0 / inv_r0.value(); }
};

struct WeightCommutatorResult {
  std::vector<Field> direct;         // [<x>^a, D^{-1/2} d_j] f per axis
  std::vector<Field> decomposition;  // ([<x>^a, R_j] D^{1/2} + R_j [<x>^a, D^{1/2}]) f
  double decomposition_err = 0.0;    // pointwise agreement of the two routes
  RatioMember estimate;              // lhs/rhs of the weighted inequality
};

// Direct evaluation of [<x>^a, D^{-1/2} grad] f against the proof's two-term
// split through R D^{1/2}. Since D^{-1/2} d_j and R_j D^{1/2} differ by a
// sign, direct_j = -([w,R_j] D^{1/2} f + R_j [w, D^{1/2}] f).
inline WeightCommutatorResult commutator_weight_grad(const Field& f, const CommutatorExponents& exps) {
  WeightCommutatorResult res;
  const GridSpec& spec = f.spec;
  const double a = exps.a.value();
  const double a0 = exps.a0.value();
  std::vector<double> w = weight_values(spec, a);

  Field dhalf_f = fractional_laplacian(f, 0.5);
  for (int axis = 0; axis < spec.n; ++axis) {
    FourierMultiplier grad_dm{"D^-1/2 d_" + std::to_string(axis + 1),
                              [axis](std::span<const double> k) {
                                return cplx{0.0, k[axis] / std::sqrt(norm_k(k))};
                              },
                              {0.0, 0.0}};
    res.direct.push_back(commutator_weight_multiplier(w, f, grad_dm));

    Field term1 = commutator_weight_multiplier(w, dhalf_f, FourierMultiplier{
        "R_" + std::to_string(axis + 1),
        [axis](std::span<const double> k) { return cplx{0.0, -k[axis] / norm_k(k)}; },
        {0.0, 0.0}});
    Field term2 = riesz(commutator_weight_multiplier(w, f, fractional_symbol(0.5)), axis);
    Field dec = cplx{-1.0, 0.0} * (term1 + term2);
    res.decomposition_err = std::max(res.decomposition_err, linf_norm(res.direct.back() - dec));
    res.decomposition.push_back(std::move(dec));
  }

  // inequality sides: vector l2 of the commutator components against
  // ||D^1/2(<x>^{a0} f)||_q + ||f||_p + ||f||_{p0}
  double lhs = 0.0;
  for (const Field& c : res.direct) {
    double nq = lp_norm(c, exps.q());
    lhs += nq * nq;
  }
  lhs = std::sqrt(lhs);
  Field wf = weight_multiply(f, a0);
  double rhs = lp_norm(fractional_laplacian(wf, 0.5), exps.q()) + lp_norm(f, exps.p()) + lp_norm(f, exps.p0());
  res.estimate.label = "weight-grad commutator";
  res.estimate.params = {{"a", a}, {"a0", a0}, {"q", exps.q()}};
  res.estimate.lhs = lhs;
  res.estimate.rhs = rhs;
  res.estimate.ratio = rhs > 0.0 ? lhs / rhs : 0.0;
  return res;
}

// --- principal-value realization of D^s ----------------------------------

// Normalization C(n,s) = ( int (1 - cos z_1) / |z|^{n+s} dz )^{-1}, computed
// by quadrature: Taylor panel at the origin, Simpson in the middle, and an
// integration-by-parts tail.
struct QuadratureSettings {
  double origin_cut = 1e-3;
  double tail_cut = 400.0;
  int panels = 200000;
};

inline double singular_normalization_inverse(int n, double s, const QuadratureSettings& qs = {}) {
  detail::require(n == 1 || n == 2, "singular_normalization: n = 1 or 2");
  detail::require(s > 0.0 && s < 1.0, "singular_normalization: s in (0,1)");
  const double R = qs.tail_cut;

  auto simpson = [&](auto&& fn, double lo, double hi, int panels) {
    double h = (hi - lo) / panels;
    double acc = fn(lo) + fn(hi);
    for (int i = 1; i < panels; ++i) acc += fn(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
  };

  if (n == 1) {
    // 2 int_0^inf (1 - cos t) t^{-1-s} dt; substituting t = u^2 removes the
    // origin singularity entirely
    double middle = simpson(
        [&](double u) { return u > 0.0 ? 2.0 * (1.0 - std::cos(u * u)) * std::pow(u, -1.0 - 2.0 * s) : 0.0; },
        0.0, std::sqrt(R), qs.panels);
    // tail: int t^{-1-s} = R^{-s}/s; the cosine part by parts twice
    double g = std::pow(R, -1.0 - s);
    double gp = -(1.0 + s) * std::pow(R, -2.0 - s);
    double gpp = (1.0 + s) * (2.0 + s) * std::pow(R, -3.0 - s);
    double cos_tail = -std::sin(R) * g - std::cos(R) * gp + std::sin(R) * gpp;
    double tail = std::pow(R, -s) / s - cos_tail;
    return 2.0 * (middle + tail);
  }

  // n = 2: 2 pi int_0^inf (1 - J0(r)) r^{-1-s} dr, same substitution
  double middle = simpson(
      [&](double u) { return u > 0.0 ? 2.0 * (1.0 - std::cyl_bessel_j(0, u * u)) * std::pow(u, -1.0 - 2.0 * s) : 0.0; },
      0.0, std::sqrt(R), qs.panels);
  // beyond R: 1 - J0 ~ 1 with an O(r^{-1/2}) oscillation folded into the
  // error budget of the coarse tail
  double tail = std::pow(R, -s) / s;
  return 2.0 * pi * (middle + tail);
}

inline double singular_normalization(int n, double s, const QuadratureSettings& qs = {}) {
  return 1.0 / singular_normalization_inverse(n, s, qs);
}

struct SingularKernelConfig {
  double s = 0.5;
  double epsilon = 0.0;     // PV cutoff, >= grid spacing
  double reach = 0.0;       // truncation radius R of the offset sum
  double normalization = 0.0;  // C(n,s); computed on demand when <= 0

  static SingularKernelConfig for_grid(const GridSpec& spec, double s, double eps_cells = 1.0,
                                       double reach_boxes = 16.0) {
    SingularKernelConfig c;
    c.s = s;
    double h = spec.spacing(0);
    for (int a = 1; a < spec.n; ++a) h = std::max(h, spec.spacing(a));
    c.epsilon = eps_cells * h;
    c.reach = reach_boxes * spec.box[0];
    c.normalization = singular_normalization(spec.n, s);
    return c;
  }
};

// D^s h by the principal-value sum
//   C(n,s) sum_{eps <= |y| <= R} (h(x) - h(x+y)) K(y) dy
// with +-y paired (killing the odd near-singularity), a Taylor correction
// for the omitted |y| < eps ball (its Laplacian factor from centered finite
// differences, keeping the route independent of the spectral path), and the
// analytic (h(x) - mean) far-field beyond R. In 1d the kernel mass of every
// cell is integrated exactly, so the quadrature error carries only the
// variation of h; in 2d the midpoint value stands in.
inline Field singular_integral_Ds(const Field& h, const SingularKernelConfig& cfg) {
  const GridSpec& spec = h.spec;
  detail::require(spec.n <= 2, "singular_integral_Ds: 1d or 2d grids only");
  for (int a = 0; a < spec.n; ++a) detail::require(spec.sizes[a] <= 128, "singular_integral_Ds: grid too large");
  double hmin = spec.spacing(0);
  for (int a = 1; a < spec.n; ++a) hmin = std::min(hmin, spec.spacing(a));
  detail::require(cfg.epsilon >= hmin, "singular_integral_Ds: epsilon below grid spacing");
  const double C = cfg.normalization > 0.0 ? cfg.normalization : singular_normalization(spec.n, cfg.s);
  const double cell = spec.cell_volume();
  const double sigma = spec.n == 1 ? 2.0 : 2.0 * pi;

  // offset list over the half lattice (pair +-y)
  struct Offset {
    long long cells[2];
    double weight;  // kernel mass attached to the cell
  };
  std::vector<Offset> offsets;
  double eps_eff = cfg.epsilon, reach_eff = cfg.reach;
  if (spec.n == 1) {
    const double dy = spec.spacing(0);
    long long j_min = std::max<long long>(1, (long long)std::llround(cfg.epsilon / dy));
    long long j_max = (long long)std::floor(cfg.reach / dy);
    eps_eff = (j_min - 0.5) * dy;
    reach_eff = (j_max + 0.5) * dy;
    for (long long j = j_min; j <= j_max; ++j) {
      double lo = (j - 0.5) * dy, hi = (j + 0.5) * dy, mid = j * dy;
      // the paired difference factor is ~ y^2 near the origin, so weight by
      // the exact y^2-moment of the kernel over the cell; far out this
      // reduces to the plain cell mass
      double mass = (std::pow(hi, 2.0 - cfg.s) - std::pow(lo, 2.0 - cfg.s)) / ((2.0 - cfg.s) * mid * mid);
      offsets.push_back({{j, 0}, mass});
    }
  } else {
    auto push_offset = [&](long long c0, long long c1) {
      double y0 = c0 * spec.spacing(0);
      double y1 = c1 * spec.spacing(1);
      double r = std::sqrt(y0 * y0 + y1 * y1);
      if (r < cfg.epsilon || r > cfg.reach) return;
      offsets.push_back({{c0, c1}, std::pow(r, -(double)spec.n - cfg.s) * cell});
    };
    long long max0 = (long long)std::ceil(cfg.reach / spec.spacing(0));
    long long max1 = (long long)std::ceil(cfg.reach / spec.spacing(1));
    for (long long c1 = 1; c1 <= max1; ++c1) push_offset(0, c1);  // half plane: c0 = 0, c1 > 0
    for (long long c0 = 1; c0 <= max0; ++c0)
      for (long long c1 = -max1; c1 <= max1; ++c1) push_offset(c0, c1);
  }

  const cplx mu = mean(h);
  const double far_factor = sigma * std::pow(reach_eff, -cfg.s) / cfg.s;

  Field out(spec);
  const int n0 = spec.sizes[0];
  const int n1 = spec.n == 2 ? spec.sizes[1] : 1;
  auto at = [&](long long i0, long long i1) -> const cplx& {
    i0 %= n0;
    if (i0 < 0) i0 += n0;
    i1 %= n1;
    if (i1 < 0) i1 += n1;
    return h.values[(std::size_t)i0 * (std::size_t)n1 + (std::size_t)i1];
  };

  for (int i0 = 0; i0 < n0; ++i0)
    for (int i1 = 0; i1 < n1; ++i1) {
      cplx hx = at(i0, i1);
      cplx acc{0.0, 0.0};
      for (const Offset& o : offsets)
        acc += o.weight * (2.0 * hx - at(i0 + o.cells[0], i1 + o.cells[1]) - at(i0 - o.cells[0], i1 - o.cells[1]));
      // finite-difference Laplacian for the omitted origin ball
      cplx lap{0.0, 0.0};
      lap += (at(i0 + 1, i1) - 2.0 * hx + at(i0 - 1, i1)) / (spec.spacing(0) * spec.spacing(0));
      if (spec.n == 2) lap += (at(i0, i1 + 1) - 2.0 * hx + at(i0, i1 - 1)) / (spec.spacing(1) * spec.spacing(1));
      cplx near = -lap / (2.0 * spec.n) * sigma * std::pow(eps_eff, 2.0 - cfg.s) / (2.0 - cfg.s);
      cplx far = (hx - mu) * far_factor;
      out.values[(std::size_t)i0 * (std::size_t)n1 + (std::size_t)i1] = C * (acc + near + far);
    }
  return out;
}

// --- Lipschitz norm ----------------------------------------------------

// Sampled lower bound of sup |f(x)-f(y)| / |x-y|^alpha: all axis-aligned
// pairs at dyadic distances h, 2h, ..., box/4 plus random pairs, distances in
// the min-image metric.
inline double lipschitz_norm(const Field& f, double alpha, int random_pairs = 1000, unsigned seed = 2468) {
  detail::require(alpha > 0.0 && alpha <= 1.0, "lipschitz_norm: alpha in (0,1]");
  const GridSpec& spec = f.spec;
  double best = 0.0;
  for (int axis = 0; axis < spec.n; ++axis) {
    for (int cells = 1; cells * spec.spacing(axis) <= spec.box[axis] / 4.0 + 1e-12; cells *= 2) {
      std::vector<int> off(spec.n, 0);
      off[axis] = cells;
      Field shifted = roll(f, off);
      double dist = cells * spec.spacing(axis);
      for (std::size_t i = 0; i < f.values.size(); ++i)
        best = std::max(best, std::abs(f.values[i] - shifted.values[i]) / std::pow(dist, alpha));
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, f.values.size() - 1);
  IndexWalker w(spec);
  std::vector<std::vector<int>> digits(f.values.size(), std::vector<int>(spec.n));
  for (std::size_t i = 0; i < f.values.size(); ++i, w.step()) digits[i] = w.digits;
  for (int t = 0; t < random_pairs; ++t) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    double d2 = 0.0;
    for (int a = 0; a < spec.n; ++a) {
      double d = std::abs(spec.coord(a, digits[i][a]) - spec.coord(a, digits[j][a]));
      d = std::min(d, spec.box[a] - d);
      d2 += d * d;
    }
    if (d2 <= 0.0) continue;
    best = std::max(best, std::abs(f.values[i] - f.values[j]) / std::pow(d2, 0.5 * alpha));
  }
  return best;
}

// Riesz commutator ratio sweep against the Lipschitz bound:
// ||[R_j,f]g||_q / (||f||_{Lip alpha} ||g||_p) with 1/q = 1/p - alpha/n.
inline RatioReport commutator_riesz_sweep(const std::vector<std::pair<Field, Field>>& family, int axis,
                                          double alpha, double p) {
  detail::require(!family.empty(), "commutator_riesz_sweep: empty family");
  const int n = family[0].first.spec.n;
  double inv_q = 1.0 / p - alpha / n;
  detail::require(inv_q > 0.0, "commutator_riesz_sweep: exponent relation leaves q = inf");
  double q = 1.0 / inv_q;

  RatioReport rep;
  rep.inequality = "riesz commutator (alpha=" + std::to_string(alpha) + ")";
  rep.family = "pairs[" + std::to_string(family.size()) + "]";
  rep.metadata = {{"alpha", alpha}, {"p", p}, {"q", q}};
  int idx = 0;
  for (const auto& [f, g] : family) {
    RatioMember m;
    m.label = "pair " + std::to_string(idx++);
    m.lhs = lp_norm(commutator_riesz(f, g, axis), q);
    m.rhs = lipschitz_norm(f, alpha) * lp_norm(g, p);
    rep.push(std::move(m));
  }
  return rep;
}

// --- Peetre K-functional -----------------------------------------------

// Mode table for sharp-cutoff splittings f = P_{>L} f + P_{<=L} f.
struct KFunctionalTable {
  std::vector<double> kappa;    // sorted |k|
  std::vector<double> tail_l2;  // sum of |c|^2 strictly above kappa[i]
  std::vector<double> low_h2;   // sum of |k|^4 |c|^2 up to kappa[i]
  double total_l2 = 0.0;
  double total_h2 = 0.0;

  static KFunctionalTable build(const Field& f) {
    Spectrum sp = fft_forward(f);
    std::vector<std::pair<double, double>> modes;  // (|k|, |c|^2)
    for_each_mode(f.spec, [&](std::size_t i, std::span<const int>, std::span<const double> k) {
      modes.emplace_back(norm_k(k), std::norm(sp.coef[i]));
    });
    std::sort(modes.begin(), modes.end());
    KFunctionalTable t;
    t.kappa.reserve(modes.size());
    double low2 = 0.0;
    for (auto& [kap, e] : modes) {
      low2 += e * std::pow(kap, 4.0);
      t.kappa.push_back(kap);
      t.low_h2.push_back(low2);
      t.total_l2 += e;
    }
    t.total_h2 = low2;
    t.tail_l2.resize(modes.size());
    double tail = 0.0;
    for (std::size_t i = modes.size(); i-- > 0;) {
      tail += modes[i].second;
      t.tail_l2[i] = tail - modes[i].second;  // strictly above kappa[i]
    }
    // rescale to integral norms: volume factor of the Fourier-series Parseval
    return t;
  }

  // K(lambda) upper bound: min over cutting after each sorted mode (plus the
  // all-low / all-high splittings), volume factor applied at the end.
  double evaluate(double lambda, double volume) const {
    double best = std::min(std::sqrt(total_l2), lambda * std::sqrt(total_h2));
    for (std::size_t i = 0; i < kappa.size(); ++i) {
      double v = std::sqrt(tail_l2[i]) + lambda * std::sqrt(low_h2[i]);
      best = std::min(best, v);
    }
    return best * std::sqrt(volume);
  }
};

inline double k_functional(const Field& f, double lambda) {
  detail::require(lambda > 0.0, "k_functional: lambda must be positive");
  return KFunctionalTable::build(f).evaluate(lambda, f.spec.volume());
}

// Dyadic sampling of K plus the real-interpolation integral
//   ( int (lambda^{-s/2} K(lambda,f))^2 dlambda/lambda )^{1/2}
// with analytic tails K ~ lambda ||f||_{H2} below and K ~ ||f||_{L2} above.
struct KFunctionalCurve {
  std::vector<double> lambda;
  std::vector<double> K;

  double interpolation_norm(double s) const {
    detail::require(lambda.size() >= 2, "interpolation_norm: need a lambda grid");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < lambda.size(); ++i) {
      double l0 = lambda[i], l1 = lambda[i + 1];
      double g0 = std::pow(l0, -s) * K[i] * K[i];
      double g1 = std::pow(l1, -s) * K[i + 1] * K[i + 1];
      acc += 0.5 * (g0 + g1) * std::log(l1 / l0);
    }
    // tails: K <= lambda ||f||_{H2} as lambda -> 0, K <= ||f||_{L2} at the top
    double slope = K.front() / lambda.front();
    acc += slope * slope * std::pow(lambda.front(), 2.0 - s) / (2.0 - s);
    double cap = K.back();
    acc += cap * cap * std::pow(lambda.back(), -s) / s;
    return std::sqrt(acc);
  }
};

inline KFunctionalCurve k_functional_curve(const Field& f, int points = 64) {
  KFunctionalTable table = KFunctionalTable::build(f);
  double kmax = f.spec.max_wavenumber();
  double kmin = f.spec.min_wavenumber();
  // lambda spans the transition region [1/kmax^2, 1/kmin^2] with margin
  double lo = 0.125 / (kmax * kmax), hi = 8.0 / (kmin * kmin);
  KFunctionalCurve c;
  for (int i = 0; i < points; ++i) {
    double l = lo * std::pow(hi / lo, (double)i / (points - 1));
    c.lambda.push_back(l);
    c.K.push_back(table.evaluate(l, f.spec.volume()));
  }
  return c;
}

}  // namespace pslab
