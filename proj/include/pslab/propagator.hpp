#pragma once

// Schroedinger evolution: the free torus propagator exp(it Laplacian), exact
// half-space Dirichlet/Neumann propagators by reflection, the commutator
// source of the chart-localized problem, and a trapezoidal Duhamel solver
// whose only error is the quadrature in tau (each propagator factor is a
// spectral multiplier, hence exact).

#include "pslab/halfspace.hpp"

namespace pslab {

enum class BC { Free, Dirichlet, Neumann };

inline const char* bc_name(BC bc) {
  switch (bc) {
    case BC::Free: return "free";
    case BC::Dirichlet: return "dirichlet";
    default: return "neumann";
  }
}

struct TimeGrid {
  double T = 1.0;
  int M = 16;

  TimeGrid() = default;
  TimeGrid(double horizon, int steps) : T(horizon), M(steps) {
    detail::require(T > 0.0, "TimeGrid: horizon must be positive");
    detail::require(M >= 16, "TimeGrid: need at least 16 steps");
  }
  double dt() const { return T / M; }
  double instant(int m) const { return T * m / M; }
};

// u(t) = exp(it Laplacian) f: phase exp(-i t |k|^2) per mode.
inline Field free_evolve(const Field& f, double t) {
  detail::require(f.finite(), "free_evolve: field has non-finite entries");
  Spectrum s = fft_forward(f);
  for_each_mode(f.spec, [&](std::size_t i, std::span<const int>, std::span<const double> k) {
    double kk = 0.0;
    for (double v : k) kk += v * v;
    s.coef[i] *= std::polar(1.0, -t * kk);
  });
  return fft_inverse(s);
}

// Parity symmetrization across y1 = 0 on the torus: index r maps to (N - r)
// mod N. Dirichlet data odd-periodizes, Neumann data even-periodizes.
// y1 = pi has no half-grid source; compact support puts a zero there.
inline Field parity_extend_half(const GridSpec& spec, std::span<const cplx> half_values, BC bc) {
  detail::require(bc != BC::Free, "parity_extend_half: need a boundary condition");
  detail::require(half_values.size() == spec.total() / 2, "parity_extend_half: bad half size");
  Field out(spec);
  const int n1 = spec.sizes[0];
  const std::size_t line = spec.total() / (std::size_t)n1;
  const double sign = bc == BC::Dirichlet ? -1.0 : 1.0;
  for (int r = 0; r < n1 / 2; ++r)
    for (std::size_t j = 0; j < line; ++j) {
      cplx v = half_values[(std::size_t)r * line + j];
      out.values[(std::size_t)r * line + j] = v;
      if (r == 0) {
        if (bc == BC::Dirichlet) out.values[j] = 0.0;  // odd data vanishes at the boundary
        continue;
      }
      out.values[(std::size_t)(n1 - r) * line + j] = sign * v;
    }
  return out;
}

inline Field parity_periodize(const HalfField& g, BC bc) { return parity_extend_half(g.spec, g.values, bc); }

inline HalfField restrict_half(const Field& f, double support_radius, double tol = 1e-10) {
  const std::size_t half = f.spec.total() / 2;
  std::vector<cplx> vals(f.values.begin(), f.values.begin() + (std::ptrdiff_t)half);
  return HalfField::from_samples(f.spec, std::move(vals), support_radius, tol);
}

struct HalfEvolveResult {
  HalfField state;
  double image_overlap = 0.0;  // mass near y1 = pi: reflection images touching
};

// Method of images: extend with the matching parity, evolve freely, restrict.
// The support certificate is re-measured on the output; spreading past the
// far mirror shows up as image_overlap.
inline HalfEvolveResult halfspace_evolve(const HalfField& g, double t, BC bc) {
  Field ext = parity_periodize(g, bc);
  Field evolved = free_evolve(ext, t);
  const int n1 = g.spec.sizes[0];
  const std::size_t line = g.spec.total() / (std::size_t)n1;
  double overlap = 0.0;
  // mass beyond the certified support means the reflection images interact
  for (int r = 0; r < n1 / 2; ++r) {
    if (g.spec.coord(0, r) < g.support_radius) continue;
    for (std::size_t j = 0; j < line; ++j)
      overlap = std::max(overlap, std::abs(evolved.values[(std::size_t)r * line + j]));
  }
  std::vector<cplx> vals(evolved.values.begin(), evolved.values.begin() + (std::ptrdiff_t)(g.spec.total() / 2));
  HalfField out{g.spec, std::move(vals), g.support_radius};
  return {std::move(out), overlap};
}

// Interval picture for data that is not compactly supported: project onto the
// parity class and evolve on the torus. sin/cos(k y1) modes are exact
// eigenfunctions of the Dirichlet/Neumann interval Laplacian.
inline Field parity_project(const Field& f, BC bc) {
  detail::require(bc != BC::Free, "parity_project: need a boundary condition");
  Field out(f.spec);
  const int n1 = f.spec.sizes[0];
  const std::size_t line = f.spec.total() / (std::size_t)n1;
  const double sign = bc == BC::Dirichlet ? -1.0 : 1.0;
  for (int r = 0; r < n1; ++r) {
    int rm = (n1 - r) % n1;
    for (std::size_t j = 0; j < line; ++j)
      out.values[(std::size_t)r * line + j] =
          0.5 * (f.values[(std::size_t)r * line + j] + sign * f.values[(std::size_t)rm * line + j]);
  }
  return out;
}

inline Field interval_evolve(const Field& parity_data, double t) { return free_evolve(parity_data, t); }

// L2 norm over the half-grid y1 in [0, pi).
inline double half_l2_norm(const Field& f) {
  const std::size_t half = f.spec.total() / 2;
  double s = 0.0;
  for (std::size_t i = 0; i < half; ++i) s += std::norm(f.values[i]);
  return std::sqrt(s * f.spec.cell_volume());
}

// Trace values at the boundary plane y1 = 0.
inline double boundary_trace_max(const Field& f) {
  const std::size_t line = f.spec.total() / (std::size_t)f.spec.sizes[0];
  double m = 0.0;
  for (std::size_t j = 0; j < line; ++j) m = std::max(m, std::abs(f.values[j]));
  return m;
}

// Normal derivative at y1 = 0, computed spectrally.
inline double boundary_normal_derivative_max(const Field& f) { return boundary_trace_max(derivative(f, 0)); }

// --- evolution records ------------------------------------------------------

struct EvolutionRecord {
  TimeGrid timegrid;
  BC bc = BC::Free;
  std::vector<Field> snapshots;   // instants 0..M
  std::vector<double> mass_log;   // L2 norm per instant (half-grid for D/N)

  double mass_drift() const {
    double lo = mass_log[0], hi = mass_log[0];
    for (double m : mass_log) {
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    return mass_log[0] > 0.0 ? (hi - lo) / mass_log[0] : hi - lo;
  }
};

// Homogeneous evolution record. For D/N the snapshots hold the parity
// extension on the full torus; callers restrict when they need the half.
inline EvolutionRecord evolve_record(const Field& data, const TimeGrid& tg, BC bc) {
  EvolutionRecord rec;
  rec.timegrid = tg;
  rec.bc = bc;
  Field carrier = bc == BC::Free ? data : parity_project(data, bc);
  Spectrum base = fft_forward(carrier);
  for (int m = 0; m <= tg.M; ++m) {
    Spectrum s = base;
    double t = tg.instant(m);
    for_each_mode(carrier.spec, [&](std::size_t i, std::span<const int>, std::span<const double> k) {
      double kk = 0.0;
      for (double v : k) kk += v * v;
      s.coef[i] *= std::polar(1.0, -t * kk);
    });
    Field snap = fft_inverse(s);
    rec.mass_log.push_back(bc == BC::Free ? l2_norm(snap) : half_l2_norm(snap));
    rec.snapshots.push_back(std::move(snap));
  }
  return rec;
}

// Streaming variant: one forward transform, one inverse per instant, no
// snapshot storage. visit(m, t, field) is called in order.
template <class Visitor>
inline void evolve_stream(const Field& data, const TimeGrid& tg, BC bc, Visitor&& visit) {
  Field carrier = bc == BC::Free ? data : parity_project(data, bc);
  Spectrum base = fft_forward(carrier);
  std::vector<double> kk(base.coef.size());
  for_each_mode(carrier.spec, [&](std::size_t i, std::span<const int>, std::span<const double> k) {
    double s = 0.0;
    for (double v : k) s += v * v;
    kk[i] = s;
  });
  Spectrum s = base;
  for (int m = 0; m <= tg.M; ++m) {
    double t = tg.instant(m);
    for (std::size_t i = 0; i < s.coef.size(); ++i) s.coef[i] = base.coef[i] * std::polar(1.0, -t * kk[i]);
    visit(m, t, fft_inverse(s));
  }
}

// --- commutator source ------------------------------------------------------

// [H, chi] u with H = -Laplacian: the source appearing when a cutoff is
// moved through the equation.
//   primary form:  -(Delta chi) u - 2 grad chi . grad u
//   divergence form: (Delta chi) u - 2 div((grad chi) u)
// With dealiased inputs the spectral product rule is exact and the two
// forms agree to round-off; without it they differ by the fold-over of the
// factors' spectral tails.
struct CommutatorSourceForms {
  Field primary;
  Field divergence;
};

inline CommutatorSourceForms commutator_source_forms(const Field& u, const Field& chi, bool dealias = true) {
  detail::require(u.spec == chi.spec, "commutator_source: grid mismatch");
  Field ud = dealias ? project_product_band(u) : u;
  Field chid = dealias ? project_product_band(chi) : chi;
  Field lap_chi = laplacian(chid);
  Field primary = cplx{-1.0, 0.0} * hadamard(lap_chi, ud);
  Field div_form = hadamard(lap_chi, ud);
  for (int a = 0; a < u.spec.n; ++a) {
    Field grad_chi_a = derivative(chid, a);
    primary -= cplx{2.0, 0.0} * hadamard(grad_chi_a, derivative(ud, a));
    div_form -= cplx{2.0, 0.0} * derivative(hadamard(grad_chi_a, ud), a);
  }
  return {std::move(primary), std::move(div_form)};
}

inline Field commutator_source(const Field& u, const Field& chi, bool dealias = true) {
  return commutator_source_forms(u, chi, dealias).primary;
}

// --- Duhamel ------------------------------------------------------------

// Solve i du/dt + Laplacian u = F(t) on the torus with trapezoidal
// quadrature in tau:
//   u_{m+1} = exp(i dt Laplacian) (u_m - i dt/2 F_m) - i dt/2 F_{m+1}.
// Unrolling the recurrence reproduces exactly the trapezoid sum of
//   u(t) = exp(it Laplacian) u0 - i int_0^t exp(i(t-tau) Laplacian) F dtau.
template <class SourceFn>
  requires std::invocable<SourceFn&, int>
inline EvolutionRecord duhamel(const Field& u0, SourceFn&& source, const TimeGrid& tg) {
  detail::require(u0.finite(), "duhamel: non-finite initial data");
  EvolutionRecord rec;
  rec.timegrid = tg;
  rec.bc = BC::Free;
  const double dt = tg.dt();
  const cplx half_step{0.0, -0.5 * dt};  // -i dt/2

  Field u = u0;
  Field f_curr = source(0);
  detail::require(f_curr.finite(), "duhamel: non-finite source");
  rec.snapshots.push_back(u);
  rec.mass_log.push_back(l2_norm(u));
  for (int m = 0; m < tg.M; ++m) {
    Field staged = u + half_step * f_curr;
    Field pushed = free_evolve(staged, dt);
    Field f_next = source(m + 1);
    detail::require(f_next.finite(), "duhamel: non-finite source");
    u = pushed + half_step * f_next;
    f_curr = std::move(f_next);
    rec.snapshots.push_back(u);
    rec.mass_log.push_back(l2_norm(u));
  }
  return rec;
}

inline EvolutionRecord duhamel(const Field& u0, const std::vector<Field>& sources, const TimeGrid& tg) {
  detail::require((int)sources.size() == tg.M + 1, "duhamel: need one source per instant");
  return duhamel(u0, [&](int m) { return sources[(std::size_t)m]; }, tg);
}

}  // namespace pslab
