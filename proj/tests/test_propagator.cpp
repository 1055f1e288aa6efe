#include <catch2/catch_amalgamated.hpp>

#include "pslab/propagator.hpp"
#include "pslab/random_fields.hpp"

using namespace pslab;

namespace {

double rel_err(const Field& a, const Field& b) {
  double den = l2_norm(b);
  return den > 0.0 ? l2_norm(a - b) / den : l2_norm(a - b);
}

// Slow interval sine-transform evolution: direct O(N^2) sums in y1 per
// transverse line, spectral only across y'. Independent of the image-method
// path through the full-grid FFT.
Field dirichlet_series_evolve(const HalfField& g, double t) {
  const GridSpec& spec = g.spec;
  const int n1 = spec.sizes[0];
  const std::size_t line = spec.total() / (std::size_t)n1;
  GridSpec tspec({spec.sizes[1]}, {spec.box[1]});

  // analysis: B_k(y') by direct sine sums over the half-grid
  std::vector<std::vector<cplx>> B((std::size_t)n1 / 2, std::vector<cplx>(line, cplx{0.0, 0.0}));
  for (int k = 1; k < n1 / 2; ++k)
    for (int r = 1; r < n1 / 2; ++r) {
      double s = std::sin(k * spec.coord(0, r)) * (4.0 / n1);
      for (std::size_t j = 0; j < line; ++j) B[(std::size_t)k][j] += s * g.values[(std::size_t)r * line + j];
    }

  // transverse spectrum of each coefficient line, phases, resum
  Field out(spec);
  for (int k = 1; k < n1 / 2; ++k) {
    Field slab(tspec, B[(std::size_t)k]);
    Spectrum sp = fft_forward(slab);
    for_each_mode(tspec, [&](std::size_t i, std::span<const int>, std::span<const double> kk) {
      double omega = (double)k * k + kk[0] * kk[0];
      sp.coef[i] *= std::polar(1.0, -t * omega);
    });
    Field evolved = fft_inverse(sp);
    for (int r = 0; r < n1 / 2; ++r) {
      double s = std::sin(k * spec.coord(0, r));
      for (std::size_t j = 0; j < line; ++j) out.values[(std::size_t)r * line + j] += s * evolved.values[j];
    }
  }
  return out;  // upper half left at zero; only [0, pi) is compared
}

}  // namespace

TEST_CASE("free evolution basics") {
  GridSpec spec = GridSpec::cubic(2, 32);
  Field f = random_band_limited(spec, 8, 3);
  SECTION("t = 0 is the identity") { REQUIRE(rel_err(free_evolve(f, 0.0), f) < 1e-14); }
  SECTION("plane waves pick up the dispersive phase") {
    Field pw = Field::sample(spec, [](std::span<const double> x) { return std::polar(1.0, 2.0 * x[0] + x[1]); });
    Field expect = std::polar(1.0, -0.7 * 5.0) * pw;
    REQUIRE(rel_err(free_evolve(pw, 0.7), expect) < 1e-12);
  }
  SECTION("unitarity") {
    REQUIRE(std::abs(l2_norm(free_evolve(f, 0.37)) - l2_norm(f)) < 1e-12 * l2_norm(f));
  }
  SECTION("group law") {
    Field two_step = free_evolve(free_evolve(f, 0.2), 0.5);
    REQUIRE(rel_err(two_step, free_evolve(f, 0.7)) < 1e-12);
  }
}

TEST_CASE("free evolution matches the closed-form gaussian") {
  GridSpec spec = GridSpec::cubic(2, 64);
  const double sigma = 0.25, t = 0.05;
  Field f = gaussian_field(spec, sigma);
  Field evolved = free_evolve(f, t);
  cplx denom{sigma * sigma, 2.0 * t};
  cplx amp = sigma * sigma / denom;  // (sigma^2 / (sigma^2 + 2it))^{n/2}, n = 2
  Field expect = Field::sample(spec, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (int a = 0; a < 2; ++a) {
      double d = x[a] - pi;
      r2 += d * d;
    }
    return amp * std::exp(-0.5 * r2 / denom);
  });
  REQUIRE(rel_err(evolved, expect) < 1e-6);
}

TEST_CASE("evolution record keeps mass constant") {
  GridSpec spec = GridSpec::cubic(2, 32);
  Field f = random_band_limited(spec, 8, 5);
  EvolutionRecord rec = evolve_record(f, TimeGrid(1.0, 32), BC::Free);
  REQUIRE(rec.mass_drift() < 1e-10);
}

TEST_CASE("halfspace evolution: sine mode phases and zero trace") {
  GridSpec spec = GridSpec::cubic(2, 64);
  Field data = Field::sample(spec, [](std::span<const double> x) {
    return cplx{std::sin(x[0]) * std::cos(2.0 * x[1]), 0.0};
  });
  const double t = 0.3;
  Field u = interval_evolve(parity_project(data, BC::Dirichlet), t);
  // sin(y1) cos(2 y2) splits into transverse modes +-2: both carry 1 + 4
  Field expect = std::polar(1.0, -5.0 * t) * parity_project(data, BC::Dirichlet);
  REQUIRE(rel_err(u, expect) < 1e-12);
  REQUIRE(boundary_trace_max(u) < 1e-12);
}

TEST_CASE("halfspace evolution: cosine mode under neumann") {
  GridSpec spec = GridSpec::cubic(2, 64);
  Field data = Field::sample(spec, [](std::span<const double> x) {
    return cplx{std::cos(x[0]) * std::sin(x[1]), 0.0};
  });
  const double t = 0.4;
  Field u = interval_evolve(parity_project(data, BC::Neumann), t);
  Field expect = std::polar(1.0, -2.0 * t) * parity_project(data, BC::Neumann);
  REQUIRE(rel_err(u, expect) < 1e-12);
  REQUIRE(boundary_normal_derivative_max(u) < 1e-9);
}

TEST_CASE("image method agrees with the slow sine-series oracle") {
  GridSpec spec = GridSpec::cubic(2, 64);
  HalfField g = halfspace_bump(spec, 21);
  for (double t : {0.1, 0.5}) {
    HalfEvolveResult image = halfspace_evolve(g, t, BC::Dirichlet);
    Field series = dirichlet_series_evolve(g, t);
    double worst = 0.0;
    const std::size_t half = spec.total() / 2;
    for (std::size_t i = 0; i < half; ++i)
      worst = std::max(worst, std::abs(image.state.values[i] - series.values[i]));
    INFO("t = " << t);
    REQUIRE(worst < 1e-10);
  }
}

TEST_CASE("halfspace evolution reports image overlap once support spreads") {
  GridSpec spec = GridSpec::cubic(2, 64);
  HalfField g = halfspace_bump(spec, 23);
  // at t ~ 0 the overlap is the bump's own spectral tail; after dispersion
  // has crossed the interval it is orders of magnitude larger
  HalfEvolveResult short_run = halfspace_evolve(g, 1e-4, BC::Dirichlet);
  HalfEvolveResult long_run = halfspace_evolve(g, 5.0, BC::Dirichlet);
  REQUIRE(short_run.image_overlap < 1e-6);
  REQUIRE(long_run.image_overlap > 100.0 * short_run.image_overlap);
}

TEST_CASE("commutator source vanishes for a constant cutoff") {
  GridSpec spec = GridSpec::cubic(2, 32);
  Field u = random_band_limited(spec, 8, 31);
  Field ones = Field::sample(spec, [](std::span<const double>) { return cplx{1.0, 0.0}; });
  REQUIRE(linf_norm(commutator_source(u, ones)) < 1e-12);
}

TEST_CASE("commutator source matches the hand formula on a plane wave") {
  GridSpec spec = GridSpec::cubic(2, 128);
  const double sigma = 0.4;
  Field chi = gaussian_field(spec, sigma);
  Field u = Field::sample(spec, [](std::span<const double> x) { return std::polar(1.0, 2.0 * x[0] + x[1]); });
  Field source = commutator_source(u, chi);
  Field expect = Field::sample(spec, [&](std::span<const double> x) {
    double dx = x[0] - pi, dy = x[1] - pi;
    double r2 = dx * dx + dy * dy;
    double chi_v = std::exp(-0.5 * r2 / (sigma * sigma));
    double lap = chi_v * (r2 / std::pow(sigma, 4.0) - 2.0 / (sigma * sigma));
    cplx grad_dot_k{0.0, 2.0 * (-dx / (sigma * sigma)) * chi_v + 1.0 * (-dy / (sigma * sigma)) * chi_v};
    return (-lap - 2.0 * grad_dot_k) * std::polar(1.0, 2.0 * x[0] + x[1]);
  });
  REQUIRE(linf_norm(source - expect) < 1e-9 * linf_norm(expect));
}

TEST_CASE("the two commutator source forms agree pointwise") {
  // chi smooth enough that product aliasing sits below the tolerance
  GridSpec spec = GridSpec::cubic(2, 128);
  Field u = random_band_limited(spec, 8, 41);
  Field chi = bump_field(spec, {pi, pi}, 2.0, 1.0, 4.0);
  CommutatorSourceForms forms = commutator_source_forms(u, chi);
  REQUIRE(linf_norm(forms.primary - forms.divergence) < 1e-9 * std::max(1.0, linf_norm(forms.primary)));
}

TEST_CASE("duhamel with zero forcing reproduces the free flow") {
  GridSpec spec = GridSpec::cubic(2, 32);
  Field f = random_band_limited(spec, 8, 51);
  TimeGrid tg(1.0, 32);
  EvolutionRecord rec = duhamel(f, [&](int) { return Field::zeros(spec); }, tg);
  double worst = 0.0;
  for (int m = 0; m <= tg.M; ++m)
    worst = std::max(worst, rel_err(rec.snapshots[(std::size_t)m], free_evolve(f, tg.instant(m))));
  REQUIRE(worst < 1e-12);
}

namespace {

// manufactured solution u = exp(it) phi with forcing (Lap - 1) phi exp(it)
double manufactured_error(const Field& phi, int M) {
  TimeGrid tg(1.0, M);
  Field lap_phi = laplacian(phi);
  EvolutionRecord rec = duhamel(phi, [&](int m) {
    Field F = lap_phi - phi;
    F *= std::polar(1.0, tg.instant(m));
    return F;
  }, tg);
  double worst = 0.0;
  for (int m = 0; m <= tg.M; ++m) {
    Field expect = std::polar(1.0, tg.instant(m)) * phi;
    worst = std::max(worst, rel_err(rec.snapshots[(std::size_t)m], expect));
  }
  return worst;
}

}  // namespace

TEST_CASE("duhamel: manufactured solution accuracy and second-order convergence") {
  GridSpec spec = GridSpec::cubic(2, 32);
  Field phi = random_band_limited(spec, 4, 61);
  std::vector<double> errors;
  for (int M : {64, 128, 256, 512}) errors.push_back(manufactured_error(phi, M));
  INFO("errors " << errors[0] << " " << errors[1] << " " << errors[2] << " " << errors[3]);
  REQUIRE(errors[2] < 5e-3);
  // least-squares slope of log err against log M
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    double x = std::log(64.0 * (1 << i)), y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double slope = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
  INFO("convergence order " << -slope);
  REQUIRE(-slope > 1.8);
  REQUIRE(-slope < 2.2);
}

TEST_CASE("duhamel runs backward to zero data") {
  GridSpec spec = GridSpec::cubic(2, 32);
  TimeGrid tg(1.0, 256);
  Field bump = bump_field(spec, {pi, pi}, 1.2);
  std::vector<Field> F;
  for (int m = 0; m <= tg.M; ++m) {
    Field f = bump;
    f *= std::polar(0.8, 1.3 * tg.instant(m));
    F.push_back(std::move(f));
  }
  EvolutionRecord fwd = duhamel(Field::zeros(spec), F, tg);

  // conjugation turns the backward problem into a forward one with source
  // conj(F(T - s)) and data conj(u(T)); its endpoint is conj(u(0)) = 0
  Field vT = fwd.snapshots.back();
  for (auto& v : vT.values) v = std::conj(v);
  EvolutionRecord back = duhamel(vT, [&](int m) {
    Field f = F[(std::size_t)(tg.M - m)];
    for (auto& v : f.values) v = std::conj(v);
    return f;
  }, tg);
  double scale = l2_norm(fwd.snapshots.back());
  REQUIRE(l2_norm(back.snapshots.back()) < 5e-3 * scale);
}

TEST_CASE("duhamel rejects non-finite sources") {
  GridSpec spec = GridSpec::cubic(2, 16);
  Field bad(spec);
  bad.values[3] = cplx{std::numeric_limits<double>::quiet_NaN(), 0.0};
  REQUIRE_THROWS_WITH(duhamel(Field::zeros(spec), [&](int) { return bad; }, TimeGrid(1.0, 16)),
                      Catch::Matchers::ContainsSubstring("non-finite"));
}
