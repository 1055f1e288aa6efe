#include <catch2/catch_amalgamated.hpp>

#include "pslab/estimates.hpp"
#include "pslab/random_fields.hpp"

using namespace pslab;

namespace {

// Direct quadrature of the cos/sin coefficients of the zero-padded samples,
// independent of the axis-FFT path inside dn_decompose.
DNDecomposition quadrature_decompose(const HalfField& g) {
  DNDecomposition d = DNDecomposition::zeros(g.spec);
  const int n1 = g.spec.sizes[0];
  const std::size_t line = d.slab();
  for (int k = 0; k <= n1 / 2; ++k) {
    for (int i = 0; i < n1 / 2; ++i) {  // upper half is the zero padding
      double y = g.spec.coord(0, i);
      double ck = std::cos(k * y), sk = std::sin(k * y);
      for (std::size_t j = 0; j < line; ++j) {
        cplx v = g.values[(std::size_t)i * line + j];
        if (k == 0)
          d.cos_c[0][j] += v * (1.0 / n1);
        else if (k == n1 / 2)
          d.cos_c[(std::size_t)k][j] += v * (ck / n1);
        else {
          d.cos_c[(std::size_t)k][j] += v * (2.0 * ck / n1);
          d.sin_c[(std::size_t)k][j] += v * (2.0 * sk / n1);
        }
      }
    }
  }
  return d;
}

double dn_max_diff(const DNDecomposition& a, const DNDecomposition& b) {
  double worst = 0.0;
  for (int k = 0; k <= a.max_mode(); ++k)
    for (std::size_t j = 0; j < a.slab(); ++j) {
      worst = std::max(worst, std::abs(a.cos_c[(std::size_t)k][j] - b.cos_c[(std::size_t)k][j]));
      worst = std::max(worst, std::abs(a.sin_c[(std::size_t)k][j] - b.sin_c[(std::size_t)k][j]));
    }
  return worst;
}

// amplitude at grid point (i1 in y1, rest zero) of a field
cplx at_y1(const Field& f, int i1) { return f.values[(std::size_t)i1 * (f.spec.total() / f.spec.sizes[0])]; }

}  // namespace

TEST_CASE("half field support certificate") {
  GridSpec spec = GridSpec::cubic(2, 64);
  SECTION("valid bump passes") { REQUIRE_NOTHROW(halfspace_bump(spec, 5)); }
  SECTION("support violation is rejected with the measured leakage") {
    std::vector<cplx> vals(spec.total() / 2, cplx{0.0, 0.0});
    vals[vals.size() - 1] = 1.0;  // mass at y1 just below pi
    REQUIRE_THROWS_WITH(HalfField::from_samples(spec, vals, pi / 2.0),
                        Catch::Matchers::ContainsSubstring("support violation"));
  }
  SECTION("restriction of a leaking full field is rejected") {
    Field f = Field::sample(spec, [](std::span<const double>) { return cplx{1.0, 0.0}; });
    REQUIRE_THROWS_WITH(HalfField::restrict_field(f, pi / 2.0), Catch::Matchers::ContainsSubstring("leakage"));
  }
}

TEST_CASE("dn_decompose: pure idealized modes") {
  GridSpec spec = GridSpec::cubic(2, 32);
  SECTION("sine mode is all Dirichlet") {
    DNDecomposition d = DNDecomposition::zeros(spec);
    for (std::size_t j = 0; j < d.slab(); ++j) d.sin_c[1][j] = 1.0;
    Field odd = d.odd_field(), even = d.even_field();
    Field expect = Field::sample(spec, [](std::span<const double> x) { return cplx{std::sin(x[0]), 0.0}; });
    REQUIRE(linf_norm(odd - expect) < 1e-12);
    REQUIRE(linf_norm(even) < 1e-14);
  }
  SECTION("cosine mode is all Neumann") {
    DNDecomposition d = DNDecomposition::zeros(spec);
    for (std::size_t j = 0; j < d.slab(); ++j) d.cos_c[2][j] = 1.0;
    Field even = d.even_field();
    Field expect = Field::sample(spec, [](std::span<const double> x) { return cplx{std::cos(2.0 * x[0]), 0.0}; });
    REQUIRE(linf_norm(even - expect) < 1e-12);
    REQUIRE(linf_norm(d.odd_field()) < 1e-14);
  }
}

TEST_CASE("dn_decompose: windowed sine concentrates in the sine family") {
  GridSpec spec = GridSpec::cubic(2, 128);
  // sin(y1) windowed to the half-interval: sine content carries the profile
  HalfField g = HalfField::sample(spec, pi * 0.98, [](std::span<const double> x) {
    double u = (x[0] - 0.5 * pi) / (0.47 * pi);
    double w = u * u < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
    return cplx{std::sin(x[0]) * w, 0.0};
  });
  DNDecomposition d = dn_decompose(g);
  double sine_mass = 0.0, total = 0.0;
  for (int k = 1; k <= d.max_mode(); ++k)
    for (std::size_t j = 0; j < d.slab(); ++j) {
      sine_mass += std::norm(d.sin_c[(std::size_t)k][j]);
      total += std::norm(d.sin_c[(std::size_t)k][j]) + std::norm(d.cos_c[(std::size_t)k][j]);
    }
  REQUIRE(sine_mass / total > 0.45);  // window corrections split roughly evenly
  REQUIRE(reconstruction_error(g, d) < 1e-10);
}

TEST_CASE("dn_decompose bump: quadrature oracle and reconstruction") {
  GridSpec spec = GridSpec::cubic(2, 128);
  HalfField g = halfspace_bump(spec, 7);
  DNDecomposition fft_route = dn_decompose(g);
  DNDecomposition quad_route = quadrature_decompose(g);
  REQUIRE(dn_max_diff(fft_route, quad_route) < 1e-12);
  REQUIRE(reconstruction_error(g, fft_route) < 1e-10);
}

TEST_CASE("odd and even extensions reflect with the right signs") {
  GridSpec spec = GridSpec::cubic(2, 64);
  HalfField g = halfspace_bump(spec, 11);
  DNDecomposition d = dn_decompose(g);
  Field odd = d.odd_field(), even = d.even_field();
  const int n1 = spec.sizes[0];
  for (int i = 1; i < n1 / 2; ++i) {
    REQUIRE(std::abs(at_y1(odd, n1 - i) + at_y1(odd, i)) < 1e-11);
    REQUIRE(std::abs(at_y1(even, n1 - i) - at_y1(even, i)) < 1e-11);
  }
  // mirror value of the full extension: E[g](-y1) = g_N(y1) - g_D(y1)
  int probe = n1 / 8;  // y1 = pi/4
  Field ext = extend(g);
  cplx expect = at_y1(even, probe) - at_y1(odd, probe);
  REQUIRE(std::abs(at_y1(ext, n1 - probe) - expect) < 1e-11);
}

TEST_CASE("extension is linear and restriction round-trips") {
  GridSpec spec = GridSpec::cubic(2, 64);
  HalfField g1 = halfspace_bump(spec, 13);
  HalfField g2 = halfspace_bump(spec, 17);
  Field sum_ext = extend(g1) + extend(g2);
  std::vector<cplx> vals(g1.values.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = g1.values[i] + g2.values[i];
  HalfField gsum = HalfField::from_samples(spec, vals, std::max(g1.support_radius, g2.support_radius));
  REQUIRE(linf_norm(extend(gsum) - sum_ext) < 1e-12);

  Field ext = extend(g1);
  HalfField back = HalfField::restrict_field(ext, g1.support_radius, 1e-10);
  REQUIRE(linf_norm(extend(back) - ext) < 1e-12);
}

TEST_CASE("boundary traces of the split parts vanish") {
  GridSpec spec = GridSpec::cubic(2, 64);
  DNDecomposition d = random_dn_data(spec, 8, 19);
  Field odd = d.odd_field(), even = d.even_field();
  REQUIRE(boundary_trace_max(odd) < 1e-12 * std::max(1.0, linf_norm(odd)));
  REQUIRE(boundary_normal_derivative_max(even) < 1e-11 * std::max(1.0, linf_norm(even)));
}

TEST_CASE("parity relation table on trivial modes") {
  GridSpec spec = GridSpec::cubic(2, 32);
  DNDecomposition d = DNDecomposition::zeros(spec);
  for (std::size_t j = 0; j < d.slab(); ++j) {
    d.sin_c[1][j] = 1.0;  // g_D = sin(y1)
    d.cos_c[1][j] = 0.5;  // g_N = cos(y1)/2
  }
  for (const auto& rel : verify_parity_relations(d)) {
    INFO(rel.name);
    REQUIRE(rel.max_error < 1e-12);
  }
}

TEST_CASE("parity relations on random band-limited data") {
  GridSpec spec = GridSpec::cubic(2, 64);
  for (unsigned seed : {101u, 202u, 303u}) {
    DNDecomposition d = random_dn_data(spec, spec.sizes[0] / 4, seed);
    for (const auto& rel : verify_parity_relations(d)) {
      INFO("seed " << seed << ": " << rel.name);
      REQUIRE(rel.max_error < 1e-9);
    }
  }
}

TEST_CASE("hat laplacian: flat coefficients reduce to the laplacian") {
  GridSpec spec = GridSpec::cubic(2, 32);
  PullbackCoefficients flat = PullbackCoefficients::flat(detail::transverse_spec(spec));
  Field g = Field::sample(spec, [](std::span<const double> x) { return std::polar(1.0, 2.0 * x[0] + 3.0 * x[1]); });
  Field out = hat_laplacian(g, flat);
  REQUIRE(linf_norm(out - cplx{-13.0, 0.0} * g) < 1e-9);
}

TEST_CASE("hat laplacian: closed-form oracle for the sin-graph coefficients") {
  GridSpec spec = GridSpec::cubic(2, 64);
  const double eps = 0.1;
  GridSpec tspec = detail::transverse_spec(spec);
  PullbackCoefficients c = PullbackCoefficients::flat(tspec);
  for (int j = 0; j < tspec.sizes[0]; ++j) {
    double y2 = tspec.coord(0, j);
    c.alpha[(std::size_t)j] = 1.0 + eps * eps * std::cos(y2) * std::cos(y2);
    c.beta[0][(std::size_t)j] = -2.0 * eps * std::cos(y2);
    c.gamma[(std::size_t)j] = eps * std::sin(y2);
  }
  Field g = Field::sample(spec, [](std::span<const double> x) { return cplx{std::sin(x[0]) * std::cos(x[1]), 0.0}; });
  Field expect = Field::sample(spec, [eps](std::span<const double> x) {
    double y1 = x[0], y2 = x[1];
    double v = -2.0 * std::sin(y1) * std::cos(y2) -
               eps * eps * std::sin(y1) * std::cos(y2) * std::cos(y2) * std::cos(y2) +
               3.0 * eps * std::cos(y1) * std::sin(y2) * std::cos(y2);
    return cplx{v, 0.0};
  });
  REQUIRE(linf_norm(hat_laplacian(g, c) - expect) < 1e-9);
}

TEST_CASE("commutation: idealized band-limited data is exact to round-off") {
  GridSpec spec = GridSpec::cubic(2, 64);
  GridSpec tspec = detail::transverse_spec(spec);
  SECTION("flat") {
    PullbackCoefficients flat = PullbackCoefficients::flat(tspec);
    DNDecomposition d = random_dn_data(spec, 16, 23);
    REQUIRE(verify_commutation_dn(d, flat) < 1e-10);
  }
  SECTION("curved") {
    BoundaryGraph graph = BoundaryGraph::eps_sin(0.1);
    PullbackCoefficients c = pullback_coefficients(graph, tspec);
    DNDecomposition d = random_dn_data(spec, 8, 29);
    REQUIRE(verify_commutation_dn(d, c) < 1e-10);
  }
}

TEST_CASE("commutation: compact bump data, flat and curved") {
  GridSpec spec = GridSpec::cubic(2, 256);
  GridSpec tspec = detail::transverse_spec(spec);
  HalfField g = halfspace_bump(spec, 31);
  PullbackCoefficients flat = PullbackCoefficients::flat(tspec);
  CommutationReport flat_rep = verify_commutation(g, flat);
  REQUIRE(flat_rep.residual_rel < 1e-10);

  BoundaryGraph graph = BoundaryGraph::eps_sin(0.1);
  CommutationReport curved = verify_commutation(g, pullback_coefficients(graph, tspec));
  REQUIRE(curved.residual_rel < 1e-8);
}

TEST_CASE("commutation residual decays across resolutions") {
  BoundaryGraph graph = BoundaryGraph::eps_sin(0.1);
  double prev = std::numeric_limits<double>::infinity();
  for (int size : {64, 128, 256}) {
    GridSpec spec = GridSpec::cubic(2, size);
    HalfField g = halfspace_bump(spec, 37);
    CommutationReport rep = verify_commutation(g, pullback_coefficients(graph, detail::transverse_spec(spec)));
    INFO("size " << size << " residual " << rep.residual_rel);
    REQUIRE(rep.residual_rel < prev);
    prev = rep.residual_rel;
  }
}

TEST_CASE("extension norm ratio: pure sine at s = 0 is exactly sqrt(2)") {
  GridSpec spec = GridSpec::cubic(2, 32);
  DNDecomposition d = DNDecomposition::zeros(spec);
  GridSpec tspec = detail::transverse_spec(spec);
  Field w = gaussian_field(tspec, 0.8);
  for (std::size_t j = 0; j < d.slab(); ++j) d.sin_c[1][j] = w.values[j];
  RatioReport rep = extension_norm_ratio({d}, 0.0);
  REQUIRE(std::abs(rep.members[0].ratio - std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("extension norm ratio: finite at s = 2 and stable under refinement") {
  std::vector<double> sups;
  for (int size : {32, 64}) {
    GridSpec spec = GridSpec::cubic(2, size);
    std::vector<DNDecomposition> family;
    for (unsigned seed = 0; seed < 8; ++seed) family.push_back(random_dn_data(spec, 8, 500 + seed));
    RatioReport rep = extension_norm_ratio(family, 1.0);
    REQUIRE(std::isfinite(rep.sup_ratio()));
    sups.push_back(rep.sup_ratio());
  }
  REQUIRE(std::abs(sups[1] - sups[0]) <= 0.1 * sups[0]);

  GridSpec spec = GridSpec::cubic(2, 32);
  RatioReport s2 = extension_norm_ratio({random_dn_data(spec, 8, 777)}, 2.0);
  REQUIRE(std::isfinite(s2.sup_ratio()));
  REQUIRE(s2.sup_ratio() > 0.0);
}
