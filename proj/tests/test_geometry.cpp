#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pslab/geometry.hpp"

using namespace pslab;

TEST_CASE("boundary graph derivatives agree with finite differences") {
  for (const char* name : {"flat", "sin", "bump"}) {
    BoundaryGraph g = BoundaryGraph::by_name(name);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> pos(0.5, 2.0 * pi - 0.5);
    for (int t = 0; t < 25; ++t) {
      std::vector<double> yp{pos(rng)};
      INFO(name << " at " << yp[0]);
      REQUIRE(graph_derivative_mismatch(g, yp) < 1e-6);
    }
  }
}

TEST_CASE("flatten: flat graph is the identity") {
  BoundaryGraph g = BoundaryGraph::flat();
  ChartDomain chart{{1.0, 1.0}, 10.0};
  std::vector<double> x{0.3, 0.7};
  auto y = flatten(g, chart, x);
  REQUIRE(y[0] == x[0]);
  REQUIRE(y[1] == x[1]);
}

TEST_CASE("flatten maps the graph to the flat boundary") {
  BoundaryGraph g = BoundaryGraph::eps_sin(0.1);
  double c = 1.3;
  ChartDomain chart{{0.1 * std::sin(c), c}, 5.0};
  std::vector<double> x{0.1 * std::sin(c), c};
  auto y = flatten(g, chart, x);
  REQUIRE(std::abs(y[0]) < 1e-15);
  REQUIRE(y[1] == c);
}

TEST_CASE("flatten and unflatten are mutual inverses") {
  BoundaryGraph g = BoundaryGraph::eps_sin(0.2);
  ChartDomain chart{{0.0, pi}, 8.0};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x{u(rng), pi + 2.0 * u(rng)};
    auto y = flatten(g, chart, x);
    auto back = unflatten(g, chart, y);
    worst = std::max({worst, std::abs(back[0] - x[0]), std::abs(back[1] - x[1])});
  }
  REQUIRE(worst < 1e-14);
  REQUIRE_THROWS(flatten(g, ChartDomain{{0.0, 0.0}, 0.5}, std::vector<double>{3.0, 3.0}));
}

TEST_CASE("pullback coefficients: catalog checks") {
  GridSpec tspec = GridSpec::cubic(1, 64);
  SECTION("flat graph gives (1, 0, 0)") {
    PullbackCoefficients c = pullback_coefficients(BoundaryGraph::flat(), tspec);
    for (std::size_t i = 0; i < c.alpha.size(); ++i) {
      REQUIRE(c.alpha[i] == 1.0);
      REQUIRE(c.beta[0][i] == 0.0);
      REQUIRE(c.gamma[i] == 0.0);
    }
  }
  SECTION("linear graph gives constant coefficients") {
    const double eps = 0.25;
    BoundaryGraph lin{"linear", [eps](const std::array<Dual<2>, 2>& x) { return Dual<2>(eps) * x[0]; }};
    PullbackCoefficients c = pullback_coefficients(lin, tspec);
    for (std::size_t i = 0; i < c.alpha.size(); ++i) {
      REQUIRE(std::abs(c.alpha[i] - (1.0 + eps * eps)) < 1e-15);
      REQUIRE(std::abs(c.beta[0][i] + 2.0 * eps) < 1e-15);
      REQUIRE(std::abs(c.gamma[i]) < 1e-15);
    }
  }
  SECTION("sin graph matches hand differentiation") {
    const double eps = 0.1;
    PullbackCoefficients c = pullback_coefficients(BoundaryGraph::eps_sin(eps), tspec);
    for (int i = 0; i < tspec.sizes[0]; ++i) {
      double y2 = tspec.coord(0, i);
      REQUIRE(std::abs(c.alpha[(std::size_t)i] - (1.0 + eps * eps * std::cos(y2) * std::cos(y2))) < 1e-14);
      REQUIRE(std::abs(c.beta[0][(std::size_t)i] + 2.0 * eps * std::cos(y2)) < 1e-14);
      REQUIRE(std::abs(c.gamma[(std::size_t)i] - eps * std::sin(y2)) < 1e-14);
    }
  }
}

TEST_CASE("partition of unity on the circle") {
  GridSpec spec = GridSpec::cubic(2, 128);
  BoundaryCurve curve = BoundaryCurve::circle();
  double delta = 2.0 * pi * 1.0 / 8.0 * 1.5;
  PartitionOfUnity part = build_partition(curve, spec, delta, 8);
  REQUIRE(partition_identity_error(part) < 1e-12);
  REQUIRE(part.min_cover >= 1e-8);

  SECTION("chi_k are nonnegative with eta = 1 on their support") {
    for (std::size_t k = 0; k < part.chi.size(); ++k)
      for (std::size_t i = 0; i < part.chi[k].values.size(); ++i) {
        double c = part.chi[k].values[i].real();
        REQUIRE(c >= -1e-15);
        double e = part.eta[k].values[i].real();
        REQUIRE(e >= -1e-15);
        REQUIRE(e <= 1.0 + 1e-15);
        if (c > 1e-13) REQUIRE(e > 1.0 - 1e-12);
      }
  }
}

TEST_CASE("partition on the perturbed circle") {
  GridSpec spec = GridSpec::cubic(2, 128);
  PartitionOfUnity part = build_partition(BoundaryCurve::perturbed_circle(), spec, 1.3, 10);
  REQUIRE(partition_identity_error(part) < 1e-12);
}

TEST_CASE("single huge chart covers the whole collar") {
  GridSpec spec = GridSpec::cubic(2, 64);
  PartitionOfUnity part = build_partition(BoundaryCurve::circle(), spec, 10.0, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < part.chi[0].values.size(); ++i)
    if (part.collar_mask[i] > 0.0) worst = std::max(worst, std::abs(part.chi[0].values[i].real() - 1.0));
  REQUIRE(worst < 1e-14);
}

TEST_CASE("undersized charts leave a covering gap") {
  GridSpec spec = GridSpec::cubic(2, 64);
  double center_spacing = 2.0 * pi * 1.0 / 8.0;
  REQUIRE_THROWS_WITH(build_partition(BoundaryCurve::circle(), spec, 0.5 * center_spacing, 8),
                      Catch::Matchers::ContainsSubstring("covering gap"));
}

TEST_CASE("spectral chi derivatives match the dual-number formula") {
  // wide charts and a gentle window so the grid fully resolves the profiles
  GridSpec spec = GridSpec::cubic(2, 512);
  PartitionOfUnity part =
      build_partition(BoundaryCurve::circle(0.5), spec, 3.0, 12, 1e-8, PartitionRadii{0.98, 0.80, 0.96, 3.0});
  double mismatch = partition_derivative_mismatch(part, spec, 0);
  INFO("relative derivative mismatch " << mismatch);
  REQUIRE(mismatch < 1e-8);
}
