#pragma once

// Boundary geometry: graph flattening maps, pullback coefficients, boundary
// curves, and smooth partitions of unity on a boundary collar.
//
// Analytic first and second derivatives are carried by a small forward-mode
// dual number (value, gradient, Hessian), so bump/partition derivatives are
// closed-form rather than finite-differenced.

#include "pslab/halfspace.hpp"

namespace pslab {

// Second-order dual number in D variables.
template <int D>
struct Dual {
  double v = 0.0;
  std::array<double, D> g{};
  std::array<std::array<double, D>, D> h{};

  Dual() = default;
  Dual(double value) : v(value) {}
  static Dual variable(double value, int axis) {
    Dual d(value);
    d.g[axis] = 1.0;
    return d;
  }

  Dual operator-() const {
    Dual r;
    r.v = -v;
    for (int i = 0; i < D; ++i) {
      r.g[i] = -g[i];
      for (int j = 0; j < D; ++j) r.h[i][j] = -h[i][j];
    }
    return r;
  }
  friend Dual operator+(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v + b.v;
    for (int i = 0; i < D; ++i) {
      r.g[i] = a.g[i] + b.g[i];
      for (int j = 0; j < D; ++j) r.h[i][j] = a.h[i][j] + b.h[i][j];
    }
    return r;
  }
  friend Dual operator-(const Dual& a, const Dual& b) { return a + (-b); }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v * b.v;
    for (int i = 0; i < D; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        r.h[i][j] = a.h[i][j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[i][j];
    return r;
  }
  friend Dual operator/(const Dual& a, const Dual& b) { return a * recip(b); }

  // Chain rule through a scalar function with known f, f', f''.
  static Dual lift(const Dual& x, double f, double fp, double fpp) {
    Dual r;
    r.v = f;
    for (int i = 0; i < D; ++i) r.g[i] = fp * x.g[i];
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) r.h[i][j] = fpp * x.g[i] * x.g[j] + fp * x.h[i][j];
    return r;
  }

  friend Dual recip(const Dual& x) { return lift(x, 1.0 / x.v, -1.0 / (x.v * x.v), 2.0 / (x.v * x.v * x.v)); }
  friend Dual sin(const Dual& x) { return lift(x, std::sin(x.v), std::cos(x.v), -std::sin(x.v)); }
  friend Dual cos(const Dual& x) { return lift(x, std::cos(x.v), -std::sin(x.v), -std::cos(x.v)); }
  friend Dual exp(const Dual& x) {
    double e = std::exp(x.v);
    return lift(x, e, e, e);
  }
  friend Dual sqrt(const Dual& x) {
    double s = std::sqrt(x.v);
    return lift(x, s, 0.5 / s, -0.25 / (s * x.v));
  }
  friend Dual abs(const Dual& x) { return x.v >= 0.0 ? x : -x; }  // valid away from 0

  // Binary chain rule through f(a, b) with all first/second partials given.
  static Dual lift2(const Dual& a, const Dual& b, double f, double fa, double fb, double faa, double fab,
                    double fbb) {
    Dual r;
    r.v = f;
    for (int i = 0; i < D; ++i) r.g[i] = fa * a.g[i] + fb * b.g[i];
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        r.h[i][j] = fa * a.h[i][j] + fb * b.h[i][j] + faa * a.g[i] * a.g[j] + fbb * b.g[i] * b.g[j] +
                    fab * (a.g[i] * b.g[j] + a.g[j] * b.g[i]);
    return r;
  }

  friend Dual atan2(const Dual& y, const Dual& x) {
    double r2 = x.v * x.v + y.v * y.v;
    double r4 = r2 * r2;
    return lift2(y, x, std::atan2(y.v, x.v), x.v / r2, -y.v / r2, -2.0 * x.v * y.v / r4,
                 (y.v * y.v - x.v * x.v) / r4, 2.0 * x.v * y.v / r4);
  }

  double laplacian() const {
    double s = 0.0;
    for (int i = 0; i < D; ++i) s += h[i][i];
    return s;
  }
};

// Smooth step on [0,1] in dual arithmetic; flat branches kill derivatives.
template <int D>
inline Dual<D> smooth_step_d(const Dual<D>& t, double beta = 1.0) {
  if (t.v <= 0.0) return Dual<D>(0.0);
  if (t.v >= 1.0) return Dual<D>(1.0);
  Dual<D> a = exp(Dual<D>(-beta) * recip(t));
  Dual<D> b = exp(Dual<D>(-beta) * recip(Dual<D>(1.0) - t));
  return a * recip(a + b);
}

template <int D>
inline Dual<D> plateau_d(const Dual<D>& t, double lo, double hi, double beta = 1.0) {
  return smooth_step_d((Dual<D>(hi) - t) * recip(Dual<D>(hi - lo)), beta);
}

// Smooth compactly supported radial profile: exp(beta (1 - 1/(1 - u^2))) on
// |u| < 1, normalized to 1 at u = 0, identically 0 outside.
template <class T>
inline T bump_profile(const T& u2, double beta = 1.0) {
  // caller guarantees u2 < 1 on the smooth branch
  return exp(T(beta) * (T(1.0) - recip(T(1.0) - u2)));
}

inline double bump_value(double u2, double beta = 1.0) {
  return u2 < 1.0 ? std::exp(beta * (1.0 - 1.0 / (1.0 - u2))) : 0.0;
}

// Smooth plateau: 1 for t <= lo, 0 for t >= hi.
inline double plateau(double t, double lo, double hi, double beta = 1.0) {
  return detail::smooth_step((hi - t) / (hi - lo), beta);
}

// --- boundary graphs --------------------------------------------------------

// Graph x1 = phi(x') with closed-form derivatives through Dual<2>; only the
// first (n-1) components of the argument are read.
struct BoundaryGraph {
  std::string name;
  std::function<Dual<2>(const std::array<Dual<2>, 2>&)> phi;

  double value(std::span<const double> yp) const { return eval(yp).v; }

  Dual<2> eval(std::span<const double> yp) const {
    std::array<Dual<2>, 2> x{Dual<2>(0.0), Dual<2>(0.0)};
    for (std::size_t a = 0; a < yp.size() && a < 2; ++a) x[a] = Dual<2>::variable(yp[a], (int)a);
    return phi(x);
  }

  static BoundaryGraph flat() {
    return {"flat", [](const std::array<Dual<2>, 2>&) { return Dual<2>(0.0); }};
  }
  // phi(y') = eps * sin(y_2)
  static BoundaryGraph eps_sin(double eps) {
    return {"sin", [eps](const std::array<Dual<2>, 2>& x) { return Dual<2>(eps) * sin(x[0]); }};
  }
  // phi(y') = eps * bump(((y_2 - c)/w)^2), a compactly supported hump
  static BoundaryGraph poly_bump(double eps, double center, double width) {
    return {"bump", [eps, center, width](const std::array<Dual<2>, 2>& x) {
              Dual<2> u = (x[0] - Dual<2>(center)) * recip(Dual<2>(width));
              Dual<2> u2 = u * u;
              if (u2.v >= 1.0) return Dual<2>(0.0);
              return Dual<2>(eps) * bump_profile(u2);
            }};
  }

  static BoundaryGraph by_name(const std::string& name, double eps = 0.1) {
    if (name == "flat") return flat();
    if (name == "sin") return eps_sin(eps);
    if (name == "bump") return poly_bump(eps, pi, 1.5);
    throw std::invalid_argument("BoundaryGraph: unknown catalog entry '" + name + "'");
  }
};

// Finite-difference consistency of the analytic derivatives.
inline double graph_derivative_mismatch(const BoundaryGraph& g, std::span<const double> yp, double step = 1e-4) {
  Dual<2> d = g.eval(yp);
  double worst = 0.0;
  std::vector<double> p(yp.begin(), yp.end());
  for (std::size_t a = 0; a < yp.size() && a < 2; ++a) {
    std::vector<double> hi = p, lo = p;
    hi[a] += step;
    lo[a] -= step;
    double fd1 = (g.value(hi) - g.value(lo)) / (2.0 * step);
    double fd2 = (g.value(hi) - 2.0 * g.value(p) + g.value(lo)) / (step * step);
    worst = std::max(worst, std::abs(fd1 - d.g[a]));
    worst = std::max(worst, std::abs(fd2 - d.h[a][a]));
  }
  return worst;
}

// --- flattening map ---------------------------------------------------------

struct ChartDomain {
  std::vector<double> center;
  double radius = 0.0;

  bool contains(std::span<const double> x) const {
    double r2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      double d = x[a] - center[a];
      r2 += d * d;
    }
    return r2 < radius * radius;
  }
};

// y1 = x1 - phi(x'), y_j = x_j: volume preserving by construction.
inline std::vector<double> flatten(const BoundaryGraph& g, const ChartDomain& chart, std::span<const double> x) {
  detail::require(chart.contains(x), "flatten: point outside chart");
  std::vector<double> y(x.begin(), x.end());
  y[0] = x[0] - g.value(std::span<const double>(x.begin() + 1, x.size() - 1));
  return y;
}

inline std::vector<double> unflatten(const BoundaryGraph& g, const ChartDomain& chart, std::span<const double> y) {
  std::vector<double> x(y.begin(), y.end());
  x[0] = y[0] + g.value(std::span<const double>(y.begin() + 1, y.size() - 1));
  detail::require(chart.contains(x), "unflatten: point outside chart");
  return x;
}

// alpha = 1 + |grad phi|^2, beta_j = -2 d_j phi, gamma = -Delta' phi sampled
// on the transverse grid.
inline PullbackCoefficients pullback_coefficients(const BoundaryGraph& g, const GridSpec& tspec) {
  PullbackCoefficients c = PullbackCoefficients::flat(tspec);
  IndexWalker w(tspec);
  std::vector<double> yp(tspec.n);
  for (std::size_t i = 0; i < tspec.total(); ++i, w.step()) {
    for (int a = 0; a < tspec.n; ++a) yp[a] = tspec.coord(a, w.digits[a]);
    Dual<2> d = g.eval(yp);
    double grad2 = 0.0, lap = 0.0;
    for (int a = 0; a < tspec.n && a < 2; ++a) {
      grad2 += d.g[a] * d.g[a];
      lap += d.h[a][a];
      c.beta[(std::size_t)a][i] = -2.0 * d.g[a];
    }
    c.alpha[i] = 1.0 + grad2;
    c.gamma[i] = -lap;
  }
  c.validate();
  return c;
}

// --- boundary curves and partitions of unity -------------------------------

// Closed planar boundary curve r(theta) around a center, with a smooth
// radial gap function standing in for the signed distance. The perturbed
// catalog entry r = 1 + 0.2 cos(3 theta) is star-shaped, hence non-trapping.
struct BoundaryCurve {
  std::string name;
  std::array<double, 2> center{pi, pi};
  std::function<Dual<2>(const Dual<2>&)> radius_of_theta;

  static BoundaryCurve circle(double r = 1.0) {
    return {"circle", {pi, pi}, [r](const Dual<2>&) { return Dual<2>(r); }};
  }
  static BoundaryCurve perturbed_circle() {
    return {"perturbed_circle", {pi, pi}, [](const Dual<2>& th) {
              return Dual<2>(1.0) + Dual<2>(0.2) * cos(Dual<2>(3.0) * th);
            }};
  }
  static BoundaryCurve by_name(const std::string& n) {
    if (n == "circle") return circle();
    if (n == "perturbed_circle") return perturbed_circle();
    throw std::invalid_argument("BoundaryCurve: unknown catalog entry '" + n + "'");
  }

  double radius(double th) const { return radius_of_theta(Dual<2>(th)).v; }

  std::array<double, 2> point(double th) const {
    double r = radius(th);
    return {center[0] + r * std::cos(th), center[1] + r * std::sin(th)};
  }

  // Smooth radial gap |x - c| - r(theta(x)); comparable to the true distance
  // for the star-shaped catalog.
  Dual<2> gap_dual(const Dual<2>& x0, const Dual<2>& x1) const {
    Dual<2> dx = x0 - Dual<2>(center[0]);
    Dual<2> dy = x1 - Dual<2>(center[1]);
    Dual<2> th = atan2(dy, dx);
    return sqrt(dx * dx + dy * dy) - radius_of_theta(th);
  }
  double gap(double x0, double x1) const { return gap_dual(Dual<2>(x0), Dual<2>(x1)).v; }
};

// Geometry of a boundary partition: chi_k = window(|gap|) * b_k / sum_j b_j
// with compactly supported radial bumps b_k of radius 0.9 delta around the
// chart centers and a window that is 1 on the collar |gap| <= delta/2 and
// gone by 0.75 delta. eta_k plateaus at 1 out to 0.92 delta and vanishes
// past delta, so eta_k = 1 on supp chi_k inside the delta-ball. The window
// support must sit inside the bump cover: centers spaced closer than delta
// guarantee that with margin.
//
// Every ingredient is evaluated in second-order dual arithmetic, so chi_k
// and its exact gradient/Laplacian come from one expression; center
// distances use the min-image convention so the fields live on the torus.
struct PartitionRadii {
  double bump = 0.98;       // bump support, fraction of delta
  double window_hi = 0.60;  // window support ends here, fraction of delta
  double eta_lo = 0.96;     // eta plateau ends here, fraction of delta
  double beta = 4.0;        // steepness of the exp profiles
};

struct PartitionGeometry {
  BoundaryCurve curve;
  std::vector<std::array<double, 2>> centers;
  std::array<double, 2> box{2.0 * pi, 2.0 * pi};
  double delta = 0.0;
  PartitionRadii radii;

  double bump_radius() const { return radii.bump * delta; }

  Dual<2> bump_at(const Dual<2>& x0, const Dual<2>& x1, int k) const {
    auto min_image = [](Dual<2> d, double L) {
      d.v -= L * std::round(d.v / L);  // constant shift, derivatives untouched
      return d;
    };
    Dual<2> dx = min_image(x0 - Dual<2>(centers[(std::size_t)k][0]), box[0]);
    Dual<2> dy = min_image(x1 - Dual<2>(centers[(std::size_t)k][1]), box[1]);
    Dual<2> u2 = (dx * dx + dy * dy) * recip(Dual<2>(bump_radius() * bump_radius()));
    if (u2.v >= 1.0) return Dual<2>(0.0);
    return bump_profile(u2, radii.beta);
  }

  Dual<2> window_at(const Dual<2>& x0, const Dual<2>& x1) const {
    return plateau_d(abs(curve.gap_dual(x0, x1)), 0.5 * delta, radii.window_hi * delta, radii.beta);
  }

  // chi_k with its derivatives; zero outside the window support.
  Dual<2> chi_at(double px, double py, int k) const {
    Dual<2> x0 = Dual<2>::variable(px, 0), x1 = Dual<2>::variable(py, 1);
    Dual<2> win = window_at(x0, x1);
    if (win.v <= 0.0) return Dual<2>(0.0);
    Dual<2> denom(0.0);
    for (int j = 0; j < (int)centers.size(); ++j) denom = denom + bump_at(x0, x1, j);
    return win * bump_at(x0, x1, k) * recip(denom);
  }

  Dual<2> eta_at(double px, double py, int k) const {
    Dual<2> x0 = Dual<2>::variable(px, 0), x1 = Dual<2>::variable(py, 1);
    auto min_image = [](Dual<2> d, double L) {
      d.v -= L * std::round(d.v / L);
      return d;
    };
    Dual<2> dx = min_image(x0 - Dual<2>(centers[(std::size_t)k][0]), box[0]);
    Dual<2> dy = min_image(x1 - Dual<2>(centers[(std::size_t)k][1]), box[1]);
    return plateau_d(sqrt(dx * dx + dy * dy), radii.eta_lo * delta, delta, radii.beta);
  }
};

struct PartitionOfUnity {
  PartitionGeometry geometry;
  double delta = 0.0;
  std::vector<Field> chi;          // sum to 1 on the collar
  std::vector<Field> eta;          // eta_k = 1 on supp chi_k
  std::vector<double> collar_mask; // 1 where |gap| <= delta/2
  double min_cover = 0.0;          // denominator lower bound on the collar
};

inline PartitionOfUnity build_partition(const BoundaryCurve& curve, const GridSpec& spec, double delta,
                                        int n_centers, double denom_floor = 1e-8,
                                        PartitionRadii radii = {}) {
  detail::require(spec.n == 2, "build_partition: planar curves need n = 2");
  detail::require(delta > 0.0 && n_centers >= 1, "build_partition: need delta > 0 and at least one center");

  PartitionOfUnity part;
  part.delta = delta;
  part.geometry.curve = curve;
  part.geometry.delta = delta;
  part.geometry.box = {spec.box[0], spec.box[1]};
  part.geometry.radii = radii;
  for (int k = 0; k < n_centers; ++k) part.geometry.centers.push_back(curve.point(2.0 * pi * k / n_centers));
  const auto& geo = part.geometry;

  const std::size_t total = spec.total();
  std::vector<std::vector<double>> bumps((std::size_t)n_centers, std::vector<double>(total, 0.0));
  std::vector<double> denom(total, 0.0), window(total, 0.0);
  part.collar_mask.assign(total, 0.0);

  IndexWalker w(spec);
  part.min_cover = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < total; ++i, w.step()) {
    double x0 = spec.coord(0, w.digits[0]);
    double x1 = spec.coord(1, w.digits[1]);
    Dual<2> xd0 = Dual<2>::variable(x0, 0), xd1 = Dual<2>::variable(x1, 1);
    double gap = std::abs(curve.gap(x0, x1));
    part.collar_mask[i] = gap <= 0.5 * delta ? 1.0 : 0.0;
    window[i] = geo.window_at(xd0, xd1).v;
    for (int k = 0; k < n_centers; ++k) {
      bumps[(std::size_t)k][i] = geo.bump_at(xd0, xd1, k).v;
      denom[i] += bumps[(std::size_t)k][i];
    }
    if (window[i] > 0.0) {
      // covering check: the denominator floor is enforced on the collar; the
      // window fringe merely needs a positive bump sum
      double floor_here = part.collar_mask[i] > 0.0 ? denom_floor : std::numeric_limits<double>::min();
      if (denom[i] < floor_here) {
        std::ostringstream os;
        os << "build_partition: covering gap at (" << x0 << ", " << x1 << "), bump sum " << denom[i];
        throw std::invalid_argument(os.str());
      }
      if (part.collar_mask[i] > 0.0) part.min_cover = std::min(part.min_cover, denom[i]);
    }
  }

  for (int k = 0; k < n_centers; ++k) {
    Field c(spec), e(spec);
    IndexWalker we(spec);
    for (std::size_t i = 0; i < total; ++i, we.step()) {
      c.values[i] = window[i] > 0.0 ? window[i] * bumps[(std::size_t)k][i] / denom[i] : 0.0;
      e.values[i] = geo.eta_at(spec.coord(0, we.digits[0]), spec.coord(1, we.digits[1]), k).v;
    }
    part.chi.push_back(std::move(c));
    part.eta.push_back(std::move(e));
  }
  return part;
}

// Largest deviation of sum_k chi_k from 1 on the collar.
inline double partition_identity_error(const PartitionOfUnity& part) {
  detail::require(!part.chi.empty(), "partition_identity_error: empty partition");
  Field s = part.chi[0];
  for (std::size_t k = 1; k < part.chi.size(); ++k) s += part.chi[k];
  double worst = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i)
    if (part.collar_mask[i] > 0.0) worst = std::max(worst, std::abs(s.values[i] - 1.0));
  return worst;
}

// Spectral gradient/Laplacian of the sampled chi_k against the dual-number
// derivatives of its defining expression; returns the largest mismatch
// relative to the derivative scale.
inline double partition_derivative_mismatch(const PartitionOfUnity& part, const GridSpec& spec, int k) {
  const Field& chi = part.chi[(std::size_t)k];
  std::vector<Field> grad;
  for (int a = 0; a < 2; ++a) grad.push_back(derivative(chi, a));
  Field lap = laplacian(chi);

  double worst = 0.0, scale = 0.0;
  IndexWalker w(spec);
  for (std::size_t i = 0; i < spec.total(); ++i, w.step()) {
    Dual<2> d = part.geometry.chi_at(spec.coord(0, w.digits[0]), spec.coord(1, w.digits[1]), k);
    scale = std::max({scale, std::abs(d.g[0]), std::abs(d.g[1]), std::abs(d.laplacian())});
    worst = std::max(worst, std::abs(grad[0].values[i].real() - d.g[0]));
    worst = std::max(worst, std::abs(grad[1].values[i].real() - d.g[1]));
    worst = std::max(worst, std::abs(lap.values[i].real() - d.laplacian()));
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace pslab
