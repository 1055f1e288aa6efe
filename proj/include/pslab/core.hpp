#pragma once

// Periodic rectangular grids and complex fields sampled on them.
// Every operator in the library acts on these two types.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pslab {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool is_pow2(int v) { return v >= 1 && (v & (v - 1)) == 0; }

// exp(-beta/t) glue: smooth, vanishing to all orders at t = 0. Larger beta
// buys faster Fourier decay of anything assembled from it.
inline double expm_bump(double t, double beta = 1.0) { return t > 0.0 ? std::exp(-beta / t) : 0.0; }

// Smooth step rising 0 -> 1 on [0,1].
inline double smooth_step(double t, double beta = 1.0) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = expm_bump(t, beta), b = expm_bump(1.0 - t, beta);
  return a / (a + b);
}

}  // namespace detail

// Uniform periodic grid on the box [0,L_1) x ... x [0,L_n).
// Axis sizes are powers of two so cooperating transforms stay radix-friendly.
struct GridSpec {
  int n = 0;
  std::vector<int> sizes;
  std::vector<double> box;

  GridSpec() = default;
  GridSpec(std::vector<int> sz, std::vector<double> bx) : n((int)sz.size()), sizes(std::move(sz)), box(std::move(bx)) {
    validate();
  }
  // All axes share one size; box defaults to 2*pi per axis.
  static GridSpec cubic(int dim, int size, double length = 2.0 * pi) {
    return GridSpec(std::vector<int>(dim, size), std::vector<double>(dim, length));
  }

  void validate() const {
    detail::require(n >= 1 && n <= 3, "GridSpec: dimension must be 1, 2 or 3");
    detail::require((int)sizes.size() == n && (int)box.size() == n, "GridSpec: sizes/box rank mismatch");
    for (int a = 0; a < n; ++a) {
      detail::require(sizes[a] >= 8, "GridSpec: sizes must be >= 8");
      detail::require(detail::is_pow2(sizes[a]), "GridSpec: sizes must be powers of two");
      detail::require(box[a] > 0.0, "GridSpec: box lengths must be positive");
    }
  }

  std::size_t total() const {
    std::size_t t = 1;
    for (int a = 0; a < n; ++a) t *= (std::size_t)sizes[a];
    return t;
  }
  double spacing(int axis) const { return box[axis] / sizes[axis]; }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < n; ++a) v *= spacing(a);
    return v;
  }
  double volume() const {
    double v = 1.0;
    for (int a = 0; a < n; ++a) v *= box[a];
    return v;
  }
  double coord(int axis, int i) const { return spacing(axis) * i; }
  // Signed integer mode index in [-N/2, N/2).
  int mode_index(int axis, int i) const { return i < sizes[axis] / 2 ? i : i - sizes[axis]; }
  // Physical wavenumber 2*pi*m / L.
  double wavenumber(int axis, int i) const { return 2.0 * pi * mode_index(axis, i) / box[axis]; }
  // Largest wavenumber magnitude representable on this grid.
  double max_wavenumber() const {
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      double k = pi * sizes[a] / box[a];  // |m| = N/2
      s += k * k;
    }
    return std::sqrt(s);
  }
  double min_wavenumber() const {
    double m = 2.0 * pi / box[0];
    for (int a = 1; a < n; ++a) m = std::min(m, 2.0 * pi / box[a]);
    return m;
  }

  bool operator==(const GridSpec& o) const { return n == o.n && sizes == o.sizes && box == o.box; }
};

// Row-major multi-index walker: digits[0] is the slowest axis.
struct IndexWalker {
  const GridSpec& spec;
  std::vector<int> digits;
  explicit IndexWalker(const GridSpec& s) : spec(s), digits(s.n, 0) {}
  void step() {
    for (int a = spec.n - 1; a >= 0; --a) {
      if (++digits[a] < spec.sizes[a]) return;
      digits[a] = 0;
    }
  }
};

struct Field {
  GridSpec spec;
  std::vector<cplx> values;

  Field() = default;
  explicit Field(GridSpec s) : spec(std::move(s)), values(spec.total(), cplx{0.0, 0.0}) {}
  Field(GridSpec s, std::vector<cplx> v) : spec(std::move(s)), values(std::move(v)) {
    detail::require(values.size() == spec.total(), "Field: value count must equal grid size");
  }

  static Field zeros(const GridSpec& s) { return Field(s); }

  // Sample f(x) at the grid nodes.
  static Field sample(const GridSpec& s, const std::function<cplx(std::span<const double>)>& f) {
    Field out(s);
    IndexWalker w(s);
    std::vector<double> x(s.n);
    for (std::size_t i = 0; i < out.values.size(); ++i, w.step()) {
      for (int a = 0; a < s.n; ++a) x[a] = s.coord(a, w.digits[a]);
      out.values[i] = f(x);
    }
    return out;
  }

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }

  bool finite() const {
    for (const cplx& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  Field& operator+=(const Field& o) {
    detail::require(spec == o.spec, "Field: grid mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    detail::require(spec == o.spec, "Field: grid mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  Field& operator*=(cplx c) {
    for (auto& v : values) v *= c;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(cplx c, Field a) { return a *= c; }
};

// Pointwise product a(x) * b(x).
inline Field hadamard(const Field& a, const Field& b) {
  detail::require(a.spec == b.spec, "hadamard: grid mismatch");
  Field out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= b.values[i];
  return out;
}

inline cplx mean(const Field& f) {
  cplx s{0.0, 0.0};
  for (const cplx& v : f.values) s += v;
  return s / (double)f.values.size();
}

// L2 inner product with the grid quadrature weight.
inline cplx inner(const Field& a, const Field& b) {
  detail::require(a.spec == b.spec, "inner: grid mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::conj(a.values[i]) * b.values[i];
  return s * a.spec.cell_volume();
}

// Grid L^p norm; p = inf gives the max over nodes. Trapezoidal quadrature on a
// periodic grid, which is spectrally accurate for band-limited integrands.
inline double lp_norm(const Field& f, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (const cplx& v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  detail::require(p >= 1.0, "lp_norm: p must be >= 1");
  double s = 0.0;
  for (const cplx& v : f.values) s += std::pow(std::abs(v), p);
  return std::pow(s * f.spec.cell_volume(), 1.0 / p);
}

inline double l2_norm(const Field& f) {
  double s = 0.0;
  for (const cplx& v : f.values) s += std::norm(v);
  return std::sqrt(s * f.spec.cell_volume());
}

inline double linf_norm(const Field& f) { return lp_norm(f, std::numeric_limits<double>::infinity()); }

// Weighted L^p norm against a nonnegative mask (domain restriction and collars).
inline double lp_norm_masked(const Field& f, double p, const std::vector<double>& mask) {
  detail::require(mask.size() == f.values.size(), "lp_norm_masked: mask size mismatch");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
      if (mask[i] > 0.0) m = std::max(m, std::abs(f.values[i]));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) s += mask[i] * std::pow(std::abs(f.values[i]), p);
  return std::pow(s * f.spec.cell_volume(), 1.0 / p);
}

// Cyclic shift by whole grid cells (exact translation on the torus).
inline Field roll(const Field& f, const std::vector<int>& offset) {
  detail::require((int)offset.size() == f.spec.n, "roll: offset rank mismatch");
  Field out(f.spec);
  IndexWalker w(f.spec);
  std::vector<std::size_t> stride(f.spec.n, 1);
  for (int a = f.spec.n - 2; a >= 0; --a) stride[a] = stride[a + 1] * f.spec.sizes[a + 1];
  for (std::size_t i = 0; i < f.values.size(); ++i, w.step()) {
    std::size_t j = 0;
    for (int a = 0; a < f.spec.n; ++a) {
      int d = w.digits[a] - offset[a];
      d %= f.spec.sizes[a];
      if (d < 0) d += f.spec.sizes[a];
      j += stride[a] * (std::size_t)d;
    }
    out.values[i] = f.values[j];
  }
  return out;
}

// --- flat binary serialization -------------------------------------------
// Layout: magic "PSF1", u32 n, then per axis u64 size and f64 box length,
// then re/im doubles in row-major order.

inline void write_field(const Field& f, std::ostream& os) {
  os.write("PSF1", 4);
  std::uint32_t n = (std::uint32_t)f.spec.n;
  os.write(reinterpret_cast<const char*>(&n), 4);
  for (int a = 0; a < f.spec.n; ++a) {
    std::uint64_t sz = (std::uint64_t)f.spec.sizes[a];
    os.write(reinterpret_cast<const char*>(&sz), 8);
    double b = f.spec.box[a];
    os.write(reinterpret_cast<const char*>(&b), 8);
  }
  for (const cplx& v : f.values) {
    double re = v.real(), im = v.imag();
    os.write(reinterpret_cast<const char*>(&re), 8);
    os.write(reinterpret_cast<const char*>(&im), 8);
  }
}

inline void write_field(const Field& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  detail::require(os.good(), "write_field: cannot open " + path);
  write_field(f, os);
}

inline Field read_field(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  detail::require(is.good() && std::string(magic, 4) == "PSF1", "read_field: bad magic");
  std::uint32_t n = 0;
  is.read(reinterpret_cast<char*>(&n), 4);
  std::vector<int> sizes(n);
  std::vector<double> box(n);
  for (std::uint32_t a = 0; a < n; ++a) {
    std::uint64_t sz = 0;
    is.read(reinterpret_cast<char*>(&sz), 8);
    sizes[a] = (int)sz;
    is.read(reinterpret_cast<char*>(&box[a]), 8);
  }
  GridSpec spec(sizes, box);
  Field f(spec);
  for (cplx& v : f.values) {
    double re = 0, im = 0;
    is.read(reinterpret_cast<char*>(&re), 8);
    is.read(reinterpret_cast<char*>(&im), 8);
    v = {re, im};
  }
  detail::require(is.good(), "read_field: truncated payload");
  return f;
}

inline Field read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  detail::require(is.good(), "read_field: cannot open " + path);
  return read_field(is);
}

}  // namespace pslab
