#include "spps/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

#include "spps/errors.hpp"

namespace spps {

namespace {

constexpr std::size_t kQuadratureStencil = 10;
constexpr int kDifferenceAccuracy = 6;

void require_same_mesh(const SampledFunction& f, const SampledFunction& g) {
  if (!(f.mesh() == g.mesh()))
    throw std::invalid_argument("sampled functions live on different meshes");
}

// Lagrange basis polynomial `s` through integer nodes 0..m-1, evaluated at t.
long double lagrange(std::size_t m, std::size_t s, long double t) {
  long double v = 1.0L;
  for (std::size_t q = 0; q < m; ++q) {
    if (q == s) continue;
    v *= (t - static_cast<long double>(q)) /
         (static_cast<long double>(s) - static_cast<long double>(q));
  }
  return v;
}

// weights[o][s] = integral over [o, o+1] of basis s, in units of h.
std::vector<std::vector<double>> subinterval_weights(std::size_t m) {
  // 6-point Gauss-Legendre on [0,1]; exact up to degree 11 >= m-1.
  static constexpr std::array<long double, 6> gx = {
      0.0337652428984239860938492L, 0.1693953067668677431693002L,
      0.3806904069584015456847491L, 0.6193095930415984543152509L,
      0.8306046932331322568306998L, 0.9662347571015760139061508L};
  static constexpr std::array<long double, 6> gw = {
      0.0856622461895851725201480L, 0.1803807865240693037849167L,
      0.2339569672863455236949352L, 0.2339569672863455236949352L,
      0.1803807865240693037849167L, 0.0856622461895851725201480L};
  std::vector<std::vector<double>> w(m - 1, std::vector<double>(m));
  for (std::size_t o = 0; o + 1 < m; ++o) {
    for (std::size_t s = 0; s < m; ++s) {
      long double acc = 0.0L;
      for (std::size_t g = 0; g < gx.size(); ++g)
        acc += gw[g] * lagrange(m, s, static_cast<long double>(o) + gx[g]);
      w[o][s] = static_cast<double>(acc);
    }
  }
  return w;
}

// Fornberg's algorithm: weights of the `order`-th derivative at 0 for the
// given integer offsets.
std::vector<double> fornberg(const std::vector<int>& offsets, int order) {
  const std::size_t n = offsets.size();
  const auto m = static_cast<std::size_t>(order);
  std::vector<std::vector<long double>> c(n, std::vector<long double>(m + 1, 0.0L));
  long double c1 = 1.0L;
  long double c4 = offsets[0];
  c[0][0] = 1.0L;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, m);
    long double c2 = 1.0L;
    const long double c5 = c4;
    c4 = offsets[i];
    for (std::size_t j = 0; j < i; ++j) {
      const long double c3 = static_cast<long double>(offsets[i]) - offsets[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k)
          c[i][k] = c1 * (static_cast<long double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - static_cast<long double>(k) * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(c[i][m]);
  return w;
}

struct KahanSum {
  cplx sum{0.0, 0.0};
  cplx comp{0.0, 0.0};
  void add(cplx v) {
    const cplx y = v - comp;
    const cplx t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

Mesh::Mesh(double x1, double x2, std::size_t nodes, std::size_t base_index)
    : x1_(x1), x2_(x2), nodes_(nodes), base_(base_index) {
  if (!(x1 < x2) || !std::isfinite(x1) || !std::isfinite(x2))
    throw std::invalid_argument("mesh requires finite x1 < x2");
  if (nodes < 9 || nodes % 4 != 1)
    throw std::invalid_argument("mesh node count must be >= 9 and = 1 (mod 4), got " +
                                std::to_string(nodes));
  if (base_index >= nodes) throw std::invalid_argument("basepoint index outside the mesh");
}

Mesh Mesh::with_basepoint(double x1, double x2, std::size_t nodes, double x0) {
  Mesh probe(x1, x2, nodes, 0);
  const double t = std::round((x0 - x1) / probe.step());
  const auto idx = static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(nodes - 1)));
  return Mesh(x1, x2, nodes, idx);
}

double Mesh::node(std::size_t i) const {
  if (i + 1 == nodes_) return x2_;
  return x1_ + static_cast<double>(i) * step();
}

std::vector<double> Mesh::nodes() const {
  std::vector<double> x(nodes_);
  for (std::size_t i = 0; i < nodes_; ++i) x[i] = node(i);
  return x;
}

SampledFunction::SampledFunction(Mesh mesh, std::vector<cplx> values)
    : mesh_(mesh), values_(std::move(values)) {
  if (values_.size() != mesh_.size())
    throw std::invalid_argument("value count does not match mesh size");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
      throw Error("non-finite sample at node " + std::to_string(i) +
                  " (x = " + std::to_string(mesh_.node(i)) + ")");
  }
}

SampledFunction SampledFunction::constant(const Mesh& mesh, cplx value) {
  return SampledFunction(mesh, std::vector<cplx>(mesh.size(), value));
}

double SampledFunction::max_modulus() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::size_t SampledFunction::argmax_modulus() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values_.size(); ++i)
    if (std::abs(values_[i]) > std::abs(values_[best])) best = i;
  return best;
}

SampledFunction operator+(const SampledFunction& f, const SampledFunction& g) {
  require_same_mesh(f, g);
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] + g[i];
  return SampledFunction(f.mesh(), std::move(v));
}

SampledFunction operator-(const SampledFunction& f, const SampledFunction& g) {
  require_same_mesh(f, g);
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] - g[i];
  return SampledFunction(f.mesh(), std::move(v));
}

SampledFunction operator*(const SampledFunction& f, const SampledFunction& g) {
  require_same_mesh(f, g);
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] * g[i];
  return SampledFunction(f.mesh(), std::move(v));
}

SampledFunction operator*(cplx c, const SampledFunction& f) {
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * f[i];
  return SampledFunction(f.mesh(), std::move(v));
}

SampledFunction operator-(const SampledFunction& f) { return cplx(-1.0, 0.0) * f; }

SampledFunction reciprocal(const SampledFunction& f, double tolerance) {
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(f[i]) <= tolerance)
      throw VanishingFunction("reciprocal of a function vanishing at node " + std::to_string(i) +
                                  " (x = " + std::to_string(f.mesh().node(i)) + ")",
                              i, f.mesh().node(i));
    v[i] = 1.0 / f[i];
  }
  return SampledFunction(f.mesh(), std::move(v));
}

SampledFunction cumulative_integral(const SampledFunction& f) {
  const Mesh& mesh = f.mesh();
  const std::size_t n = mesh.size();
  const std::size_t m = std::min(kQuadratureStencil, n);
  static const auto w10 = subinterval_weights(kQuadratureStencil);
  const auto weights = (m == kQuadratureStencil) ? w10 : subinterval_weights(m);
  const double h = mesh.step();

  // piece[i] = integral over [x_i, x_{i+1}]
  std::vector<cplx> piece(n - 1);
  const std::size_t lead = m / 2 - 1;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t start = std::min(i > lead ? i - lead : 0, n - m);
    const auto& w = weights[i - start];
    cplx acc{0.0, 0.0};
    for (std::size_t s = 0; s < m; ++s) acc += w[s] * f[start + s];
    piece[i] = h * acc;
  }

  std::vector<cplx> out(n, cplx{0.0, 0.0});
  const std::size_t i0 = mesh.base_index();
  KahanSum right;
  for (std::size_t i = i0; i + 1 < n; ++i) {
    right.add(piece[i]);
    out[i + 1] = right.sum;
  }
  KahanSum left;
  for (std::size_t i = i0; i > 0; --i) {
    left.add(-piece[i - 1]);
    out[i - 1] = left.sum;
  }
  return SampledFunction(mesh, std::move(out));
}

SampledFunction differentiate(const SampledFunction& f, int order) {
  if (order < 1) throw std::invalid_argument("derivative order must be >= 1");
  const Mesh& mesh = f.mesh();
  const std::size_t n = mesh.size();
  const int interior = 2 * ((order + 1) / 2) - 1 + kDifferenceAccuracy;
  const int boundary = order + kDifferenceAccuracy;
  if (static_cast<std::size_t>(std::max(interior, boundary)) > n)
    throw std::invalid_argument("mesh of " + std::to_string(n) + " nodes is too small for a order-" +
                                std::to_string(order) + " difference stencil");

  const int half = (interior - 1) / 2;
  std::vector<int> centered(static_cast<std::size_t>(interior));
  for (int s = 0; s < interior; ++s) centered[static_cast<std::size_t>(s)] = s - half;
  const auto wc = fornberg(centered, order);

  // one-sided weights, indexed by position of the evaluation node in the window
  std::vector<std::vector<double>> wb(static_cast<std::size_t>(boundary));
  for (int p = 0; p < boundary; ++p) {
    std::vector<int> off(static_cast<std::size_t>(boundary));
    for (int s = 0; s < boundary; ++s) off[static_cast<std::size_t>(s)] = s - p;
    wb[static_cast<std::size_t>(p)] = fornberg(off, order);
  }

  const double scale = std::pow(mesh.step(), -order);
  std::vector<cplx> out(n);
  const auto ni = static_cast<long>(n);
  for (long i = 0; i < ni; ++i) {
    const cplx fi = f[static_cast<std::size_t>(i)];
    cplx acc{0.0, 0.0};
    if (i - half >= 0 && i + half < ni) {
      for (int s = 0; s < interior; ++s)
        acc += wc[static_cast<std::size_t>(s)] * (f[static_cast<std::size_t>(i - half + s)] - fi);
    } else {
      const long start = (i - half < 0) ? 0 : ni - boundary;
      const auto& w = wb[static_cast<std::size_t>(i - start)];
      for (int s = 0; s < boundary; ++s)
        acc += w[static_cast<std::size_t>(s)] * (f[static_cast<std::size_t>(start + s)] - fi);
    }
    out[static_cast<std::size_t>(i)] = scale * acc;
  }
  return SampledFunction(mesh, std::move(out));
}

double max_difference(const SampledFunction& f, const SampledFunction& g) {
  require_same_mesh(f, g);
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g[i]));
  return m;
}

void write_csv(std::ostream& os, const SampledFunction& f) {
  const auto old = os.precision(17);
  os << "x,re,im\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    os << f.mesh().node(i) << ',' << f[i].real() << ',' << f[i].imag() << '\n';
  os.precision(old);
}

}  // namespace spps
