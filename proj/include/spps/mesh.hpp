#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace spps {

using cplx = std::complex<double>;

/// Uniform mesh on [x1, x2] with a distinguished basepoint node.
///
/// Every indefinite integral in the library starts at the basepoint, so the
/// basepoint is a mesh node by construction (no interpolation is ever needed).
/// The node count must satisfy N >= 9 and N = 1 (mod 4).
class Mesh {
 public:
  Mesh(double x1, double x2, std::size_t nodes, std::size_t base_index);

  /// Builds a mesh whose basepoint is the node nearest to `x0`.
  static Mesh with_basepoint(double x1, double x2, std::size_t nodes, double x0);

  double x1() const { return x1_; }
  double x2() const { return x2_; }
  std::size_t size() const { return nodes_; }
  std::size_t base_index() const { return base_; }
  double step() const { return (x2_ - x1_) / static_cast<double>(nodes_ - 1); }
  double node(std::size_t i) const;
  double basepoint() const { return node(base_); }
  std::vector<double> nodes() const;

  bool operator==(const Mesh&) const = default;

 private:
  double x1_;
  double x2_;
  std::size_t nodes_;
  std::size_t base_;
};

/// Complex-valued function tabulated on a mesh. Values are always finite.
class SampledFunction {
 public:
  SampledFunction(Mesh mesh, std::vector<cplx> values);

  static SampledFunction constant(const Mesh& mesh, cplx value);

  template <class F>
  static SampledFunction tabulate(const Mesh& mesh, F&& f) {
    std::vector<cplx> v(mesh.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = cplx(f(mesh.node(i)));
    return SampledFunction(mesh, std::move(v));
  }

  const Mesh& mesh() const { return mesh_; }
  std::size_t size() const { return values_.size(); }
  std::span<const cplx> values() const { return values_; }
  cplx operator[](std::size_t i) const { return values_[i]; }
  cplx front() const { return values_.front(); }
  cplx back() const { return values_.back(); }
  cplx at_basepoint() const { return values_[mesh_.base_index()]; }

  double max_modulus() const;
  /// Node index of the largest |f|.
  std::size_t argmax_modulus() const;

 private:
  Mesh mesh_;
  std::vector<cplx> values_;
};

/// f and its derivatives: entry d holds the d-th derivative.
using DerivativeTable = std::vector<SampledFunction>;

SampledFunction operator+(const SampledFunction& f, const SampledFunction& g);
SampledFunction operator-(const SampledFunction& f, const SampledFunction& g);
SampledFunction operator*(const SampledFunction& f, const SampledFunction& g);
SampledFunction operator*(cplx c, const SampledFunction& f);
SampledFunction operator-(const SampledFunction& f);

/// 1/f. Throws VanishingFunction naming the first node where |f| <= tolerance.
SampledFunction reciprocal(const SampledFunction& f, double tolerance = 0.0);

/// F(x) = integral of f from the basepoint to x.
///
/// Each subinterval is integrated exactly against the degree-9 interpolant
/// through the 10 surrounding nodes (shifted inward at the ends), and the
/// partial sums are accumulated outward from the basepoint, so F(x0) == 0
/// exactly and monomials up to degree 9 are integrated without truncation
/// error.
SampledFunction cumulative_integral(const SampledFunction& f);

/// Finite-difference derivative of the given order with accuracy O(h^6),
/// centered in the interior and one-sided at the ends. Throws
/// std::invalid_argument when the mesh is too small for the stencil.
SampledFunction differentiate(const SampledFunction& f, int order);

/// Sup norm of f - g.
double max_difference(const SampledFunction& f, const SampledFunction& g);

/// Writes `x,re,im` rows (with a header) at 17 significant digits.
void write_csv(std::ostream& os, const SampledFunction& f);

}  // namespace spps
