#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace spps::detail {

/// Truncated Taylor series c_0 + c_1 t + ... + c_D t^D of a function at a
/// point (c_d = f^(d)/d!). Arithmetic on jets propagates derivatives exactly
/// up to order D.
class Jet {
 public:
  using cplx = std::complex<double>;

  Jet() = default;
  explicit Jet(std::size_t order, cplx value = {}) : c_(order + 1, cplx{}) { c_[0] = value; }
  explicit Jet(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {}

  /// Jet from derivative values f, f', f'', ...
  static Jet from_derivatives(const std::vector<cplx>& d) {
    Jet j(d.size() - 1);
    double fact = 1.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (k > 0) fact *= static_cast<double>(k);
      j.c_[k] = d[k] / fact;
    }
    return j;
  }

  std::size_t order() const { return c_.size() - 1; }
  cplx operator[](std::size_t k) const { return c_[k]; }
  cplx& operator[](std::size_t k) { return c_[k]; }
  cplx value() const { return c_[0]; }
  double magnitude() const { return std::abs(c_[0]); }

  /// k-th derivative (k! c_k).
  cplx derivative(std::size_t k) const {
    double fact = 1.0;
    for (std::size_t q = 2; q <= k; ++q) fact *= static_cast<double>(q);
    return fact * c_[k];
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) {
    for (auto& v : a.c_) v = -v;
    return a;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    assert(a.c_.size() == b.c_.size());
    Jet r(a.order());
    for (std::size_t k = 0; k < a.c_.size(); ++k) {
      cplx s{};
      for (std::size_t q = 0; q <= k; ++q) s += a.c_[q] * b.c_[k - q];
      r.c_[k] = s;
    }
    return r;
  }

  friend Jet operator*(cplx s, Jet a) {
    for (auto& v : a.c_) v *= s;
    return a;
  }

  /// Requires b.value() != 0.
  friend Jet operator/(const Jet& a, const Jet& b) {
    assert(a.c_.size() == b.c_.size());
    Jet r(a.order());
    const cplx inv = 1.0 / b.c_[0];
    for (std::size_t k = 0; k < a.c_.size(); ++k) {
      cplx s = a.c_[k];
      for (std::size_t q = 1; q <= k; ++q) s -= b.c_[q] * r.c_[k - q];
      r.c_[k] = s * inv;
    }
    return r;
  }

 private:
  std::vector<cplx> c_;
};

inline double magnitude(const std::complex<double>& z) { return std::abs(z); }
inline double magnitude(const Jet& j) { return j.magnitude(); }

/// Determinant of a dense n x n row-major matrix by LU with partial pivoting.
/// Works for complex scalars and for jets (pivoting on the leading value).
template <class T>
T determinant(std::vector<T> a, std::size_t n, T one) {
  T det = std::move(one);
  bool negate = false;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = magnitude(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = magnitude(a[r * n + col]);
      if (m > best) {
        best = m;
        piv = r;
      }
    }
    if (best == 0.0) return T(0.0 * det);
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      negate = !negate;
    }
    const T pivot = a[col * n + col];
    det = det * pivot;
    for (std::size_t r = col + 1; r < n; ++r) {
      const T factor = a[r * n + col] / pivot;
      for (std::size_t c = col + 1; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
    }
  }
  return negate ? T(-det) : det;
}

inline std::complex<double> determinant(std::vector<std::complex<double>> a, std::size_t n) {
  return determinant<std::complex<double>>(std::move(a), n, std::complex<double>(1.0, 0.0));
}

}  // namespace spps::detail
