#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "spps/factorization.hpp"
#include "spps/mesh.hpp"

namespace spps::test {

inline double factorial(int k) { return std::tgamma(k + 1.0); }

/// y_k = (x - x0)^(k-1) / (k-1)! with derivatives up to `max_order`.
inline SolutionSystem monomial_system(const Mesh& mesh, int n, int max_order) {
  SolutionSystem s;
  const double x0 = mesh.basepoint();
  for (int k = 1; k <= n; ++k) {
    DerivativeTable t;
    for (int d = 0; d <= max_order; ++d) {
      const int p = k - 1 - d;
      t.push_back(SampledFunction::tabulate(mesh, [&](double x) -> cplx {
        return p < 0 ? 0.0 : std::pow(x - x0, p) / factorial(p);
      }));
    }
    s.y.push_back(std::move(t));
  }
  return s;
}

inline OperatorSpec constant_operator(const Mesh& mesh, std::vector<cplx> phi, cplx weight = 1.0) {
  std::vector<DerivativeTable> tables;
  for (const auto& c : phi) {
    DerivativeTable t{SampledFunction::constant(mesh, c)};
    for (std::size_t d = 1; d < phi.size(); ++d) t.push_back(SampledFunction::constant(mesh, 0.0));
    tables.push_back(std::move(t));
  }
  return OperatorSpec(std::move(tables), SampledFunction::constant(mesh, weight));
}

inline OperatorSpec zero_operator(const Mesh& mesh, int n) {
  return constant_operator(mesh, std::vector<cplx>(static_cast<std::size_t>(n), 0.0));
}

/// Real cubic a0 + a1 x + a2 x^2 + a3 x^3.
struct Cubic {
  std::array<double, 4> a{};

  double operator()(double x) const { return a[0] + x * (a[1] + x * (a[2] + x * a[3])); }
  Cubic derivative() const { return Cubic{{a[1], 2.0 * a[2], 3.0 * a[3], 0.0}}; }
};

/// Ly = y^(n) + phi_1 y^(n-1) + ... + phi_n y with cubic coefficients and a
/// cubic weight.
struct PolynomialProblem {
  int n = 0;
  std::vector<Cubic> phi;
  Cubic weight;

  OperatorSpec op(const Mesh& mesh) const {
    std::vector<DerivativeTable> tables;
    for (const auto& p : phi) {
      DerivativeTable t;
      Cubic q = p;
      for (int d = 0; d < std::max(n, 4); ++d) {
        t.push_back(SampledFunction::tabulate(mesh, q));
        q = q.derivative();
      }
      tables.push_back(std::move(t));
    }
    return OperatorSpec(std::move(tables), SampledFunction::tabulate(mesh, weight));
  }
};

/// Coefficients uniform in [-1, 1]; weight 1 + (cubic with coefficients in
/// [-1/4, 1/4]), so it stays positive on [0, 1].
inline PolynomialProblem random_problem(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PolynomialProblem p;
  p.n = n;
  for (int j = 0; j < n; ++j) p.phi.push_back(Cubic{{u(rng), u(rng), u(rng), u(rng)}});
  p.weight = Cubic{{1.0 + 0.25 * u(rng), 0.25 * u(rng), 0.25 * u(rng), 0.25 * u(rng)}};
  return p;
}

inline double relative_difference(const SampledFunction& f, const SampledFunction& g) {
  return max_difference(f, g) / std::max(g.max_modulus(), 1e-300);
}

}  // namespace spps::test
