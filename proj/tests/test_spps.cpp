#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <thread>

#include "spps/formal_powers.hpp"
#include "spps/seed.hpp"
#include "support.hpp"

using namespace spps;
using spps::test::factorial;
using spps::test::monomial_system;

namespace {

struct Setup {
  OperatorSpec op;
  PolyaFactorization fac;
  DerivativeCoeffs coeffs;
  FormalPowerTable table;
};

Setup monomial_setup(const Mesh& m, int n, int M) {
  auto op = spps::test::zero_operator(m, n);
  auto fac = factorize(op, monomial_system(m, n, 2 * n - 2));
  auto coeffs = compute_A(fac);
  auto table = formal_powers(fac, op.weight(), M);
  return {std::move(op), std::move(fac), std::move(coeffs), std::move(table)};
}

Setup random_setup(const Mesh& m, int n, std::uint64_t seed, int M) {
  auto op = spps::test::random_problem(n, seed).op(m);
  SeedOptions opts;
  opts.rng_seed = seed;
  auto sys = build_seed_system(op, opts).system;
  auto fac = factorize(op, sys);
  auto coeffs = compute_A(fac);
  auto table = formal_powers(fac, op.weight(), M);
  return {std::move(op), std::move(fac), std::move(coeffs), std::move(table)};
}

}  // namespace

TEST_CASE("A coefficient symbols") {
  const auto t = derivative_coefficient_terms(3);
  REQUIRE(t.size() == 3);
  // A_00 = b_0
  REQUIRE(t[0][0].size() == 1);
  CHECK(t[0][0][0].coefficient == 1);
  CHECK(t[0][0][0].orders == std::vector<int>{0});
  // A_21 = 2 b_0' b_1 + b_0 b_1'
  std::map<std::vector<int>, long> a21;
  for (const auto& term : t[2][1]) a21[term.orders] = term.coefficient;
  CHECK(a21 == std::map<std::vector<int>, long>{{{1, 0}, 2}, {{0, 1}, 1}});
  // A_22 = b_0 b_1 b_2
  REQUIRE(t[2][2].size() == 1);
  CHECK(t[2][2][0].orders == std::vector<int>{0, 0, 0});
}

TEST_CASE("unit factors give A_ll = 1 and A_la = 0 below the diagonal") {
  const Mesh m(0.0, 1.0, 101, 0);
  const auto s = monomial_setup(m, 4, 2);
  for (int l = 0; l < 4; ++l)
    for (int a = 0; a <= l; ++a)
      CHECK(max_difference(s.coeffs(l, a), SampledFunction::constant(m, a == l ? 1.0 : 0.0)) <= 1e-15);
}

TEST_CASE("A_21 evaluates from factor derivatives") {
  const Mesh m(0.0, 1.0, 401, 200);
  const auto s = random_setup(m, 3, 5, 2);
  const auto& f = s.fac;
  const auto expected = cplx(2.0) * f.factor_derivative(0, 1) * f.factor(1) + f.factor(0) * f.factor_derivative(1, 1);
  CHECK(max_difference(s.coeffs(2, 1), expected) <= 1e-14 * expected.max_modulus());
}

TEST_CASE("X_k^(0) is one and X_k^(j) vanishes at the basepoint") {
  const Mesh m(0.0, 1.0, 201, 77);
  const auto s = random_setup(m, 3, 3, 4);
  for (int k = 1; k <= 3; ++k) {
    CHECK(max_difference(s.table.secondary(k, 0), SampledFunction::constant(m, 1.0)) == 0.0);
    for (int j = 1; j <= s.table.max_index(k); ++j) CHECK(s.table.secondary(k, j).at_basepoint() == cplx(0.0));
  }
  CHECK_THROWS_AS((void)s.table.secondary(1, s.table.max_index(1) + 1), std::out_of_range);
  CHECK_THROWS_AS((void)s.table.secondary(4, 0), std::out_of_range);
}

TEST_CASE("second order, unit factors: X_1^(j) = x^j") {
  const Mesh m(0.0, 1.0, 401, 0);
  const auto s = monomial_setup(m, 2, 2);
  for (int j = 1; j <= 3; ++j) {
    const auto exact = SampledFunction::tabulate(m, [&](double x) { return std::pow(x, j); });
    CHECK(max_difference(s.table.secondary(1, j), exact) <= 1e-15);
  }
}

TEST_CASE("main powers of the n-th derivative are true powers") {
  const Mesh m(0.0, 1.0, 401, 0);
  for (int n : {2, 3, 5}) {
    const auto s = monomial_setup(m, n, 10);
    for (int k = 1; k <= n; ++k)
      for (int mm = 0; mm <= 10; ++mm) {
        const int p = mm * n + k - 1;
        const auto exact = SampledFunction::tabulate(m, [&](double x) { return std::pow(x, p); });
        CHECK(max_difference(s.table.main(k, mm), exact) <= 1e-9);
      }
  }
}

TEST_CASE("lambda = 0 leaves the single term b_0 X_k^(k-1) / (k-1)!") {
  const Mesh m(0.0, 1.0, 201, 100);
  const auto s = random_setup(m, 3, 11, 5);
  for (int k = 1; k <= 3; ++k) {
    const auto u = evaluate_solution(s.table, s.fac.factor(0), k, 0.0).value;
    const auto expected = cplx(1.0 / factorial(k - 1)) * (s.fac.factor(0) * s.table.secondary(k, k - 1));
    CHECK(max_difference(u, expected) == 0.0);
    // L(b_0 I) = 0 at lambda = 0
    CHECK(relative_residual(s.op, {u, evaluate_derivatives(s.table, s.coeffs, k, 0.0, 1).value,
                                   evaluate_derivatives(s.table, s.coeffs, k, 0.0, 2).value}) <= 1e-8);
  }
}

TEST_CASE("second derivative operator, lambda = 1: cosh and sinh") {
  const Mesh m(0.0, 1.0, 401, 0);
  const auto s = monomial_setup(m, 2, 30);
  const auto u1 = evaluate_solution(s.table, s.fac.factor(0), 1, 1.0);
  const auto u2 = evaluate_solution(s.table, s.fac.factor(0), 2, 1.0);
  CHECK(max_difference(u1.value, SampledFunction::tabulate(m, [](double x) { return std::cosh(x); })) <= 1e-8);
  CHECK(max_difference(u2.value, SampledFunction::tabulate(m, [](double x) { return std::sinh(x); })) <= 1e-8);
  CHECK(u1.tail_ratio < SeriesValue::kTailWarning);
  CHECK_FALSE(u1.truncation_warning());
}

TEST_CASE("n-th derivative operator: d u_k = u_{k-1} and d u_1 = lambda u_n up to the last term") {
  const Mesh m(0.0, 1.0, 401, 0);
  const int n = 3;
  const int M = 12;
  const auto s = monomial_setup(m, n, M);
  const cplx lambda(2.0, -1.0);
  for (int k = 2; k <= n; ++k) {
    const auto du = evaluate_derivatives(s.table, s.coeffs, k, lambda, 1).value;
    const auto prev = evaluate_solution(s.table, s.fac.factor(0), k - 1, lambda).value;
    CHECK(max_difference(du, prev) <= 1e-13 * prev.max_modulus());
  }
  const auto du1 = evaluate_derivatives(s.table, s.coeffs, 1, lambda, 1).value;
  const auto un = evaluate_solution(s.table, s.fac.factor(0), n, lambda).value;
  // u_n carries one more term than d u_1: lambda^M x^(Mn+n-1) / (Mn+n-1)!
  const auto last = SampledFunction::tabulate(m, [&](double x) {
    return std::pow(lambda, M) * std::pow(x, M * n + n - 1) / factorial(M * n + n - 1);
  });
  CHECK(max_difference(du1, lambda * (un - last)) <= 1e-13 * du1.max_modulus());
}

TEST_CASE("derivative formula agrees with finite differences") {
  const Mesh m(0.0, 1.0, 801, 400);
  const auto s = random_setup(m, 4, 21, 30);
  for (const cplx lambda : {cplx(1.0), cplx(0.0, 3.0)}) {
    for (int k = 1; k <= 4; ++k) {
      const auto u = evaluate_solution(s.table, s.fac.factor(0), k, lambda).value;
      for (int l = 1; l <= 3; ++l) {
        const auto exact = evaluate_derivatives(s.table, s.coeffs, k, lambda, l).value;
        const auto fd = differentiate(u, l);
        double diff = 0.0;
        for (std::size_t i = 4; i + 4 < m.size(); ++i) diff = std::max(diff, std::abs(exact[i] - fd[i]));
        CHECK(diff / exact.max_modulus() <= 1e-6);
      }
    }
  }
  CHECK_THROWS_AS(evaluate_derivatives(s.table, s.coeffs, 1, 1.0, 4), std::out_of_range);
  CHECK_THROWS_AS(evaluate_derivatives(s.table, s.coeffs, 1, 1.0, 0), std::out_of_range);
}

TEST_CASE("initial values: triangular, diagonal b_0...b_{k-1}, consistent with derivatives") {
  const Mesh m(0.0, 1.0, 401, 123);
  const int n = 4;
  const auto s = random_setup(m, n, 8, 20);
  const auto& f = s.fac;
  cplx diag = 1.0;
  for (int k = 1; k <= n; ++k) {
    const auto v = initial_values(s.coeffs, f.factor(0), k);
    diag *= f.factor(k - 1).at_basepoint();
    CHECK(std::abs(v[static_cast<std::size_t>(k - 1)] - diag) <= 1e-12 * std::abs(diag));
    for (int l = 0; l < k - 1; ++l) CHECK(v[static_cast<std::size_t>(l)] == cplx(0.0));
    for (const cplx lambda : {cplx(0.0), cplx(5.0), cplx(2.0, 1.0)}) {
      CHECK(std::abs(evaluate_solution(s.table, f.factor(0), k, lambda).value.at_basepoint() - v[0]) <= 1e-14);
      for (int l = 1; l < n; ++l) {
        const cplx d = evaluate_derivatives(s.table, s.coeffs, k, lambda, l).value.at_basepoint();
        CHECK(std::abs(d - v[static_cast<std::size_t>(l)]) <= 1e-12 * std::max(1.0, std::abs(v[static_cast<std::size_t>(l)])));
      }
    }
  }
}

TEST_CASE("series coefficients reproduce the solution values") {
  const Mesh m(0.0, 1.0, 201, 50);
  const auto s = random_setup(m, 3, 4, 15);
  const cplx lambda(-2.0, 0.5);
  for (int k = 1; k <= 3; ++k)
    for (int l = 0; l < 3; ++l) {
      const auto c = series_coefficients(s.table, s.coeffs, k, l, m.size() - 1);
      cplx v{}, p = 1.0;
      for (const auto& ci : c) {
        v += ci * p;
        p *= lambda;
      }
      const auto direct = (l == 0 ? evaluate_solution(s.table, s.fac.factor(0), k, lambda)
                                  : evaluate_derivatives(s.table, s.coeffs, k, lambda, l)).value.back();
      CHECK(std::abs(v - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("solution is linear in the weight") {
  const Mesh m(0.0, 1.0, 201, 0);
  const auto base = monomial_setup(m, 2, 30);
  const auto scaled = formal_powers(base.fac, cplx(2.0) * base.op.weight(), 30);
  const auto a = evaluate_solution(base.table, base.fac.factor(0), 1, 1.0).value;
  const auto b = evaluate_solution(scaled, base.fac.factor(0), 1, 0.5).value;
  CHECK(max_difference(a, b) <= 1e-14);
}

TEST_CASE("main_power_derivative matches the termwise derivative of powers") {
  const Mesh m(0.0, 1.0, 401, 0);
  const auto s = monomial_setup(m, 3, 4);
  // P_2^(1) = x^4
  const auto d2 = main_power_derivative(s.table, s.coeffs, 2, 1, 2);
  CHECK(max_difference(d2, SampledFunction::tabulate(m, [](double x) { return 12 * x * x; })) <= 1e-12);
  CHECK(pochhammer(3.0, 2) == 12.0);
  CHECK(pochhammer(5.0, 0) == 1.0);
}

TEST_CASE("formal power arguments are validated") {
  const Mesh m(0.0, 1.0, 41, 0);
  const auto s = monomial_setup(m, 2, 3);
  CHECK_THROWS_AS(formal_powers(s.fac, s.op.weight(), -1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_solution(s.table, s.fac.factor(0), 3, 1.0), std::out_of_range);
  CHECK_THROWS_AS(initial_values(s.coeffs, s.fac.factor(0), 0), std::out_of_range);
}

TEST_CASE("SPPSSolution caches per lambda and is safe to share") {
  const Mesh m(0.0, 1.0, 201, 0);
  const auto s = monomial_setup(m, 2, 30);
  const SPPSSolution u1(1, std::make_shared<const FormalPowerTable>(s.table), s.fac.factor(0));
  std::vector<std::thread> pool;
  std::vector<double> err(4);
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      const double lambda = t + 1.0;
      const auto v = u1(lambda);
      err[static_cast<std::size_t>(t)] = max_difference(
          v, SampledFunction::tabulate(m, [&](double x) { return std::cosh(std::sqrt(lambda) * x); }));
    });
  for (auto& th : pool) th.join();
  for (double e : err) CHECK(e <= 1e-8);
  CHECK(max_difference(u1(2.0), u1(2.0)) == 0.0);
}
