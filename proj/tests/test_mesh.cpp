#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "spps/errors.hpp"
#include "spps/mesh.hpp"

using namespace spps;

TEST_CASE("mesh geometry") {
  const Mesh m(0.0, 2.0, 9, 4);
  CHECK(m.size() == 9);
  CHECK(m.step() == doctest::Approx(0.25));
  CHECK(m.basepoint() == 1.0);
  CHECK(m.node(8) == 2.0);
  CHECK(m.nodes().front() == 0.0);
}

TEST_CASE("mesh rejects bad node counts and intervals") {
  CHECK_THROWS_AS(Mesh(0.0, 1.0, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(Mesh(0.0, 1.0, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(Mesh(1.0, 1.0, 9, 0), std::invalid_argument);
  CHECK_THROWS_AS(Mesh(0.0, 1.0, 9, 9), std::invalid_argument);
  CHECK_THROWS_AS(Mesh(0.0, INFINITY, 9, 0), std::invalid_argument);
}

TEST_CASE("basepoint snaps to the nearest node") {
  const auto m = Mesh::with_basepoint(0.0, 1.0, 401, 0.3012);
  CHECK(m.base_index() == 120);
  CHECK(Mesh::with_basepoint(0.0, 1.0, 401, 5.0).base_index() == 400);
  CHECK(Mesh::with_basepoint(0.0, 1.0, 401, -5.0).base_index() == 0);
}

TEST_CASE("sampled functions reject non-finite values") {
  const Mesh m(0.0, 1.0, 9, 0);
  std::vector<cplx> v(9, 1.0);
  v[3] = NAN;
  CHECK_THROWS_AS(SampledFunction(m, v), Error);
  CHECK_THROWS_AS(SampledFunction(m, std::vector<cplx>(8, 1.0)), std::invalid_argument);
}

TEST_CASE("cumulative integral of a constant is exactly x") {
  const Mesh m(0.0, 1.0, 401, 0);
  const auto F = cumulative_integral(SampledFunction::constant(m, 1.0));
  double err = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) err = std::max(err, std::abs(F[i] - m.node(i)));
  CHECK(err <= 1e-15);
}

TEST_CASE("cumulative integral of x^3 is x^4/4") {
  const Mesh m(0.0, 1.0, 401, 0);
  const auto F = cumulative_integral(SampledFunction::tabulate(m, [](double x) { return x * x * x; }));
  const auto exact = SampledFunction::tabulate(m, [](double x) { return std::pow(x, 4) / 4.0; });
  CHECK(max_difference(F, exact) <= 1e-15);
}

TEST_CASE("cumulative integral vanishes at the basepoint") {
  for (std::size_t base : {0u, 17u, 200u, 400u}) {
    const Mesh m(-1.0, 3.0, 401, base);
    const auto F = cumulative_integral(SampledFunction::tabulate(m, [](double x) { return std::exp(x) * std::sin(5 * x); }));
    CHECK(F.at_basepoint() == cplx(0.0));
  }
}

TEST_CASE("cumulative integral is exact for degree 9 polynomials") {
  const Mesh m(0.0, 1.0, 101, 37);
  const double x0 = m.basepoint();
  const auto F = cumulative_integral(SampledFunction::tabulate(m, [](double x) { return std::pow(x, 9); }));
  const auto exact = SampledFunction::tabulate(m, [&](double x) { return (std::pow(x, 10) - std::pow(x0, 10)) / 10.0; });
  CHECK(max_difference(F, exact) <= 1e-15);
}

TEST_CASE("cumulative integral converges on smooth functions") {
  double prev = 0.0;
  for (std::size_t n : {41u, 81u, 161u}) {
    const Mesh m(0.0, std::numbers::pi, n, 0);
    const auto F = cumulative_integral(SampledFunction::tabulate(m, [](double x) { return std::cos(3 * x); }));
    const auto exact = SampledFunction::tabulate(m, [](double x) { return std::sin(3 * x) / 3.0; });
    const double err = max_difference(F, exact);
    if (prev > 0.0 && prev > 1e-13) CHECK(err < prev / 100.0);
    prev = err;
  }
  CHECK(prev <= 1e-12);
}

TEST_CASE("differentiate x^2 gives 2x") {
  const Mesh m(0.0, 1.0, 401, 0);
  const auto d = differentiate(SampledFunction::tabulate(m, [](double x) { return x * x; }), 1);
  const auto exact = SampledFunction::tabulate(m, [](double x) { return 2 * x; });
  CHECK(max_difference(d, exact) <= 1e-10);
}

TEST_CASE("differentiate sin on [0, pi] meets the h^4 bound") {
  const Mesh m(0.0, std::numbers::pi, 401, 0);
  const double h = m.step();
  const auto d = differentiate(SampledFunction::tabulate(m, [](double x) { return std::sin(x); }), 1);
  const auto exact = SampledFunction::tabulate(m, [](double x) { return std::cos(x); });
  CHECK(max_difference(d, exact) <= std::pow(h, 4));
}

TEST_CASE("repeated first differences agree with the second difference") {
  const Mesh m(0.0, 1.0, 401, 0);
  const auto f = SampledFunction::tabulate(m, [](double x) { return std::exp(2 * x) * std::cos(x); });
  const auto twice = differentiate(differentiate(f, 1), 1);
  const auto direct = differentiate(f, 2);
  CHECK(max_difference(twice, direct) / direct.max_modulus() <= 1e-7);
}

TEST_CASE("differentiate annihilates constants exactly") {
  const Mesh m(0.0, 1.0, 401, 0);
  for (int order = 1; order <= 5; ++order)
    CHECK(differentiate(SampledFunction::constant(m, cplx(3.0, -1.0)), order).max_modulus() == 0.0);
}

TEST_CASE("differentiate needs enough nodes") {
  const Mesh m(0.0, 1.0, 9, 0);
  CHECK_THROWS_AS(differentiate(SampledFunction::constant(m, 1.0), 6), std::invalid_argument);
  CHECK_THROWS_AS(differentiate(SampledFunction::constant(m, 1.0), 0), std::invalid_argument);
}

TEST_CASE("pointwise arithmetic") {
  const Mesh m(0.0, 1.0, 41, 0);
  const auto x = SampledFunction::tabulate(m, [](double t) { return t; });
  CHECK((x + cplx(-1.0) * x).max_modulus() == 0.0);
  CHECK((x - x).max_modulus() == 0.0);
  CHECK(max_difference(x * x, SampledFunction::tabulate(m, [](double t) { return t * t; })) == 0.0);
  CHECK(max_difference(-x, cplx(-1.0) * x) == 0.0);
  const Mesh other(0.0, 2.0, 41, 0);
  CHECK_THROWS_AS(x + SampledFunction::constant(other, 1.0), std::invalid_argument);
}

TEST_CASE("reciprocal names the vanishing node") {
  const Mesh m(-1.0, 1.0, 41, 0);
  const auto x = SampledFunction::tabulate(m, [](double t) { return t; });
  try {
    (void)reciprocal(x, 1e-12);
    FAIL("expected VanishingFunction");
  } catch (const VanishingFunction& e) {
    CHECK(e.node() == 20);
    CHECK(e.x() == doctest::Approx(0.0));
    CHECK(std::string(e.what()).find("node 20") != std::string::npos);
  }
  const auto r = reciprocal(SampledFunction::constant(m, 4.0));
  CHECK(r[7] == cplx(0.25));
}

TEST_CASE("argmax and max modulus") {
  const Mesh m(0.0, 1.0, 9, 0);
  const auto f = SampledFunction::tabulate(m, [](double x) { return cplx(0.0, -std::sin(3 * x)); });
  CHECK(f.argmax_modulus() == 4);
  CHECK(f.max_modulus() == doctest::Approx(std::sin(1.5)));
}

TEST_CASE("csv output uses 17 significant digits and round-trips") {
  const Mesh m(0.0, 1.0, 9, 0);
  const auto f = SampledFunction::tabulate(m, [](double x) { return cplx(std::exp(x), -x / 3.0); });
  std::ostringstream os;
  write_csv(os, f);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,re,im");
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::getline(is, line);
    std::istringstream row(line);
    std::string a, b, c;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    std::getline(row, c, ',');
    CHECK(std::stod(a) == m.node(i));
    CHECK(std::stod(b) == f[i].real());
    CHECK(std::stod(c) == f[i].imag());
  }
}
