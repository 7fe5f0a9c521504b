#include "spps/formal_powers.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace spps {

namespace {

using TermMap = std::map<std::vector<int>, long>;

TermMap differentiate_terms(const TermMap& in) {
  TermMap out;
  for (const auto& [orders, c] : in) {
    for (std::size_t i = 0; i < orders.size(); ++i) {
      auto o = orders;
      ++o[i];
      out[o] += c;
    }
  }
  return out;
}

TermMap append_factor(const TermMap& in) {
  TermMap out;
  for (const auto& [orders, c] : in) {
    auto o = orders;
    o.push_back(0);
    out[o] += c;
  }
  return out;
}

void add_into(TermMap& acc, const TermMap& in) {
  for (const auto& [o, c] : in) acc[o] += c;
}

struct Kahan {
  cplx sum{};
  cplx comp{};
  void add(cplx v) {
    const cplx y = v - comp;
    const cplx t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// w_m = lambda^m / (m n + k - 1)!, built from ratios of consecutive factorials.
std::vector<cplx> series_weights(int n, int k, int truncation, cplx lambda) {
  std::vector<cplx> w(static_cast<std::size_t>(truncation) + 1);
  double f = 1.0;
  for (int q = 2; q <= k - 1; ++q) f *= q;
  w[0] = 1.0 / f;
  for (int m = 1; m <= truncation; ++m) {
    cplx v = w[static_cast<std::size_t>(m - 1)] * lambda;
    for (int q = (m - 1) * n + k; q <= m * n + k - 1; ++q) v /= static_cast<double>(q);
    w[static_cast<std::size_t>(m)] = v;
  }
  return w;
}

void check_k(const FormalPowerTable& table, int k) {
  if (k < 1 || k > table.order())
    throw std::out_of_range("solution index k must lie in 1..n, got " + std::to_string(k));
}

}  // namespace

FormalPowerTable::FormalPowerTable(int order, int truncation,
                                   std::vector<std::vector<SampledFunction>> powers)
    : order_(order), truncation_(truncation), powers_(std::move(powers)) {
  if (static_cast<int>(powers_.size()) != order_)
    throw std::invalid_argument("formal power table needs one sequence per k");
  for (int k = 1; k <= order_; ++k)
    if (static_cast<int>(powers_[static_cast<std::size_t>(k - 1)].size()) != max_index(k) + 1)
      throw std::invalid_argument("formal power sequence has the wrong length");
}

const SampledFunction& FormalPowerTable::secondary(int k, int j) const {
  if (k < 1 || k > order_ || j < 0 || j > max_index(k))
    throw std::out_of_range("formal power X_" + std::to_string(k) + "^(" + std::to_string(j) +
                            ") is not stored");
  return powers_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)];
}

FormalPowerTable formal_powers(const PolyaFactorization& fac, const SampledFunction& weight,
                               int truncation) {
  if (truncation < 0) throw std::invalid_argument("truncation order must be >= 0");
  const int n = fac.order();
  const SampledFunction closing = fac.factor(n) * fac.factor(0) * weight;
  std::vector<std::vector<SampledFunction>> powers(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    auto& seq = powers[static_cast<std::size_t>(k - 1)];
    seq.push_back(SampledFunction::constant(fac.mesh(), 1.0));
    for (int j = 1; j <= truncation * n + k - 1; ++j) {
      const int t = ((k - j) % n + n) % n;
      const SampledFunction& mult = (t == 0) ? closing : fac.factor(t);
      seq.push_back(static_cast<double>(j) * cumulative_integral(mult * seq.back()));
    }
  }
  return FormalPowerTable(n, truncation, std::move(powers));
}

std::vector<std::vector<std::vector<DerivativeCoeffs::Term>>> derivative_coefficient_terms(
    int order) {
  std::vector<std::vector<TermMap>> maps(static_cast<std::size_t>(order));
  for (int l = 0; l < order; ++l) {
    auto& row = maps[static_cast<std::size_t>(l)];
    row.resize(static_cast<std::size_t>(l) + 1);
    if (l == 0) {
      row[0][{0}] = 1;
      continue;
    }
    const auto& prev = maps[static_cast<std::size_t>(l - 1)];
    for (int a = 0; a <= l; ++a) {
      TermMap acc;
      if (a <= l - 1) add_into(acc, differentiate_terms(prev[static_cast<std::size_t>(a)]));
      if (a >= 1) add_into(acc, append_factor(prev[static_cast<std::size_t>(a - 1)]));
      row[static_cast<std::size_t>(a)] = std::move(acc);
    }
  }
  std::vector<std::vector<std::vector<DerivativeCoeffs::Term>>> out(maps.size());
  for (std::size_t l = 0; l < maps.size(); ++l) {
    for (const auto& m : maps[l]) {
      std::vector<DerivativeCoeffs::Term> terms;
      for (const auto& [o, c] : m)
        if (c != 0) terms.push_back({c, o});
      out[l].push_back(std::move(terms));
    }
  }
  return out;
}

DerivativeCoeffs compute_A(const PolyaFactorization& fac) {
  const int n = fac.order();
  DerivativeCoeffs out;
  out.order = n;
  out.terms = derivative_coefficient_terms(n);
  const Mesh& mesh = fac.mesh();
  for (const auto& row : out.terms) {
    std::vector<SampledFunction> vals;
    for (const auto& terms : row) {
      std::vector<cplx> v(mesh.size(), cplx{});
      for (const auto& t : terms) {
        for (std::size_t p = 0; p < mesh.size(); ++p) {
          cplx prod = static_cast<double>(t.coefficient);
          for (std::size_t i = 0; i < t.orders.size(); ++i)
            prod *= fac.factor_derivative(static_cast<int>(i), t.orders[i])[p];
          v[p] += prod;
        }
      }
      vals.emplace_back(mesh, std::move(v));
    }
    out.values.push_back(std::move(vals));
  }
  return out;
}

double pochhammer(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x + i;
  return r;
}

SeriesValue evaluate_solution(const FormalPowerTable& table, const SampledFunction& b0, int k,
                              cplx lambda) {
  check_k(table, k);
  const int n = table.order();
  const int M = table.truncation();
  const auto w = series_weights(n, k, M, lambda);
  const Mesh& mesh = table.mesh();
  std::vector<cplx> out(mesh.size());
  double last = 0.0;
  for (std::size_t p = 0; p < mesh.size(); ++p) {
    Kahan acc;
    for (int m = 0; m <= M; ++m) acc.add(w[static_cast<std::size_t>(m)] * table.main(k, m)[p]);
    out[p] = b0[p] * acc.sum;
    last = std::max(last, std::abs(b0[p] * w.back() * table.main(k, M)[p]));
  }
  SampledFunction u(mesh, std::move(out));
  const double scale = u.max_modulus();
  const double tail = scale > 0.0 ? last / scale : (last > 0.0 ? 1.0 : 0.0);
  return {std::move(u), tail};
}

SeriesValue evaluate_derivatives(const FormalPowerTable& table, const DerivativeCoeffs& coeffs,
                                 int k, cplx lambda, int l) {
  check_k(table, k);
  const int n = table.order();
  if (l < 1 || l > n - 1)
    throw std::out_of_range("derivative order must lie in 1..n-1, got " + std::to_string(l));
  const int M = table.truncation();
  const auto w = series_weights(n, k, M, lambda);
  const Mesh& mesh = table.mesh();

  struct Piece {
    int m;
    cplx c;
    const SampledFunction* a;
    const SampledFunction* x;
  };
  std::vector<Piece> pieces;
  for (int m = 0; m <= M; ++m) {
    const int J = m * n + k - 1;
    for (int a = 0; a <= l; ++a) {
      if (J - a < 0) continue;
      const cplx c = w[static_cast<std::size_t>(m)] * pochhammer(J - a + 1, a);
      pieces.push_back({m, c, &coeffs(l, a), &table.secondary(k, J - a)});
    }
  }

  std::vector<cplx> out(mesh.size());
  double last = 0.0;
  for (std::size_t p = 0; p < mesh.size(); ++p) {
    Kahan acc;
    cplx tail{};
    for (const auto& pc : pieces) {
      const cplx term = pc.c * (*pc.a)[p] * (*pc.x)[p];
      acc.add(term);
      if (pc.m == M) tail += term;
    }
    out[p] = acc.sum;
    last = std::max(last, std::abs(tail));
  }
  SampledFunction d(mesh, std::move(out));
  const double scale = d.max_modulus();
  const double ratio = scale > 0.0 ? last / scale : (last > 0.0 ? 1.0 : 0.0);
  return {std::move(d), ratio};
}

SampledFunction main_power_derivative(const FormalPowerTable& table, const DerivativeCoeffs& coeffs,
                                      int k, int m, int l) {
  check_k(table, k);
  const int n = table.order();
  if (l < 0 || l > n - 1) throw std::out_of_range("derivative order must lie in 0..n-1");
  const int J = m * n + k - 1;
  std::vector<cplx> out(table.mesh().size(), cplx{});
  for (int a = 0; a <= l; ++a) {
    if (J - a < 0) continue;
    const double c = pochhammer(J - a + 1, a);
    const auto& A = coeffs(l, a);
    const auto& X = table.secondary(k, J - a);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += c * A[p] * X[p];
  }
  return SampledFunction(table.mesh(), std::move(out));
}

std::vector<cplx> initial_values(const DerivativeCoeffs& coeffs, const SampledFunction& b0, int k) {
  const int n = coeffs.order;
  if (k < 1 || k > n) throw std::out_of_range("solution index k must lie in 1..n");
  std::vector<cplx> v(static_cast<std::size_t>(n), cplx{});
  v[0] = (k == 1) ? b0.at_basepoint() : cplx{};
  for (int l = 1; l < n; ++l)
    if (l >= k - 1) v[static_cast<std::size_t>(l)] = coeffs(l, k - 1).at_basepoint();
  return v;
}

std::vector<cplx> series_coefficients(const FormalPowerTable& table, const DerivativeCoeffs& coeffs,
                                      int k, int l, std::size_t node) {
  check_k(table, k);
  const int n = table.order();
  if (l < 0 || l > n - 1) throw std::out_of_range("derivative order must lie in 0..n-1");
  const int M = table.truncation();
  const auto w = series_weights(n, k, M, 1.0);
  std::vector<cplx> c(static_cast<std::size_t>(M) + 1, cplx{});
  for (int m = 0; m <= M; ++m) {
    const int J = m * n + k - 1;
    cplx s{};
    for (int a = 0; a <= l; ++a) {
      if (J - a < 0) continue;
      s += pochhammer(J - a + 1, a) * coeffs(l, a)[node] * table.secondary(k, J - a)[node];
    }
    c[static_cast<std::size_t>(m)] = w[static_cast<std::size_t>(m)] * s;
  }
  return c;
}

SPPSSolution::SPPSSolution(int k, std::shared_ptr<const FormalPowerTable> table, SampledFunction b0)
    : k_(k), table_(std::move(table)), b0_(std::move(b0)) {
  check_k(*table_, k_);
}

SampledFunction SPPSSolution::operator()(cplx lambda) const {
  const std::pair<double, double> key{lambda.real(), lambda.imag()};
  std::lock_guard<std::mutex> lock(mutex_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  auto v = evaluate_solution(*table_, b0_, k_, lambda).value;
  cache_.emplace(key, v);
  return v;
}

}  // namespace spps
