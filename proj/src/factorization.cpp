#include "spps/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spps/detail/jet.hpp"
#include "spps/errors.hpp"

namespace spps {

using detail::Jet;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<cplx> column(const std::vector<DerivativeTable>& tables, std::size_t node,
                         std::size_t j, std::size_t count) {
  std::vector<cplx> d(count);
  for (std::size_t k = 0; k < count; ++k) d[k] = tables[j][k][node];
  return d;
}

DerivativeTable tables_from_jets(const Mesh& mesh, const std::vector<Jet>& jets,
                                 std::size_t count) {
  DerivativeTable out;
  out.reserve(count);
  for (std::size_t d = 0; d < count; ++d) {
    std::vector<cplx> v(jets.size());
    for (std::size_t i = 0; i < jets.size(); ++i) v[i] = jets[i].derivative(d);
    out.emplace_back(mesh, std::move(v));
  }
  return out;
}

void require_nonvanishing(const std::vector<SampledFunction>& w, double floor) {
  const auto report = check_nonvanishing(w, floor, true);
  for (std::size_t j = 0; j < report.entries.size(); ++j) {
    const auto& e = report.entries[j];
    if (!e.pass)
      throw VanishingFunction("Wronskian W_" + std::to_string(j) + " vanishes near node " +
                                  std::to_string(e.node) + " (x = " + std::to_string(e.x) +
                                  ", |W| = " + std::to_string(e.min_modulus) + ")",
                              e.node, e.x);
  }
}

}  // namespace

OperatorSpec::OperatorSpec(std::vector<DerivativeTable> phi, SampledFunction weight)
    : phi_(std::move(phi)), weight_(std::move(weight)) {
  if (phi_.empty()) throw std::invalid_argument("operator order must be at least 1");
  for (const auto& t : phi_) {
    if (t.empty()) throw std::invalid_argument("empty coefficient table");
    for (const auto& f : t)
      if (!(f.mesh() == weight_.mesh()))
        throw std::invalid_argument("operator coefficients live on different meshes");
  }
}

OperatorSpec OperatorSpec::from_samples(std::vector<SampledFunction> phi, SampledFunction weight) {
  const int n = static_cast<int>(phi.size());
  std::vector<DerivativeTable> tables;
  tables.reserve(phi.size());
  for (auto& f : phi) {
    DerivativeTable t{f};
    for (int d = 1; d < n; ++d) t.push_back(differentiate(f, d));
    tables.push_back(std::move(t));
  }
  return OperatorSpec(std::move(tables), std::move(weight));
}

const SampledFunction& OperatorSpec::phi(int j) const {
  if (j < 1 || j > order()) throw std::out_of_range("coefficient index out of range");
  return phi_[static_cast<std::size_t>(j - 1)][0];
}

SampledFunction OperatorSpec::phi_derivative(int j, int d) const {
  if (j < 1 || j > order()) throw std::out_of_range("coefficient index out of range");
  const auto& t = phi_[static_cast<std::size_t>(j - 1)];
  if (static_cast<std::size_t>(d) < t.size()) return t[static_cast<std::size_t>(d)];
  return differentiate(t[0], d);
}

OperatorSpec OperatorSpec::without_last_coefficient() const {
  auto phi = phi_;
  const auto& last = phi.back();
  DerivativeTable zero;
  for (std::size_t d = 0; d < last.size(); ++d)
    zero.push_back(SampledFunction::constant(mesh(), 0.0));
  phi.back() = std::move(zero);
  return OperatorSpec(std::move(phi), weight_);
}

OperatorSpec OperatorSpec::leading_part() const {
  if (order() < 2) throw std::logic_error("first-order operator has no leading part");
  std::vector<DerivativeTable> phi(phi_.begin(), phi_.end() - 1);
  return OperatorSpec(std::move(phi), weight_);
}

OperatorSpec OperatorSpec::with_weight(SampledFunction weight) const {
  return OperatorSpec(phi_, std::move(weight));
}

int SolutionSystem::derivative_count() const {
  std::size_t m = std::numeric_limits<std::size_t>::max();
  for (const auto& t : y) m = std::min(m, t.size());
  return y.empty() ? 0 : static_cast<int>(m);
}

SolutionSystem combine(const SolutionSystem& sys, std::span<const cplx> matrix) {
  const auto n = static_cast<std::size_t>(sys.order());
  if (matrix.size() != n * n) throw std::invalid_argument("combination matrix has wrong size");
  const auto count = static_cast<std::size_t>(sys.derivative_count());
  const Mesh& mesh = sys.mesh();
  SolutionSystem out;
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < count; ++d) {
      std::vector<cplx> v(mesh.size(), cplx{});
      for (std::size_t c = 0; c < n; ++c) {
        const cplx w = matrix[i * n + c];
        if (w == cplx{}) continue;
        const auto& src = sys.y[c][d];
        for (std::size_t p = 0; p < v.size(); ++p) v[p] += w * src[p];
      }
      out.y[i].emplace_back(mesh, std::move(v));
    }
  }
  return out;
}

SolutionSystem extend_derivatives(const OperatorSpec& op, SolutionSystem sys, int max_order) {
  const int n = op.order();
  if (sys.derivative_count() < n)
    throw std::invalid_argument("extending derivatives needs orders 0..n-1 tabulated");
  const int have = sys.derivative_count();
  const int tmax = max_order - n;
  // phi_j^(q) for q <= tmax
  std::vector<std::vector<SampledFunction>> dphi(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j)
    for (int q = 0; q <= std::max(tmax, 0); ++q)
      dphi[static_cast<std::size_t>(j - 1)].push_back(op.phi_derivative(j, q));

  const Mesh mesh = sys.mesh();
  for (auto& table : sys.y) {
    table.resize(static_cast<std::size_t>(have), table.front());
    for (int s = have; s <= max_order; ++s) {
      const int t = s - n;
      std::vector<cplx> v(mesh.size(), cplx{});
      for (int j = 1; j <= n; ++j) {
        for (int q = 0; q <= t; ++q) {
          const double c = binomial(t, q);
          const auto& f = dphi[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(q)];
          const auto& y = table[static_cast<std::size_t>(s - q - j)];
          for (std::size_t p = 0; p < v.size(); ++p) v[p] -= c * f[p] * y[p];
        }
      }
      table.emplace_back(mesh, std::move(v));
    }
  }
  return sys;
}

std::vector<SampledFunction> wronskians(const SolutionSystem& sys) {
  const auto n = static_cast<std::size_t>(sys.order());
  if (sys.derivative_count() < static_cast<int>(n))
    throw std::invalid_argument("Wronskians need derivatives up to order n-1");
  const Mesh& mesh = sys.mesh();
  std::vector<SampledFunction> w;
  w.push_back(SampledFunction::constant(mesh, 1.0));
  for (std::size_t j = 1; j <= n; ++j) {
    std::vector<cplx> v(mesh.size());
    std::vector<cplx> a(j * j);
    for (std::size_t p = 0; p < mesh.size(); ++p) {
      for (std::size_t r = 0; r < j; ++r)
        for (std::size_t c = 0; c < j; ++c) a[r * j + c] = sys.y[c][r][p];
      v[p] = detail::determinant(a, j);
    }
    w.emplace_back(mesh, std::move(v));
  }
  return w;
}

std::vector<DerivativeTable> wronskian_tables(const SolutionSystem& sys, int derivative_order) {
  const auto n = static_cast<std::size_t>(sys.order());
  const auto order = static_cast<std::size_t>(derivative_order);
  if (sys.derivative_count() < static_cast<int>(n + order))
    throw std::invalid_argument("Wronskian tables need solution derivatives up to order " +
                                std::to_string(n - 1 + order));
  const Mesh& mesh = sys.mesh();
  std::vector<DerivativeTable> out;
  {
    std::vector<Jet> one(mesh.size(), Jet(order, 1.0));
    out.push_back(tables_from_jets(mesh, one, order + 1));
  }
  for (std::size_t j = 1; j <= n; ++j) {
    std::vector<Jet> w(mesh.size());
    std::vector<Jet> a(j * j);
    std::vector<cplx> d(order + 1);
    for (std::size_t p = 0; p < mesh.size(); ++p) {
      for (std::size_t r = 0; r < j; ++r) {
        for (std::size_t c = 0; c < j; ++c) {
          for (std::size_t q = 0; q <= order; ++q) d[q] = sys.y[c][r + q][p];
          a[r * j + c] = Jet::from_derivatives(d);
        }
      }
      w[p] = detail::determinant(a, j, Jet(order, 1.0));
    }
    out.push_back(tables_from_jets(mesh, w, order + 1));
  }
  return out;
}

PolyaFactorization polya_factors(const std::vector<SampledFunction>& w, double floor) {
  if (w.size() < 2) throw std::invalid_argument("need Wronskians W_0..W_n with n >= 1");
  require_nonvanishing(w, floor);
  const std::size_t n = w.size() - 1;
  const auto d_max = static_cast<int>(n) - 1;
  PolyaFactorization fac;
  auto with_derivs = [&](SampledFunction f, int count) {
    DerivativeTable t{f};
    for (int d = 1; d <= count; ++d) t.push_back(differentiate(f, d));
    return t;
  };
  fac.b.push_back(with_derivs(w[1], d_max));
  for (std::size_t j = 1; j < n; ++j) {
    const auto inv = reciprocal(w[j]);
    fac.b.push_back(with_derivs(w[j - 1] * w[j + 1] * inv * inv, d_max));
  }
  fac.b.push_back(with_derivs(w[n - 1] * reciprocal(w[n]), d_max));
  return fac;
}

PolyaFactorization polya_factors(const std::vector<DerivativeTable>& w, double floor) {
  if (w.size() < 2) throw std::invalid_argument("need Wronskians W_0..W_n with n >= 1");
  std::vector<SampledFunction> values;
  for (const auto& t : w) values.push_back(t.front());
  require_nonvanishing(values, floor);
  const std::size_t n = w.size() - 1;
  std::size_t count = w.front().size();
  for (const auto& t : w) count = std::min(count, t.size());
  const Mesh& mesh = values.front().mesh();

  std::vector<std::vector<Jet>> b(n + 1, std::vector<Jet>(mesh.size()));
  for (std::size_t p = 0; p < mesh.size(); ++p) {
    std::vector<Jet> wj;
    for (std::size_t j = 0; j <= n; ++j) wj.push_back(Jet::from_derivatives(column(w, p, j, count)));
    b[0][p] = wj[1];
    for (std::size_t j = 1; j < n; ++j) b[j][p] = (wj[j - 1] * wj[j + 1]) / (wj[j] * wj[j]);
    b[n][p] = wj[n - 1] / wj[n];
  }
  PolyaFactorization fac;
  for (std::size_t j = 0; j <= n; ++j) fac.b.push_back(tables_from_jets(mesh, b[j], count));
  return fac;
}

PolyaFactorization factorize(const OperatorSpec& op, const SolutionSystem& sys, double floor) {
  const int n = op.order();
  if (sys.order() != n) throw std::invalid_argument("solution system size differs from order");
  const int needed = 2 * n - 1;  // orders 0..2n-2
  const SolutionSystem full =
      sys.derivative_count() >= needed ? sys : extend_derivatives(op, sys, needed - 1);
  return polya_factors(wronskian_tables(full, n - 1), floor);
}

SampledFunction apply_coefficients(const OperatorSpec& op, const SampledFunction& y) {
  const int n = op.order();
  SampledFunction out = differentiate(y, n);
  for (int j = 1; j < n; ++j) out = out + op.phi(j) * differentiate(y, n - j);
  return out + op.phi(n) * y;
}

SampledFunction apply_coefficients(const OperatorSpec& op, const DerivativeTable& y) {
  const int n = op.order();
  if (static_cast<int>(y.size()) < n)
    throw std::invalid_argument("derivative table shorter than the operator order");
  SampledFunction out = differentiate(y[static_cast<std::size_t>(n - 1)], 1);
  for (int j = 1; j <= n; ++j) out = out + op.phi(j) * y[static_cast<std::size_t>(n - j)];
  return out;
}

SampledFunction apply_factorized(const PolyaFactorization& fac, const SampledFunction& y) {
  SampledFunction v = y * reciprocal(fac.factor(0));
  for (int j = 1; j <= fac.order(); ++j) v = differentiate(v, 1) * reciprocal(fac.factor(j));
  return v;
}

double relative_residual(const OperatorSpec& op, const DerivativeTable& y) {
  const double scale = y.front().max_modulus();
  const double r = apply_coefficients(op, y).max_modulus();
  return scale > 0.0 ? r / scale : r;
}

bool NonvanishingReport::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

double NonvanishingReport::min_relative() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : entries)
    m = std::min(m, e.max_modulus > 0.0 ? e.min_modulus / e.max_modulus : 0.0);
  return m;
}

NonvanishingReport check_nonvanishing(std::span<const SampledFunction> fs, double floor,
                                      bool relative) {
  NonvanishingReport report;
  for (const auto& f : fs) {
    ModulusCheck e;
    e.min_modulus = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double m = std::abs(f[i]);
      e.max_modulus = std::max(e.max_modulus, m);
      if (m < e.min_modulus) {
        e.min_modulus = m;
        e.node = i;
      }
    }
    e.x = f.mesh().node(e.node);
    e.threshold = relative ? floor * e.max_modulus : floor;
    e.pass = e.min_modulus > e.threshold;
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace spps
