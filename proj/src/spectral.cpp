#include "spps/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spps/detail/jet.hpp"
#include "spps/errors.hpp"

namespace spps {

namespace {

Eigen::MatrixXcd to_eigen(const std::vector<cplx>& a, std::size_t n) {
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i * n + j];
  return m;
}

cplx horner(const std::vector<cplx>& c, cplx x) {
  cplx v{};
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

double refine_tolerance(const EigenOptions& opts, cplx lambda) {
  return opts.bisection_tolerance * std::max(1.0, std::abs(lambda));
}

double bisect(const CharacteristicFunction& cf, double a, double b, const EigenOptions& opts) {
  double fa = cf(a).real();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (b - a <= refine_tolerance(opts, mid)) break;
    const double fm = cf(mid).real();
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

cplx newton_polish(const CharacteristicFunction& cf, cplx lambda, const EigenOptions& opts) {
  for (int it = 0; it < 50; ++it) {
    const double h = 1e-6 * std::max(1.0, std::abs(lambda));
    const cplx d = (cf(lambda + h) - cf(lambda - h)) / (2.0 * h);
    if (d == cplx{}) break;
    const cplx step = cf(lambda) / d;
    lambda -= step;
    if (std::abs(step) <= 1e-3 * refine_tolerance(opts, lambda)) break;
  }
  return lambda;
}

std::vector<cplx> companion_roots(std::vector<cplx> a) {
  double amax = 0.0;
  for (const auto& v : a) amax = std::max(amax, std::abs(v));
  while (!a.empty() && std::abs(a.back()) <= 1e-14 * amax) a.pop_back();
  if (a.size() < 2) return {};
  const auto d = static_cast<Eigen::Index>(a.size() - 1);
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index i = 1; i < d; ++i) c(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) c(i, d - 1) = -a[static_cast<std::size_t>(i)] / a.back();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(c, false);
  std::vector<cplx> roots;
  for (Eigen::Index i = 0; i < d; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

double region_tail(const SppsSystem& sys, const Region& region) {
  std::vector<cplx> probes;
  if (const auto* iv = std::get_if<RealInterval>(&region)) {
    probes = {iv->lo, iv->hi};
  } else {
    const auto& disk = std::get<Disk>(region);
    for (int t = 0; t < 16; ++t)
      probes.push_back(disk.center + std::polar(disk.radius, 2.0 * std::numbers::pi * t / 16.0));
  }
  double tail = 0.0;
  for (const auto& l : probes) tail = std::max(tail, sys.tail_ratio(l));
  return tail;
}

}  // namespace

SppsSystem::SppsSystem(OperatorSpec op, PolyaFactorization fac, int truncation)
    : op_(std::move(op)), fac_(std::make_shared<const PolyaFactorization>(std::move(fac))) {
  if (fac_->order() != op_.order())
    throw std::invalid_argument("factorization order differs from operator order");
  coeffs_ = std::make_shared<const DerivativeCoeffs>(compute_A(*fac_));
  table_ = std::make_shared<const FormalPowerTable>(formal_powers(*fac_, op_.weight(), truncation));
}

SppsSystem::SppsSystem(OperatorSpec op, std::shared_ptr<const PolyaFactorization> fac,
                       std::shared_ptr<const DerivativeCoeffs> coeffs, int truncation)
    : op_(std::move(op)), fac_(std::move(fac)), coeffs_(std::move(coeffs)) {
  table_ = std::make_shared<const FormalPowerTable>(formal_powers(*fac_, op_.weight(), truncation));
}

SppsSystem SppsSystem::with_truncation(int truncation) const {
  return SppsSystem(op_, fac_, coeffs_, truncation);
}

SeriesValue SppsSystem::solution(int k, cplx lambda) const {
  return evaluate_solution(*table_, b0(), k, lambda);
}

SeriesValue SppsSystem::derivative(int k, cplx lambda, int l) const {
  if (l == 0) return solution(k, lambda);
  return evaluate_derivatives(*table_, *coeffs_, k, lambda, l);
}

std::vector<cplx> SppsSystem::initial_matrix() const {
  const auto n = static_cast<std::size_t>(order());
  std::vector<cplx> t(n * n);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto v = initial_values(*coeffs_, b0(), static_cast<int>(k));
    for (std::size_t l = 0; l < n; ++l) t[l * n + (k - 1)] = v[l];
  }
  return t;
}

DerivativeTable SppsSystem::combination(cplx lambda, std::span<const cplx> c) const {
  const int n = order();
  if (c.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("combination needs n coefficients");
  DerivativeTable out;
  for (int l = 0; l < n; ++l) {
    SampledFunction acc = SampledFunction::constant(mesh(), 0.0);
    for (int k = 1; k <= n; ++k) {
      const cplx ck = c[static_cast<std::size_t>(k - 1)];
      if (ck == cplx{}) continue;
      acc = acc + ck * derivative(k, lambda, l).value;
    }
    out.push_back(std::move(acc));
  }
  return out;
}

double SppsSystem::residual(cplx lambda, std::span<const cplx> c) const {
  const auto y = combination(lambda, c);
  const auto r = apply_coefficients(op_, y) - lambda * (op_.weight() * y.front());
  const double scale = y.front().max_modulus();
  return scale > 0.0 ? r.max_modulus() / scale : r.max_modulus();
}

double SppsSystem::tail_ratio(cplx lambda) const {
  double t = 0.0;
  for (int k = 1; k <= order(); ++k) t = std::max(t, solution(k, lambda).tail_ratio);
  return t;
}

std::vector<cplx> ivp_coefficients(const SppsSystem& sys, std::span<const cplx> init, double floor) {
  const auto n = static_cast<std::size_t>(sys.order());
  if (init.size() != n) throw std::invalid_argument("initial data needs n values");
  const auto t = sys.initial_matrix();
  double tmax = 0.0;
  for (const auto& v : t) tmax = std::max(tmax, std::abs(v));
  std::vector<cplx> c(n);
  for (std::size_t l = 0; l < n; ++l) {
    const cplx diag = t[l * n + l];
    if (std::abs(diag) <= floor * tmax)
      throw ValidationError("initial data matrix has a vanishing diagonal entry at row " +
                            std::to_string(l));
    cplx s = init[l];
    for (std::size_t k = 0; k < l; ++k) s -= t[l * n + k] * c[k];
    c[l] = s / diag;
  }
  return c;
}

SampledFunction solve_ivp(const SppsSystem& sys, cplx lambda, std::span<const cplx> init) {
  const auto c = ivp_coefficients(sys, init);
  SampledFunction y = SampledFunction::constant(sys.mesh(), 0.0);
  for (int k = 1; k <= sys.order(); ++k)
    y = y + c[static_cast<std::size_t>(k - 1)] * sys.solution(k, lambda).value;
  return y;
}

BoundaryConditions::BoundaryConditions(std::vector<BoundaryRow> rows) : rows_(std::move(rows)) {
  const auto n = rows_.size();
  if (n == 0) throw std::invalid_argument("boundary conditions need at least one row");
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows_[i].left.size() != n || rows_[i].right.size() != n)
      throw std::invalid_argument("boundary row " + std::to_string(i + 1) + " must have " +
                                  std::to_string(n) + " left and right coefficients");
    for (std::size_t l = 0; l < n; ++l) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = rows_[i].left[l];
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + l)) = rows_[i].right[l];
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
  lu.setThreshold(1e-12);
  if (lu.rank() != static_cast<Eigen::Index>(n))
    throw std::invalid_argument("boundary conditions are linearly dependent (rank " +
                                std::to_string(lu.rank()) + " < " + std::to_string(n) + ")");
}

CharacteristicFunction::CharacteristicFunction(std::shared_ptr<const SppsSystem> sys,
                                               BoundaryConditions bc)
    : sys_(std::move(sys)), bc_(std::move(bc)) {
  const int n = sys_->order();
  if (bc_.order() != n)
    throw std::invalid_argument("number of boundary conditions differs from operator order");
  const std::size_t last = sys_->mesh().size() - 1;
  const auto M = static_cast<std::size_t>(sys_->truncation());
  poly_.assign(static_cast<std::size_t>(n),
               std::vector<std::vector<cplx>>(static_cast<std::size_t>(n),
                                              std::vector<cplx>(M + 1, cplx{})));
  for (int k = 1; k <= n; ++k) {
    for (int l = 0; l < n; ++l) {
      const auto left = series_coefficients(sys_->table(), sys_->coeffs(), k, l, 0);
      const auto right = series_coefficients(sys_->table(), sys_->coeffs(), k, l, last);
      for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        const cplx a = bc_.rows()[i].left[static_cast<std::size_t>(l)];
        const cplx c = bc_.rows()[i].right[static_cast<std::size_t>(l)];
        auto& p = poly_[i][static_cast<std::size_t>(k - 1)];
        for (std::size_t m = 0; m <= M; ++m) p[m] += a * left[m] + c * right[m];
      }
    }
  }
  const auto t = sys_->initial_matrix();
  initial_det_ = 1.0;
  for (int k = 0; k < n; ++k) initial_det_ *= t[static_cast<std::size_t>(k * n + k)];
}

std::vector<cplx> CharacteristicFunction::boundary_matrix(cplx lambda) const {
  const auto n = poly_.size();
  std::vector<cplx> e(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) e[i * n + k] = horner(poly_[i][k], lambda);
  return e;
}

cplx CharacteristicFunction::operator()(cplx lambda) const {
  return detail::determinant(boundary_matrix(lambda), poly_.size()) / initial_det_;
}

std::vector<cplx> CharacteristicFunction::polynomial(cplx center, double radius) const {
  const std::size_t degree = poly_.size() * static_cast<std::size_t>(sys_->truncation());
  const std::size_t K = degree + 1;
  std::vector<cplx> samples(K);
  for (std::size_t t = 0; t < K; ++t)
    samples[t] = (*this)(center + radius * std::polar(1.0, 2.0 * std::numbers::pi *
                                                               static_cast<double>(t) /
                                                               static_cast<double>(K)));
  std::vector<cplx> a(K);
  for (std::size_t j = 0; j < K; ++j) {
    cplx s{};
    for (std::size_t t = 0; t < K; ++t)
      s += samples[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((j * t) % K) /
                                            static_cast<double>(K));
    a[j] = s / static_cast<double>(K);
  }
  return a;
}

CharacteristicFunction CharacteristicFunction::with_truncation(int truncation) const {
  return CharacteristicFunction(std::make_shared<const SppsSystem>(sys_->with_truncation(truncation)),
                                bc_);
}

std::vector<cplx> null_vector(const CharacteristicFunction& cf, cplx lambda) {
  const auto n = static_cast<std::size_t>(cf.system().order());
  const auto m = to_eigen(cf.boundary_matrix(lambda), n);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const auto last = static_cast<Eigen::Index>(n) - 1;
  if (s(last) > 1e-6 * s(0))
    throw ValidationError("boundary matrix is nonsingular at lambda = (" +
                          std::to_string(lambda.real()) + ", " + std::to_string(lambda.imag()) +
                          "): sigma_min/sigma_max = " + std::to_string(s(last) / s(0)));
  std::vector<cplx> c(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = svd.matrixV()(static_cast<Eigen::Index>(k), last);
  return c;
}

SampledFunction eigenfunction(const CharacteristicFunction& cf, cplx lambda) {
  const auto c = null_vector(cf, lambda);
  const auto& sys = cf.system();
  SampledFunction y = SampledFunction::constant(sys.mesh(), 0.0);
  for (int k = 1; k <= sys.order(); ++k)
    y = y + c[static_cast<std::size_t>(k - 1)] * sys.solution(k, lambda).value;
  const cplx peak = y[y.argmax_modulus()];
  return (1.0 / peak) * y;
}

EigenSearch find_eigenvalues(const CharacteristicFunction& cf, const Region& region,
                             const EigenOptions& opts) {
  EigenSearch out;
  out.tail_ratio = region_tail(cf.system(), region);
  if (out.tail_ratio > SeriesValue::kTailWarning)
    throw TruncationError("truncation order M = " + std::to_string(cf.system().truncation()) +
                          " too small for the requested region: series tail ratio " +
                          std::to_string(out.tail_ratio) + " on the region boundary");

  const auto refined = cf.with_truncation(cf.system().truncation() + opts.persistence_increment);

  auto validate = [&](EigenCandidate cand, cplx persisted) {
    cand.shift = std::abs(persisted - cand.lambda);
    try {
      const auto c = null_vector(cf, cand.lambda);
      cand.residual = cf.system().residual(cand.lambda, c);
    } catch (const ValidationError& e) {
      cand.residual = std::numeric_limits<double>::infinity();
      cand.reason = e.what();
    }
    if (cand.reason.empty()) {
      if (cand.residual > 100.0 * opts.residual_tolerance)
        cand.reason = "eigenfunction residual above tolerance";
      else if (cand.shift >= refine_tolerance(opts, cand.lambda))
        cand.reason = "root moves when the truncation order is increased";
    }
    cand.accepted = cand.reason.empty();
    if (cand.accepted && static_cast<int>(out.eigenvalues.size()) < opts.max_count)
      out.eigenvalues.push_back(cand);
    else if (!cand.accepted)
      out.spurious.push_back(cand);
  };

  if (const auto* iv = std::get_if<RealInterval>(&region)) {
    if (!(iv->lo < iv->hi)) throw std::invalid_argument("empty real interval");
    const int K = std::max(opts.scan_points, 2);
    const double step = (iv->hi - iv->lo) / (K - 1);
    std::vector<double> grid(static_cast<std::size_t>(K));
    std::vector<double> val(static_cast<std::size_t>(K));
    for (int t = 0; t < K; ++t) {
      const double l = (t == K - 1) ? iv->hi : iv->lo + t * step;
      grid[static_cast<std::size_t>(t)] = l;
      const cplx d = cf(l);
      // imaginary parts below 1e-10 relative are rounding noise
      val[static_cast<std::size_t>(t)] = d.real();
    }
    auto on_boundary = [&](double l) {
      const double tol = refine_tolerance(opts, l);
      return std::abs(l - iv->lo) <= tol || std::abs(l - iv->hi) <= tol;
    };
    for (int t = 0; t + 1 < K; ++t) {
      const double fa = val[static_cast<std::size_t>(t)];
      const double fb = val[static_cast<std::size_t>(t + 1)];
      const double a = grid[static_cast<std::size_t>(t)];
      const double b = grid[static_cast<std::size_t>(t + 1)];
      double root;
      double persisted;
      if (fa == 0.0) {
        root = a;
        persisted = a;
      } else if (fb != 0.0 && (fa < 0.0) != (fb < 0.0)) {
        root = bisect(cf, a, b, opts);
        persisted = bisect(refined, a, b, opts);
      } else {
        continue;
      }
      if (on_boundary(root)) continue;
      EigenCandidate cand;
      cand.lambda = root;
      validate(cand, persisted);
    }
  } else {
    const auto& disk = std::get<Disk>(region);
    if (!(disk.radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
    std::vector<cplx> found;
    for (const auto& mu : companion_roots(cf.polynomial(disk.center, disk.radius))) {
      if (std::abs(mu) > 1.0 + 1e-9) continue;
      const cplx l = newton_polish(cf, disk.center + disk.radius * mu, opts);
      if (std::abs(l - disk.center) > disk.radius) continue;
      const bool dup = std::any_of(found.begin(), found.end(), [&](cplx f) {
        return std::abs(f - l) <= 10.0 * refine_tolerance(opts, l);
      });
      if (dup) continue;
      found.push_back(l);
    }
    std::sort(found.begin(), found.end(), [](cplx a, cplx b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (const auto& l : found) {
      EigenCandidate cand;
      cand.lambda = l;
      validate(cand, newton_polish(refined, l, opts));
    }
  }
  return out;
}

}  // namespace spps
