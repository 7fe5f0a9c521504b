#include "spps/seed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "spps/errors.hpp"
#include "spps/formal_powers.hpp"

namespace spps {

namespace {

class Recombiner {
 public:
  Recombiner(const SeedOptions& opts) : opts_(opts), rng_(opts.rng_seed) {}

  // Area-uniform sample from 0.5 <= |c| <= 1.
  cplx annulus() {
    std::uniform_real_distribution<double> r2(0.25, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(r2(rng_));
    return std::polar(r, angle(rng_));
  }

  std::vector<cplx> matrix(std::size_t n, bool unit_lower) {
    std::vector<cplx> c(n * n, cplx{});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!unit_lower)
          c[i * n + j] = annulus();
        else if (j < i)
          c[i * n + j] = annulus();
        else if (i == j)
          c[i * n + j] = 1.0;
      }
    }
    return c;
  }

  // Recombines until every partial Wronskian clears the floor.
  SolutionSystem nonvanishing(const SolutionSystem& base, double& wronskian_min) {
    const auto n = static_cast<std::size_t>(base.order());
    double best = 0.0;
    for (int attempt = 0; attempt <= opts_.max_retries; ++attempt) {
      auto cand = combine(base, matrix(n, attempt == 0));
      const auto report = check_nonvanishing(wronskians(cand), opts_.wronskian_floor, true);
      const double rel = report.min_relative();
      best = std::max(best, rel);
      if (report.pass()) {
        wronskian_min = rel;
        return cand;
      }
      ++retries;
    }
    throw ValidationError("seed construction: no recombination with nonvanishing Wronskians after " +
                          std::to_string(opts_.max_retries) +
                          " retries (best min |W_j|/max |W_j| = " + std::to_string(best) + ")");
  }

  int retries = 0;

 private:
  const SeedOptions& opts_;
  std::mt19937_64 rng_;
};

struct Level {
  SolutionSystem system;
  double wronskian_min = 1.0;
  double residual_max = 0.0;
};

Level build(const OperatorSpec& op, const SeedOptions& opts, Recombiner& rec) {
  const int n = op.order();
  const Mesh& mesh = op.mesh();
  if (n == 1) {
    Level base;
    const auto integral = cumulative_integral(op.phi(1));
    std::vector<cplx> z(mesh.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::exp(-integral[i]);
    base.system.y.push_back({SampledFunction(mesh, std::move(z))});
    base.residual_max = relative_residual(op, base.system.y[0]);
    const auto w = wronskians(base.system);
    base.wronskian_min = check_nonvanishing(w, opts.wronskian_floor).min_relative();
    return base;
  }

  const Level sub = build(op.leading_part(), opts, rec);
  const OperatorSpec reduced = op.without_last_coefficient();

  // 1, integral z_1, ..., integral z_{n-1} solve the equation with phi_n = 0.
  SolutionSystem lifted;
  {
    DerivativeTable one{SampledFunction::constant(mesh, 1.0)};
    for (int d = 1; d < n; ++d) one.push_back(SampledFunction::constant(mesh, 0.0));
    lifted.y.push_back(std::move(one));
    for (const auto& z : sub.system.y) {
      DerivativeTable t{cumulative_integral(z[0])};
      for (int d = 0; d < n - 1; ++d) t.push_back(z[static_cast<std::size_t>(d)]);
      lifted.y.push_back(std::move(t));
    }
  }
  lifted = extend_derivatives(reduced, std::move(lifted), 2 * n - 2);

  double wmin = 0.0;
  const auto reduced_sys = rec.nonvanishing(lifted, wmin);
  const auto fac = factorize(reduced, reduced_sys, opts.wronskian_floor);
  const auto table = formal_powers(fac, op.phi(n), opts.truncation);
  const auto coeffs = compute_A(fac);
  const cplx lambda = -1.0;

  SolutionSystem full;
  for (int k = 1; k <= n; ++k) {
    DerivativeTable t{evaluate_solution(table, fac.factor(0), k, lambda).value};
    for (int l = 1; l < n; ++l) t.push_back(evaluate_derivatives(table, coeffs, k, lambda, l).value);
    full.y.push_back(std::move(t));
  }
  full = extend_derivatives(op, std::move(full), 2 * n - 2);

  Level out;
  out.system = rec.nonvanishing(full, out.wronskian_min);
  for (const auto& y : out.system.y)
    out.residual_max = std::max(out.residual_max, relative_residual(op, y));
  if (!(out.residual_max <= opts.residual_tolerance))
    throw ValidationError("seed construction: order-" + std::to_string(n) +
                          " system residual " + std::to_string(out.residual_max) +
                          " exceeds tolerance " + std::to_string(opts.residual_tolerance));
  return out;
}

}  // namespace

SeedResult build_seed_system(const OperatorSpec& op, const SeedOptions& options) {
  Recombiner rec(options);
  Level top = build(op, options, rec);
  SeedResult result;
  result.system = std::move(top.system);
  result.retries = rec.retries;
  result.wronskian_min = top.wronskian_min;
  result.residual_max = top.residual_max;
  return result;
}

}  // namespace spps
