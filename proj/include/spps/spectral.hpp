#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spps/factorization.hpp"
#include "spps/formal_powers.hpp"

namespace spps {

/// The SPPS solution system u_1..u_n of Ly = lambda r y for a factored
/// operator, with everything needed to evaluate it at any lambda.
class SppsSystem {
 public:
  SppsSystem(OperatorSpec op, PolyaFactorization fac, int truncation);

  int order() const { return op_.order(); }
  int truncation() const { return table_->truncation(); }
  const Mesh& mesh() const { return op_.mesh(); }
  const OperatorSpec& op() const { return op_; }
  const PolyaFactorization& factorization() const { return *fac_; }
  const FormalPowerTable& table() const { return *table_; }
  const DerivativeCoeffs& coeffs() const { return *coeffs_; }
  const SampledFunction& b0() const { return fac_->factor(0); }

  SeriesValue solution(int k, cplx lambda) const;
  /// l-th derivative of u_k, 0 <= l <= n-1.
  SeriesValue derivative(int k, cplx lambda, int l) const;

  /// Row-major n x n matrix T[l][k-1] = d^l u_k(x0). Lower triangular.
  std::vector<cplx> initial_matrix() const;

  /// Same operator and factorization, different truncation order.
  SppsSystem with_truncation(int truncation) const;

  /// Derivatives 0..n-1 of y = sum_k c_k u_k(.; lambda).
  DerivativeTable combination(cplx lambda, std::span<const cplx> c) const;

  /// max |L y - lambda r y| / max |y| for y = sum_k c_k u_k; only the n-th
  /// derivative is differenced.
  double residual(cplx lambda, std::span<const cplx> c) const;

  /// Largest tail ratio over u_1..u_n at lambda.
  double tail_ratio(cplx lambda) const;

 private:
  SppsSystem(OperatorSpec op, std::shared_ptr<const PolyaFactorization> fac,
             std::shared_ptr<const DerivativeCoeffs> coeffs, int truncation);

  OperatorSpec op_;
  std::shared_ptr<const PolyaFactorization> fac_;
  std::shared_ptr<const DerivativeCoeffs> coeffs_;
  std::shared_ptr<const FormalPowerTable> table_;
};

/// Coefficients c with sum_k c_k d^l u_k(x0) = init_l (forward substitution).
/// Throws ValidationError if a diagonal entry is below `floor` times the
/// largest entry.
std::vector<cplx> ivp_coefficients(const SppsSystem& sys, std::span<const cplx> init,
                                   double floor = 1e-12);

/// Solution of Ly = lambda r y with y^(l)(x0) = init_l.
SampledFunction solve_ivp(const SppsSystem& sys, cplx lambda, std::span<const cplx> init);

/// sum_l left_l y^(l)(x1) + sum_l right_l y^(l)(x2) = 0.
struct BoundaryRow {
  std::vector<cplx> left;
  std::vector<cplx> right;
};

class BoundaryConditions {
 public:
  /// Throws std::invalid_argument unless there are n rows of length n whose
  /// stacked n x 2n matrix has full rank.
  explicit BoundaryConditions(std::vector<BoundaryRow> rows);

  int order() const { return static_cast<int>(rows_.size()); }
  const std::vector<BoundaryRow>& rows() const { return rows_; }

 private:
  std::vector<BoundaryRow> rows_;
};

/// Delta(lambda) = det[BC_i(u_k(.; lambda))] / det T, where T is the initial
/// data matrix. The normalization makes Delta independent of the seed
/// system's recombination, so it is real on the real axis for real data.
class CharacteristicFunction {
 public:
  CharacteristicFunction(std::shared_ptr<const SppsSystem> sys, BoundaryConditions bc);

  const SppsSystem& system() const { return *sys_; }
  std::shared_ptr<const SppsSystem> system_ptr() const { return sys_; }
  const BoundaryConditions& conditions() const { return bc_; }

  cplx operator()(cplx lambda) const;
  /// Row-major n x n matrix BC_i(u_k).
  std::vector<cplx> boundary_matrix(cplx lambda) const;

  /// Coefficients a_j of Delta(center + radius mu) = sum_j a_j mu^j (degree
  /// <= nM), from samples on the circle |mu| = 1.
  std::vector<cplx> polynomial(cplx center, double radius) const;

  CharacteristicFunction with_truncation(int truncation) const;

 private:
  std::shared_ptr<const SppsSystem> sys_;
  BoundaryConditions bc_;
  std::vector<std::vector<std::vector<cplx>>> poly_;  // [row][k][m]
  cplx initial_det_;
};

inline cplx characteristic_det(const CharacteristicFunction& cf, cplx lambda) { return cf(lambda); }

struct RealInterval {
  double lo;
  double hi;
};

struct Disk {
  cplx center;
  double radius;
};

using Region = std::variant<RealInterval, Disk>;

struct EigenOptions {
  int scan_points = 4001;
  /// Root refinement tolerance, relative to max(1, |lambda|).
  double bisection_tolerance = 1e-10;
  int max_count = 1000;
  /// Base residual tolerance; candidates are accepted up to 100x this.
  double residual_tolerance = 1e-6;
  /// Truncation increment for the persistence check.
  int persistence_increment = 5;
};

struct EigenCandidate {
  cplx lambda;
  double residual = 0.0;
  /// |lambda(M + increment) - lambda(M)|.
  double shift = 0.0;
  bool accepted = false;
  std::string reason;
};

struct EigenSearch {
  std::vector<EigenCandidate> eigenvalues;
  std::vector<EigenCandidate> spurious;
  /// Tail diagnostic on the region boundary.
  double tail_ratio = 0.0;
};

/// Real-interval mode: scan Re Delta on a uniform grid, bisect sign changes.
/// Roots on the region boundary are not reported. Disk mode: companion-matrix
/// roots of the polynomial expansion inside the disk, Newton-polished.
/// Candidates are accepted only if the eigenfunction residual is at most
/// 100x the base tolerance and the root moves less than the refinement
/// tolerance when the truncation grows. Throws TruncationError when the
/// series tail on the region boundary exceeds SeriesValue::kTailWarning.
EigenSearch find_eigenvalues(const CharacteristicFunction& cf, const Region& region,
                             const EigenOptions& options = {});

/// Null vector of the boundary matrix at lambda combined into sum_k c_k u_k,
/// scaled so that its largest value is exactly 1. Throws ValidationError if
/// the boundary matrix is numerically nonsingular.
SampledFunction eigenfunction(const CharacteristicFunction& cf, cplx lambda);

/// Basis coefficients of the eigenfunction at lambda (unnormalized).
std::vector<cplx> null_vector(const CharacteristicFunction& cf, cplx lambda);

}  // namespace spps
