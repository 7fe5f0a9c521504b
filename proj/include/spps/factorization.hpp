#pragma once

#include <span>
#include <vector>

#include "spps/mesh.hpp"

namespace spps {

/// Ly = y^(n) + phi_1 y^(n-1) + ... + phi_n y, together with the spectral
/// weight r of Ly = lambda r y.
///
/// Each coefficient carries a derivative table (entry 0 is the coefficient
/// itself). Higher derivatives are only needed to extend solution derivatives
/// beyond order n-1 through the equation; when they are not supplied they
/// are tabulated by finite differences.
class OperatorSpec {
 public:
  OperatorSpec(std::vector<DerivativeTable> phi, SampledFunction weight);

  /// Coefficients given by samples only; derivative tables up to order n-1
  /// are filled by finite differences.
  static OperatorSpec from_samples(std::vector<SampledFunction> phi, SampledFunction weight);

  int order() const { return static_cast<int>(phi_.size()); }
  const Mesh& mesh() const { return weight_.mesh(); }
  /// phi_j for 1 <= j <= n.
  const SampledFunction& phi(int j) const;
  /// d-th derivative of phi_j.
  SampledFunction phi_derivative(int j, int d) const;
  const SampledFunction& weight() const { return weight_; }

  /// Same operator with phi_n replaced by zero.
  OperatorSpec without_last_coefficient() const;
  /// The order n-1 operator with coefficients phi_1..phi_{n-1}.
  OperatorSpec leading_part() const;
  OperatorSpec with_weight(SampledFunction weight) const;

 private:
  std::vector<DerivativeTable> phi_;
  SampledFunction weight_;
};

/// n functions y_1..y_n with tabulated derivatives; y[k][l] is the l-th
/// derivative of y_{k+1}.
struct SolutionSystem {
  std::vector<DerivativeTable> y;

  int order() const { return static_cast<int>(y.size()); }
  const Mesh& mesh() const { return y.front().front().mesh(); }
  /// Number of derivative orders tabulated for every member.
  int derivative_count() const;
};

/// y_i = sum_c C[i][c] ytilde_c; `matrix` is row-major n x n.
SolutionSystem combine(const SolutionSystem& sys, std::span<const cplx> matrix);

/// Fills derivatives up to `max_order` using y^(n) = -(phi_1 y^(n-1) + ... +
/// phi_n y) and its differentiated forms. Requires orders 0..n-1.
SolutionSystem extend_derivatives(const OperatorSpec& op, SolutionSystem sys, int max_order);

/// b_0..b_n of Ly = (1/b_n) d (1/b_{n-1}) d ... d (1/b_1) d (1/b_0) y.
struct PolyaFactorization {
  /// b[j][d] is the d-th derivative of b_j; orders up to n-1 are present for
  /// b_0..b_{n-1}.
  std::vector<DerivativeTable> b;

  int order() const { return static_cast<int>(b.size()) - 1; }
  const Mesh& mesh() const { return b.front().front().mesh(); }
  const SampledFunction& factor(int j) const { return b[static_cast<std::size_t>(j)][0]; }
  const SampledFunction& factor_derivative(int j, int d) const {
    return b[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)];
  }
};

/// W_0 = 1, W_j = Wronskian of y_1..y_j, for j = 0..n (LU per node).
std::vector<SampledFunction> wronskians(const SolutionSystem& sys);

/// Wronskians together with their derivatives up to `derivative_order`,
/// computed exactly from the tabulated solution derivatives by Taylor-jet
/// arithmetic. Requires derivatives of order n-1+derivative_order.
std::vector<DerivativeTable> wronskian_tables(const SolutionSystem& sys, int derivative_order);

/// b_0 = W_1, b_j = W_{j-1} W_{j+1} / W_j^2, b_n = W_{n-1} / W_n; derivative
/// tables by finite differences. Throws VanishingFunction when some W_j drops
/// below `floor` times its maximum modulus.
PolyaFactorization polya_factors(const std::vector<SampledFunction>& w, double floor = 1e-6);

/// As above, with derivatives propagated exactly from Wronskian tables.
PolyaFactorization polya_factors(const std::vector<DerivativeTable>& w, double floor = 1e-6);

/// Factorization of `op` from a solution system of Ly = 0: extends the
/// derivatives through the equation and uses the exact (jet) route.
PolyaFactorization factorize(const OperatorSpec& op, const SolutionSystem& sys,
                             double floor = 1e-6);

/// phi_0 y^(n) + ... + phi_n y with all derivatives by finite differences.
SampledFunction apply_coefficients(const OperatorSpec& op, const SampledFunction& y);

/// Same, using tabulated derivatives y[0..n-1]; only y^(n) is differenced
/// (from y^(n-1)).
SampledFunction apply_coefficients(const OperatorSpec& op, const DerivativeTable& y);

/// (1/b_n) d (1/b_{n-1}) d ... d (1/b_0) y by repeated differencing.
SampledFunction apply_factorized(const PolyaFactorization& fac, const SampledFunction& y);

/// max |L y| / max |y| using tabulated derivatives.
double relative_residual(const OperatorSpec& op, const DerivativeTable& y);

struct ModulusCheck {
  double min_modulus = 0.0;
  double max_modulus = 0.0;
  double threshold = 0.0;
  std::size_t node = 0;  // location of the minimum
  double x = 0.0;
  bool pass = false;
};

struct NonvanishingReport {
  std::vector<ModulusCheck> entries;

  bool pass() const;
  /// min over entries of min_modulus / max_modulus.
  double min_relative() const;
};

/// Per-function minimum modulus against `floor` (scaled by each function's
/// maximum modulus when `relative`).
NonvanishingReport check_nonvanishing(std::span<const SampledFunction> fs, double floor,
                                      bool relative = true);

}  // namespace spps
