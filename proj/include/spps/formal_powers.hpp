#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "spps/factorization.hpp"
#include "spps/mesh.hpp"

namespace spps {

/// Secondary formal powers X_k^(j), 1 <= k <= n, 0 <= j <= M n + k - 1.
///
/// X_k^(0) = 1 and X_k^(j) = j * integral(c * X_k^(j-1)) where the multiplier
/// c is b_{(k-j) mod n}, or b_n b_0 r when j = k (mod n). The main powers are
/// the subsequence P_k^(m) = X_k^(m n + k - 1). Entries are stored with the
/// j prefactor, so P_k^(m) / (m n + k - 1)! is the series coefficient.
class FormalPowerTable {
 public:
  FormalPowerTable(int order, int truncation, std::vector<std::vector<SampledFunction>> powers);

  int order() const { return order_; }
  int truncation() const { return truncation_; }
  const Mesh& mesh() const { return powers_.front().front().mesh(); }

  /// Largest stored secondary index for sequence k.
  int max_index(int k) const { return truncation_ * order_ + k - 1; }
  /// X_k^(j).
  const SampledFunction& secondary(int k, int j) const;
  /// P_k^(m) = X_k^(m n + k - 1).
  const SampledFunction& main(int k, int m) const { return secondary(k, m * order_ + k - 1); }

 private:
  int order_;
  int truncation_;
  std::vector<std::vector<SampledFunction>> powers_;
};

FormalPowerTable formal_powers(const PolyaFactorization& fac, const SampledFunction& weight,
                               int truncation);

/// Coefficients A_{l,alpha} (0 <= alpha <= l <= n-1) expressing
/// d^l (b_0 I_{1,j}) = sum_alpha A_{l,alpha} I_{1+alpha,j}.
struct DerivativeCoeffs {
  /// coefficient * prod_i b_i^(orders[i]) over the factors b_0..b_alpha.
  struct Term {
    long coefficient = 0;
    std::vector<int> orders;
  };

  int order = 0;
  std::vector<std::vector<std::vector<Term>>> terms;  // [l][alpha]
  std::vector<std::vector<SampledFunction>> values;   // [l][alpha]

  const SampledFunction& operator()(int l, int alpha) const {
    return values[static_cast<std::size_t>(l)][static_cast<std::size_t>(alpha)];
  }
};

/// Symbolic product-rule expansion of the A-recursion:
/// A_{0,0} = b_0, A_{l,0} = A'_{l-1,0},
/// A_{l,alpha} = A'_{l-1,alpha} + A_{l-1,alpha-1} b_alpha, A_{l,l} = A_{l-1,l-1} b_l.
std::vector<std::vector<std::vector<DerivativeCoeffs::Term>>> derivative_coefficient_terms(
    int order);

/// Tabulates A_{l,alpha} from the factorization's derivative tables.
DerivativeCoeffs compute_A(const PolyaFactorization& fac);

/// Rising factorial x (x+1) ... (x+n-1).
double pochhammer(double x, int n);

struct SeriesValue {
  SampledFunction value;
  /// max |last term| / max |partial sum|.
  double tail_ratio = 0.0;

  static constexpr double kTailWarning = 1e-12;
  bool truncation_warning() const { return tail_ratio > kTailWarning; }
};

/// u_k(x; lambda) = b_0 sum_{m=0}^{M} P_k^(m) lambda^m / (m n + k - 1)!.
SeriesValue evaluate_solution(const FormalPowerTable& table, const SampledFunction& b0, int k,
                              cplx lambda);

/// l-th derivative of u_k (1 <= l <= n-1) by termwise differentiation:
/// d^l(b_0 P_k^(m)) = sum_alpha (mn+k-alpha)_alpha A_{l,alpha} X_k^(mn+k-alpha-1).
SeriesValue evaluate_derivatives(const FormalPowerTable& table, const DerivativeCoeffs& coeffs,
                                 int k, cplx lambda, int l);

/// d^l (b_0 P_k^(m)) for 0 <= l <= n-1 (single term of the series).
SampledFunction main_power_derivative(const FormalPowerTable& table, const DerivativeCoeffs& coeffs,
                                      int k, int m, int l);

/// (u_k, u_k', ..., u_k^(n-1)) at the basepoint; independent of lambda.
std::vector<cplx> initial_values(const DerivativeCoeffs& coeffs, const SampledFunction& b0, int k);

/// Coefficients c_m with d^l u_k(x_node; lambda) = sum_m c_m lambda^m.
std::vector<cplx> series_coefficients(const FormalPowerTable& table, const DerivativeCoeffs& coeffs,
                                      int k, int l, std::size_t node);

/// One member u_k of the SPPS solution system with a per-lambda cache.
class SPPSSolution {
 public:
  SPPSSolution(int k, std::shared_ptr<const FormalPowerTable> table, SampledFunction b0);

  int index() const { return k_; }
  const SampledFunction& b0() const { return b0_; }
  SampledFunction operator()(cplx lambda) const;

 private:
  int k_;
  std::shared_ptr<const FormalPowerTable> table_;
  SampledFunction b0_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<double, double>, SampledFunction> cache_;
};

}  // namespace spps
