#pragma once

#include <cstdint>

#include "spps/factorization.hpp"

namespace spps {

struct SeedOptions {
  std::uint64_t rng_seed = 0;
  int max_retries = 25;
  /// Relative floor for every partial Wronskian (min |W_j| / max |W_j|).
  double wronskian_floor = 1e-6;
  /// Bound on max |L y_k| / max |y_k| for the returned system.
  double residual_tolerance = 1e-5;
  /// Truncation order of the series used in the inductive step.
  int truncation = 30;
};

struct SeedResult {
  SolutionSystem system;
  /// Failed recombination attempts, summed over all induction levels.
  int retries = 0;
  /// min over j of min |W_j| / max |W_j| for the returned system.
  double wronskian_min = 0.0;
  /// max over k of max |L y_k| / max |y_k|.
  double residual_max = 0.0;
};

/// Constructs n solutions of Ly = 0 with nonvanishing partial Wronskians by
/// induction on the order.
///
/// Order 1: y = exp(-integral phi_1). Order n: take solutions z_1..z_{n-1} of
/// the order n-1 equation with coefficients phi_1..phi_{n-1}; the functions
/// 1, integral z_1, ..., integral z_{n-1} solve the order n equation with
/// phi_n = 0. A random complex recombination with nonvanishing Wronskians
/// factors that operator, the series solutions with weight phi_n at
/// lambda = -1 then solve the full equation, and a second recombination
/// makes their Wronskians nonvanishing.
///
/// Recombination matrices are identity plus a random strictly lower part on
/// the first attempt and fully random afterwards; entries lie in the annulus
/// 0.5 <= |c| <= 1. Deterministic for a fixed rng_seed. Throws
/// ValidationError when retries are exhausted or the residual check fails.
SeedResult build_seed_system(const OperatorSpec& op, const SeedOptions& options = {});

}  // namespace spps
