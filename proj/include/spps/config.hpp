#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spps/errors.hpp"
#include "spps/mesh.hpp"

namespace spps {

/// Unreadable, incomplete or inconsistent problem definition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct BoundaryRowSpec {
  std::vector<cplx> left;
  std::vector<cplx> right;

  bool operator==(const BoundaryRowSpec&) const = default;
};

struct Tolerances {
  double wronskian_floor = 1e-6;
  /// Base residual tolerance for seed systems, verification and eigenvalues.
  double residual = 1e-5;
  double bisection = 1e-10;
  int max_retries = 25;

  bool operator==(const Tolerances&) const = default;
};

struct SolveSpec {
  cplx lambda{};
  std::vector<cplx> init;

  bool operator==(const SolveSpec&) const = default;
};

struct EigSpec {
  enum class Mode { Interval, Disk };
  Mode mode = Mode::Interval;
  double lo = 0.0;
  double hi = 0.0;
  cplx center{};
  double radius = 0.0;
  int scan_points = 4001;

  bool operator==(const EigSpec&) const = default;
};

/// Problem definition file (INI). Every numeric field accepts a constant
/// expression such as `pi/2` or `2+3*i`.
///
///   [problem]      order, x1, x2, x0, mesh, truncation, seed
///   [coefficients] phi1 .. phin, r
///   [seed_system]  y1 .. yn                     (optional)
///   [boundary]     bc1_left, bc1_right, ...     (comma separated)
///   [tolerances]   wronskian_floor, residual, bisection, max_retries
///   [solve]        lambda, init
///   [eig]          region = interval | disk, lo, hi, center, radius, scan_points
struct ProblemConfig {
  int order = 0;
  double x1 = 0.0;
  double x2 = 1.0;
  std::optional<double> x0;
  std::size_t mesh = 401;
  int truncation = 30;
  std::uint64_t seed = 0;
  std::vector<std::string> phi;
  std::string weight = "1";
  std::vector<std::string> seed_system;
  std::vector<BoundaryRowSpec> boundary;
  Tolerances tolerances;
  std::optional<SolveSpec> solve;
  std::optional<EigSpec> eig;

  double basepoint() const { return x0.value_or(x1); }
  /// Throws ConfigError unless counts and sizes are consistent.
  void validate() const;

  bool operator==(const ProblemConfig&) const = default;
};

ProblemConfig parse_config(std::istream& is);
ProblemConfig load_config(const std::filesystem::path& path);

/// Writes every field; numbers use 17 significant digits so that parsing the
/// output reproduces the same configuration.
void write_config(std::ostream& os, const ProblemConfig& cfg);

/// Splits on commas outside parentheses.
std::vector<std::string> split_list(const std::string& text);

}  // namespace spps
