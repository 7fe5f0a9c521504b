#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spps/config.hpp"
#include "spps/factorization.hpp"
#include "spps/seed.hpp"

namespace spps {

/// A configuration turned into sampled data: mesh, operator and seed system.
struct Problem {
  ProblemConfig config;
  Mesh mesh;
  OperatorSpec op;
  SeedResult seed;
  bool explicit_seed = false;
};

/// Tabulates coefficients (with exact derivative tables) and builds or
/// tabulates the seed system. Throws ConfigError for bad expressions and
/// ValidationError when the seed system fails its checks.
Problem assemble(const ProblemConfig& cfg);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 1;
inline constexpr int validation = 2;
inline constexpr int truncation = 3;
}  // namespace exit_code

/// Command-line entry point: `spps <factorize|powers|solve|eig|verify> [flags]`.
/// Prints a JSON summary to `out`, diagnostics to `err`, and returns the exit
/// code (0 success, 1 config/IO error, 2 validation failure, 3 region or
/// truncation error).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace spps
