#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spps {

/// Base class of every runtime failure reported by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A function that must be nonvanishing has (numerically) a zero.
class VanishingFunction : public Error {
 public:
  VanishingFunction(const std::string& what, std::size_t node, double x)
      : Error(what), node_(node), x_(x) {}
  std::size_t node() const { return node_; }
  double x() const { return x_; }

 private:
  std::size_t node_;
  double x_;
};

/// A numerical verification step (residual, Wronskian floor, ...) failed.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The truncated series is not accurate enough for the requested region.
class TruncationError : public Error {
 public:
  using Error::Error;
};

}  // namespace spps
