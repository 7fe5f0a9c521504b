#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "spps/errors.hpp"
#include "spps/mesh.hpp"

namespace spps {

/// Malformed expression text; offset() is the byte position of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset) : Error(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Complex arithmetic expression in one real variable x.
///
/// Grammar: numbers, `x`, `i`, `pi`, + - * / ^, unary -, parentheses and the
/// functions sin, cos, exp, log, sqrt, sinh, cosh, abs, pow. `^` is right
/// associative and binds tighter than unary minus. Multivalued functions use
/// principal branches.
class Expression {
 public:
  struct Node;

  /// The constant zero.
  Expression();

  cplx operator()(double x) const;
  /// Value of an expression without x; throws ParseError otherwise.
  cplx constant_value() const;
  bool depends_on_x() const;

  /// d/dx, simplified. abs(f) is differentiated as if f were real.
  Expression derivative() const;

  /// Fully parenthesized form that parses back to the same tree.
  std::string to_string() const;

  const std::string& source() const { return source_; }

 private:
  friend Expression parse_expression(std::string_view src);
  Expression(std::shared_ptr<const Node> root, std::string source);

  std::shared_ptr<const Node> root_;
  std::string source_;
};

Expression parse_expression(std::string_view src);

/// Tabulates e at every node. Throws Error naming the node when a value is
/// not finite.
SampledFunction evaluate_expression(const Expression& e, const Mesh& mesh);

}  // namespace spps
