#include "spps/expression.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace spps {

enum class Op { Number, X, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt, Sinh, Cosh, Abs };

struct Expression::Node {
  Op op;
  cplx value{};
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

struct FunctionName {
  std::string_view name;
  Op op;
  int arity;
};

constexpr std::array<FunctionName, 9> kFunctions{{{"sin", Op::Sin, 1},
                                                  {"cos", Op::Cos, 1},
                                                  {"exp", Op::Exp, 1},
                                                  {"log", Op::Log, 1},
                                                  {"sqrt", Op::Sqrt, 1},
                                                  {"sinh", Op::Sinh, 1},
                                                  {"cosh", Op::Cosh, 1},
                                                  {"abs", Op::Abs, 1},
                                                  {"pow", Op::Pow, 2}}};

std::string_view function_name(Op op) {
  for (const auto& f : kFunctions)
    if (f.op == op) return f.name;
  return {};
}

NodePtr make(Op op, std::vector<NodePtr> args = {}, cplx value = {}) {
  return std::make_shared<const Expression::Node>(Expression::Node{op, value, std::move(args)});
}

NodePtr number(cplx v) { return make(Op::Number, {}, v); }

bool is_number(const NodePtr& n, cplx v) { return n->op == Op::Number && n->value == v; }

// Integer powers by repeated multiplication keep x^2 exactly real for x < 0.
cplx power(cplx base, cplx e) {
  if (e.imag() == 0.0 && e.real() == std::round(e.real()) && std::abs(e.real()) <= 64.0) {
    auto k = static_cast<int>(std::abs(e.real()));
    cplx r = 1.0;
    cplx b = base;
    while (k > 0) {
      if (k & 1) r *= b;
      b *= b;
      k >>= 1;
    }
    return e.real() < 0.0 ? 1.0 / r : r;
  }
  return std::pow(base, e);
}

cplx apply(Op op, cplx a, cplx b) {
  switch (op) {
    case Op::Neg: return cplx(0.0) - a;
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Pow: return power(a, b);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Exp: return std::exp(a);
    case Op::Log: return std::log(a);
    case Op::Sqrt: return std::sqrt(a);
    case Op::Sinh: return std::sinh(a);
    case Op::Cosh: return std::cosh(a);
    case Op::Abs: return std::abs(a);
    default: return {};
  }
}

cplx eval(const NodePtr& n, double x) {
  switch (n->op) {
    case Op::Number: return n->value;
    case Op::X: return x;
    default: {
      const cplx a = eval(n->args[0], x);
      const cplx b = n->args.size() > 1 ? eval(n->args[1], x) : cplx{};
      return apply(n->op, a, b);
    }
  }
}

bool has_x(const NodePtr& n) {
  if (n->op == Op::X) return true;
  for (const auto& a : n->args)
    if (has_x(a)) return true;
  return false;
}

// Constructors with constant folding and the usual identities.
NodePtr fold(Op op, std::vector<NodePtr> args) {
  bool all_numbers = true;
  for (const auto& a : args) all_numbers = all_numbers && a->op == Op::Number;
  if (all_numbers) {
    const cplx b = args.size() > 1 ? args[1]->value : cplx{};
    const cplx v = apply(op, args[0]->value, b);
    if (std::isfinite(v.real()) && std::isfinite(v.imag())) return number(v);
  }
  return make(op, std::move(args));
}

NodePtr neg(NodePtr a) {
  if (a->op == Op::Neg) return a->args[0];
  return fold(Op::Neg, {std::move(a)});
}

NodePtr add(NodePtr a, NodePtr b) {
  if (is_number(a, 0.0)) return b;
  if (is_number(b, 0.0)) return a;
  if (b->op == Op::Neg) return fold(Op::Sub, {std::move(a), b->args[0]});
  return fold(Op::Add, {std::move(a), std::move(b)});
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_number(b, 0.0)) return a;
  if (is_number(a, 0.0)) return neg(std::move(b));
  return fold(Op::Sub, {std::move(a), std::move(b)});
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_number(a, 0.0) || is_number(b, 0.0)) return number(0.0);
  if (is_number(a, 1.0)) return b;
  if (is_number(b, 1.0)) return a;
  if (is_number(a, -1.0)) return neg(std::move(b));
  if (is_number(b, -1.0)) return neg(std::move(a));
  return fold(Op::Mul, {std::move(a), std::move(b)});
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_number(a, 0.0)) return number(0.0);
  if (is_number(b, 1.0)) return a;
  return fold(Op::Div, {std::move(a), std::move(b)});
}

NodePtr pow(NodePtr a, NodePtr b) {
  if (is_number(b, 0.0)) return number(1.0);
  if (is_number(b, 1.0)) return a;
  return fold(Op::Pow, {std::move(a), std::move(b)});
}

NodePtr call(Op op, NodePtr a) { return fold(op, {std::move(a)}); }

NodePtr d(const NodePtr& n) {
  if (!has_x(n)) return number(0.0);
  const auto& a = n->args.empty() ? n : n->args[0];
  switch (n->op) {
    case Op::X: return number(1.0);
    case Op::Neg: return neg(d(a));
    case Op::Add: return add(d(a), d(n->args[1]));
    case Op::Sub: return sub(d(a), d(n->args[1]));
    case Op::Mul: return add(mul(d(a), n->args[1]), mul(a, d(n->args[1])));
    case Op::Div: {
      const auto& b = n->args[1];
      return div(sub(mul(d(a), b), mul(a, d(b))), pow(b, number(2.0)));
    }
    case Op::Pow: {
      const auto& b = n->args[1];
      if (!has_x(b)) return mul(mul(b, pow(a, sub(b, number(1.0)))), d(a));
      return mul(n, add(mul(d(b), call(Op::Log, a)), div(mul(b, d(a)), a)));
    }
    case Op::Sin: return mul(call(Op::Cos, a), d(a));
    case Op::Cos: return neg(mul(call(Op::Sin, a), d(a)));
    case Op::Exp: return mul(n, d(a));
    case Op::Log: return div(d(a), a);
    case Op::Sqrt: return div(d(a), mul(number(2.0), n));
    case Op::Sinh: return mul(call(Op::Cosh, a), d(a));
    case Op::Cosh: return mul(call(Op::Sinh, a), d(a));
    case Op::Abs: return div(mul(a, d(a)), n);
    default: return number(0.0);
  }
}

std::string format_number(cplx v) {
  auto real = [](double r) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), r);
    return std::string(buf.data(), res.ptr);
  };
  if (v.imag() == 0.0) return "(" + real(v.real()) + ")";
  return "(" + real(v.real()) + "+" + real(v.imag()) + "*i)";
}

std::string print(const NodePtr& n) {
  switch (n->op) {
    case Op::Number: return format_number(n->value);
    case Op::X: return "x";
    case Op::Neg: return "(-" + print(n->args[0]) + ")";
    case Op::Add: return "(" + print(n->args[0]) + "+" + print(n->args[1]) + ")";
    case Op::Sub: return "(" + print(n->args[0]) + "-" + print(n->args[1]) + ")";
    case Op::Mul: return "(" + print(n->args[0]) + "*" + print(n->args[1]) + ")";
    case Op::Div: return "(" + print(n->args[0]) + "/" + print(n->args[1]) + ")";
    case Op::Pow: return "(" + print(n->args[0]) + "^" + print(n->args[1]) + ")";
    default: return std::string(function_name(n->op)) + "(" + print(n->args[0]) + ")";
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    auto e = expression();
    skip_space();
    if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("syntax error at offset " + std::to_string(pos_) + ": " + msg, pos_);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expression() {
    auto lhs = term();
    for (;;) {
      if (accept('+'))
        {
        auto rhs = term();
        lhs = make(Op::Add, {lhs, rhs});
      }
      else if (accept('-'))
        {
        auto rhs = term();
        lhs = make(Op::Sub, {lhs, rhs});
      }
      else
        return lhs;
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*'))
        {
        auto rhs = unary();
        lhs = make(Op::Mul, {lhs, rhs});
      }
      else if (accept('/'))
        {
        auto rhs = unary();
        lhs = make(Op::Div, {lhs, rhs});
      }
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto operand = unary();
      return make(Op::Neg, {operand});
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) {
      auto exponent = unary();
      return make(Op::Pow, {base, exponent});
    }
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return literal();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr literal() {
    double v = 0.0;
    const char* first = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, src_.data() + src_.size(), v);
    if (ec != std::errc{}) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return number(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "x") return make(Op::X);
    if (name == "i") return number(cplx(0.0, 1.0));
    if (name == "pi") return number(std::numbers::pi);
    for (const auto& f : kFunctions) {
      if (f.name != name) continue;
      expect('(');
      std::vector<NodePtr> args;
      args.push_back(expression());
      for (int a = 1; a < f.arity; ++a) {
        expect(',');
        args.push_back(expression());
      }
      expect(')');
      return make(f.op, std::move(args));
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(number(0.0)), source_("0") {}

Expression::Expression(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

cplx Expression::operator()(double x) const { return eval(root_, x); }

cplx Expression::constant_value() const {
  if (has_x(root_)) throw ParseError("expression '" + source_ + "' depends on x", 0);
  return eval(root_, 0.0);
}

bool Expression::depends_on_x() const { return has_x(root_); }

Expression Expression::derivative() const {
  auto r = d(root_);
  auto text = print(r);
  return Expression(std::move(r), std::move(text));
}

std::string Expression::to_string() const { return print(root_); }

Expression parse_expression(std::string_view src) {
  return Expression(Parser(src).parse(), std::string(src));
}

SampledFunction evaluate_expression(const Expression& e, const Mesh& mesh) {
  std::vector<cplx> v(mesh.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = e(mesh.node(i));
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
      throw Error("expression '" + e.source() + "' is not finite at node " + std::to_string(i) +
                  " (x = " + std::to_string(mesh.node(i)) + ")");
  }
  return SampledFunction(mesh, std::move(v));
}

}  // namespace spps
