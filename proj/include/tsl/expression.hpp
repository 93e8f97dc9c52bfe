#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

#include "tsl/error.hpp"

namespace tsl {

/// Immutable arithmetic expression in one variable `x`.
///
/// Grammar (recursive descent, whitespace ignored):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := ('-' | '+') unary | power
///     power   := primary ('^' unary)?
///     primary := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
///     func    := sin | cos | exp | sinh | cosh | sqrt | abs | log
///
/// So `^` binds tighter than unary minus (`-x^2 == -(x^2)`) and is
/// right-associative (`2^3^2 == 2^9`); the other binary operators are
/// left-associative. Copies share the underlying tree.
class Expression {
 public:
  enum class Op { constant, variable, negate, add, sub, mul, div, pow, call };
  enum class Func { sin, cos, exp, sinh, cosh, sqrt, abs, log };

  struct Node {
    Op op = Op::constant;
    double value = 0.0;
    Func func = Func::sin;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  /// The constant-zero expression.
  Expression() : Expression(parse("0")) {}

  static Expression parse(std::string_view src);

  /// Throws DomainError when the result is undefined or not finite.
  double operator()(double x) const { return eval(*root_, x); }

  /// Fully parenthesized rendering; constants use 17 significant digits so
  /// that parse(to_string()) evaluates identically.
  std::string to_string() const { return print(*root_); }

  const std::string& source() const noexcept { return source_; }
  const Node& root() const noexcept { return *root_; }

 private:
  class Parser;

  Expression(std::shared_ptr<const Node> root, std::string source)
      : root_(std::move(root)), source_(std::move(source)) {}

  static double eval(const Node& n, double x);
  static std::string print(const Node& n);

  std::shared_ptr<const Node> root_;
  std::string source_;
};

inline Expression parse_expression(std::string_view src) { return Expression::parse(src); }

inline double eval_expression(const Expression& e, double x) { return e(x); }

namespace detail {

struct FuncName {
  std::string_view name;
  Expression::Func func;
};

inline constexpr std::array<FuncName, 8> kFunctions{{
    {"sin", Expression::Func::sin},
    {"cos", Expression::Func::cos},
    {"exp", Expression::Func::exp},
    {"sinh", Expression::Func::sinh},
    {"cosh", Expression::Func::cosh},
    {"sqrt", Expression::Func::sqrt},
    {"abs", Expression::Func::abs},
    {"log", Expression::Func::log},
}};

inline std::string_view func_name(Expression::Func f) {
  for (const auto& entry : kFunctions) {
    if (entry.func == f) return entry.name;
  }
  return "?";
}

inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

}  // namespace detail

class Expression::Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  std::shared_ptr<const Node> run() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
    auto node = expr();
    skip_ws();
    if (pos_ != src_.size()) {
      throw ParseError("unexpected '" + std::string(1, src_[pos_]) + "'", pos_);
    }
    return node;
  }

 private:
  using NodePtr = std::shared_ptr<const Node>;

  static NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                  src_[pos_] == '\n' || src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char ch) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char ch) {
    if (!accept(ch)) {
      if (pos_ >= src_.size()) {
        throw ParseError(std::string("expected '") + ch + "' but reached end of input", pos_);
      }
      throw ParseError(std::string("expected '") + ch + "'", pos_);
    }
  }

  NodePtr expr() {
    auto node = term();
    for (;;) {
      if (accept('+')) {
        node = make(Op::add, node, term());
      } else if (accept('-')) {
        node = make(Op::sub, node, term());
      } else {
        return node;
      }
    }
  }

  NodePtr term() {
    auto node = unary();
    for (;;) {
      if (accept('*')) {
        node = make(Op::mul, node, unary());
      } else if (accept('/')) {
        node = make(Op::div, node, unary());
      } else {
        return node;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::negate, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char ch = src_[pos_];
    if (ch == '(') {
      ++pos_;
      auto node = expr();
      expect(')');
      return node;
    }
    if ((ch >= '0' && ch <= '9') || ch == '.') return number();
    if ((ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_') return identifier();
    throw ParseError("unexpected '" + std::string(1, ch) + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    double value = 0.0;
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) throw ParseError("malformed number", start);
    pos_ += static_cast<std::size_t>(ptr - first);
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = value;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size()) {
      const char ch = src_[pos_];
      const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                      (ch >= '0' && ch <= '9') || ch == '_';
      if (!ok) break;
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "x") return make(Op::variable);
    if (name == "pi") {
      auto n = std::make_shared<Node>();
      n->value = std::numbers::pi;
      return n;
    }
    for (const auto& entry : detail::kFunctions) {
      if (entry.name == name) {
        expect('(');
        auto arg = expr();
        expect(')');
        auto n = std::make_shared<Node>();
        n->op = Op::call;
        n->func = entry.func;
        n->lhs = std::move(arg);
        return n;
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view src) {
  return Expression(Parser(src).run(), std::string(src));
}

inline double Expression::eval(const Node& n, double x) {
  auto finite = [x](double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string("non-finite result of ") + what, x);
    return v;
  };
  switch (n.op) {
    case Op::constant:
      return n.value;
    case Op::variable:
      return x;
    case Op::negate:
      return -eval(*n.lhs, x);
    case Op::add:
      return finite(eval(*n.lhs, x) + eval(*n.rhs, x), "'+'");
    case Op::sub:
      return finite(eval(*n.lhs, x) - eval(*n.rhs, x), "'-'");
    case Op::mul:
      return finite(eval(*n.lhs, x) * eval(*n.rhs, x), "'*'");
    case Op::div: {
      const double num = eval(*n.lhs, x);
      const double den = eval(*n.rhs, x);
      if (den == 0.0) throw DomainError("division by zero", x);
      return finite(num / den, "'/'");
    }
    case Op::pow:
      return finite(std::pow(eval(*n.lhs, x), eval(*n.rhs, x)), "'^'");
    case Op::call: {
      const double arg = eval(*n.lhs, x);
      switch (n.func) {
        case Func::sin:
          return std::sin(arg);
        case Func::cos:
          return std::cos(arg);
        case Func::exp:
          return finite(std::exp(arg), "exp");
        case Func::sinh:
          return finite(std::sinh(arg), "sinh");
        case Func::cosh:
          return finite(std::cosh(arg), "cosh");
        case Func::sqrt:
          if (arg < 0.0) throw DomainError("sqrt of negative argument", x);
          return std::sqrt(arg);
        case Func::abs:
          return std::abs(arg);
        case Func::log:
          if (arg <= 0.0) throw DomainError("log of non-positive argument", x);
          return std::log(arg);
      }
    }
  }
  return 0.0;
}

inline std::string Expression::print(const Node& n) {
  switch (n.op) {
    case Op::constant:
      // Negative constants never come out of the parser but may be built by hand.
      return n.value < 0.0 ? "(" + detail::format_double(n.value) + ")"
                           : detail::format_double(n.value);
    case Op::variable:
      return "x";
    case Op::negate:
      return "(-" + print(*n.lhs) + ")";
    case Op::add:
      return "(" + print(*n.lhs) + " + " + print(*n.rhs) + ")";
    case Op::sub:
      return "(" + print(*n.lhs) + " - " + print(*n.rhs) + ")";
    case Op::mul:
      return "(" + print(*n.lhs) + " * " + print(*n.rhs) + ")";
    case Op::div:
      return "(" + print(*n.lhs) + " / " + print(*n.rhs) + ")";
    case Op::pow:
      return "(" + print(*n.lhs) + " ^ " + print(*n.rhs) + ")";
    case Op::call:
      return std::string(detail::func_name(n.func)) + "(" + print(*n.lhs) + ")";
  }
  return "";
}

}  // namespace tsl
