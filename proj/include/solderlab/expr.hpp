#pragma once

// Small analytic-expression language: an immutable expression DAG over
// indexed variables with exact symbolic differentiation.
//
// Grammar (see docs/expression_grammar.md):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' integer)?
//   integer := ['-' | '+'] digits | '(' ['-' | '+'] digits ')'
//   primary := number | identifier | function '(' expr ')' | '(' expr ')'
//   function:= sin | cos | exp | log | sqrt
//
// Only integer powers exist; fractional powers go through sqrt.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace solderlab {

enum class Op : std::uint8_t {
  constant,
  variable,
  neg,
  sin,
  cos,
  exp,
  log,
  sqrt,
  add,
  sub,
  mul,
  div,
  pow,
};

class Expr {
 public:
  /// The constant zero.
  Expr();
  Expr(double value);  // NOLINT: implicit so that `2.0 * e` reads naturally.

  static Expr variable(std::size_t index, std::string name);

  Op op() const noexcept;
  std::size_t arity() const noexcept;
  const Expr& arg(std::size_t i) const;

  /// Valid for Op::constant.
  double value() const;
  /// Valid for Op::variable.
  std::size_t var_index() const;
  const std::string& var_name() const;
  /// Valid for Op::pow.
  int exponent() const;

  bool is_constant() const noexcept { return op() == Op::constant; }
  bool is_zero() const noexcept;
  bool is_one() const noexcept;

  /// Identity of the underlying node (shared subtrees compare equal).
  const void* id() const noexcept { return node_.get(); }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, int exponent);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sqrt(const Expr& a);

  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr make(Op op, Expr a, Expr b = Expr(), int exponent = 0);
  static Expr make_unary(Op op, const Expr& a);

  std::shared_ptr<const Node> node_;
};

/// Parses `text`; identifiers resolve to their position in `variables`.
/// `pi` is a built-in constant unless it is itself a variable name.
/// Throws ParseError (with the offending byte offset) on malformed input or
/// unknown identifiers.
Expr parse_expr(std::string_view text, std::span<const std::string> variables);

/// Exact partial derivative with respect to variable `index`.
Expr differentiate(const Expr& e, std::size_t index);

/// IEEE evaluation. `point[i]` is the value of variable i. Throws
/// DomainError instead of returning a non-finite value.
double evaluate(const Expr& e, std::span<const double> point);

/// Replaces variable i by `replacements[i]`. Every variable occurring in `e`
/// must have a replacement.
Expr substitute(const Expr& e, std::span<const Expr> replacements);

/// Printable form; re-parsing it with the same variable list rebuilds an
/// identical tree.
std::string to_string(const Expr& e);

/// True when variable `index` occurs in `e`.
bool depends_on(const Expr& e, std::size_t index);

/// Number of distinct nodes in the DAG.
std::size_t node_count(const Expr& e);

}  // namespace solderlab
