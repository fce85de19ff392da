#include "solderlab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "solderlab/errors.hpp"

namespace solderlab {

struct Expr::Node {
  Op op = Op::constant;
  double value = 0.0;
  int exponent = 0;
  std::size_t index = 0;
  std::string name;
  // Null until set, so that building the shared zero node does not recurse.
  Expr a{std::shared_ptr<const Node>()};
  Expr b{std::shared_ptr<const Node>()};
};

namespace {

std::shared_ptr<const Expr::Node> constant_node(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::constant;
  n->value = v;
  return n;
}

const std::shared_ptr<const Expr::Node>& zero_node() {
  static const std::shared_ptr<const Expr::Node> zero = constant_node(0.0);
  return zero;
}

std::size_t arity_of(Op op) {
  switch (op) {
    case Op::constant:
    case Op::variable:
      return 0;
    case Op::neg:
    case Op::sin:
    case Op::cos:
    case Op::exp:
    case Op::log:
    case Op::sqrt:
    case Op::pow:
      return 1;
    default:
      return 2;
  }
}

const char* function_name(Op op) {
  switch (op) {
    case Op::sin:
      return "sin";
    case Op::cos:
      return "cos";
    case Op::exp:
      return "exp";
    case Op::log:
      return "log";
    case Op::sqrt:
      return "sqrt";
    default:
      return "";
  }
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string("non-finite result in ") + what);
  }
  return v;
}

double apply_unary(Op op, double x) {
  switch (op) {
    case Op::neg:
      return -x;
    case Op::sin:
      return std::sin(x);
    case Op::cos:
      return std::cos(x);
    case Op::exp:
      return checked(std::exp(x), "exp");
    case Op::log:
      if (x <= 0.0) {
        throw DomainError("log of non-positive value " + std::to_string(x));
      }
      return std::log(x);
    case Op::sqrt:
      if (x < 0.0) {
        throw DomainError("sqrt of negative value " + std::to_string(x));
      }
      return std::sqrt(x);
    default:
      throw Error("not a unary operation");
  }
}

double apply_pow(double base, int exponent) {
  if (base == 0.0 && exponent < 0) {
    throw DomainError("zero raised to a negative power");
  }
  return checked(std::pow(base, exponent), "pow");
}

double apply_binary(Op op, double x, double y) {
  switch (op) {
    case Op::add:
      return checked(x + y, "+");
    case Op::sub:
      return checked(x - y, "-");
    case Op::mul:
      return checked(x * y, "*");
    case Op::div:
      if (y == 0.0) {
        throw DomainError("division by zero");
      }
      return checked(x / y, "/");
    default:
      throw Error("not a binary operation");
  }
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr::Expr(double value) : node_(value == 0.0 ? zero_node() : constant_node(value)) {
  checked(value, "constant");
}

Expr Expr::variable(std::size_t index, std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::variable;
  n->index = index;
  n->name = std::move(name);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Op Expr::op() const noexcept { return node_->op; }

std::size_t Expr::arity() const noexcept { return arity_of(node_->op); }

const Expr& Expr::arg(std::size_t i) const {
  if (i >= arity()) {
    throw Error("expression argument index out of range");
  }
  return i == 0 ? node_->a : node_->b;
}

double Expr::value() const {
  if (op() != Op::constant) {
    throw Error("not a constant expression");
  }
  return node_->value;
}

std::size_t Expr::var_index() const {
  if (op() != Op::variable) {
    throw Error("not a variable expression");
  }
  return node_->index;
}

const std::string& Expr::var_name() const {
  if (op() != Op::variable) {
    throw Error("not a variable expression");
  }
  return node_->name;
}

int Expr::exponent() const {
  if (op() != Op::pow) {
    throw Error("not a power expression");
  }
  return node_->exponent;
}

bool Expr::is_zero() const noexcept {
  return node_->op == Op::constant && node_->value == 0.0;
}

bool Expr::is_one() const noexcept {
  return node_->op == Op::constant && node_->value == 1.0;
}

Expr Expr::make(Op op, Expr a, Expr b, int exponent) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->exponent = exponent;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::make_unary(Op op, const Expr& a) {
  if (a.is_constant()) {
    return Expr(apply_unary(op, a.value()));
  }
  return make(op, a);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    return Expr(apply_binary(Op::add, a.value(), b.value()));
  }
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return Expr::make(Op::add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    return Expr(apply_binary(Op::sub, a.value(), b.value()));
  }
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return Expr::make(Op::sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    return Expr(apply_binary(Op::mul, a.value(), b.value()));
  }
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return Expr::make(Op::mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) {
    throw DomainError("division by the constant zero");
  }
  if (a.is_constant() && b.is_constant()) {
    return Expr(apply_binary(Op::div, a.value(), b.value()));
  }
  if (a.is_zero()) return Expr();
  if (b.is_one()) return a;
  return Expr::make(Op::div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  if (a.op() == Op::neg) return a.arg(0);
  return Expr::make(Op::neg, a);
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr(1.0);
  if (exponent == 1) return base;
  if (base.is_constant()) return Expr(apply_pow(base.value(), exponent));
  return Expr::make(Op::pow, base, Expr(), exponent);
}

Expr sin(const Expr& a) { return Expr::make_unary(Op::sin, a); }
Expr cos(const Expr& a) { return Expr::make_unary(Op::cos, a); }
Expr exp(const Expr& a) { return Expr::make_unary(Op::exp, a); }
Expr log(const Expr& a) { return Expr::make_unary(Op::log, a); }
Expr sqrt(const Expr& a) { return Expr::make_unary(Op::sqrt, a); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> variables)
      : text_(text), variables_(variables) {}

  Expr parse() {
    skip_space();
    if (at_end()) fail("empty expression");
    Expr e = parse_sum();
    skip_space();
    if (!at_end()) fail(std::string("unexpected character '") + text_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, pos_);
  }

  bool at_end() const { return pos_ >= text_.size(); }

  void skip_space() {
    while (!at_end() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                         text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (!at_end() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_product();
      } else if (accept('-')) {
        lhs = lhs - parse_product();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Expr rhs = parse_unary();
        if (rhs.is_zero()) {
          pos_ = at;
          fail("division by the constant zero");
        }
        lhs = lhs / rhs;
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) {
      int exponent = parse_integer_exponent();
      if (base.is_zero() && exponent < 0) fail("zero raised to a negative power");
      return pow(base, exponent);
    }
    return base;
  }

  int parse_integer_exponent() {
    bool parenthesized = accept('(');
    bool negative = false;
    if (accept('-')) {
      negative = true;
    } else {
      accept('+');
    }
    skip_space();
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an integer exponent");
    if (!at_end() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      fail("only integer exponents are supported");
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc()) {
      pos_ = start;
      fail("exponent out of range");
    }
    if (parenthesized) expect(')');
    return negative ? -value : value;
  }

  Expr parse_primary() {
    skip_space();
    if (at_end()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (!at_end() && text_[pos_] == '.') {
      ++pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (!at_end() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (!at_end() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      std::size_t digits = pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (digits == pos_) {
        pos_ = mark;
        fail("malformed exponent in number");
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(value)) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr(value);
  }

  Expr parse_identifier() {
    std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                         text_[pos_] == '_')) {
      ++pos_;
    }
    std::string_view name = text_.substr(start, pos_ - start);
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i] == name) return Expr::variable(i, std::string(name));
    }
    static constexpr std::pair<std::string_view, Op> functions[] = {
        {"sin", Op::sin}, {"cos", Op::cos},   {"exp", Op::exp},
        {"log", Op::log}, {"sqrt", Op::sqrt},
    };
    for (const auto& [fname, op] : functions) {
      if (fname == name) {
        expect('(');
        std::size_t arg_at = pos_;
        Expr arg = parse_sum();
        expect(')');
        try {
          switch (op) {
            case Op::sin:
              return sin(arg);
            case Op::cos:
              return cos(arg);
            case Op::exp:
              return exp(arg);
            case Op::log:
              return log(arg);
            default:
              return sqrt(arg);
          }
        } catch (const DomainError& err) {
          pos_ = arg_at;
          fail(err.what());
        }
      }
    }
    if (name == "pi") return Expr(std::numbers::pi);
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::span<const std::string> variables_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, std::span<const std::string> variables) {
  return Parser(text, variables).parse();
}

// ---------------------------------------------------------------------------
// Differentiation, substitution, evaluation

namespace {

class Differentiator {
 public:
  explicit Differentiator(std::size_t index) : index_(index) {}

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr d = compute(e);
    memo_.emplace(e.id(), d);
    return d;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.op()) {
      case Op::constant:
        return Expr();
      case Op::variable:
        return e.var_index() == index_ ? Expr(1.0) : Expr();
      case Op::neg:
        return -(*this)(e.arg(0));
      case Op::add:
        return (*this)(e.arg(0)) + (*this)(e.arg(1));
      case Op::sub:
        return (*this)(e.arg(0)) - (*this)(e.arg(1));
      case Op::mul: {
        const Expr& u = e.arg(0);
        const Expr& v = e.arg(1);
        return (*this)(u) * v + u * (*this)(v);
      }
      case Op::div: {
        const Expr& u = e.arg(0);
        const Expr& v = e.arg(1);
        Expr du = (*this)(u);
        Expr dv = (*this)(v);
        if (dv.is_zero()) return du / v;
        return du / v - u * dv / pow(v, 2);
      }
      case Op::pow: {
        const Expr& u = e.arg(0);
        int n = e.exponent();
        return Expr(static_cast<double>(n)) * pow(u, n - 1) * (*this)(u);
      }
      case Op::sin:
        return cos(e.arg(0)) * (*this)(e.arg(0));
      case Op::cos:
        return -(sin(e.arg(0)) * (*this)(e.arg(0)));
      case Op::exp:
        return e * (*this)(e.arg(0));
      case Op::log:
        return (*this)(e.arg(0)) / e.arg(0);
      case Op::sqrt: {
        Expr du = (*this)(e.arg(0));
        if (du.is_zero()) return Expr();
        return du / (Expr(2.0) * e);
      }
    }
    throw Error("unknown expression node");
  }

  std::size_t index_;
  std::unordered_map<const void*, Expr> memo_;
};

Expr rebuild(Op op, const Expr& e, const Expr& a, const Expr& b) {
  switch (op) {
    case Op::neg:
      return -a;
    case Op::sin:
      return sin(a);
    case Op::cos:
      return cos(a);
    case Op::exp:
      return exp(a);
    case Op::log:
      return log(a);
    case Op::sqrt:
      return sqrt(a);
    case Op::pow:
      return pow(a, e.exponent());
    case Op::add:
      return a + b;
    case Op::sub:
      return a - b;
    case Op::mul:
      return a * b;
    case Op::div:
      return a / b;
    default:
      return e;
  }
}

class Substituter {
 public:
  explicit Substituter(std::span<const Expr> replacements) : replacements_(replacements) {}

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr r;
    switch (e.op()) {
      case Op::constant:
        r = e;
        break;
      case Op::variable:
        if (e.var_index() >= replacements_.size()) {
          throw DimensionError("no replacement for variable '" + e.var_name() + "'");
        }
        r = replacements_[e.var_index()];
        break;
      default: {
        Expr a = (*this)(e.arg(0));
        Expr b = e.arity() == 2 ? (*this)(e.arg(1)) : Expr();
        r = rebuild(e.op(), e, a, b);
      }
    }
    memo_.emplace(e.id(), r);
    return r;
  }

 private:
  std::span<const Expr> replacements_;
  std::unordered_map<const void*, Expr> memo_;
};

// Expressions are DAGs (derivatives and inverses share subterms heavily), so
// evaluation is memoised per node.
class Evaluator {
 public:
  explicit Evaluator(std::span<const double> point) : point_(point) {}

  double operator()(const Expr& e) {
    switch (e.op()) {
      case Op::constant:
        return e.value();
      case Op::variable:
        if (e.var_index() >= point_.size()) {
          throw DimensionError("point has no value for variable '" + e.var_name() + "'");
        }
        return point_[e.var_index()];
      default:
        break;
    }
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    double v = 0.0;
    switch (e.op()) {
      case Op::pow:
        v = apply_pow((*this)(e.arg(0)), e.exponent());
        break;
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::div:
        v = apply_binary(e.op(), (*this)(e.arg(0)), (*this)(e.arg(1)));
        break;
      default:
        v = apply_unary(e.op(), (*this)(e.arg(0)));
    }
    memo_.emplace(e.id(), v);
    return v;
  }

 private:
  std::span<const double> point_;
  std::unordered_map<const void*, double> memo_;
};

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::add:
    case Op::sub:
      return 1;
    case Op::mul:
    case Op::div:
      return 2;
    case Op::neg:
      return 3;
    case Op::pow:
      return 4;
    case Op::constant:
      return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    default:
      return 5;
  }
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::constant: {
      char buf[64];
      double v = e.value();
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      std::string_view digits(buf, static_cast<std::size_t>(ptr - buf));
      // Keep the lexer's number form: a bare literal never carries a sign.
      if (std::signbit(v)) {
        out += "(";
        out += digits;
        out += ")";
      } else {
        out += digits;
      }
      return;
    }
    case Op::variable:
      out += e.var_name();
      return;
    case Op::neg:
      out += '-';
      print_wrapped(e.arg(0), precedence(e.arg(0)) < 3, out);
      return;
    case Op::pow:
      print_wrapped(e.arg(0), precedence(e.arg(0)) < 5, out);
      out += '^';
      if (e.exponent() < 0) {
        out += "(" + std::to_string(e.exponent()) + ")";
      } else {
        out += std::to_string(e.exponent());
      }
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      int p = precedence(e);
      print_wrapped(e.arg(0), precedence(e.arg(0)) < p, out);
      switch (e.op()) {
        case Op::add:
          out += " + ";
          break;
        case Op::sub:
          out += " - ";
          break;
        case Op::mul:
          out += "*";
          break;
        default:
          out += "/";
      }
      print_wrapped(e.arg(1), precedence(e.arg(1)) <= p, out);
      return;
    }
    default:
      out += function_name(e.op());
      out += '(';
      print(e.arg(0), out);
      out += ')';
  }
}

}  // namespace

Expr differentiate(const Expr& e, std::size_t index) { return Differentiator(index)(e); }

double evaluate(const Expr& e, std::span<const double> point) { return Evaluator(point)(e); }

Expr substitute(const Expr& e, std::span<const Expr> replacements) {
  return Substituter(replacements)(e);
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

bool depends_on(const Expr& e, std::size_t index) {
  std::unordered_set<const void*> seen;
  std::vector<Expr> stack{e};
  while (!stack.empty()) {
    Expr cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur.id()).second) continue;
    if (cur.op() == Op::variable && cur.var_index() == index) return true;
    for (std::size_t i = 0; i < cur.arity(); ++i) stack.push_back(cur.arg(i));
  }
  return false;
}

std::size_t node_count(const Expr& e) {
  std::unordered_set<const void*> seen;
  std::vector<Expr> stack{e};
  while (!stack.empty()) {
    Expr cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur.id()).second) continue;
    for (std::size_t i = 0; i < cur.arity(); ++i) stack.push_back(cur.arg(i));
  }
  return seen.size();
}

}  // namespace solderlab
