#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "solderlab/errors.hpp"
#include "solderlab/expr.hpp"
#include "support/generators.hpp"

using namespace solderlab;

namespace {

const std::vector<std::string> kXY{"x", "y"};

double eval_at(const std::string& text, std::vector<double> p,
               const std::vector<std::string>& vars = kXY) {
  return evaluate(parse_expr(text, vars), p);
}

}  // namespace

TEST(Expr, ParsesTopLevelSum) {
  Expr e = parse_expr("x*y + sin(x)", kXY);
  EXPECT_EQ(e.op(), Op::add);
  EXPECT_EQ(e.arg(0).op(), Op::mul);
  EXPECT_EQ(e.arg(1).op(), Op::sin);
}

TEST(Expr, IntegerPower) {
  std::vector<std::string> vars{"x"};
  Expr e = parse_expr("x^3", vars);
  ASSERT_EQ(e.op(), Op::pow);
  EXPECT_EQ(e.exponent(), 3);
  EXPECT_DOUBLE_EQ(evaluate(differentiate(e, 0), std::vector<double>{2.0}), 12.0);
}

TEST(Expr, SyntaxErrorOffset) {
  std::vector<std::string> vars{"x"};
  try {
    parse_expr("x + ", vars);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Expr, UnknownIdentifier) {
  EXPECT_THROW(parse_expr("x + z", kXY), ParseError);
  EXPECT_THROW(parse_expr("x^1.5", kXY), ParseError);
  EXPECT_THROW(parse_expr("foo(x)", kXY), ParseError);
  EXPECT_THROW(parse_expr("(x", kXY), ParseError);
}

TEST(Expr, DerivativeExamples) {
  Expr e = parse_expr("x*y + sin(x)", kXY);
  EXPECT_DOUBLE_EQ(evaluate(differentiate(e, 0), std::vector<double>{0.0, 2.0}), 3.0);
  Expr seven = parse_expr("7", kXY);
  EXPECT_TRUE(differentiate(seven, 0).is_zero());
}

TEST(Expr, Evaluation) {
  EXPECT_DOUBLE_EQ(eval_at("x*y", {2, 3}), 6.0);
  EXPECT_DOUBLE_EQ(eval_at("exp(0)", {0, 0}), 1.0);
  EXPECT_NEAR(eval_at("cos(pi)", {0, 0}), -1.0, 1e-15);
  EXPECT_DOUBLE_EQ(eval_at("2^-2", {0, 0}), 0.25);
  EXPECT_DOUBLE_EQ(eval_at("-x^2", {3, 0}), -9.0);
  EXPECT_DOUBLE_EQ(eval_at("1.5e1/3 - y", {0, 1}), 4.0);
}

TEST(Expr, DomainErrors) {
  std::vector<std::string> vars{"x"};
  EXPECT_THROW(evaluate(parse_expr("sqrt(x)", vars), std::vector<double>{-1.0}), DomainError);
  EXPECT_THROW(evaluate(parse_expr("log(x)", vars), std::vector<double>{0.0}), DomainError);
  EXPECT_THROW(evaluate(parse_expr("1/x", vars), std::vector<double>{0.0}), DomainError);
  EXPECT_THROW(evaluate(parse_expr("x^-1", vars), std::vector<double>{0.0}), DomainError);
  EXPECT_THROW(evaluate(parse_expr("exp(exp(x))", vars), std::vector<double>{10.0}), DomainError);
}

TEST(Expr, ConstantFolding) {
  Expr x = Expr::variable(0, "x");
  EXPECT_TRUE((Expr(0.0) * x).is_zero());
  EXPECT_EQ((x + Expr(0.0)).id(), x.id());
  EXPECT_EQ((Expr(1.0) * x).id(), x.id());
  EXPECT_TRUE((Expr(2.0) + Expr(3.0)).is_constant());
  EXPECT_EQ((-(-x)).id(), x.id());
  EXPECT_TRUE(differentiate(x * x, 1).is_zero());
}

TEST(ExprProperty, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  const double h = 1e-5;
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Expr e = gen::random_smooth(rng, 3, 2);
    std::vector<double> p{coord(rng), coord(rng), coord(rng)};
    std::size_t v = static_cast<std::size_t>(trial % 3);
    double exact = evaluate(differentiate(e, v), p);
    auto plus = p;
    auto minus = p;
    plus[v] += h;
    minus[v] -= h;
    double fd = (evaluate(e, plus) - evaluate(e, minus)) / (2 * h);
    EXPECT_LE(std::abs(exact - fd), 1e-6 * (1 + std::abs(exact))) << to_string(e);
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

TEST(ExprProperty, PrintParseRoundTrip) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<std::string> vars{"x0", "x1", "x2"};
  for (int trial = 0; trial < 200; ++trial) {
    Expr e = gen::random_smooth(rng, 3, 3);
    Expr back = parse_expr(to_string(e), vars);
    EXPECT_EQ(to_string(back), to_string(e));
    for (int k = 0; k < 100 / 20; ++k) {
      std::vector<double> p{coord(rng), coord(rng), coord(rng)};
      EXPECT_EQ(evaluate(back, p), evaluate(e, p)) << to_string(e);
    }
  }
}

TEST(ExprProperty, RoundTripHundredPoints) {
  std::mt19937_64 rng(78);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<std::string> vars{"x0", "x1", "x2"};
  Expr e = gen::random_smooth(rng, 3, 4);
  Expr back = parse_expr(to_string(e), vars);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> p{coord(rng), coord(rng), coord(rng)};
    EXPECT_EQ(evaluate(back, p), evaluate(e, p));
  }
}

TEST(ExprProperty, MixedPartialsCommute) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Expr e = gen::random_smooth(rng, 2, 2);
    std::vector<double> p{coord(rng), coord(rng)};
    double xy = evaluate(differentiate(differentiate(e, 0), 1), p);
    double yx = evaluate(differentiate(differentiate(e, 1), 0), p);
    EXPECT_NEAR(xy, yx, 1e-10 * (1 + std::abs(xy)));
  }
}

TEST(Expr, SubstituteComposes) {
  Expr e = parse_expr("x*y + sin(x)", kXY);
  Expr t = Expr::variable(0, "t");
  std::vector<Expr> repl{t * t, Expr(2.0)};
  Expr s = substitute(e, repl);
  std::vector<double> p{0.5};
  EXPECT_DOUBLE_EQ(evaluate(s, p), 0.25 * 2 + std::sin(0.25));
  EXPECT_TRUE(depends_on(e, 1));
  EXPECT_FALSE(depends_on(s, 1));
}
