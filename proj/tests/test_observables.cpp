#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "solderlab/errors.hpp"
#include "solderlab/observables.hpp"
#include "solderlab/solderint.hpp"
#include "support/builders.hpp"
#include "support/generators.hpp"

using namespace solderlab;
namespace b = solderlab::build;

namespace {

ChartPtr plane() { return b::chart({"x", "y"}, {{-1, 1}, {-1, 1}}); }
ChartPtr space() { return b::chart({"x", "y", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}); }

Puzzle flat() {
  auto c = plane();
  return Puzzle(ConnectionForms(c, 2), b::coframe(c, {{"1", "0"}, {"0", "1"}}), FiberMetric::identity(c, 2));
}

Puzzle projection() {
  auto c = space();
  return Puzzle(ConnectionForms(c, 2), b::coframe(c, {{"1", "0", "0"}, {"0", "1", "0"}}), FiberMetric::identity(c, 2));
}

Puzzle exponential() {
  auto c = plane();
  return Puzzle(b::connection(c, 1, {{0, 0, {"-1", "0"}}}), b::coframe(c, {{"0", "exp(x)"}}),
                FiberMetric(c, b::matrix(c, {{"exp(-2*x)"}})));
}

Puzzle sphere_graph() {
  auto c = b::chart({"x1", "x2"}, {{-0.63, 0.63}, {-0.63, 0.63}});
  return Puzzle(ConnectionForms(c, 3),
                b::coframe(c, {{"1", "0"}, {"0", "1"},
                               {"-x1/sqrt(1-x1^2-x2^2)", "-x2/sqrt(1-x1^2-x2^2)"}}),
                FiberMetric::identity(c, 3));
}

DualSection section(const ChartPtr& c, const std::vector<std::string>& f) {
  DualSection s{c, {}};
  for (const auto& e : f) s.f.push_back(c->parse(e));
  return s;
}

double max_abs(const std::vector<Expr>& f, const std::vector<Expr>& g, std::span<const Point> pts) {
  double worst = 0.0;
  for (const auto& p : pts)
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(evaluate(f[i], p) - evaluate(g[i], p)));
  return worst;
}

}  // namespace

TEST(Observables, ResidualExamples) {
  auto p = flat();
  auto c = p.chart_ptr();
  auto pts = sample_points(*c, 20, 1);
  EXPECT_EQ(max_abs_coefficient(observable_residual(p, section(c, {"2*x*y", "x^2"})), pts), 0.0);
  auto r = observable_residual(p, section(c, {"y", "0"}));
  EXPECT_EQ(evaluate(r.coefficient({0, 1}), std::vector<double>{0.3, 0.2}), -1.0);
  auto e = exponential();
  EXPECT_LE(max_abs_coefficient(observable_residual(e, section(e.chart_ptr(), {"exp(-x)"})), pts), 1e-15);
}

TEST(Observables, TwoResidualFormsAgree) {
  std::mt19937_64 rng(4);
  // Non-integrable on purpose so the d^nabla phi term matters.
  auto c = plane();
  Puzzle twisted(b::connection(c, 2, {{0, 1, {"y", "x"}}, {1, 0, {"-y", "-x"}}}),
                 b::coframe(c, {{"1", "x"}, {"0", "1+y^2"}}), FiberMetric::identity(c, 2));
  auto dphi = covariant_exterior_derivative(twisted.omega(), twisted.phi());
  auto pts = sample_points(*c, 20, 2);
  for (int trial = 0; trial < 20; ++trial) {
    DualSection f{c, {gen::random_polynomial(rng, 2, 4, 3), gen::random_polynomial(rng, 2, 4, 3)}};
    auto lhs = observable_residual(twisted, f);
    auto nabla = dual_covariant_derivative(twisted, f);
    DifferentialForm rhs(c, 2);
    for (std::size_t i = 0; i < 2; ++i) {
      rhs += wedge(nabla[i], twisted.phi()[i]);
      rhs += f.f[i] * dphi[i];
    }
    EXPECT_LE(max_abs_coefficient(lhs - rhs, pts), 1e-10);
  }
}

TEST(Observables, ReconstructExamples) {
  auto p = flat();
  auto c = p.chart_ptr();
  auto f = reconstruct_observable(p, c->parse("x^2*y"));
  auto pts = sample_points(*c, 10, 1);
  EXPECT_EQ(max_abs(f.f, section(c, {"2*x*y", "x^2"}).f, pts), 0.0);
  Puzzle doubled(ConnectionForms(c, 2), b::coframe(c, {{"2", "0"}, {"0", "1"}}), FiberMetric::identity(c, 2));
  auto g = reconstruct_observable(doubled, c->parse("x"));
  EXPECT_EQ(evaluate(g.f[0], pts[0]), 0.5);
  EXPECT_EQ(evaluate(g.f[1], pts[0]), 0.0);
  auto z = reconstruct_observable(p, Expr(3.0));
  EXPECT_TRUE(z.f[0].is_zero() && z.f[1].is_zero());
  Puzzle degenerate(ConnectionForms(c, 2), b::coframe(c, {{"1", "0"}, {"1", "0"}}));
  EXPECT_THROW(reconstruct_observable(degenerate, c->parse("x")), SingularError);
}

TEST(Observables, RoundTripRandomAlpha) {
  std::mt19937_64 rng(11);
  auto c = plane();
  Puzzle polar_like(ConnectionForms(c, 2), b::coframe(c, {{"2+x", "y"}, {"0", "3-y^2"}}));
  auto pts = sample_points(*c, 30, 5);
  for (int trial = 0; trial < 20; ++trial) {
    Expr alpha = gen::random_polynomial(rng, 2, 5, 4);
    for (const auto& p : {flat(), polar_like}) {
      auto f = reconstruct_observable(p, alpha);
      EXPECT_LE(max_abs_coefficient(observable_residual(p, f), pts), 1e-10);
      DifferentialForm pairing(c, 1);
      for (std::size_t i = 0; i < 2; ++i) pairing += f.f[i] * p.phi()[i];
      EXPECT_LE(max_abs_coefficient(pairing - exterior_derivative(DifferentialForm::function(c, alpha)), pts), 1e-10);
    }
  }
}

TEST(Observables, CartanExamples) {
  auto p = flat();
  auto c = p.chart_ptr();
  auto t = cartan_coefficients(p, section(c, {"2*x*y", "x^2"}));
  std::vector<double> q{0.4, -0.3};
  EXPECT_EQ(evaluate(t.h(0, 0), q), -0.6);
  EXPECT_EQ(evaluate(t.h(0, 1), q), 0.8);
  EXPECT_EQ(evaluate(t.h(1, 0), q), 0.8);
  EXPECT_EQ(evaluate(t.h(1, 1), q), 0.0);
  EXPECT_EQ(t.asymmetry, 0.0);
  auto u = cartan_coefficients(p, section(c, {"y", "0"}));
  EXPECT_EQ(evaluate(u.h(0, 1), q), 1.0);
  EXPECT_EQ(evaluate(u.h(1, 0), q), 0.0);
  EXPECT_EQ(u.asymmetry, 1.0);
  auto z = cartan_coefficients(p, section(c, {"0", "0"}));
  EXPECT_EQ(z.asymmetry, 0.0);
  EXPECT_TRUE(z.h(0, 1).is_zero());
}

TEST(Observables, CartanSymmetryIffObservable) {
  std::mt19937_64 rng(23);
  auto p = flat();
  auto c = p.chart_ptr();
  auto pts = sample_points(*c, 30, 6);
  for (int trial = 0; trial < 20; ++trial) {
    DualSection f;
    if (trial % 2 == 0) {
      f = reconstruct_observable(p, gen::random_polynomial(rng, 2, 5, 4));
    } else {
      f = DualSection{c, {gen::random_polynomial(rng, 2, 4, 3), gen::random_polynomial(rng, 2, 4, 3)}};
    }
    bool symmetric = cartan_coefficients(p, f).asymmetry <= 1e-9;
    bool closed = max_abs_coefficient(observable_residual(p, f), pts) <= 1e-9;
    EXPECT_EQ(symmetric, closed) << trial;
    if (trial % 2 == 0) EXPECT_TRUE(closed);
  }
}

TEST(Observables, ClassifyIsomorphism) {
  auto p = flat();
  auto r = classify_solvability(p, p.chart().parse("x^2*y"));
  EXPECT_EQ(r.kind, Solvability::unique);
  EXPECT_EQ(r.rank_class, RankClass::isomorphism);
  ASSERT_TRUE(r.f);
  EXPECT_EQ(max_abs(r.f->f, section(p.chart_ptr(), {"2*x*y", "x^2"}).f, sample_points(p.chart(), 5, 1)), 0.0);
}

TEST(Observables, ClassifyInjective) {
  auto p = sphere_graph();
  auto r = classify_solvability(p, p.chart().parse("x1"));
  EXPECT_EQ(r.kind, Solvability::affine);
  EXPECT_EQ(r.annihilator_dim, 1u);
  ASSERT_TRUE(r.f && r.f_fixed);
  auto pts = sample_points(p.chart(), 20, 4);
  for (const auto& q : pts) {
    // d x1 = f~_a phi~^a with phi~ = (dx^a, 0)
    EXPECT_EQ(evaluate(r.f->f[0], q), 1.0);
    EXPECT_EQ(evaluate(r.f->f[1], q), 0.0);
    EXPECT_TRUE(r.f->f[2].is_zero());
  }
  DifferentialForm pairing(p.chart_ptr(), 1);
  for (std::size_t i = 0; i < 3; ++i) pairing += r.f_fixed->f[i] * p.phi()[i];
  for (const auto& q : pts) {
    EXPECT_NEAR(evaluate(pairing.coefficient({0}), q), 1.0, 1e-12);
    EXPECT_NEAR(evaluate(pairing.coefficient({1}), q), 0.0, 1e-12);
  }
  EXPECT_LE(max_abs_coefficient(observable_residual(p, *r.f_fixed), pts), 1e-10);
}

TEST(Observables, ClassifySurjective) {
  auto p = projection();
  auto bad = classify_solvability(p, p.chart().parse("z"));
  EXPECT_EQ(bad.kind, Solvability::unsolvable);
  EXPECT_EQ(bad.rank_class, RankClass::surjective);
  ASSERT_TRUE(bad.witness);
  EXPECT_NEAR(bad.witness->value, 1.0, 1e-12);
  EXPECT_NEAR(bad.witness->direction[2], 1.0, 1e-12);

  auto good = classify_solvability(p, p.chart().parse("x*y"));
  EXPECT_EQ(good.kind, Solvability::unique);
  ASSERT_TRUE(good.f);
  EXPECT_FALSE(good.witness);
  auto pts = sample_points(p.chart(), 10, 3);
  EXPECT_LE(max_abs(good.f->f, section(p.chart_ptr(), {"y", "x"}).f, pts), 1e-12);

  auto e = exponential();
  auto ey = classify_solvability(e, e.chart().parse("y"));
  EXPECT_EQ(ey.kind, Solvability::unique);
  EXPECT_LE(max_abs(ey.f->f, section(e.chart_ptr(), {"exp(-x)"}).f, sample_points(e.chart(), 10, 3)), 1e-12);
  EXPECT_EQ(classify_solvability(e, e.chart().parse("x*y")).kind, Solvability::unsolvable);
}

TEST(Observables, SurjectiveAgreesWithLeafConstancy) {
  struct Case {
    Puzzle puzzle;
    std::string alpha;
  };
  std::vector<Case> cases{{projection(), "x*y"}, {projection(), "z"}, {projection(), "sin(x)+y^3"},
                          {exponential(), "y^2"}, {exponential(), "x+y"}};
  for (const auto& [p, text] : cases) {
    Expr alpha = p.chart().parse(text);
    bool solvable = classify_solvability(p, alpha).kind != Solvability::unsolvable;
    double variation = 0.0;
    Eigen::VectorXd selector = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p.dim()));
    for (const auto& seed : sample_points(p.chart(), 10, 9, 0.3)) {
      auto trace = leaf_flow(p, seed, selector, 40, 0.01);
      double a0 = evaluate(alpha, trace.points.front());
      for (const auto& q : trace.points) variation = std::max(variation, std::abs(evaluate(alpha, q) - a0));
    }
    EXPECT_EQ(solvable, variation <= 1e-8) << text;
  }
}

TEST(Observables, Rejections) {
  auto c = space();
  Puzzle contact(ConnectionForms(c, 1), b::coframe(c, {{"-y", "0", "1"}}));
  Puzzle rank_one(ConnectionForms(c, 2), b::coframe(c, {{"1", "0", "0"}, {"1", "0", "0"}}));
  EXPECT_THROW(classify_solvability(rank_one, c->parse("x")), PreconditionError);
  // Second row drops below the rank threshold for x > -0.6 or so.
  Puzzle variable(ConnectionForms(c, 2), b::coframe(c, {{"1", "0", "0"}, {"0", "exp(-60*(x+1))", "0"}}));
  EXPECT_THROW(classify_solvability(variable, c->parse("x")), PreconditionError);
  EXPECT_THROW(reconstruct_observable(contact, c->parse("x")), PreconditionError);
  EXPECT_THROW(observable_residual(flat(), DualSection{plane(), {Expr(1.0)}}), DimensionError);
}
