#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "solderlab/errors.hpp"
#include "solderlab/solderint.hpp"
#include "support/builders.hpp"
#include "support/generators.hpp"

using namespace solderlab;
namespace b = solderlab::build;

namespace {

ChartPtr space() { return b::chart({"x", "y", "z"}, std::vector<Interval>(3, Interval{-2, 2})); }
ChartPtr plane() { return b::chart({"x", "y"}, {{-2, 2}, {-2, 2}}); }

Puzzle projection() {
  auto c = space();
  return Puzzle(ConnectionForms(c, 2), b::coframe(c, {{"1", "0", "0"}, {"0", "1", "0"}}), FiberMetric::identity(c, 2));
}

Puzzle exponential() {
  auto c = plane();
  return Puzzle(b::connection(c, 1, {{0, 0, {"-1", "0"}}}), b::coframe(c, {{"0", "exp(x)"}}),
                FiberMetric(c, b::matrix(c, {{"exp(-2*x)"}})));
}

Puzzle exponential_flat() {
  auto c = plane();
  return Puzzle(ConnectionForms(c, 1), b::coframe(c, {{"0", "exp(x)"}}));
}

Puzzle contact() {
  auto c = space();
  return Puzzle(ConnectionForms(c, 1), b::coframe(c, {{"-y", "0", "1"}}));
}

SurfaceFamily family(const ChartPtr& c, const std::vector<std::string>& comps) {
  auto ts = SurfaceFamily::parameter_chart();
  std::vector<Expr> e;
  for (const auto& s : comps) e.push_back(ts->parse(s));
  return SurfaceFamily(c, e);
}

}  // namespace

TEST(Solderint, IdentityResidualExamples) {
  auto nodes = parameter_grid(8);
  EXPECT_LE(identity_residual(projection(), family(space(), {"t*s", "sin(t)+s", "t^2-s"}), nodes).max_abs, 1e-14);
  EXPECT_LE(identity_residual(exponential(), family(plane(), {"t*s", "t+s^2"}), nodes).max_abs, 1e-13);
  auto r = identity_residual(contact(), family(space(), {"t", "s", "0"}), nodes);
  for (const auto& v : r.residual) EXPECT_DOUBLE_EQ(v(0), 1.0);
  auto flatline = identity_residual(contact(), family(space(), {"0.5", "s", "s^2"}), nodes);
  EXPECT_EQ(flatline.max_abs, 0.0);
}

TEST(Solderint, IdentityResidualIsPulledBackCovariantDerivative) {
  std::mt19937_64 rng(31);
  auto c = b::chart({"x", "y", "z"}, std::vector<Interval>(3, Interval{-3, 3}));
  std::uniform_real_distribution<double> unit(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    std::size_t n = 2;
    ConnectionForms w(c, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w.set(i, j, gen::random_form(rng, c, 1));
    BundleValuedForm phi({gen::random_form(rng, c, 1), gen::random_form(rng, c, 1)});
    Puzzle p(w, phi);
    auto ts = SurfaceFamily::parameter_chart();
    std::vector<Expr> comps;
    for (int a = 0; a < 3; ++a) comps.push_back(gen::random_polynomial(rng, 2, 3, 2) * Expr(0.3));
    // random_polynomial names variables x0, x1; rebuild on (t, s)
    std::vector<Expr> ts_vars{ts->coordinate(0), ts->coordinate(1)};
    for (auto& e : comps) e = substitute(e, ts_vars);
    SurfaceFamily gamma(c, comps);
    std::vector<Point> nodes;
    for (int k = 0; k < 40; ++k) nodes.push_back({unit(rng), unit(rng)});
    auto r = identity_residual(p, gamma, nodes);
    auto dphi = covariant_exterior_derivative(w, phi);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      Point x = gamma.map().apply(nodes[k]);
      Eigen::MatrixXd jac = gamma.map().jacobian().evaluate(nodes[k]);
      std::vector<Eigen::VectorXd> vs{jac.col(0), jac.col(1)};
      Eigen::VectorXd expected = dphi.evaluate_on(x, vs);
      EXPECT_LE((r.residual[k] - expected).cwiseAbs().maxCoeff(), 1e-9 * (1 + expected.norm()));
    }
  }
}

TEST(Solderint, TransportOnLeafIsZero) {
  auto f3 = integrate_transport_system(projection(), family(space(), {"s", "0", "t"}), 8, 20);
  EXPECT_EQ(f3.max_abs(), 0.0);
  auto f6 = integrate_transport_system(exponential(), family(plane(), {"t", "s"}), 8, 20);
  EXPECT_EQ(f6.max_abs(), 0.0);
}

TEST(Solderint, TransportMatchesDirectEvaluationOffLeaf) {
  auto gamma = family(plane(), {"s + 0.3*t^2", "t"});
  for (std::size_t steps : {10u, 40u}) {
    auto table = integrate_transport_system(exponential(), gamma, 8, steps);
    auto direct = direct_table(exponential(), gamma, table);
    double worst = 0;
    for (std::size_t i = 0; i < table.t.size(); ++i)
      for (std::size_t k = 0; k < table.s.size(); ++k) {
        worst = std::max(worst, (table.f[i][k] - direct.f[i][k]).cwiseAbs().maxCoeff());
        // closed form e^{s + 0.3 t^2}
        EXPECT_NEAR(direct.f[i][k](0), std::exp(table.s[k] + 0.3 * table.t[i] * table.t[i]), 1e-12);
      }
    EXPECT_LE(worst, 10 * std::pow(table.step, 4));
  }
  auto coarse = integrate_transport_system(exponential(), gamma, 4, 4);
  auto fine = integrate_transport_system(exponential(), gamma, 4, 16);
  auto err = [&](const TransportTable& t) {
    auto d = direct_table(exponential(), gamma, t);
    double worst = 0;
    for (std::size_t i = 0; i < t.t.size(); ++i)
      for (std::size_t k = 0; k < t.s.size(); ++k) worst = std::max(worst, (t.f[i][k] - d.f[i][k]).cwiseAbs().maxCoeff());
    return worst;
  };
  EXPECT_GE(err(coarse) / err(fine), 200.0);
}

TEST(Solderint, CustomInitialRow) {
  auto gamma = family(plane(), {"t", "s"});
  auto table = integrate_transport_system(exponential(), gamma, 2, 50,
                                          [](double t) { return Eigen::VectorXd::Constant(1, 1 + t); });
  for (std::size_t i = 0; i < table.t.size(); ++i)
    for (std::size_t k = 0; k < table.s.size(); ++k)
      EXPECT_NEAR(table.f[i][k](0), 1 + table.t[i], 1e-14);
}

TEST(Solderint, LeafFlowExamples) {
  auto f3 = leaf_flow(projection(), {1, 2, 0}, Eigen::Vector3d(0, 0, 1), 50, 0.02);
  ASSERT_EQ(f3.points.size(), 51u);
  for (std::size_t k = 0; k < f3.points.size(); ++k) {
    EXPECT_NEAR(f3.points[k][0], 1.0, 1e-15);
    EXPECT_NEAR(f3.points[k][1], 2.0, 1e-15);
    EXPECT_NEAR(f3.points[k][2], 0.02 * static_cast<double>(k), 1e-12);
  }
  auto c = b::chart({"x", "y"}, {{-1, 1}, {-4, 4}});
  Puzzle f6(b::connection(c, 1, {{0, 0, {"-1", "0"}}}), b::coframe(c, {{"0", "exp(x)"}}));
  auto trace = leaf_flow(f6, {0, 3}, Eigen::Vector2d(1, 0), 100, 0.02);
  EXPECT_TRUE(trace.truncated);
  for (const auto& p : trace.points) EXPECT_NEAR(p[1], 3.0, 1e-15);
  EXPECT_LE(leaf_trace_defect(f6, trace), 1e-6);
  EXPECT_THROW(leaf_flow(Puzzle(ConnectionForms(plane(), 2), b::coframe(plane(), {{"1", "0"}, {"0", "1"}})), {0, 0},
                         Eigen::Vector2d(1, 0), 10, 0.1),
               PreconditionError);
}

TEST(Solderint, CurvedLeavesStayOnLevelSets) {
  // phi = e1 (x dx + y dy) on an annulus: leaves are circles.
  auto c = b::chart({"x", "y"}, {{-2, 2}, {-2, 2}});
  Puzzle p(ConnectionForms(c, 1), b::coframe(c, {{"x", "y"}}));
  auto trace = leaf_flow(p, {1, 0}, Eigen::Vector2d(0, 1), 300, 0.01);
  for (const auto& q : trace.points) EXPECT_NEAR(q[0] * q[0] + q[1] * q[1], 1.0, 1e-9);
  EXPECT_LE(leaf_trace_defect(p, trace), 1e-4);
}

TEST(Solderint, ParallelFrameExamples) {
  auto f3 = leaf_flow(projection(), {0.5, -0.5, -1.5}, Eigen::Vector3d(0, 0, 1), 100, 0.02);
  std::vector<VectorField> z3{VectorField::coordinate(space(), 0), VectorField::coordinate(space(), 1)};
  EXPECT_EQ(parallel_frame_residual(projection(), f3, z3).max_abs, 0.0);

  auto f6 = leaf_flow(exponential(), {-1.5, 1}, Eigen::Vector2d(1, 0), 100, 0.02);
  std::vector<VectorField> z6{VectorField::coordinate(plane(), 1)};
  EXPECT_LE(parallel_frame_residual(exponential(), f6, z6).max_abs, 1e-12);

  auto bad = leaf_flow(exponential_flat(), {-1.5, 1}, Eigen::Vector2d(1, 0), 100, 0.02);
  auto r = parallel_frame_residual(exponential_flat(), bad, z6);
  for (std::size_t k = 0; k < bad.points.size(); ++k) EXPECT_NEAR(r.residual[k][0](0), std::exp(bad.points[k][0]), 1e-12);
}

TEST(Solderint, QuotientProjection) {
  auto q = b::chart({"xb", "yb"}, {{-2, 2}, {-2, 2}});
  ChartMap slice(q, space(), {q->coordinate(0), q->coordinate(1), Expr(0.0)});
  auto qp = build_quotient(projection(), SliceSpec{slice, {space()->parse("z")}});
  auto rq = qp.quotient();
  auto pts = sample_points(*q, 10, 3);
  EXPECT_EQ(rq.omega().max_abs(pts), 0.0);
  EXPECT_TRUE(rq.phi()[0].coefficient({0}).is_one());
  EXPECT_TRUE(rq.phi()[1].coefficient({1}).is_one());
  auto pr = qp.project({0.3, -0.4, 1.2});
  EXPECT_NEAR(pr.q[0], 0.3, 1e-12);
  EXPECT_NEAR(pr.q[1], -0.4, 1e-12);
  auto check = check_quotient(qp, 50, 1);
  EXPECT_LE(check.phi, 1e-7);
  EXPECT_LE(check.omega, 1e-7);
  EXPECT_LE(check.metric, 1e-7);
  EXPECT_LE(max_integrability_residual(rq), 1e-8);
}

TEST(Solderint, QuotientExponential) {
  auto q = b::chart({"yb"}, {{-2, 2}});
  ChartMap slice(q, plane(), {Expr(0.0), q->coordinate(0)});
  auto qp = build_quotient(exponential(), SliceSpec{slice, {plane()->parse("x")}});
  auto pr = qp.project({1.2, 0.7});
  EXPECT_NEAR(pr.q[0], 0.7, 1e-12);
  EXPECT_NEAR(pr.frame(0, 0), std::exp(1.2), 1e-9);
  auto check = check_quotient(qp, 50, 2);
  EXPECT_LE(check.phi, 1e-7);
  EXPECT_LE(check.omega, 1e-7);
  EXPECT_LE(check.metric, 1e-7);
  EXPECT_LE(max_integrability_residual(qp.quotient()), 1e-8);
}

TEST(Solderint, QuotientRejectsIsomorphismAndNonIntegrable) {
  auto q = b::chart({"u"}, {{-2, 2}});
  ChartMap slice(q, plane(), {Expr(0.0), q->coordinate(0)});
  Puzzle flat(ConnectionForms(plane(), 2), b::coframe(plane(), {{"1", "0"}, {"0", "1"}}));
  EXPECT_THROW(build_quotient(flat, SliceSpec{slice, {plane()->parse("x")}}), PreconditionError);
  EXPECT_THROW(build_quotient(exponential_flat(), SliceSpec{slice, {plane()->parse("x")}}), PreconditionError);
}

TEST(Solderint, QuotientCurvedLeaves) {
  // Non-trivial leaves: phi = e1 (dy - 2x dx) e^{...}; leaves are parabolas y = x^2 + c.
  auto c = b::chart({"x", "y"}, {{-1, 1}, {-2, 3}});
  Puzzle p(b::connection(c, 1, {{0, 0, {"-1", "0"}}}), b::coframe(c, {{"-2*x*exp(x)", "exp(x)"}}),
           FiberMetric(c, b::matrix(c, {{"exp(-2*x)"}})));
  ASSERT_LE(max_integrability_residual(p), 1e-13);
  auto q = b::chart({"u"}, {{-2, 3}});
  ChartMap slice(q, c, {Expr(0.0), q->coordinate(0)});
  auto qp = build_quotient(p, SliceSpec{slice, {c->parse("x")}});
  auto pr = qp.project({0.5, 1.0});
  EXPECT_NEAR(pr.q[0], 0.75, 1e-10);
  auto sub = b::chart({"x", "y"}, {{-0.6, 0.6}, {0.5, 1.5}});
  auto check = check_quotient(qp, sample_points(*sub, 20, 3));
  EXPECT_LE(check.phi, 1e-7);
  EXPECT_LE(check.omega, 1e-7);
  EXPECT_LE(check.metric, 1e-7);
}
