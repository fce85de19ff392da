#include <gtest/gtest.h>

#include <cmath>

#include "solderlab/errors.hpp"
#include "solderlab/palatini.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace solderlab;
namespace b = solderlab::build;

namespace {

Puzzle flat4() {
  auto c = b::chart({"x0", "x1", "x2", "x3"}, {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}});
  return Puzzle(ConnectionForms(c, 4),
                b::coframe(c, {{"1", "0", "0", "0"}, {"0", "1", "0", "0"}, {"0", "0", "1", "0"}, {"0", "0", "0", "1"}}),
                FiberMetric::identity(c, 4));
}

Puzzle from_coframe(const ChartPtr& c, const std::vector<std::vector<std::string>>& rows) {
  auto phi = b::coframe(c, rows);
  return Puzzle(torsion_free_connection(phi), phi, FiberMetric::identity(c, 4));
}

ChartPtr schwarzschild_chart() {
  return b::chart({"tau", "r", "th", "ph"}, {{0, 1}, {3, 4}, {0.5, 2.5}, {0, 1}});
}

// Euclidean Schwarzschild, M = 1.
Puzzle schwarzschild() {
  return from_coframe(schwarzschild_chart(), {{"sqrt(1-2/r)", "0", "0", "0"},
                                              {"0", "1/sqrt(1-2/r)", "0", "0"},
                                              {"0", "0", "r", "0"},
                                              {"0", "0", "0", "r*sin(th)"}});
}

ChartPtr s4_chart() { return b::chart({"c1", "c2", "c3", "c4"}, {{0.8, 2.2}, {0.8, 2.2}, {0.8, 2.2}, {0, 1}}); }

const std::vector<std::vector<std::string>> kS4 = {{"1", "0", "0", "0"},
                                                   {"0", "sin(c1)", "0", "0"},
                                                   {"0", "0", "sin(c1)*sin(c2)", "0"},
                                                   {"0", "0", "0", "sin(c1)*sin(c2)*sin(c3)"}};

Puzzle round_s4() { return from_coframe(s4_chart(), kS4); }

// For an orthonormal coframe E: lambda_l = 2 G_lm i_{e_m} vol, with G the
// oracle Einstein tensor in frame components.
Eigen::Vector4d expected_lambda_coefficient(const ExprMatrix& coframe, const Point& p, std::size_t l,
                                           const Eigen::MatrixXd& einstein) {
  Eigen::MatrixXd e = coframe.evaluate(p);
  Eigen::MatrixXd frame = e.inverse();  // columns e_m
  Eigen::MatrixXd g_frame = frame.transpose() * einstein * frame;
  double det = e.determinant();
  Eigen::Vector4d out;  // out[mu] = coefficient on the complement of mu
  for (int mu = 0; mu < 4; ++mu) {
    double s = 0.0;
    for (int m = 0; m < 4; ++m) s += g_frame(static_cast<Eigen::Index>(l), m) * frame(mu, m);
    out[mu] = 2.0 * s * (mu % 2 ? -1.0 : 1.0) * det;
  }
  return out;
}

MultiIndex complement(std::size_t mu) {
  MultiIndex out;
  for (std::size_t i = 0; i < 4; ++i)
    if (i != mu) out.push_back(i);
  return out;
}

double lambda_norm(const PalatiniResidual& r, const Point& p) {
  double s = 0.0;
  for (const auto& l : r.lambda) s += coefficient_vector(l, p).squaredNorm();
  return std::sqrt(s);
}

}  // namespace

TEST(Palatini, LeviCivitaSymbol) {
  std::size_t id[4] = {0, 1, 2, 3};
  std::size_t odd[4] = {1, 0, 2, 3};
  std::size_t rep[4] = {0, 0, 2, 3};
  std::size_t cyc[4] = {1, 2, 3, 0};
  EXPECT_EQ(levi_civita(id), 1);
  EXPECT_EQ(levi_civita(odd), -1);
  EXPECT_EQ(levi_civita(rep), 0);
  EXPECT_EQ(levi_civita(cyc), -1);
}

TEST(Palatini, FlatIsExactlyZero) {
  auto p = flat4();
  auto r = palatini_residual(p);
  EXPECT_EQ(r.max_abs, 0.0);
  for (const auto& l : r.lambda) EXPECT_EQ(l.degree(), 3u);
  EXPECT_EQ(einstein_residual(p).max_abs, 0.0);
  EXPECT_EQ(palatini_action(p, {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}), 0.0);
}

TEST(Palatini, SchwarzschildIsVacuum) {
  auto p = schwarzschild();
  ASSERT_LE(max_integrability_residual(p), 1e-10);
  EXPECT_LE(palatini_residual(p).max_abs, 1e-8);
  auto e = einstein_residual(p);
  EXPECT_LE(e.max_abs, 1e-8);
  auto metric = induced_metric(p);
  for (std::size_t i = 0; i < 5; ++i) {
    auto ref = oracle::curvature_of(metric, e.points[i]);
    EXPECT_LE(ref.einstein.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GT(ref.riemann[0][1].cwiseAbs().maxCoeff(), 1e-3);
  }
}

TEST(Palatini, RoundSphereEinsteinTensor) {
  auto p = round_s4();
  auto e = einstein_residual(p);
  auto metric = induced_metric(p);
  for (std::size_t i = 0; i < e.points.size(); ++i) {
    Eigen::MatrixXd g = metric.evaluate(e.points[i]);
    EXPECT_LE((e.tensors[i] + 3.0 * g).cwiseAbs().maxCoeff(), 1e-8);
    if (i < 5) {
      auto ref = oracle::curvature_of(metric, e.points[i]);
      EXPECT_NEAR(ref.scalar, 12.0, 1e-9);
      EXPECT_LE((e.tensors[i] - ref.einstein).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Palatini, RoundSphereLambdaMatchesContraction) {
  auto p = round_s4();
  auto r = palatini_residual(p);
  EXPECT_GT(r.max_abs, 1.0);
  auto coframe = b::matrix(s4_chart(), kS4);
  auto metric = induced_metric(p);
  for (const auto& pt : sample_points(*s4_chart(), 20, 3)) {
    auto ref = oracle::curvature_of(metric, pt);
    for (std::size_t l = 0; l < 4; ++l) {
      Eigen::Vector4d want = expected_lambda_coefficient(coframe, pt, l, ref.einstein);
      for (std::size_t mu = 0; mu < 4; ++mu) {
        EXPECT_NEAR(evaluate(r.lambda[l].coefficient(complement(mu)), pt), want[static_cast<Eigen::Index>(mu)], 1e-6);
      }
    }
  }
}

TEST(Palatini, EquivalenceWithEinstein) {
  for (const auto& p : {flat4(), schwarzschild(), round_s4()}) {
    bool lambda_zero = palatini_residual(p).max_abs <= 1e-8;
    bool einstein_zero = einstein_residual(p).max_abs <= 1e-6;
    EXPECT_EQ(lambda_zero, einstein_zero);
  }
}

TEST(Palatini, FrameCovariance) {
  // Constant rotation of the bundle frame: phi' = R phi, omega' = R omega R^T.
  auto p = round_s4();
  auto c = p.chart_ptr();
  Eigen::Matrix4d rot;
  double a = 0.4, bb = 1.1;
  rot << std::cos(a), -std::sin(a), 0, 0, std::sin(a), std::cos(a), 0, 0, 0, 0, std::cos(bb), -std::sin(bb), 0, 0,
      std::sin(bb), std::cos(bb);
  Eigen::Matrix4d reflect = Eigen::Matrix4d::Identity();
  reflect(3, 3) = -1;
  for (const Eigen::Matrix4d& q : {Eigen::Matrix4d(rot), Eigen::Matrix4d(rot * reflect)}) {
    BundleValuedForm phi(c, 4, 1);
    ConnectionForms omega(c, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      DifferentialForm f(c, 1);
      for (std::size_t k = 0; k < 4; ++k) f += Expr(q(i, k)) * p.phi()[k];
      phi.set(i, f);
      for (std::size_t j = 0; j < 4; ++j) {
        DifferentialForm w(c, 1);
        for (std::size_t k = 0; k < 4; ++k)
          for (std::size_t l = 0; l < 4; ++l) {
            double s = q(i, k) * q(j, l);
            if (s != 0.0 && !p.omega()(k, l).is_zero()) w += Expr(s) * p.omega()(k, l);
          }
        omega.set(i, j, w);
      }
    }
    Puzzle rotated(omega, phi, FiberMetric::identity(c, 4));
    auto r0 = palatini_residual(p);
    auto r1 = palatini_residual(rotated);
    for (const auto& pt : sample_points(*c, 10, 8)) {
      EXPECT_NEAR(lambda_norm(r0, pt), lambda_norm(r1, pt), 1e-10);
      for (std::size_t l = 0; l < 4; ++l) {
        Eigen::VectorXd want = Eigen::VectorXd::Zero(4);
        for (std::size_t m = 0; m < 4; ++m) want += q(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m)) * coefficient_vector(r0.lambda[m], pt);
        want *= q.determinant();
        EXPECT_LE((coefficient_vector(r1.lambda[l], pt) - want).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

TEST(Palatini, GaussLegendreExactness) {
  for (std::size_t n : {1u, 2u, 5u, 9u}) {
    auto q = gauss_legendre(n);
    for (int deg = 0; deg <= static_cast<int>(2 * n - 1); ++deg) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.nodes[i], deg);
      EXPECT_NEAR(s, deg % 2 ? 0.0 : 2.0 / (deg + 1), 1e-13) << n << " " << deg;
    }
  }
}

TEST(Palatini, ActionOnRoundSphere) {
  // The integrand is 2 R vol; k = 2 was read off the first oracle run.
  const double k = 2.0;
  auto p = round_s4();
  std::vector<Interval> box{{0.9, 2.1}, {0.9, 2.1}, {0.9, 2.1}, {0.0, 1.0}};
  double scalar = oracle::curvature_of(induced_metric(p), {1.3, 1.2, 1.7, 0.5}).scalar;
  auto i1 = [](double x) { return -std::cos(x); };
  auto i2 = [](double x) { return x / 2 - std::sin(2 * x) / 4; };
  auto i3 = [](double x) { return -std::cos(x) + std::pow(std::cos(x), 3) / 3; };
  double volume = (i3(2.1) - i3(0.9)) * (i2(2.1) - i2(0.9)) * (i1(2.1) - i1(0.9)) * 1.0;
  double action = palatini_action(p, box, 8);
  EXPECT_NEAR(action, k * scalar * volume, 1e-8);
  EXPECT_LE(std::abs(palatini_action(p, box, 16) - action), 1e-8);
}

TEST(Palatini, ActionScalesQuadratically) {
  auto p = round_s4();
  auto c = p.chart_ptr();
  BundleValuedForm scaled(c, 4, 1);
  for (std::size_t i = 0; i < 4; ++i) scaled.set(i, Expr(1.5) * p.phi()[i]);
  Puzzle q(p.omega(), scaled, FiberMetric::identity(c, 4));
  std::vector<Interval> box{{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}, {0.0, 1.0}};
  EXPECT_NEAR(palatini_action(q, box), 2.25 * palatini_action(p, box), 1e-10);
  auto sch = schwarzschild();
  std::vector<Interval> sbox{{0, 1}, {3, 4}, {0.5, 2.5}, {0, 1}};
  EXPECT_LE(std::abs(palatini_action(sch, sbox, 8) - palatini_action(sch, sbox, 16)), 1e-8);
  EXPECT_THROW(palatini_action(p, {{0.0, 2.0}, {1, 2}, {1, 2}, {0, 1}}), DomainError);
}

TEST(Palatini, Rejections) {
  auto c = b::chart({"x", "y"}, {{-1, 1}, {-1, 1}});
  Puzzle small(ConnectionForms(c, 2), b::coframe(c, {{"1", "0"}, {"0", "1"}}), FiberMetric::identity(c, 2));
  EXPECT_THROW(palatini_residual(small), DimensionError);
  auto f = flat4();
  Puzzle no_metric(f.omega(), f.phi());
  EXPECT_THROW(palatini_residual(no_metric), PreconditionError);
}

TEST(YangMills, FlatConnection) {
  auto c = b::chart({"x", "y", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}});
  auto r = yang_mills_residual(ConnectionForms(c, 2), ExprMatrix::identity(3));
  EXPECT_EQ(r.max_abs(sample_points(*c, 10, 1)), 0.0);
}

TEST(YangMills, MonopoleIsCoclosed) {
  auto c = b::chart({"r", "th", "ph"}, {{1, 2}, {0.5, 2.5}, {0, 6}});
  auto w = b::connection(c, 1, {{0, 0, {"0", "0", "-0.7*cos(th)"}}});
  auto g = b::matrix(c, {{"1", "0", "0"}, {"0", "r^2", "0"}, {"0", "0", "r^2*sin(th)^2"}});
  auto big = curvature(w);
  auto pts = sample_points(*c, 20, 2);
  for (const auto& p : pts) EXPECT_NEAR(evaluate(big(0, 0).coefficient({1, 2}), p), 0.7 * std::sin(p[1]), 1e-14);
  auto star = hodge_star(g, big(0, 0));
  for (const auto& p : pts) EXPECT_NEAR(evaluate(star.coefficient({0}), p), 0.7 / (p[0] * p[0]), 1e-12);
  EXPECT_LE(yang_mills_residual(w, g).max_abs(pts), 1e-12);
}

TEST(YangMills, PlaneExample) {
  auto c = b::chart({"x", "y"}, {{-1, 1}, {-1, 1}});
  auto w = b::connection(c, 1, {{0, 0, {"0", "x^2/2"}}});
  auto r = yang_mills_residual(w, ExprMatrix::identity(2));
  for (const auto& p : sample_points(*c, 10, 1)) {
    EXPECT_NEAR(evaluate(r(0, 0).coefficient({0}), p), 1.0, 1e-14);
    EXPECT_EQ(evaluate(r(0, 0).coefficient({1}), p), 0.0);
  }
}
