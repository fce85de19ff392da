#include "solderlab/palatini.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "solderlab/embed.hpp"
#include "solderlab/errors.hpp"

namespace solderlab {

int levi_civita(std::span<const std::size_t> indices) {
  int sign = 1;
  for (std::size_t i = 0; i < indices.size(); ++i)
    for (std::size_t j = i + 1; j < indices.size(); ++j) {
      if (indices[i] == indices[j]) return 0;
      if (indices[i] > indices[j]) sign = -sign;
    }
  return sign;
}

namespace {

void require_four(const Puzzle& puzzle) {
  if (puzzle.dim() != 4 || puzzle.rank() != 4 || puzzle.degree() != 1) {
    throw DimensionError("the Palatini system needs m = n = 4 and a solder 1-form");
  }
  if (!puzzle.metric()) throw PreconditionError("the Palatini system needs a fiber metric");
}

std::vector<DifferentialForm> lambda_forms(const Puzzle& puzzle) {
  require_four(puzzle);
  const ChartPtr& chart = puzzle.chart_ptr();
  CurvatureForms omega = curvature(puzzle.omega());
  ExprMatrix ginv = inverse(puzzle.metric()->matrix());
  // Omega^{ij} = Omega^i_k g^{kj}
  std::vector<DifferentialForm> raised;
  raised.reserve(16);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      DifferentialForm acc(chart, 2);
      for (std::size_t k = 0; k < 4; ++k) {
        if (!ginv(k, j).is_zero() && !omega(i, k).is_zero()) acc += ginv(k, j) * omega(i, k);
      }
      raised.push_back(std::move(acc));
    }
  std::vector<DifferentialForm> lambda(4, DifferentialForm(chart, 3));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const DifferentialForm& o = raised[i * 4 + j];
      if (o.is_zero()) continue;
      for (std::size_t k = 0; k < 4; ++k) {
        if (puzzle.phi()[k].is_zero()) continue;
        DifferentialForm w = wedge(o, puzzle.phi()[k]);
        for (std::size_t l = 0; l < 4; ++l) {
          std::size_t idx[4] = {i, j, k, l};
          int s = levi_civita(idx);
          if (s > 0) lambda[l] += w;
          if (s < 0) lambda[l] -= w;
        }
      }
    }
  return lambda;
}

}  // namespace

PalatiniResidual palatini_residual(const Puzzle& puzzle, std::size_t samples, std::uint64_t seed) {
  PalatiniResidual out{lambda_forms(puzzle), 0.0};
  auto points = sample_points(puzzle.chart(), samples, seed);
  for (const auto& l : out.lambda) out.max_abs = std::max(out.max_abs, max_abs_coefficient(l, points));
  return out;
}

GaussLegendre gauss_legendre(std::size_t n) {
  if (n == 0) throw PreconditionError("quadrature needs at least one node");
  GaussLegendre q{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    q.nodes[i] = x;
    q.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

double palatini_action(const Puzzle& puzzle, const std::vector<Interval>& box, std::size_t nodes) {
  auto lambda = lambda_forms(puzzle);
  if (box.size() != 4) throw DimensionError("integration box needs four intervals");
  const Chart& chart = puzzle.chart();
  for (std::size_t a = 0; a < 4; ++a) {
    if (box[a].lo < chart.box()[a].lo || box[a].hi > chart.box()[a].hi || box[a].lo > box[a].hi) {
      throw DomainError("integration box leaves the chart domain");
    }
  }
  DifferentialForm top(puzzle.chart_ptr(), 4);
  for (std::size_t l = 0; l < 4; ++l) top += wedge(lambda[l], puzzle.phi()[l]);
  Expr f = top.coefficient({0, 1, 2, 3});
  if (f.is_zero()) return 0.0;
  GaussLegendre q = gauss_legendre(nodes);
  double total = 0.0;
  Point p(4);
  std::vector<std::size_t> idx(4, 0);
  double jac = 1.0;
  for (const auto& iv : box) jac *= 0.5 * (iv.hi - iv.lo);
  for (;;) {
    double w = 1.0;
    for (std::size_t a = 0; a < 4; ++a) {
      p[a] = 0.5 * (box[a].lo + box[a].hi) + 0.5 * (box[a].hi - box[a].lo) * q.nodes[idx[a]];
      w *= q.weights[idx[a]];
    }
    total += w * evaluate(f, p);
    std::size_t a = 0;
    while (a < 4 && ++idx[a] == nodes) idx[a++] = 0;
    if (a == 4) break;
  }
  return jac * total;
}

MetricCurvature::MetricCurvature(const ExprMatrix& metric) : metric_(metric), gamma_(christoffel_symbols(metric)) {
  const std::size_t n = metric.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<ExprMatrix> dc;
    for (std::size_t a = 0; a < n; ++a) dc.push_back(differentiate(gamma_[a], c));
    dgamma_.push_back(std::move(dc));
  }
}

CurvatureSample MetricCurvature::at(std::span<const double> p) const {
  const std::size_t n = metric_.rows();
  const auto N = static_cast<Eigen::Index>(n);
  CurvatureSample out;
  out.metric = metric_.evaluate(p);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(out.metric);
  if (!lu.isInvertible()) throw SingularError("metric is singular at a sample point");
  std::vector<Eigen::MatrixXd> g(n);
  for (std::size_t a = 0; a < n; ++a) g[a] = gamma_[a].evaluate(p);
  std::vector<std::vector<Eigen::MatrixXd>> dg(n, std::vector<Eigen::MatrixXd>(n));
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t a = 0; a < n; ++a) dg[c][a] = dgamma_[c][a].evaluate(p);
  // R_{bd} = R^a_{bad} = d_a G^a_{db} - d_d G^a_{ab} + G^a_{ae} G^e_{db} - G^a_{de} G^e_{ab}
  out.ricci = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t bb = 0; bb < n; ++bb)
    for (std::size_t d = 0; d < n; ++d) {
      double s = 0.0;
      const auto B = static_cast<Eigen::Index>(bb);
      const auto D = static_cast<Eigen::Index>(d);
      for (std::size_t a = 0; a < n; ++a) {
        const auto A = static_cast<Eigen::Index>(a);
        s += dg[a][a](D, B) - dg[d][a](A, B);
        for (std::size_t e = 0; e < n; ++e) {
          const auto E = static_cast<Eigen::Index>(e);
          s += g[a](A, E) * g[e](D, B) - g[a](D, E) * g[e](A, B);
        }
      }
      out.ricci(B, D) = s;
    }
  out.scalar = (lu.inverse() * out.ricci).trace();
  out.einstein = out.ricci - 0.5 * out.scalar * out.metric;
  return out;
}

EinsteinResidual einstein_residual(const Puzzle& puzzle, std::span<const Point> points) {
  if (puzzle.degree() != 1) throw PreconditionError("the Einstein residual needs a solder 1-form");
  if (!puzzle.metric()) throw PreconditionError("the Einstein residual needs a fiber metric");
  MetricCurvature curv(induced_metric(puzzle));
  EinsteinResidual out;
  for (const Point& p : points) {
    CurvatureSample s = curv.at(p);
    out.max_abs = std::max(out.max_abs, s.einstein.cwiseAbs().maxCoeff());
    out.points.push_back(p);
    out.tensors.push_back(std::move(s.einstein));
  }
  return out;
}

EinsteinResidual einstein_residual(const Puzzle& puzzle, std::size_t samples, std::uint64_t seed) {
  auto points = sample_points(puzzle.chart(), samples, seed);
  return einstein_residual(puzzle, points);
}

FormMatrix yang_mills_residual(const ConnectionForms& omega, const ExprMatrix& chart_metric) {
  const std::size_t n = omega.rank();
  const std::size_t m = omega.chart().dim();
  if (m < 2) throw DimensionError("the Yang-Mills residual needs a chart of dimension at least 2");
  if (chart_metric.rows() != m || chart_metric.cols() != m) throw DimensionError("chart metric size mismatch");
  CurvatureForms big_omega = curvature(omega);
  FormMatrix star(omega.chart_ptr(), n, m - 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) star.set(i, j, hodge_star(chart_metric, big_omega(i, j)));
  return covariant_derivative_endomorphism(omega, star);
}

}  // namespace solderlab
