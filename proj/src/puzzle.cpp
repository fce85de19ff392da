#include "solderlab/puzzle.hpp"

#include <algorithm>
#include <cmath>

#include "solderlab/errors.hpp"

namespace solderlab {

Puzzle::Puzzle(ConnectionForms omega, BundleValuedForm phi, std::optional<FiberMetric> metric,
               MetricCheck check)
    : omega_(std::move(omega)), phi_(std::move(phi)), metric_(std::move(metric)) {
  if (!(omega_.chart() == phi_.chart())) throw DimensionError("connection and solder form on different charts");
  if (omega_.rank() != phi_.rank()) throw DimensionError("connection rank differs from solder form rank");
  if (phi_.degree() == 0) throw DimensionError("solder form must have degree at least 1");
  if (phi_.degree() > dim()) throw DimensionError("solder form degree exceeds chart dimension");
  if (!metric_) return;
  if (!(metric_->chart() == chart())) throw DimensionError("fiber metric on a different chart");
  if (metric_->rank() != rank()) throw DimensionError("fiber metric rank differs from bundle rank");

  auto points = sample_points(chart(), 50, 0xC0FFEEULL);
  if (metric_->min_eigenvalue(points) <= 0.0) {
    throw PreconditionError("fiber metric is not positive definite at a sample point");
  }
  metric_defect_ = metric_compatibility_residual(omega_, *metric_).max_abs(points);
  if (check == MetricCheck::enforce && !metric_compatible()) {
    throw PreconditionError("connection does not respect the fiber metric (defect " +
                            std::to_string(metric_defect_) + ")");
  }
}

BundleValuedForm integrability_residual(const Puzzle& puzzle) {
  return covariant_exterior_derivative(puzzle.omega(), puzzle.phi());
}

double max_integrability_residual(const Puzzle& puzzle, std::size_t samples, std::uint64_t seed) {
  auto points = sample_points(puzzle.chart(), samples, seed);
  return integrability_residual(puzzle).max_abs(points);
}

bool is_integrable(const Puzzle& puzzle, double tol, std::size_t samples, std::uint64_t seed) {
  return max_integrability_residual(puzzle, samples, seed) <= tol;
}

std::string to_string(RankClass c) {
  switch (c) {
    case RankClass::isomorphism: return "isomorphism";
    case RankClass::injective: return "injective";
    case RankClass::surjective: return "surjective";
    case RankClass::constant_rank: return "constant-rank";
    case RankClass::variable: return "variable";
  }
  return "variable";
}

Eigen::MatrixXd solder_matrix(const Puzzle& puzzle, std::span<const double> p) {
  const std::size_t m = puzzle.dim();
  const std::size_t n = puzzle.rank();
  const std::size_t deg = puzzle.degree();
  const auto lower = multi_indices(m, deg - 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * lower.size()),
                                              static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [index, c] : puzzle.phi()[i].terms()) {
      double value = evaluate(c, p);
      if (value == 0.0) continue;
      for (std::size_t r = 0; r < index.size(); ++r) {
        MultiIndex rest = index;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(r));
        auto pos = static_cast<std::size_t>(std::lower_bound(lower.begin(), lower.end(), rest) - lower.begin());
        out(static_cast<Eigen::Index>(i * lower.size() + pos), static_cast<Eigen::Index>(index[r])) +=
            r % 2 == 0 ? value : -value;
      }
    }
  }
  return out;
}

std::size_t numerical_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = kRankThreshold * s(0);
  std::size_t r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > cut) ++r;
  }
  return r;
}

RankProfile rank_profile(const Puzzle& puzzle, std::span<const Point> points) {
  RankProfile out;
  for (const Point& p : points) out.ranks.push_back(numerical_rank(solder_matrix(puzzle, p)));
  if (out.ranks.empty()) return out;
  const std::size_t r = out.ranks.front();
  if (!std::all_of(out.ranks.begin(), out.ranks.end(), [r](std::size_t k) { return k == r; })) {
    return out;
  }
  const std::size_t m = puzzle.dim();
  const std::size_t n = puzzle.rank();
  out.rank = r;
  out.kernel_dim = m - r;
  if (puzzle.degree() == 1) {
    if (r == m && r == n) {
      out.classification = RankClass::isomorphism;
    } else if (r == m) {
      out.classification = RankClass::injective;
    } else if (r == n) {
      out.classification = RankClass::surjective;
    } else {
      out.classification = RankClass::constant_rank;
    }
  } else {
    out.classification = r == m ? RankClass::injective : RankClass::constant_rank;
  }
  return out;
}

ExprMatrix induced_metric(const Puzzle& puzzle) {
  if (puzzle.degree() != 1) throw PreconditionError("induced metric needs a solder 1-form");
  if (!puzzle.metric()) throw PreconditionError("induced metric needs a fiber metric");
  const std::size_t m = puzzle.dim();
  const std::size_t n = puzzle.rank();
  const FiberMetric& g = *puzzle.metric();
  ExprMatrix out(m, m);
  std::vector<std::vector<Expr>> phi(n);
  for (std::size_t i = 0; i < n; ++i) phi[i] = puzzle.phi()[i].one_form_coefficients();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      Expr acc;
      for (std::size_t i = 0; i < n; ++i) {
        if (phi[i][a].is_zero()) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (phi[j][b].is_zero() || g(i, j).is_zero()) continue;
          acc += g(i, j) * phi[i][a] * phi[j][b];
        }
      }
      out(a, b) = acc;
      out(b, a) = acc;
    }
  }
  return out;
}

Puzzle pullback_puzzle(const Puzzle& puzzle, const ChartMap& u) {
  if (!(*u.target() == puzzle.chart())) throw DimensionError("pullback map does not target the puzzle's chart");
  const std::size_t n = puzzle.rank();
  const ChartPtr& source = u.source();
  ConnectionForms omega(source, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) omega.set(i, j, pullback_form(u, puzzle.omega()(i, j)));
  }
  std::vector<DifferentialForm> phi;
  phi.reserve(n);
  for (std::size_t i = 0; i < n; ++i) phi.push_back(pullback_form(u, puzzle.phi()[i]));
  std::optional<FiberMetric> g;
  if (puzzle.metric()) {
    ExprMatrix gm(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) gm(i, j) = u.pull((*puzzle.metric())(i, j));
    }
    g.emplace(source, std::move(gm));
  }
  return Puzzle(std::move(omega), BundleValuedForm(std::move(phi)), std::move(g), MetricCheck::record);
}

std::vector<Eigen::VectorXd> kernel_distribution(const Puzzle& puzzle, std::span<const double> p) {
  Eigen::MatrixXd a = solder_matrix(puzzle, p);
  const auto m = static_cast<Eigen::Index>(puzzle.dim());
  // Pad to at least m rows so the full right singular basis is available.
  if (a.rows() < m) {
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(m, m);
    padded.topRows(a.rows()) = a;
    a = padded;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = s.size() > 0 ? kRankThreshold * s(0) : 0.0;
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index k = 0; k < m; ++k) {
    bool null = k >= s.size() || s(k) <= cut || s(0) == 0.0;
    if (null) basis.push_back(svd.matrixV().col(k));
  }
  return basis;
}

FrobeniusResult frobenius_residual(const Puzzle& puzzle, const VectorField& x, const VectorField& y,
                                   std::span<const Point> points) {
  const std::size_t n = puzzle.rank();
  VectorField bracket = lie_bracket(x, y);
  std::vector<DifferentialForm> contraction;
  std::vector<DifferentialForm> on_x;
  std::vector<DifferentialForm> on_y;
  for (std::size_t i = 0; i < n; ++i) {
    contraction.push_back(interior_product(bracket, puzzle.phi()[i]));
    on_x.push_back(interior_product(x, puzzle.phi()[i]));
    on_y.push_back(interior_product(y, puzzle.phi()[i]));
  }
  FrobeniusResult out{BundleValuedForm(std::move(contraction)), 0.0, 0.0};
  out.max_residual = out.contraction.max_abs(points);
  out.kernel_defect = std::max(BundleValuedForm(std::move(on_x)).max_abs(points),
                               BundleValuedForm(std::move(on_y)).max_abs(points));
  return out;
}

ConnectionForms torsion_free_connection(const BundleValuedForm& coframe, const FiberMetric& g,
                                        std::size_t samples, std::uint64_t seed) {
  const std::size_t n = coframe.rank();
  if (g.rank() != n) throw DimensionError("fiber metric rank differs from coframe rank");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Expr& e = g(i, j);
      if (!e.is_constant() || e.value() != (i == j ? 1.0 : 0.0)) {
        throw PreconditionError("torsion-free solver expects an orthonormal coframe (g = identity)");
      }
    }
  }
  return torsion_free_connection(coframe, samples, seed);
}

ConnectionForms torsion_free_connection(const BundleValuedForm& coframe, std::size_t samples,
                                        std::uint64_t seed) {
  const std::size_t n = coframe.rank();
  const std::size_t m = coframe.chart().dim();
  if (coframe.degree() != 1) throw DimensionError("coframe must consist of 1-forms");
  if (n != m) throw DimensionError("coframe must have as many forms as coordinates");

  ExprMatrix e(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = coframe[i].one_form_coefficients();
    for (std::size_t a = 0; a < m; ++a) e(i, a) = row[a];
  }
  for (const Point& p : sample_points(coframe.chart(), samples, seed)) {
    if (numerical_rank(e.evaluate(p)) < n) throw SingularError("coframe is singular at a sample point");
  }
  // Frame vectors e_j are the columns of E^{-1}.
  ExprMatrix frame = inverse(e);

  // t[i][j][k] = d phi^i (e_j, e_k)
  std::vector<std::vector<std::vector<Expr>>> t(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    DifferentialForm dphi = exterior_derivative(coframe[i]);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        Expr acc;
        for (const auto& [index, c] : dphi.terms()) {
          std::size_t a = index[0], b = index[1];
          Expr minor = frame(a, j) * frame(b, k) - frame(b, j) * frame(a, k);
          if (!minor.is_zero()) acc += c * minor;
        }
        t[i][j][k] = acc;
        t[i][k][j] = -acc;
      }
    }
  }

  ConnectionForms omega(coframe.chart_ptr(), n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      DifferentialForm w(coframe.chart_ptr(), 1);
      for (std::size_t k = 0; k < n; ++k) {
        Expr gamma = 0.5 * (t[i][j][k] + t[j][k][i] - t[k][i][j]);
        if (!gamma.is_zero()) w += gamma * coframe[k];
      }
      omega.set(j, i, -w);
      omega.set(i, j, std::move(w));
    }
  }
  return omega;
}

}  // namespace solderlab
