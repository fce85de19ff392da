#include "solderlab/observables.hpp"

#include <algorithm>
#include <cmath>

#include "solderlab/embed.hpp"
#include "solderlab/errors.hpp"

namespace solderlab {

namespace {

void require_section(const Puzzle& puzzle, const DualSection& f) {
  if (f.f.size() != puzzle.rank()) throw DimensionError("dual section needs one component per bundle index");
}

// E(i, a) = phi^i(d/dx^a)
ExprMatrix solder_exprs(const Puzzle& puzzle) {
  ExprMatrix e(puzzle.rank(), puzzle.dim());
  for (std::size_t i = 0; i < puzzle.rank(); ++i) {
    auto row = puzzle.phi()[i].one_form_coefficients();
    for (std::size_t a = 0; a < puzzle.dim(); ++a) e(i, a) = row[a];
  }
  return e;
}

std::vector<Expr> gradient(const Expr& alpha, std::size_t m) {
  std::vector<Expr> out;
  for (std::size_t a = 0; a < m; ++a) out.push_back(differentiate(alpha, a));
  return out;
}

void require_one_form(const Puzzle& puzzle) {
  if (puzzle.degree() != 1) throw PreconditionError("only solder 1-forms have a reconstruction procedure");
}

void check_invertible(const Expr& det, const Chart& chart) {
  for (const Point& p : sample_points(chart, 50, 1)) {
    if (std::abs(evaluate(det, p)) < 1e-12) throw SingularError("solder form degenerates at a sample point");
  }
}

}  // namespace

DifferentialForm observable_residual(const Puzzle& puzzle, const DualSection& f) {
  require_section(puzzle, f);
  DifferentialForm pairing(puzzle.chart_ptr(), puzzle.degree());
  for (std::size_t i = 0; i < puzzle.rank(); ++i) {
    if (!f.f[i].is_zero() && !puzzle.phi()[i].is_zero()) pairing += f.f[i] * puzzle.phi()[i];
  }
  return exterior_derivative(pairing);
}

std::vector<DifferentialForm> dual_covariant_derivative(const Puzzle& puzzle, const DualSection& f) {
  require_section(puzzle, f);
  std::vector<DifferentialForm> out;
  for (std::size_t i = 0; i < puzzle.rank(); ++i) {
    DifferentialForm acc = exterior_derivative(DifferentialForm::function(puzzle.chart_ptr(), f.f[i]));
    for (std::size_t j = 0; j < puzzle.rank(); ++j) {
      if (!f.f[j].is_zero() && !puzzle.omega()(j, i).is_zero()) acc -= f.f[j] * puzzle.omega()(j, i);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

DualSection reconstruct_observable(const Puzzle& puzzle, const Expr& alpha) {
  require_one_form(puzzle);
  if (puzzle.dim() != puzzle.rank()) throw PreconditionError("reconstruction needs m = n");
  ExprMatrix e = solder_exprs(puzzle);
  check_invertible(determinant(e), puzzle.chart());
  ExprMatrix inv = inverse(e);
  auto grad = gradient(alpha, puzzle.dim());
  // d alpha = f_i phi^i  <=>  grad = E^T f  <=>  f = E^{-T} grad
  DualSection out{puzzle.chart_ptr(), std::vector<Expr>(puzzle.rank())};
  for (std::size_t i = 0; i < puzzle.rank(); ++i)
    for (std::size_t a = 0; a < puzzle.dim(); ++a) {
      if (!inv(a, i).is_zero() && !grad[a].is_zero()) out.f[i] += inv(a, i) * grad[a];
    }
  return out;
}

CartanTable cartan_coefficients(const Puzzle& puzzle, const DualSection& f, std::size_t samples,
                                std::uint64_t seed) {
  require_one_form(puzzle);
  if (puzzle.dim() != puzzle.rank()) throw PreconditionError("Cartan coefficients need m = n");
  ExprMatrix e = solder_exprs(puzzle);
  check_invertible(determinant(e), puzzle.chart());
  ExprMatrix inv = inverse(e);
  auto nabla = dual_covariant_derivative(puzzle, f);
  const std::size_t n = puzzle.rank();
  ExprMatrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = nabla[i].one_form_coefficients();
    for (std::size_t a = 0; a < n; ++a) c(i, a) = row[a];
  }
  // C = h E  =>  h = C E^{-1}
  CartanTable out{c * inv, 0.0};
  for (const Point& p : sample_points(puzzle.chart(), samples, seed)) {
    Eigen::MatrixXd h = out.h.evaluate(p);
    out.asymmetry = std::max(out.asymmetry, (h - h.transpose()).cwiseAbs().maxCoeff());
  }
  return out;
}

std::string to_string(Solvability s) {
  switch (s) {
    case Solvability::unique:
      return "unique";
    case Solvability::affine:
      return "affine";
    case Solvability::unsolvable:
      return "unsolvable";
  }
  return "";
}

SolvabilityReport classify_solvability(const Puzzle& puzzle, const Expr& alpha, std::size_t samples,
                                       std::uint64_t seed, double tol) {
  require_one_form(puzzle);
  const std::size_t m = puzzle.dim();
  const std::size_t n = puzzle.rank();
  auto points = sample_points(puzzle.chart(), samples, seed);
  RankProfile profile = rank_profile(puzzle, points);
  SolvabilityReport out;
  out.rank_class = profile.classification;
  auto grad = gradient(alpha, m);

  switch (profile.classification) {
    case RankClass::isomorphism:
      out.kind = Solvability::unique;
      out.f = reconstruct_observable(puzzle, alpha);
      return out;

    case RankClass::injective: {
      // In an adapted frame phi~ = (dx^a, 0), so f~ = (d_a alpha, 0) is one
      // solution; any section of the annihilator of the tangent part can be added.
      Puzzle riemannian = puzzle.metric()
                              ? puzzle
                              : Puzzle(puzzle.omega(), puzzle.phi(), FiberMetric::identity(puzzle.chart_ptr(), n),
                                       MetricCheck::record);
      AdaptedFrame frame = adapted_frame(riemannian, {}, samples, seed);
      DualSection adapted{puzzle.chart_ptr(), std::vector<Expr>(n)};
      for (std::size_t a = 0; a < m; ++a) adapted.f[a] = grad[a];
      DualSection fixed{puzzle.chart_ptr(), std::vector<Expr>(n)};
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < m; ++a) {
          if (!grad[a].is_zero() && !frame.P_inverse(a, i).is_zero()) fixed.f[i] += grad[a] * frame.P_inverse(a, i);
        }
      out.kind = Solvability::affine;
      out.f = std::move(adapted);
      out.f_fixed = std::move(fixed);
      out.annihilator_dim = n - m;
      return out;
    }

    case RankClass::surjective: {
      for (const Point& p : points) {
        Eigen::VectorXd g(static_cast<Eigen::Index>(m));
        for (std::size_t a = 0; a < m; ++a) g[static_cast<Eigen::Index>(a)] = evaluate(grad[a], p);
        const double scale = std::max(1.0, g.norm());
        for (const auto& xi : kernel_distribution(puzzle, p)) {
          double v = g.dot(xi);
          if (std::abs(v) > tol * scale) {
            out.kind = Solvability::unsolvable;
            out.witness = LeafWitness{p, v > 0 ? xi : Eigen::VectorXd(-xi), std::abs(v)};
            return out;
          }
        }
      }
      // grad = E^T f with E of full row rank: f = (E E^T)^{-1} E grad.
      ExprMatrix e = solder_exprs(puzzle);
      ExprMatrix inv = inverse(e * e.transpose());
      std::vector<Expr> eg(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < m; ++a) {
          if (!e(i, a).is_zero() && !grad[a].is_zero()) eg[i] += e(i, a) * grad[a];
        }
      DualSection f{puzzle.chart_ptr(), std::vector<Expr>(n)};
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (!inv(i, j).is_zero() && !eg[j].is_zero()) f.f[i] += inv(i, j) * eg[j];
        }
      out.kind = Solvability::unique;
      out.f = std::move(f);
      return out;
    }

    default:
      throw PreconditionError("solvability is classified only for isomorphism, injective or surjective puzzles (got " +
                              to_string(profile.classification) + ")");
  }
}

}  // namespace solderlab
