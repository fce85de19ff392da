#pragma once

// Field-equation residuals on 4-dimensional isomorphism puzzles, plus the
// Yang-Mills dual residual for any connection on a Riemannian chart.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "solderlab/puzzle.hpp"

namespace solderlab {

/// Levi-Civita sign of a permutation of 0..n-1 (0 when an index repeats).
int levi_civita(std::span<const std::size_t> indices);

struct PalatiniResidual {
  /// lambda_l = eps_{ijkl} Omega^{ij} ^ phi^k, summed over all i, j, k.
  std::vector<DifferentialForm> lambda;
  double max_abs = 0.0;
};

PalatiniResidual palatini_residual(const Puzzle& puzzle, std::size_t samples = 50, std::uint64_t seed = 1);

/// Nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(std::size_t n);

/// Tensor-product quadrature of eps_{ijkl} Omega^{ij} ^ phi^k ^ phi^l over
/// `box` with `nodes` points per axis.
double palatini_action(const Puzzle& puzzle, const std::vector<Interval>& box, std::size_t nodes = 8);

/// Exact-derivative curvature of a coordinate metric at one point.
struct CurvatureSample {
  Eigen::MatrixXd metric;
  Eigen::MatrixXd ricci;
  double scalar = 0.0;
  Eigen::MatrixXd einstein;
};

class MetricCurvature {
 public:
  explicit MetricCurvature(const ExprMatrix& metric);
  CurvatureSample at(std::span<const double> p) const;

 private:
  ExprMatrix metric_;
  std::vector<ExprMatrix> gamma_;
  std::vector<std::vector<ExprMatrix>> dgamma_;  // dgamma_[c][a](b, d) = d_c Gamma^a_{bd}
};

struct EinsteinResidual {
  std::vector<Point> points;
  /// R_ij - R g_ij / 2 of the induced metric, coordinate components.
  std::vector<Eigen::MatrixXd> tensors;
  double max_abs = 0.0;
};

/// Requires p = 1 and a metric; throws SingularError where the induced
/// metric degenerates.
EinsteinResidual einstein_residual(const Puzzle& puzzle, std::span<const Point> points);
EinsteinResidual einstein_residual(const Puzzle& puzzle, std::size_t samples = 50, std::uint64_t seed = 1);

/// d(*Omega) + omega ^ *Omega - (*Omega) ^ omega with the Hodge star of the
/// chart metric applied entrywise.
FormMatrix yang_mills_residual(const ConnectionForms& omega, const ExprMatrix& chart_metric);

}  // namespace solderlab
