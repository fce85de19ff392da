#pragma once

// (p-1)-puzzles: chart, bundle rank, connection, solder p-form and an
// optional compatible fiber metric.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "solderlab/bundle.hpp"

namespace solderlab {

enum class MetricCheck {
  /// Throw PreconditionError when the metric is not compatible.
  enforce,
  /// Record the defect and continue (see Puzzle::metric_compatible()).
  record,
};

class Puzzle {
 public:
  Puzzle(ConnectionForms omega, BundleValuedForm phi, std::optional<FiberMetric> metric = std::nullopt,
         MetricCheck check = MetricCheck::enforce);

  const Chart& chart() const noexcept { return omega_.chart(); }
  const ChartPtr& chart_ptr() const noexcept { return omega_.chart_ptr(); }
  std::size_t dim() const noexcept { return chart().dim(); }
  std::size_t rank() const noexcept { return omega_.rank(); }
  std::size_t degree() const noexcept { return phi_.degree(); }

  const ConnectionForms& omega() const noexcept { return omega_; }
  const BundleValuedForm& phi() const noexcept { return phi_; }
  const std::optional<FiberMetric>& metric() const noexcept { return metric_; }

  /// Max |dg - g omega - omega^T g| over 50 samples; 0 without a metric.
  double metric_defect() const noexcept { return metric_defect_; }
  bool metric_compatible() const noexcept { return metric_defect_ <= kMetricTolerance; }

  static constexpr double kMetricTolerance = 1e-10;

 private:
  ConnectionForms omega_;
  BundleValuedForm phi_;
  std::optional<FiberMetric> metric_;
  double metric_defect_ = 0.0;
};

/// d^nabla phi.
BundleValuedForm integrability_residual(const Puzzle& puzzle);

/// Max |coefficient of d^nabla phi| over `samples` seeded sample points.
double max_integrability_residual(const Puzzle& puzzle, std::size_t samples = 50, std::uint64_t seed = 1);

bool is_integrable(const Puzzle& puzzle, double tol = 1e-8, std::size_t samples = 50, std::uint64_t seed = 1);

enum class RankClass { isomorphism, injective, surjective, constant_rank, variable };

std::string to_string(RankClass c);

struct RankProfile {
  std::vector<std::size_t> ranks;
  RankClass classification = RankClass::variable;
  /// Common rank (meaningless when variable).
  std::size_t rank = 0;
  /// dim - rank (meaningless when variable).
  std::size_t kernel_dim = 0;
};

/// Relative singular value threshold used for every numerical rank.
inline constexpr double kRankThreshold = 1e-9;

/// Pointwise matrix of phi: for p = 1 the n x m matrix phi^i(d/dx^a); for
/// p >= 2 the matrix of xi -> xi _| phi with one row per (i, multi-index of
/// degree p-1) and one column per coordinate direction.
Eigen::MatrixXd solder_matrix(const Puzzle& puzzle, std::span<const double> p);

std::size_t numerical_rank(const Eigen::MatrixXd& m);

RankProfile rank_profile(const Puzzle& puzzle, std::span<const Point> points);

/// (phi*g)_ab = g_ij phi^i_a phi^j_b.
ExprMatrix induced_metric(const Puzzle& puzzle);

/// (M, u*V, u*nabla, u*phi) with the metric composed with u.
Puzzle pullback_puzzle(const Puzzle& puzzle, const ChartMap& u);

/// Orthonormal basis of K_p, the null space of solder_matrix at p.
std::vector<Eigen::VectorXd> kernel_distribution(const Puzzle& puzzle, std::span<const double> p);

struct FrobeniusResult {
  /// [X, Y] _| phi as a bundle-valued (p-1)-form.
  BundleValuedForm contraction;
  double max_residual = 0.0;
  /// Largest |X _| phi| or |Y _| phi| seen; non-zero means the fields are
  /// not kernel fields and the residual proves nothing.
  double kernel_defect = 0.0;
};

FrobeniusResult frobenius_residual(const Puzzle& puzzle, const VectorField& x, const VectorField& y,
                                   std::span<const Point> points);

/// The torsion-free, metric-compatible connection of an orthonormal coframe
/// (n = m, fiber metric identity). Closed-form: structure coefficients come
/// from the exact inverse of the coframe matrix.
/// Throws SingularError if the coframe degenerates at a sample point and
/// PreconditionError unless `g` is the constant identity.
ConnectionForms torsion_free_connection(const BundleValuedForm& coframe, const FiberMetric& g,
                                        std::size_t samples = 50, std::uint64_t seed = 1);
ConnectionForms torsion_free_connection(const BundleValuedForm& coframe, std::size_t samples = 50,
                                        std::uint64_t seed = 1);

}  // namespace solderlab
