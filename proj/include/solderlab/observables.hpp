#pragma once

// Observables of a puzzle: sections f of the dual bundle with d(f, phi) = 0.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "solderlab/puzzle.hpp"

namespace solderlab {

/// Components f_i against the dual frame; (f, phi) = f_i phi^i.
struct DualSection {
  ChartPtr chart;
  std::vector<Expr> f;
};

/// d(f_i phi^i), exact.
DifferentialForm observable_residual(const Puzzle& puzzle, const DualSection& f);

/// (nabla f)_i = df_i - f_j omega^j_i.
std::vector<DifferentialForm> dual_covariant_derivative(const Puzzle& puzzle, const DualSection& f);

/// Unique f with d alpha = (f, phi); needs p = 1 and m = n. Throws
/// SingularError when phi degenerates at a sample point.
DualSection reconstruct_observable(const Puzzle& puzzle, const Expr& alpha);

struct CartanTable {
  /// (nabla f)_i = h(i, k) phi^k
  ExprMatrix h;
  /// max |h_ik - h_ki| over the samples.
  double asymmetry = 0.0;
};

CartanTable cartan_coefficients(const Puzzle& puzzle, const DualSection& f, std::size_t samples = 50,
                                std::uint64_t seed = 1);

enum class Solvability { unique, affine, unsolvable };

std::string to_string(Solvability s);

struct LeafWitness {
  Point point;
  Eigen::VectorXd direction;  // unit kernel vector with d alpha(direction) > 0
  double value = 0.0;         // d alpha(direction)
};

struct SolvabilityReport {
  Solvability kind = Solvability::unsolvable;
  RankClass rank_class = RankClass::variable;
  /// Solution components: in the fixed frame for unique/surjective cases,
  /// in the adapted frame for the injective representative.
  std::optional<DualSection> f;
  /// Injective case: the same representative in the fixed frame.
  std::optional<DualSection> f_fixed;
  /// Dimension of the affine family of further solutions (n - m when injective).
  std::size_t annihilator_dim = 0;
  std::optional<LeafWitness> witness;
};

/// Needs p = 1 and an isomorphism, injective or surjective rank profile.
SolvabilityReport classify_solvability(const Puzzle& puzzle, const Expr& alpha, std::size_t samples = 50,
                                       std::uint64_t seed = 1, double tol = 1e-8);

}  // namespace solderlab
