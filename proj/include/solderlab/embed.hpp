#pragma once

// Injective Riemannian puzzles: adapted frames, second fundamental form h,
// normal connection A, the ambient metric G on the normal bundle, its
// Levi-Civita forms and the pull-back verification.
//
// Indices: tangential a, b in [0, m), normal mu, nu in [0, k) with k = n - m;
// bundle index of normal mu is m + mu.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "solderlab/puzzle.hpp"

namespace solderlab {

struct AdaptedFrame {
  /// Columns e_a = phi(d/dx^a), then g-orthonormal normals (fixed frame).
  ExprMatrix P;
  ExprMatrix P_inverse;
  /// omega~ = P^{-1} dP + P^{-1} omega P
  ConnectionForms omega;
  /// g~ = P^T g P (tangential block is the induced metric, normal block delta).
  ExprMatrix metric;
  /// phi~ = P^{-1} phi (= (dx^a, 0) up to rounding).
  BundleValuedForm phi;
  std::size_t m = 0;
  std::size_t n = 0;
};

/// Builds the adapted frame. Normals come from Gram-Schmidt (against the
/// tangent span, then each other) of the candidate vectors in order;
/// candidates that are numerically dependent at the chart centre are
/// skipped. The default candidates are the fixed frame vectors e_1..e_n.
AdaptedFrame adapted_frame(const Puzzle& puzzle, const std::vector<std::vector<Expr>>& completion = {},
                           std::size_t samples = 50, std::uint64_t seed = 1);

/// h[mu](a, b) = h_{mu a b}, defined by omega~^{m+mu}_a = h_{mu a b} phi~^b.
std::vector<ExprMatrix> extract_h(const AdaptedFrame& frame);

/// A[a](mu, nu) = A^mu_{a nu} = omega~^{m+mu}_{m+nu}(d/dx^a).
std::vector<ExprMatrix> extract_A(const AdaptedFrame& frame);

/// S[b](mu, nu) = S^b_{mu nu}; all zero by default.
std::vector<ExprMatrix> zero_S(std::size_t m, std::size_t k);

/// max |h_{mu a b} - h_{mu b a}| over samples.
double h_symmetry_defect(const std::vector<ExprMatrix>& h, std::span<const Point> points);
/// max |A^mu_{a nu} + A^nu_{a mu}| over samples.
double A_antisymmetry_defect(const std::vector<ExprMatrix>& a, std::span<const Point> points);

struct SplitResidual {
  double tangential = 0.0;  // d phi~^a + omega~^a_b ^ phi~^b
  double normal = 0.0;      // omega~^mu_b ^ phi~^b
};

SplitResidual split_residual(const AdaptedFrame& frame, std::span<const Point> points);

struct AmbientMetric {
  /// Chart (x^1..x^m, t^1..t^k); t-box is [-radius, radius].
  ChartPtr chart;
  ExprMatrix G;
  /// Largest tested |t| bound with G positive definite at every sample.
  double positivity_radius = 0.0;
};

/// G_ab = g_ab - 2 t^mu h_{mu ab}, G_{mu nu} = delta, G_{a mu} = t^nu (A^mu_{a nu} + g_ab S^b_{mu nu}).
/// `g_tangential` is the m x m induced metric. Throws PreconditionError if
/// S is not symmetric in (mu, nu).
AmbientMetric build_ambient_metric(const ChartPtr& base, const ExprMatrix& g_tangential,
                                   const std::vector<ExprMatrix>& h, const std::vector<ExprMatrix>& A,
                                   const std::vector<ExprMatrix>& S, std::size_t samples = 200,
                                   std::uint64_t seed = 1);

/// Gamma[i](j, k) = Gamma^i_{jk} by exact differentiation.
std::vector<ExprMatrix> christoffel_symbols(const ExprMatrix& metric);

/// varpi^i_j = Gamma^i_{kj} dx^k in the coordinate frame of `chart`.
ConnectionForms levi_civita_forms(const ChartPtr& chart, const ExprMatrix& metric);

struct EmbeddingReport {
  /// max |iota* varpi - omega~| on x-directions at t = 0.
  double pullback = 0.0;
  /// max error of the dt-coefficients of varpi at t = 0 against the blocks
  /// (-g^{ac} h_{mu bc}, S^a_{mu nu}, A^mu_{a nu}, 0).
  double first_order = 0.0;
  std::size_t samples = 0;
};

EmbeddingReport verify_embedding(const AdaptedFrame& frame, const std::vector<ExprMatrix>& h,
                                 const std::vector<ExprMatrix>& A, const std::vector<ExprMatrix>& S,
                                 const AmbientMetric& G, const ConnectionForms& varpi, std::span<const Point> points);

}  // namespace solderlab
