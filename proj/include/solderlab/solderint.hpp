#pragma once

// Two-parameter identities, the homogeneous transport system along surface
// families, leaf flows of the kernel distribution, and the quotient puzzle.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "solderlab/puzzle.hpp"

namespace solderlab {

/// gamma(t, s) into the puzzle chart; parameters live on [-1, 1]^2 unless a
/// different source chart is supplied.
class SurfaceFamily {
 public:
  SurfaceFamily(ChartPtr target, std::vector<Expr> components_in_ts);
  explicit SurfaceFamily(ChartMap map);

  /// Source chart (t, s) on [-1, 1]^2.
  static ChartPtr parameter_chart();

  const ChartMap& map() const noexcept { return map_; }
  const Chart& target() const noexcept { return *map_.target(); }

  /// Largest distance by which sampled images leave the target box.
  double domain_excursion(std::size_t samples = 200, std::uint64_t seed = 1) const;
  /// Smallest second singular value of the Jacobian over samples (> 0 for
  /// an immersion).
  double immersion_margin(std::size_t samples = 200, std::uint64_t seed = 1) const;

 private:
  ChartMap map_;
};

struct IdentityResidual {
  std::vector<Point> nodes;                // (t, s)
  std::vector<Eigen::VectorXd> lhs;        // d_t(phi(g_s)) + omega(g_t) phi(g_s)
  std::vector<Eigen::VectorXd> rhs;        // d_s(phi(g_t)) + omega(g_s) phi(g_t)
  std::vector<Eigen::VectorXd> residual;   // lhs - rhs = (d^nabla phi)(g_t, g_s)
  double max_abs = 0.0;
};

/// Both sides of the surface identity evaluated by exact differentiation of
/// the pulled-back data at the given (t, s) nodes.
IdentityResidual identity_residual(const Puzzle& puzzle, const SurfaceFamily& gamma, std::span<const Point> nodes);

/// Uniform (n+1) x (n+1) grid of (t, s) nodes on [-1, 1]^2.
std::vector<Point> parameter_grid(std::size_t n);

struct TransportTable {
  std::vector<double> t;
  std::vector<double> s;
  /// f[i][k] is the solution at (t[i], s[k]).
  std::vector<std::vector<Eigen::VectorXd>> f;
  double step = 0.0;

  double max_abs() const;
};

/// Row of initial data f(t, 0); default is phi(d gamma / dt) at s = 0.
using InitialRow = std::function<Eigen::VectorXd(double t)>;

/// RK4 in s for d_s f = -omega(d gamma/ds) f from s = 0 towards s = -1 and
/// s = +1 with `s_steps` steps per unit of s, at t_nodes + 1 values of t.
TransportTable integrate_transport_system(const Puzzle& puzzle, const SurfaceFamily& gamma, std::size_t t_nodes,
                                          std::size_t s_steps, const InitialRow& initial = {});

/// phi^i(d gamma/dt) evaluated directly on the table's nodes.
TransportTable direct_table(const Puzzle& puzzle, const SurfaceFamily& gamma, const TransportTable& like);

struct LeafTrace {
  Point seed;
  std::vector<Point> points;
  /// Unit kernel velocity at each point (orientation continuous along the trace).
  std::vector<Eigen::VectorXd> velocity;
  double step = 0.0;
  /// True when the flow stopped early at the chart boundary.
  bool truncated = false;
};

/// RK4 flow of a unit kernel vector, oriented continuously starting from the
/// projection of `selector` onto the kernel at the seed.
LeafTrace leaf_flow(const Puzzle& puzzle, const Point& seed, const Eigen::VectorXd& selector, std::size_t steps,
                    double step_size);

/// max |phi(midpoint)(delta x / step)| over consecutive trace points.
double leaf_trace_defect(const Puzzle& puzzle, const LeafTrace& trace);

struct ParallelFrameResult {
  /// residual[k][a] = nabla_v phi(Z_a) at trace point k.
  std::vector<std::vector<Eigen::VectorXd>> residual;
  double max_abs = 0.0;
};

/// Covariant derivative of the sections phi(Z_a) along the leaf velocity.
/// The transversal fields must be invariant along the leaves ([v, Z_a] in K).
ParallelFrameResult parallel_frame_residual(const Puzzle& puzzle, const LeafTrace& leaf,
                                            std::span<const VectorField> transversal);

struct SliceSpec {
  /// Embedding S of the quotient chart into the puzzle chart.
  ChartMap slice;
  /// Functions on the puzzle chart whose common zero set is the slice image;
  /// one per kernel dimension.
  std::vector<Expr> level;
};

struct Projection {
  /// Q(x) in quotient coordinates.
  Point q;
  /// Parallel frame at x: column a is e_a transported from the slice point
  /// along the leaf, written in the fixed frame.
  Eigen::MatrixXd frame;
  /// Intersection of the leaf with the slice.
  Point foot;
};

class QuotientPuzzle {
 public:
  QuotientPuzzle(Puzzle original, Puzzle quotient, SliceSpec spec, std::size_t flow_steps);

  const Puzzle& original() const noexcept { return original_; }
  const Puzzle& quotient() const noexcept { return quotient_; }
  const SliceSpec& spec() const noexcept { return spec_; }

  /// Numeric Q: flows x along the kernel until the level functions vanish,
  /// transporting the bundle frame alongside. Throws PreconditionError when
  /// the leaf leaves the chart before reaching the slice.
  Projection project(const Point& x) const;

 private:
  Puzzle original_;
  Puzzle quotient_;
  SliceSpec spec_;
  std::size_t flow_steps_;
};

/// Leaf-space quotient of a constant-rank puzzle. Requires p = 1, a non-trivial kernel of
/// constant dimension equal to the number of level functions, integrability
/// (<= 1e-8) and a slice transverse to the kernel.
QuotientPuzzle build_quotient(const Puzzle& puzzle, SliceSpec spec, std::size_t flow_steps = 200);

struct QuotientCheck {
  double phi = 0.0;     // |T^{-1} phi - Q* phi_bar|
  double omega = 0.0;   // |T^{-1} dT + T^{-1} omega T - Q* omega_bar|
  double metric = 0.0;  // |T^T g T - Q* g_bar| (0 without metric)
  std::size_t samples = 0;
};

/// Compares the Q-pull-back of the quotient data with the original data in
/// the parallel frame at sampled points. Derivatives of Q and of the frame
/// use central differences with step `h`.
QuotientCheck check_quotient(const QuotientPuzzle& qp, std::size_t samples = 50, std::uint64_t seed = 1,
                             double h = 1e-4);
/// Same comparison at caller-chosen points (useful when not every leaf
/// through the chart reaches the slice).
QuotientCheck check_quotient(const QuotientPuzzle& qp, std::span<const Point> points, double h = 1e-4);

}  // namespace solderlab
