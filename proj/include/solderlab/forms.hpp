#pragma once

// Scalar exterior algebra on a single coordinate chart.
//
// A DifferentialForm of degree p stores one coefficient per strictly
// increasing multi-index (i1 < ... < ip) of 0-based coordinate indices:
//   a = sum_I a_I dx^{i1} ^ ... ^ dx^{ip}.
// Absent indices are zero. Every operation is exact on the expression
// level; numbers only appear when a form is evaluated at a point.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "solderlab/expr.hpp"
#include "solderlab/expr_matrix.hpp"

namespace solderlab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Coordinates on a chart, ordered as the chart's coordinate names.
using Point = std::vector<double>;

class Chart {
 public:
  Chart(std::vector<std::string> coords, std::vector<Interval> box);

  std::size_t dim() const noexcept { return coords_.size(); }
  const std::vector<std::string>& coords() const noexcept { return coords_; }
  const std::vector<Interval>& box() const noexcept { return box_; }

  /// The coordinate function x^i as an expression.
  Expr coordinate(std::size_t i) const;
  Expr parse(std::string_view text) const;

  bool contains(std::span<const double> p, double slack = 0.0) const;
  Point center() const;
  /// Builds a point from named values; every coordinate must be present.
  Point point(const std::map<std::string, double>& values) const;

  bool operator==(const Chart& other) const;

 private:
  std::vector<std::string> coords_;
  std::vector<Interval> box_;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::vector<std::string> coords, std::vector<Interval> box);

/// Deterministic uniform samples from the chart's domain box. `margin` is a
/// fraction of each side kept clear of the boundary.
std::vector<Point> sample_points(const Chart& chart, std::size_t count, std::uint64_t seed,
                                 double margin = 0.02);

using MultiIndex = std::vector<std::size_t>;

/// All strictly increasing multi-indices of length `degree` over `dim`.
std::vector<MultiIndex> multi_indices(std::size_t dim, std::size_t degree);

class DifferentialForm {
 public:
  DifferentialForm(ChartPtr chart, std::size_t degree);

  static DifferentialForm function(ChartPtr chart, Expr f);
  /// dx^a
  static DifferentialForm coordinate_differential(ChartPtr chart, std::size_t a);
  /// Degree-1 form sum_a coefficients[a] dx^a.
  static DifferentialForm one_form(ChartPtr chart, std::span<const Expr> coefficients);

  const Chart& chart() const noexcept { return *chart_; }
  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  std::size_t degree() const noexcept { return degree_; }

  const std::map<MultiIndex, Expr>& terms() const noexcept { return terms_; }
  /// Zero when the index is absent.
  Expr coefficient(const MultiIndex& index) const;
  /// Sets a coefficient; `index` must be strictly increasing and in range.
  void set(const MultiIndex& index, Expr value);
  void add(const MultiIndex& index, const Expr& value);

  /// Structurally zero (no stored non-zero coefficient).
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Coefficients of a 1-form against dx^0..dx^{m-1}.
  std::vector<Expr> one_form_coefficients() const;

  DifferentialForm& operator+=(const DifferentialForm& other);
  DifferentialForm& operator-=(const DifferentialForm& other);

 private:
  ChartPtr chart_;
  std::size_t degree_;
  std::map<MultiIndex, Expr> terms_;
};

DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b);
DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b);
DifferentialForm operator-(const DifferentialForm& a);
DifferentialForm operator*(const Expr& f, const DifferentialForm& a);

class VectorField {
 public:
  VectorField(ChartPtr chart, std::vector<Expr> components);

  /// The coordinate field d/dx^a.
  static VectorField coordinate(ChartPtr chart, std::size_t a);

  const Chart& chart() const noexcept { return *chart_; }
  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  const std::vector<Expr>& components() const noexcept { return components_; }

  /// Directional derivative X(f) = X^a df/dx^a.
  Expr apply(const Expr& f) const;
  Eigen::VectorXd at(std::span<const double> p) const;

 private:
  ChartPtr chart_;
  std::vector<Expr> components_;
};

/// [X, Y]^a = X(Y^a) - Y(X^a).
VectorField lie_bracket(const VectorField& x, const VectorField& y);

/// Smooth map between charts given by target-coordinate expressions in the
/// source coordinates.
class ChartMap {
 public:
  ChartMap(ChartPtr source, ChartPtr target, std::vector<Expr> components);

  static ChartMap identity(ChartPtr chart);

  const ChartPtr& source() const noexcept { return source_; }
  const ChartPtr& target() const noexcept { return target_; }
  const std::vector<Expr>& components() const noexcept { return components_; }

  Point apply(std::span<const double> p) const;
  /// Pulls a target function back: f o u.
  Expr pull(const Expr& f) const;
  /// Jacobian du^i/dt^alpha as a (target dim x source dim) matrix.
  const ExprMatrix& jacobian() const noexcept { return jacobian_; }
  Eigen::VectorXd push_forward(std::span<const double> p, const Eigen::VectorXd& v) const;

  /// Largest distance by which sampled images leave the target box
  /// (0 when every sample lands inside).
  double domain_excursion(std::size_t samples, std::uint64_t seed) const;

 private:
  ChartPtr source_;
  ChartPtr target_;
  std::vector<Expr> components_;
  ExprMatrix jacobian_;
};

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm exterior_derivative(const DifferentialForm& a);
DifferentialForm interior_product(const VectorField& x, const DifferentialForm& a);
/// Interior product with a constant vector at the form level (numbers as
/// coefficients), used for pointwise kernel analysis.
DifferentialForm interior_product(std::span<const double> x, const DifferentialForm& a);

/// a_p(v_1, ..., v_p), the fully antisymmetric multilinear value.
double evaluate_form(const DifferentialForm& a, std::span<const double> p,
                     std::span<const Eigen::VectorXd> vectors);

/// Coefficients of `a` at a point, in `multi_indices(m, degree)` order.
Eigen::VectorXd coefficient_vector(const DifferentialForm& a, std::span<const double> p);

/// max |coefficient| over the sample points.
double max_abs_coefficient(const DifferentialForm& a, std::span<const Point> points);

DifferentialForm pullback_form(const ChartMap& u, const DifferentialForm& a);

/// Riemannian Hodge star with volume form sqrt(det g) dx^1 ^ ... ^ dx^m.
/// `metric` is checked for positive definiteness at a few sample points.
DifferentialForm hodge_star(const ExprMatrix& metric, const DifferentialForm& a);

/// Sign of the permutation that sorts the concatenation of two disjoint
/// index lists.
int shuffle_sign(const MultiIndex& first, const MultiIndex& second);

}  // namespace solderlab
