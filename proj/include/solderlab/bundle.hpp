#pragma once

// Vector-bundle calculus in one fixed global frame e_1..e_n over a chart.
//
// Convention: nabla e_j = e_i omega^i_j, so entry (i, j) of a connection
// matrix is omega^i_j (row = upper index). Indices are 0-based in code.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "solderlab/forms.hpp"

namespace solderlab {

/// n x n matrix of forms of a common degree on one chart.
class FormMatrix {
 public:
  FormMatrix(ChartPtr chart, std::size_t n, std::size_t degree);

  const Chart& chart() const noexcept { return *chart_; }
  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  std::size_t rank() const noexcept { return n_; }
  std::size_t degree() const noexcept { return degree_; }

  const DifferentialForm& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, DifferentialForm form);

  /// max |coefficient| over all entries and points.
  double max_abs(std::span<const Point> points) const;

 private:
  ChartPtr chart_;
  std::size_t n_;
  std::size_t degree_;
  std::vector<DifferentialForm> data_;
};

class ConnectionForms : public FormMatrix {
 public:
  ConnectionForms(ChartPtr chart, std::size_t n) : FormMatrix(std::move(chart), n, 1) {}

  /// omega^i_j(v) at a point as an n x n matrix.
  Eigen::MatrixXd evaluate_on(std::span<const double> p, const Eigen::VectorXd& v) const;
};

class CurvatureForms : public FormMatrix {
 public:
  CurvatureForms(ChartPtr chart, std::size_t n) : FormMatrix(std::move(chart), n, 2) {}
};

/// Symmetric fiber metric g_ij.
class FiberMetric {
 public:
  /// Throws DimensionError unless `g` is square and syntactically symmetric.
  FiberMetric(ChartPtr chart, ExprMatrix g);

  static FiberMetric identity(ChartPtr chart, std::size_t n);

  const Chart& chart() const noexcept { return *chart_; }
  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  std::size_t rank() const noexcept { return g_.rows(); }
  const ExprMatrix& matrix() const noexcept { return g_; }
  const Expr& operator()(std::size_t i, std::size_t j) const { return g_(i, j); }

  /// Smallest eigenvalue over the sample points (> 0 when positive definite).
  double min_eigenvalue(std::span<const Point> points) const;

 private:
  ChartPtr chart_;
  ExprMatrix g_;
};

/// psi = e_i psi^i with psi^i forms of a common degree.
class BundleValuedForm {
 public:
  BundleValuedForm(ChartPtr chart, std::size_t n, std::size_t degree);
  explicit BundleValuedForm(std::vector<DifferentialForm> components);

  const Chart& chart() const noexcept { return *chart_; }
  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  std::size_t rank() const noexcept { return components_.size(); }
  std::size_t degree() const noexcept { return degree_; }

  const DifferentialForm& operator[](std::size_t i) const { return components_[i]; }
  void set(std::size_t i, DifferentialForm form);
  const std::vector<DifferentialForm>& components() const noexcept { return components_; }

  double max_abs(std::span<const Point> points) const;

  /// Component values psi^i(v_1..v_p) at a point.
  Eigen::VectorXd evaluate_on(std::span<const double> p, std::span<const Eigen::VectorXd> vectors) const;

 private:
  ChartPtr chart_;
  std::size_t degree_;
  std::vector<DifferentialForm> components_;
};

/// d^nabla psi: component i is d psi^i + omega^i_j ^ psi^j.
BundleValuedForm covariant_exterior_derivative(const ConnectionForms& omega, const BundleValuedForm& psi);

/// Omega^i_j = d omega^i_j + omega^i_k ^ omega^k_j.
CurvatureForms curvature(const ConnectionForms& omega);

/// dg_ij - g_kj omega^k_i - g_ik omega^k_j; zero iff nabla respects g.
FormMatrix metric_compatibility_residual(const ConnectionForms& omega, const FiberMetric& g);

/// D A for an End(V)-valued form: dA + omega ^ A - (-1)^deg A ^ omega.
FormMatrix covariant_derivative_endomorphism(const ConnectionForms& omega, const FormMatrix& a);

/// Fixed-step RK4 for dv/dt = -omega(gamma'(t)) v over gamma's source
/// interval. Returns steps+1 vectors, one per grid node.
std::vector<Eigen::VectorXd> parallel_transport(const ConnectionForms& omega, const ChartMap& gamma,
                                                const Eigen::VectorXd& v0, std::size_t steps = 1000);

}  // namespace solderlab
