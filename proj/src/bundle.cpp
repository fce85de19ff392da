#include "solderlab/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "solderlab/errors.hpp"

namespace solderlab {

FormMatrix::FormMatrix(ChartPtr chart, std::size_t n, std::size_t degree)
    : chart_(std::move(chart)), n_(n), degree_(degree) {
  if (n_ == 0) throw DimensionError("bundle rank must be positive");
  data_.assign(n_ * n_, DifferentialForm(chart_, degree_));
}

void FormMatrix::set(std::size_t i, std::size_t j, DifferentialForm form) {
  if (i >= n_ || j >= n_) throw DimensionError("form matrix index out of range");
  if (!(form.chart() == *chart_)) throw DimensionError("form matrix entry on a different chart");
  if (form.degree() != degree_) throw DimensionError("form matrix entry has the wrong degree");
  data_[i * n_ + j] = std::move(form);
}

double FormMatrix::max_abs(std::span<const Point> points) const {
  double worst = 0.0;
  for (const auto& f : data_) worst = std::max(worst, max_abs_coefficient(f, points));
  return worst;
}

Eigen::MatrixXd ConnectionForms::evaluate_on(std::span<const double> p, const Eigen::VectorXd& v) const {
  const auto n = static_cast<Eigen::Index>(rank());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::VectorXd> vs{v};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& f = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (!f.is_zero()) out(i, j) = evaluate_form(f, p, vs);
    }
  }
  return out;
}

FiberMetric::FiberMetric(ChartPtr chart, ExprMatrix g) : chart_(std::move(chart)), g_(std::move(g)) {
  if (g_.rows() != g_.cols() || g_.rows() == 0) throw DimensionError("fiber metric must be square");
  for (std::size_t i = 0; i < g_.rows(); ++i) {
    for (std::size_t j = i + 1; j < g_.cols(); ++j) {
      if (to_string(g_(i, j)) != to_string(g_(j, i))) {
        throw DimensionError("fiber metric is not symmetric in entries (" + std::to_string(i + 1) +
                             "," + std::to_string(j + 1) + ")");
      }
    }
  }
}

FiberMetric FiberMetric::identity(ChartPtr chart, std::size_t n) {
  return FiberMetric(std::move(chart), ExprMatrix::identity(n));
}

double FiberMetric::min_eigenvalue(std::span<const Point> points) const {
  double lowest = std::numeric_limits<double>::infinity();
  for (const Point& p : points) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g_.evaluate(p), Eigen::EigenvaluesOnly);
    lowest = std::min(lowest, eig.eigenvalues().minCoeff());
  }
  return lowest;
}

BundleValuedForm::BundleValuedForm(ChartPtr chart, std::size_t n, std::size_t degree)
    : chart_(std::move(chart)), degree_(degree) {
  if (n == 0) throw DimensionError("bundle rank must be positive");
  components_.assign(n, DifferentialForm(chart_, degree_));
}

BundleValuedForm::BundleValuedForm(std::vector<DifferentialForm> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DimensionError("bundle rank must be positive");
  chart_ = components_.front().chart_ptr();
  degree_ = components_.front().degree();
  for (const auto& c : components_) {
    if (!(c.chart() == *chart_)) throw DimensionError("bundle-valued form components on different charts");
    if (c.degree() != degree_) throw DimensionError("bundle-valued form components of unequal degree");
  }
}

void BundleValuedForm::set(std::size_t i, DifferentialForm form) {
  if (i >= components_.size()) throw DimensionError("component index out of range");
  if (!(form.chart() == *chart_) || form.degree() != degree_) {
    throw DimensionError("component chart or degree mismatch");
  }
  components_[i] = std::move(form);
}

double BundleValuedForm::max_abs(std::span<const Point> points) const {
  double worst = 0.0;
  for (const auto& f : components_) worst = std::max(worst, max_abs_coefficient(f, points));
  return worst;
}

Eigen::VectorXd BundleValuedForm::evaluate_on(std::span<const double> p,
                                              std::span<const Eigen::VectorXd> vectors) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rank()));
  for (std::size_t i = 0; i < rank(); ++i) {
    out(static_cast<Eigen::Index>(i)) = evaluate_form(components_[i], p, vectors);
  }
  return out;
}

namespace {

void require_compatible(const Chart& a, const Chart& b, std::size_t na, std::size_t nb) {
  if (!(a == b)) throw DimensionError("connection and form live on different charts");
  if (na != nb) throw DimensionError("connection rank differs from bundle rank");
}

}  // namespace

BundleValuedForm covariant_exterior_derivative(const ConnectionForms& omega, const BundleValuedForm& psi) {
  require_compatible(omega.chart(), psi.chart(), omega.rank(), psi.rank());
  const std::size_t n = psi.rank();
  std::vector<DifferentialForm> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    DifferentialForm c = exterior_derivative(psi[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (omega(i, j).is_zero() || psi[j].is_zero()) continue;
      c += wedge(omega(i, j), psi[j]);
    }
    out.push_back(std::move(c));
  }
  return BundleValuedForm(std::move(out));
}

CurvatureForms curvature(const ConnectionForms& omega) {
  const std::size_t n = omega.rank();
  CurvatureForms out(omega.chart_ptr(), n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      DifferentialForm c = exterior_derivative(omega(i, j));
      for (std::size_t k = 0; k < n; ++k) {
        if (omega(i, k).is_zero() || omega(k, j).is_zero()) continue;
        c += wedge(omega(i, k), omega(k, j));
      }
      out.set(i, j, std::move(c));
    }
  }
  return out;
}

FormMatrix metric_compatibility_residual(const ConnectionForms& omega, const FiberMetric& g) {
  require_compatible(omega.chart(), g.chart(), omega.rank(), g.rank());
  const std::size_t n = omega.rank();
  const ChartPtr& chart = omega.chart_ptr();
  FormMatrix out(chart, n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      DifferentialForm r = exterior_derivative(DifferentialForm::function(chart, g(i, j)));
      for (std::size_t k = 0; k < n; ++k) {
        if (!g(k, j).is_zero()) r -= g(k, j) * omega(k, i);
        if (!g(i, k).is_zero()) r -= g(i, k) * omega(k, j);
      }
      out.set(i, j, std::move(r));
    }
  }
  return out;
}

FormMatrix covariant_derivative_endomorphism(const ConnectionForms& omega, const FormMatrix& a) {
  require_compatible(omega.chart(), a.chart(), omega.rank(), a.rank());
  const std::size_t n = a.rank();
  const bool odd = a.degree() % 2 == 1;
  FormMatrix out(a.chart_ptr(), n, a.degree() + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      DifferentialForm r = exterior_derivative(a(i, j));
      for (std::size_t k = 0; k < n; ++k) {
        if (!omega(i, k).is_zero() && !a(k, j).is_zero()) r += wedge(omega(i, k), a(k, j));
        if (!a(i, k).is_zero() && !omega(k, j).is_zero()) {
          if (odd) r += wedge(a(i, k), omega(k, j)); else r -= wedge(a(i, k), omega(k, j));
        }
      }
      out.set(i, j, std::move(r));
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> parallel_transport(const ConnectionForms& omega, const ChartMap& gamma,
                                                const Eigen::VectorXd& v0, std::size_t steps) {
  if (gamma.source()->dim() != 1) throw DimensionError("parallel transport needs a curve");
  if (!(*gamma.target() == omega.chart())) throw DimensionError("curve does not map into the connection's chart");
  if (static_cast<std::size_t>(v0.size()) != omega.rank()) throw DimensionError("initial vector has wrong length");
  if (steps == 0) throw DimensionError("parallel transport needs at least one step");

  const Interval span = gamma.source()->box()[0];
  const double h = (span.hi - span.lo) / static_cast<double>(steps);
  auto rhs = [&](double t, const Eigen::VectorXd& v) -> Eigen::VectorXd {
    std::vector<double> tp{t};
    Point x = gamma.apply(tp);
    Eigen::VectorXd vel = gamma.push_forward(tp, Eigen::VectorXd::Ones(1));
    return -omega.evaluate_on(x, vel) * v;
  };

  std::vector<Eigen::VectorXd> path;
  path.reserve(steps + 1);
  path.push_back(v0);
  Eigen::VectorXd v = v0;
  for (std::size_t k = 0; k < steps; ++k) {
    double t = span.lo + h * static_cast<double>(k);
    Eigen::VectorXd k1 = rhs(t, v);
    Eigen::VectorXd k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1);
    Eigen::VectorXd k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2);
    Eigen::VectorXd k4 = rhs(t + h, v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    path.push_back(v);
  }
  return path;
}

}  // namespace solderlab
