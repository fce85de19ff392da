#include "solderlab/forms.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "solderlab/errors.hpp"

namespace solderlab {

// ---------------------------------------------------------------------------
// Chart

Chart::Chart(std::vector<std::string> coords, std::vector<Interval> box)
    : coords_(std::move(coords)), box_(std::move(box)) {
  if (coords_.empty()) throw DimensionError("a chart needs at least one coordinate");
  if (box_.size() != coords_.size()) {
    throw DimensionError("chart domain box must have one interval per coordinate");
  }
  std::set<std::string> seen;
  for (const auto& name : coords_) {
    if (!seen.insert(name).second) throw DimensionError("duplicate coordinate name '" + name + "'");
  }
  for (std::size_t i = 0; i < box_.size(); ++i) {
    if (!(box_[i].lo < box_[i].hi)) {
      throw DimensionError("degenerate domain interval for coordinate '" + coords_[i] + "'");
    }
  }
}

Expr Chart::coordinate(std::size_t i) const {
  if (i >= dim()) throw DimensionError("coordinate index out of range");
  return Expr::variable(i, coords_[i]);
}

Expr Chart::parse(std::string_view text) const { return parse_expr(text, coords_); }

bool Chart::contains(std::span<const double> p, double slack) const {
  if (p.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (p[i] < box_[i].lo - slack || p[i] > box_[i].hi + slack) return false;
  }
  return true;
}

Point Chart::center() const {
  Point c(dim());
  for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (box_[i].lo + box_[i].hi);
  return c;
}

Point Chart::point(const std::map<std::string, double>& values) const {
  Point p(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    auto it = values.find(coords_[i]);
    if (it == values.end()) throw DimensionError("point is missing coordinate '" + coords_[i] + "'");
    p[i] = it->second;
  }
  return p;
}

bool Chart::operator==(const Chart& other) const {
  if (coords_ != other.coords_) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (box_[i].lo != other.box_[i].lo || box_[i].hi != other.box_[i].hi) return false;
  }
  return true;
}

ChartPtr make_chart(std::vector<std::string> coords, std::vector<Interval> box) {
  return std::make_shared<const Chart>(std::move(coords), std::move(box));
}

std::vector<Point> sample_points(const Chart& chart, std::size_t count, std::uint64_t seed,
                                 double margin) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> points;
  points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Point p(chart.dim());
    for (std::size_t i = 0; i < chart.dim(); ++i) {
      const Interval& iv = chart.box()[i];
      double width = iv.hi - iv.lo;
      p[i] = iv.lo + width * (margin + (1.0 - 2.0 * margin) * unit(rng));
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<MultiIndex> multi_indices(std::size_t dim, std::size_t degree) {
  std::vector<MultiIndex> out;
  if (degree > dim) return out;
  MultiIndex current(degree);
  for (std::size_t i = 0; i < degree; ++i) current[i] = i;
  for (;;) {
    out.push_back(current);
    std::size_t k = degree;
    while (k > 0 && current[k - 1] == dim - degree + (k - 1)) --k;
    if (k == 0) break;
    ++current[k - 1];
    for (std::size_t j = k; j < degree; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

int shuffle_sign(const MultiIndex& first, const MultiIndex& second) {
  std::size_t inversions = 0;
  for (std::size_t i : first) {
    for (std::size_t j : second) {
      if (i > j) ++inversions;
    }
  }
  return inversions % 2 == 0 ? 1 : -1;
}

// ---------------------------------------------------------------------------
// DifferentialForm

namespace {

void require_same_chart(const Chart& a, const Chart& b, const char* what) {
  if (!(a == b)) throw DimensionError(std::string(what) + ": operands live on different charts");
}

}  // namespace

DifferentialForm::DifferentialForm(ChartPtr chart, std::size_t degree)
    : chart_(std::move(chart)), degree_(degree) {
  if (!chart_) throw DimensionError("form without a chart");
}

DifferentialForm DifferentialForm::function(ChartPtr chart, Expr f) {
  DifferentialForm out(std::move(chart), 0);
  out.set({}, std::move(f));
  return out;
}

DifferentialForm DifferentialForm::coordinate_differential(ChartPtr chart, std::size_t a) {
  DifferentialForm out(std::move(chart), 1);
  out.set({a}, Expr(1.0));
  return out;
}

DifferentialForm DifferentialForm::one_form(ChartPtr chart, std::span<const Expr> coefficients) {
  if (coefficients.size() != chart->dim()) {
    throw DimensionError("1-form needs one coefficient per coordinate");
  }
  DifferentialForm out(std::move(chart), 1);
  for (std::size_t a = 0; a < coefficients.size(); ++a) out.set({a}, coefficients[a]);
  return out;
}

Expr DifferentialForm::coefficient(const MultiIndex& index) const {
  auto it = terms_.find(index);
  return it == terms_.end() ? Expr() : it->second;
}

void DifferentialForm::set(const MultiIndex& index, Expr value) {
  if (index.size() != degree_) throw DimensionError("multi-index length differs from form degree");
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= chart_->dim()) throw DimensionError("multi-index entry out of range");
    if (k > 0 && index[k] <= index[k - 1]) {
      throw DimensionError("multi-index must be strictly increasing");
    }
  }
  if (value.is_zero()) {
    terms_.erase(index);
  } else {
    terms_[index] = std::move(value);
  }
}

void DifferentialForm::add(const MultiIndex& index, const Expr& value) {
  if (value.is_zero()) return;
  set(index, coefficient(index) + value);
}

std::vector<Expr> DifferentialForm::one_form_coefficients() const {
  if (degree_ != 1) throw DimensionError("not a 1-form");
  std::vector<Expr> out(chart_->dim());
  for (const auto& [index, c] : terms_) out[index[0]] = c;
  return out;
}

DifferentialForm& DifferentialForm::operator+=(const DifferentialForm& other) {
  require_same_chart(*chart_, other.chart(), "form sum");
  if (degree_ != other.degree_) throw DimensionError("form sum: degree mismatch");
  for (const auto& [index, c] : other.terms_) add(index, c);
  return *this;
}

DifferentialForm& DifferentialForm::operator-=(const DifferentialForm& other) {
  require_same_chart(*chart_, other.chart(), "form difference");
  if (degree_ != other.degree_) throw DimensionError("form difference: degree mismatch");
  for (const auto& [index, c] : other.terms_) add(index, -c);
  return *this;
}

DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) { return a += b; }
DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b) { return a -= b; }

DifferentialForm operator-(const DifferentialForm& a) {
  DifferentialForm out(a.chart_ptr(), a.degree());
  for (const auto& [index, c] : a.terms()) out.set(index, -c);
  return out;
}

DifferentialForm operator*(const Expr& f, const DifferentialForm& a) {
  DifferentialForm out(a.chart_ptr(), a.degree());
  if (f.is_zero()) return out;
  for (const auto& [index, c] : a.terms()) out.set(index, f * c);
  return out;
}

// ---------------------------------------------------------------------------
// VectorField and ChartMap

VectorField::VectorField(ChartPtr chart, std::vector<Expr> components)
    : chart_(std::move(chart)), components_(std::move(components)) {
  if (components_.size() != chart_->dim()) {
    throw DimensionError("vector field needs one component per coordinate");
  }
}

VectorField VectorField::coordinate(ChartPtr chart, std::size_t a) {
  std::vector<Expr> comps(chart->dim());
  if (a >= comps.size()) throw DimensionError("coordinate index out of range");
  comps[a] = Expr(1.0);
  return VectorField(std::move(chart), std::move(comps));
}

Expr VectorField::apply(const Expr& f) const {
  Expr acc;
  for (std::size_t a = 0; a < components_.size(); ++a) {
    if (components_[a].is_zero()) continue;
    acc += components_[a] * differentiate(f, a);
  }
  return acc;
}

Eigen::VectorXd VectorField::at(std::span<const double> p) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t a = 0; a < components_.size(); ++a) {
    v(static_cast<Eigen::Index>(a)) = evaluate(components_[a], p);
  }
  return v;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  require_same_chart(x.chart(), y.chart(), "lie bracket");
  std::vector<Expr> comps(x.chart().dim());
  for (std::size_t a = 0; a < comps.size(); ++a) {
    comps[a] = x.apply(y.components()[a]) - y.apply(x.components()[a]);
  }
  return VectorField(x.chart_ptr(), std::move(comps));
}

ChartMap::ChartMap(ChartPtr source, ChartPtr target, std::vector<Expr> components)
    : source_(std::move(source)), target_(std::move(target)), components_(std::move(components)) {
  if (components_.size() != target_->dim()) {
    throw DimensionError("chart map needs one component per target coordinate");
  }
  jacobian_ = ExprMatrix(target_->dim(), source_->dim());
  for (std::size_t i = 0; i < target_->dim(); ++i) {
    for (std::size_t a = 0; a < source_->dim(); ++a) {
      jacobian_(i, a) = differentiate(components_[i], a);
    }
  }
}

ChartMap ChartMap::identity(ChartPtr chart) {
  std::vector<Expr> comps;
  for (std::size_t i = 0; i < chart->dim(); ++i) comps.push_back(chart->coordinate(i));
  return ChartMap(chart, chart, std::move(comps));
}

Point ChartMap::apply(std::span<const double> p) const {
  Point out(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) out[i] = evaluate(components_[i], p);
  return out;
}

Expr ChartMap::pull(const Expr& f) const { return substitute(f, components_); }

Eigen::VectorXd ChartMap::push_forward(std::span<const double> p, const Eigen::VectorXd& v) const {
  return jacobian_.evaluate(p) * v;
}

double ChartMap::domain_excursion(std::size_t samples, std::uint64_t seed) const {
  double worst = 0.0;
  for (const Point& p : sample_points(*source_, samples, seed, 0.0)) {
    Point q = apply(p);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Interval& iv = target_->box()[i];
      worst = std::max({worst, iv.lo - q[i], q[i] - iv.hi});
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Exterior algebra

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  DifferentialForm out(a.chart_ptr(), a.degree() + b.degree());
  if (out.degree() > a.chart().dim()) return out;
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      bool overlap = false;
      for (std::size_t i : ia) {
        if (std::find(ib.begin(), ib.end(), i) != ib.end()) {
          overlap = true;
          break;
        }
      }
      if (overlap) continue;
      MultiIndex merged;
      merged.reserve(ia.size() + ib.size());
      std::merge(ia.begin(), ia.end(), ib.begin(), ib.end(), std::back_inserter(merged));
      Expr product = ca * cb;
      out.add(merged, shuffle_sign(ia, ib) > 0 ? product : -product);
    }
  }
  return out;
}

DifferentialForm exterior_derivative(const DifferentialForm& a) {
  const std::size_t m = a.chart().dim();
  DifferentialForm out(a.chart_ptr(), a.degree() + 1);
  if (out.degree() > m) return out;
  for (const auto& [index, c] : a.terms()) {
    for (std::size_t k = 0; k < m; ++k) {
      if (std::find(index.begin(), index.end(), k) != index.end()) continue;
      Expr dc = differentiate(c, k);
      if (dc.is_zero()) continue;
      auto pos = static_cast<std::size_t>(std::lower_bound(index.begin(), index.end(), k) - index.begin());
      MultiIndex merged = index;
      merged.insert(merged.begin() + static_cast<std::ptrdiff_t>(pos), k);
      out.add(merged, pos % 2 == 0 ? dc : -dc);
    }
  }
  return out;
}

DifferentialForm interior_product(const VectorField& x, const DifferentialForm& a) {
  require_same_chart(x.chart(), a.chart(), "interior product");
  if (a.degree() == 0) throw DimensionError("interior product of a 0-form");
  DifferentialForm out(a.chart_ptr(), a.degree() - 1);
  for (const auto& [index, c] : a.terms()) {
    for (std::size_t r = 0; r < index.size(); ++r) {
      const Expr& xr = x.components()[index[r]];
      if (xr.is_zero()) continue;
      MultiIndex rest = index;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(r));
      Expr term = xr * c;
      out.add(rest, r % 2 == 0 ? term : -term);
    }
  }
  return out;
}

DifferentialForm interior_product(std::span<const double> x, const DifferentialForm& a) {
  std::vector<Expr> comps(x.begin(), x.end());
  return interior_product(VectorField(a.chart_ptr(), std::move(comps)), a);
}

double evaluate_form(const DifferentialForm& a, std::span<const double> p,
                     std::span<const Eigen::VectorXd> vectors) {
  if (vectors.size() != a.degree()) {
    throw DimensionError("evaluate_form: expected " + std::to_string(a.degree()) +
                         " vectors, got " + std::to_string(vectors.size()));
  }
  const std::size_t m = a.chart().dim();
  for (const auto& v : vectors) {
    if (static_cast<std::size_t>(v.size()) != m) throw DimensionError("tangent vector has wrong length");
  }
  const auto deg = static_cast<Eigen::Index>(a.degree());
  double total = 0.0;
  for (const auto& [index, c] : a.terms()) {
    Eigen::MatrixXd minor(deg, deg);
    for (Eigen::Index k = 0; k < deg; ++k) {
      for (Eigen::Index l = 0; l < deg; ++l) {
        minor(k, l) = vectors[static_cast<std::size_t>(k)](static_cast<Eigen::Index>(index[static_cast<std::size_t>(l)]));
      }
    }
    double det = deg == 0 ? 1.0 : minor.determinant();
    if (det != 0.0) total += evaluate(c, p) * det;
  }
  return total;
}

Eigen::VectorXd coefficient_vector(const DifferentialForm& a, std::span<const double> p) {
  auto indices = multi_indices(a.chart().dim(), a.degree());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    auto it = a.terms().find(indices[k]);
    if (it != a.terms().end()) out(static_cast<Eigen::Index>(k)) = evaluate(it->second, p);
  }
  return out;
}

double max_abs_coefficient(const DifferentialForm& a, std::span<const Point> points) {
  double worst = 0.0;
  for (const Point& p : points) {
    for (const auto& [index, c] : a.terms()) worst = std::max(worst, std::abs(evaluate(c, p)));
  }
  return worst;
}

DifferentialForm pullback_form(const ChartMap& u, const DifferentialForm& a) {
  require_same_chart(a.chart(), *u.target(), "pullback");
  const ChartPtr& source = u.source();
  DifferentialForm out(source, a.degree());
  if (a.degree() > source->dim()) return out;

  std::vector<DifferentialForm> du;
  du.reserve(u.target()->dim());
  for (std::size_t i = 0; i < u.target()->dim(); ++i) {
    std::vector<Expr> row(source->dim());
    for (std::size_t alpha = 0; alpha < source->dim(); ++alpha) row[alpha] = u.jacobian()(i, alpha);
    du.push_back(DifferentialForm::one_form(source, row));
  }
  for (const auto& [index, c] : a.terms()) {
    DifferentialForm term = DifferentialForm::function(source, u.pull(c));
    for (std::size_t i : index) term = wedge(term, du[i]);
    out += term;
  }
  return out;
}

DifferentialForm hodge_star(const ExprMatrix& metric, const DifferentialForm& a) {
  const Chart& chart = a.chart();
  const std::size_t m = chart.dim();
  if (metric.rows() != m || metric.cols() != m) throw DimensionError("hodge_star: metric shape mismatch");
  if (a.degree() > m) return DifferentialForm(a.chart_ptr(), 0);

  for (const Point& p : sample_points(chart, 8, 0x5eedULL)) {
    Eigen::MatrixXd g = metric.evaluate(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
      throw SingularError("hodge_star: metric is not positive definite at a sample point");
    }
  }

  Expr volume = sqrt(determinant(metric));
  ExprMatrix inv = inverse(metric);
  const std::size_t p = a.degree();
  DifferentialForm out(a.chart_ptr(), m - p);

  for (const MultiIndex& target : multi_indices(m, m - p)) {
    MultiIndex complement;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::find(target.begin(), target.end(), i) == target.end()) complement.push_back(i);
    }
    // Raised component a^I = sum_K det(g^{-1}[I, K]) a_K.
    Expr raised;
    for (const auto& [k_index, c] : a.terms()) {
      ExprMatrix minor(p, p);
      for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t s = 0; s < p; ++s) minor(r, s) = inv(complement[r], k_index[s]);
      }
      raised += determinant(minor) * c;
    }
    if (raised.is_zero()) continue;
    Expr value = volume * raised;
    out.set(target, shuffle_sign(complement, target) > 0 ? value : -value);
  }
  return out;
}

}  // namespace solderlab
