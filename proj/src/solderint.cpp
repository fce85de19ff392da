#include "solderlab/solderint.hpp"

#include <algorithm>
#include <cmath>

#include "solderlab/errors.hpp"

namespace solderlab {

// ---------------------------------------------------------------------------
// Surface families

ChartPtr SurfaceFamily::parameter_chart() {
  static const ChartPtr chart = make_chart({"t", "s"}, {{-1.0, 1.0}, {-1.0, 1.0}});
  return chart;
}

SurfaceFamily::SurfaceFamily(ChartPtr target, std::vector<Expr> components_in_ts)
    : map_(parameter_chart(), std::move(target), std::move(components_in_ts)) {}

SurfaceFamily::SurfaceFamily(ChartMap map) : map_(std::move(map)) {
  if (map_.source()->dim() != 2) throw DimensionError("surface family needs a two-parameter source chart");
}

double SurfaceFamily::domain_excursion(std::size_t samples, std::uint64_t seed) const {
  return map_.domain_excursion(samples, seed);
}

double SurfaceFamily::immersion_margin(std::size_t samples, std::uint64_t seed) const {
  double lowest = std::numeric_limits<double>::infinity();
  for (const Point& p : sample_points(*map_.source(), samples, seed, 0.0)) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(map_.jacobian().evaluate(p));
    const auto& s = svd.singularValues();
    lowest = std::min(lowest, s.size() >= 2 ? s(1) : 0.0);
  }
  return lowest;
}

std::vector<Point> parameter_grid(std::size_t n) {
  if (n == 0) throw DimensionError("parameter grid needs at least one interval");
  std::vector<Point> nodes;
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t k = 0; k <= n; ++k) {
      nodes.push_back({-1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n),
                       -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n)});
    }
  }
  return nodes;
}

namespace {

/// Pulled-back data on the (t, s) chart: A = phi(g_t), B = phi(g_s),
/// a = omega(g_t), b = omega(g_s).
struct PulledData {
  std::vector<Expr> A;
  std::vector<Expr> B;
  ExprMatrix a;
  ExprMatrix b;
};

PulledData pull_to_surface(const Puzzle& puzzle, const SurfaceFamily& gamma) {
  if (puzzle.degree() != 1) throw PreconditionError("surface identities need a solder 1-form");
  const ChartMap& u = gamma.map();
  if (!(*u.target() == puzzle.chart())) throw DimensionError("surface family does not map into the puzzle chart");
  const std::size_t n = puzzle.rank();
  const ExprMatrix& jac = u.jacobian();

  auto contract = [&](const DifferentialForm& form, std::size_t param) {
    Expr acc;
    for (const auto& [index, c] : form.terms()) {
      const Expr& dx = jac(index[0], param);
      if (!dx.is_zero()) acc += u.pull(c) * dx;
    }
    return acc;
  };
  PulledData out{std::vector<Expr>(n), std::vector<Expr>(n), ExprMatrix(n, n), ExprMatrix(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.A[i] = contract(puzzle.phi()[i], 0);
    out.B[i] = contract(puzzle.phi()[i], 1);
    for (std::size_t j = 0; j < n; ++j) {
      out.a(i, j) = contract(puzzle.omega()(i, j), 0);
      out.b(i, j) = contract(puzzle.omega()(i, j), 1);
    }
  }
  return out;
}

Eigen::VectorXd eval_vector(const std::vector<Expr>& v, std::span<const double> p) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = evaluate(v[i], p);
  return out;
}

}  // namespace

IdentityResidual identity_residual(const Puzzle& puzzle, const SurfaceFamily& gamma, std::span<const Point> nodes) {
  PulledData d = pull_to_surface(puzzle, gamma);
  const std::size_t n = puzzle.rank();
  std::vector<Expr> lhs(n);
  std::vector<Expr> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    lhs[i] = differentiate(d.B[i], 0);
    rhs[i] = differentiate(d.A[i], 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (!d.a(i, j).is_zero() && !d.B[j].is_zero()) lhs[i] += d.a(i, j) * d.B[j];
      if (!d.b(i, j).is_zero() && !d.A[j].is_zero()) rhs[i] += d.b(i, j) * d.A[j];
    }
  }
  IdentityResidual out;
  for (const Point& node : nodes) {
    Eigen::VectorXd l = eval_vector(lhs, node);
    Eigen::VectorXd r = eval_vector(rhs, node);
    out.nodes.push_back(node);
    out.residual.push_back(l - r);
    out.max_abs = std::max(out.max_abs, (l - r).cwiseAbs().maxCoeff());
    out.lhs.push_back(std::move(l));
    out.rhs.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transport system

double TransportTable::max_abs() const {
  double worst = 0.0;
  for (const auto& row : f) {
    for (const auto& v : row) worst = std::max(worst, v.cwiseAbs().maxCoeff());
  }
  return worst;
}

TransportTable integrate_transport_system(const Puzzle& puzzle, const SurfaceFamily& gamma, std::size_t t_nodes,
                                          std::size_t s_steps, const InitialRow& initial) {
  if (t_nodes == 0 || s_steps == 0) throw DimensionError("transport grid needs at least one step");
  PulledData d = pull_to_surface(puzzle, gamma);
  const double h = 1.0 / static_cast<double>(s_steps);

  TransportTable table;
  table.step = h;
  for (std::size_t i = 0; i <= t_nodes; ++i) {
    table.t.push_back(-1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(t_nodes));
  }
  for (std::size_t k = 0; k <= 2 * s_steps; ++k) {
    table.s.push_back((static_cast<double>(k) - static_cast<double>(s_steps)) * h);
  }

  for (double t : table.t) {
    auto rhs = [&](double s, const Eigen::VectorXd& f) -> Eigen::VectorXd {
      std::vector<double> ts{t, s};
      return -d.b.evaluate(ts) * f;
    };
    std::vector<double> origin{t, 0.0};
    Eigen::VectorXd f0 = initial ? initial(t) : eval_vector(d.A, origin);
    if (static_cast<std::size_t>(f0.size()) != puzzle.rank()) throw DimensionError("initial row has wrong length");

    std::vector<Eigen::VectorXd> row(2 * s_steps + 1);
    row[s_steps] = f0;
    for (int dir : {1, -1}) {
      Eigen::VectorXd f = f0;
      const double hs = dir * h;
      for (std::size_t k = 0; k < s_steps; ++k) {
        double s = dir * static_cast<double>(k) * h;
        Eigen::VectorXd k1 = rhs(s, f);
        Eigen::VectorXd k2 = rhs(s + 0.5 * hs, f + 0.5 * hs * k1);
        Eigen::VectorXd k3 = rhs(s + 0.5 * hs, f + 0.5 * hs * k2);
        Eigen::VectorXd k4 = rhs(s + hs, f + hs * k3);
        f += (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        std::size_t idx = dir > 0 ? s_steps + k + 1 : s_steps - k - 1;
        row[idx] = f;
      }
    }
    table.f.push_back(std::move(row));
  }
  return table;
}

TransportTable direct_table(const Puzzle& puzzle, const SurfaceFamily& gamma, const TransportTable& like) {
  PulledData d = pull_to_surface(puzzle, gamma);
  TransportTable out;
  out.t = like.t;
  out.s = like.s;
  out.step = like.step;
  for (double t : out.t) {
    std::vector<Eigen::VectorXd> row;
    for (double s : out.s) {
      std::vector<double> ts{t, s};
      row.push_back(eval_vector(d.A, ts));
    }
    out.f.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Leaf flows

namespace {

Eigen::VectorXd to_vector(std::span<const double> p) {
  return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
}

Point to_point(const Eigen::VectorXd& v) { return Point(v.data(), v.data() + v.size()); }

/// Unit kernel vector closest to `reference`.
Eigen::VectorXd kernel_direction(const Puzzle& puzzle, const Eigen::VectorXd& x, const Eigen::VectorXd& reference,
                                 std::size_t expected_dim) {
  Point p = to_point(x);
  auto basis = kernel_distribution(puzzle, p);
  if (basis.size() != expected_dim) {
    throw PreconditionError("kernel dimension changed along the leaf flow (" + std::to_string(expected_dim) + " -> " +
                            std::to_string(basis.size()) + ")");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  for (const auto& k : basis) v += k.dot(reference) * k;
  double norm = v.norm();
  if (norm < 1e-12) throw PreconditionError("selected direction is orthogonal to the kernel");
  return v / norm;
}

}  // namespace

LeafTrace leaf_flow(const Puzzle& puzzle, const Point& seed, const Eigen::VectorXd& selector, std::size_t steps,
                    double step_size) {
  if (puzzle.degree() != 1) throw PreconditionError("leaf flows need a solder 1-form");
  if (seed.size() != puzzle.dim() || static_cast<std::size_t>(selector.size()) != puzzle.dim()) {
    throw DimensionError("seed and selector must have one entry per coordinate");
  }
  if (!puzzle.chart().contains(seed)) throw PreconditionError("leaf seed lies outside the chart");
  const std::size_t k = kernel_distribution(puzzle, seed).size();
  if (k == 0) throw PreconditionError("kernel dimension 0 at the seed: there is no leaf to follow");

  LeafTrace trace;
  trace.seed = seed;
  trace.step = step_size;
  Eigen::VectorXd x = to_vector(seed);
  Eigen::VectorXd v = kernel_direction(puzzle, x, selector, k);
  trace.points.push_back(seed);
  trace.velocity.push_back(v);
  const double h = step_size;
  for (std::size_t step = 0; step < steps; ++step) {
    Eigen::VectorXd k1 = v;
    Eigen::VectorXd k2 = kernel_direction(puzzle, x + 0.5 * h * k1, k1, k);
    Eigen::VectorXd k3 = kernel_direction(puzzle, x + 0.5 * h * k2, k2, k);
    Eigen::VectorXd k4 = kernel_direction(puzzle, x + h * k3, k3, k);
    Eigen::VectorXd next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!puzzle.chart().contains(to_point(next))) {
      trace.truncated = true;
      break;
    }
    v = kernel_direction(puzzle, next, k4, k);
    x = next;
    trace.points.push_back(to_point(x));
    trace.velocity.push_back(v);
  }
  return trace;
}

double leaf_trace_defect(const Puzzle& puzzle, const LeafTrace& trace) {
  double worst = 0.0;
  for (std::size_t k = 1; k < trace.points.size(); ++k) {
    Eigen::VectorXd a = to_vector(trace.points[k - 1]);
    Eigen::VectorXd b = to_vector(trace.points[k]);
    Point mid = to_point(0.5 * (a + b));
    Eigen::VectorXd vel = (b - a) / trace.step;
    worst = std::max(worst, (solder_matrix(puzzle, mid) * vel).cwiseAbs().maxCoeff());
  }
  return worst;
}

ParallelFrameResult parallel_frame_residual(const Puzzle& puzzle, const LeafTrace& leaf,
                                            std::span<const VectorField> transversal) {
  if (puzzle.degree() != 1) throw PreconditionError("parallel frames need a solder 1-form");
  const std::size_t n = puzzle.rank();
  const std::size_t m = puzzle.dim();

  struct Section {
    std::vector<Expr> value;                 // sigma^i
    std::vector<std::vector<Expr>> gradient;  // d_c sigma^i
  };
  std::vector<Section> sections;
  for (const VectorField& z : transversal) {
    if (!(z.chart() == puzzle.chart())) throw DimensionError("transversal field on a different chart");
    Section sec{std::vector<Expr>(n), std::vector<std::vector<Expr>>(n, std::vector<Expr>(m))};
    for (std::size_t i = 0; i < n; ++i) {
      Expr acc;
      for (const auto& [index, c] : puzzle.phi()[i].terms()) {
        const Expr& zb = z.components()[index[0]];
        if (!zb.is_zero()) acc += c * zb;
      }
      sec.value[i] = acc;
      for (std::size_t c = 0; c < m; ++c) sec.gradient[i][c] = differentiate(acc, c);
    }
    sections.push_back(std::move(sec));
  }

  ParallelFrameResult out;
  for (std::size_t k = 0; k < leaf.points.size(); ++k) {
    const Point& p = leaf.points[k];
    const Eigen::VectorXd& v = leaf.velocity[k];
    Eigen::MatrixXd w = puzzle.omega().evaluate_on(p, v);
    std::vector<Eigen::VectorXd> row;
    for (const Section& sec : sections) {
      Eigen::VectorXd sigma(static_cast<Eigen::Index>(n));
      Eigen::VectorXd deriv = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        auto I = static_cast<Eigen::Index>(i);
        sigma(I) = evaluate(sec.value[i], p);
        for (std::size_t c = 0; c < m; ++c) {
          double vc = v(static_cast<Eigen::Index>(c));
          if (vc != 0.0 && !sec.gradient[i][c].is_zero()) deriv(I) += vc * evaluate(sec.gradient[i][c], p);
        }
      }
      Eigen::VectorXd r = deriv + w * sigma;
      out.max_abs = std::max(out.max_abs, r.cwiseAbs().maxCoeff());
      row.push_back(std::move(r));
    }
    out.residual.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quotient

namespace {

struct LevelData {
  std::vector<Expr> f;
  std::vector<std::vector<Expr>> grad;
};

LevelData level_data(const SliceSpec& spec, std::size_t m) {
  LevelData d{spec.level, {}};
  for (const Expr& e : spec.level) {
    std::vector<Expr> g(m);
    for (std::size_t c = 0; c < m; ++c) g[c] = differentiate(e, c);
    d.grad.push_back(std::move(g));
  }
  return d;
}

Eigen::VectorXd eval_level(const LevelData& d, std::span<const double> p) { return eval_vector(d.f, p); }

Eigen::MatrixXd eval_level_gradient(const LevelData& d, std::span<const double> p) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(d.grad.size()), static_cast<Eigen::Index>(p.size()));
  for (std::size_t r = 0; r < d.grad.size(); ++r) {
    for (std::size_t c = 0; c < p.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = evaluate(d.grad[r][c], p);
    }
  }
  return out;
}

Eigen::MatrixXd kernel_matrix(const Puzzle& puzzle, std::span<const double> p, std::size_t k) {
  auto basis = kernel_distribution(puzzle, p);
  if (basis.size() != k) throw PreconditionError("kernel dimension changed on the way to the slice");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(puzzle.dim()), static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) out.col(static_cast<Eigen::Index>(j)) = basis[j];
  return out;
}

/// -K (dF K)^{-1} target, independent of the kernel basis chosen.
Eigen::VectorXd slice_velocity(const Puzzle& puzzle, const LevelData& level, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& target) {
  Point p = to_point(x);
  Eigen::MatrixXd kmat = kernel_matrix(puzzle, p, level.f.size());
  Eigen::MatrixXd dfk = eval_level_gradient(level, p) * kmat;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dfk);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) < 1e-9 * std::max(1.0, s(0))) {
    throw PreconditionError("slice is not transverse to the kernel along the leaf");
  }
  return -kmat * dfk.partialPivLu().solve(target);
}

}  // namespace

QuotientPuzzle::QuotientPuzzle(Puzzle original, Puzzle quotient, SliceSpec spec, std::size_t flow_steps)
    : original_(std::move(original)), quotient_(std::move(quotient)), spec_(std::move(spec)), flow_steps_(flow_steps) {}

Projection QuotientPuzzle::project(const Point& x0) const {
  const Puzzle& P = original_;
  const std::size_t n = P.rank();
  const Chart& chart = P.chart();
  if (!chart.contains(x0)) throw PreconditionError("point lies outside the chart");
  LevelData level = level_data(spec_, P.dim());

  Eigen::VectorXd x = to_vector(x0);
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd f0 = eval_level(level, x0);
  const double h = 1.0 / static_cast<double>(flow_steps_);

  auto guard = [&](const Eigen::VectorXd& y) {
    if (!chart.contains(to_point(y), 1e-9)) {
      throw PreconditionError("leaf leaves the chart before reaching the slice");
    }
  };
  // State derivative: dx = V(x), dW = -omega(V) W.
  auto deriv = [&](const Eigen::VectorXd& y, const Eigen::MatrixXd& wy, Eigen::VectorXd& dy, Eigen::MatrixXd& dw) {
    guard(y);
    dy = slice_velocity(P, level, y, f0);
    dw = -P.omega().evaluate_on(to_point(y), dy) * wy;
  };
  for (std::size_t k = 0; k < flow_steps_; ++k) {
    Eigen::VectorXd d1, d2, d3, d4;
    Eigen::MatrixXd w1, w2, w3, w4;
    deriv(x, w, d1, w1);
    deriv(x + 0.5 * h * d1, w + 0.5 * h * w1, d2, w2);
    deriv(x + 0.5 * h * d2, w + 0.5 * h * w2, d3, w3);
    deriv(x + h * d3, w + h * w3, d4, w4);
    x += (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    w += (h / 6.0) * (w1 + 2.0 * w2 + 2.0 * w3 + w4);
  }
  // Newton polish onto the level set; a fixed count keeps the map smooth.
  for (int it = 0; it < 4; ++it) {
    guard(x);
    Eigen::VectorXd delta = slice_velocity(P, level, x, eval_level(level, to_point(x)));
    w -= P.omega().evaluate_on(to_point(x), delta) * w;
    x += delta;
  }
  if (eval_level(level, to_point(x)).cwiseAbs().maxCoeff() > 1e-10) {
    throw PreconditionError("leaf does not reach the slice within tolerance");
  }

  // Slice coordinates of the foot point by Gauss-Newton on S(q) = x.
  const ChartMap& S = spec_.slice;
  Point q = S.source()->center();
  bool converged = false;
  int extra = 0;
  for (int it = 0; it < 60 && extra < 2; ++it) {
    Eigen::VectorXd r = to_vector(S.apply(q)) - x;
    Eigen::MatrixXd jac = S.jacobian().evaluate(q);
    Eigen::VectorXd dq = jac.colPivHouseholderQr().solve(r);
    for (std::size_t a = 0; a < q.size(); ++a) q[a] -= dq(static_cast<Eigen::Index>(a));
    if (dq.norm() < 1e-13) converged = true;
    if (converged) ++extra;
  }
  if ((to_vector(S.apply(q)) - x).norm() > 1e-9) throw PreconditionError("foot point is not on the slice image");

  Projection out;
  out.q = q;
  out.frame = w.inverse();
  out.foot = to_point(x);
  return out;
}

QuotientPuzzle build_quotient(const Puzzle& puzzle, SliceSpec spec, std::size_t flow_steps) {
  if (puzzle.degree() != 1) throw PreconditionError("quotients need a solder 1-form");
  const std::size_t m = puzzle.dim();
  auto points = sample_points(puzzle.chart(), 50, 0x51ACEULL);
  RankProfile profile = rank_profile(puzzle, points);
  if (profile.classification == RankClass::variable) throw PreconditionError("solder form has variable rank");
  if (profile.kernel_dim == 0) {
    throw PreconditionError("solder form is " + to_string(profile.classification) +
                            ": not surjective with a kernel, so there is nothing to quotient");
  }
  if (spec.level.size() != profile.kernel_dim) {
    throw DimensionError("slice needs one level function per kernel dimension (" +
                         std::to_string(profile.kernel_dim) + ")");
  }
  if (!(*spec.slice.target() == puzzle.chart())) throw DimensionError("slice does not map into the puzzle chart");
  if (spec.slice.source()->dim() + profile.kernel_dim != m) {
    throw DimensionError("slice dimension must equal dim - kernel dimension");
  }
  double residual = max_integrability_residual(puzzle);
  if (residual > 1e-8) {
    throw PreconditionError("puzzle is not integrable (residual " + std::to_string(residual) + ")");
  }

  LevelData level = level_data(spec, m);
  for (const Point& q : sample_points(*spec.slice.source(), 20, 0x51ACEULL)) {
    Point x = spec.slice.apply(q);
    if (!puzzle.chart().contains(x, 1e-9)) throw PreconditionError("slice leaves the chart");
    if (eval_level(level, x).cwiseAbs().maxCoeff() > 1e-10) {
      throw PreconditionError("slice image is not contained in the level set");
    }
    Eigen::MatrixXd dfk = eval_level_gradient(level, x) * kernel_matrix(puzzle, x, profile.kernel_dim);
    if (numerical_rank(dfk) < profile.kernel_dim) throw PreconditionError("slice is not transverse to the kernel");
  }

  Puzzle quotient = pullback_puzzle(puzzle, spec.slice);
  return QuotientPuzzle(puzzle, std::move(quotient), std::move(spec), flow_steps);
}

QuotientCheck check_quotient(const QuotientPuzzle& qp, std::size_t samples, std::uint64_t seed, double h) {
  auto points = sample_points(qp.original().chart(), samples, seed, 0.05);
  return check_quotient(qp, points, h);
}

QuotientCheck check_quotient(const QuotientPuzzle& qp, std::span<const Point> points, double h) {
  const Puzzle& P = qp.original();
  const Puzzle& Qz = qp.quotient();
  const std::size_t m = P.dim();
  const auto M = static_cast<Eigen::Index>(m);
  const auto D = static_cast<Eigen::Index>(Qz.dim());

  QuotientCheck out;
  for (const Point& x : points) {
    Projection centre = qp.project(x);
    Eigen::MatrixXd t = centre.frame;
    Eigen::MatrixXd tinv = t.inverse();
    Eigen::MatrixXd dq(D, M);
    std::vector<Eigen::MatrixXd> dt;
    for (std::size_t a = 0; a < m; ++a) {
      Point xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      Projection pp = qp.project(xp);
      Projection pm = qp.project(xm);
      for (Eigen::Index r = 0; r < D; ++r) {
        dq(r, static_cast<Eigen::Index>(a)) = (pp.q[static_cast<std::size_t>(r)] - pm.q[static_cast<std::size_t>(r)]) / (2 * h);
      }
      dt.push_back((pp.frame - pm.frame) / (2 * h));
    }

    Eigen::MatrixXd phi_here = tinv * solder_matrix(P, x);
    Eigen::MatrixXd phi_bar = solder_matrix(Qz, centre.q) * dq;
    out.phi = std::max(out.phi, (phi_here - phi_bar).cwiseAbs().maxCoeff());

    for (std::size_t a = 0; a < m; ++a) {
      Eigen::VectorXd ea = Eigen::VectorXd::Unit(M, static_cast<Eigen::Index>(a));
      Eigen::MatrixXd w_here = tinv * dt[a] + tinv * P.omega().evaluate_on(x, ea) * t;
      Eigen::MatrixXd w_bar = Qz.omega().evaluate_on(centre.q, dq.col(static_cast<Eigen::Index>(a)));
      out.omega = std::max(out.omega, (w_here - w_bar).cwiseAbs().maxCoeff());
    }
    if (P.metric() && Qz.metric()) {
      Eigen::MatrixXd g_here = t.transpose() * P.metric()->matrix().evaluate(x) * t;
      Eigen::MatrixXd g_bar = Qz.metric()->matrix().evaluate(centre.q);
      out.metric = std::max(out.metric, (g_here - g_bar).cwiseAbs().maxCoeff());
    }
    ++out.samples;
  }
  return out;
}

}  // namespace solderlab
