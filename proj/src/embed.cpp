#include "solderlab/embed.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "solderlab/errors.hpp"

namespace solderlab {

namespace {

Expr dot(const std::vector<Expr>& u, const ExprMatrix& g, const std::vector<Expr>& v) {
  Expr acc;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].is_zero()) continue;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j].is_zero() || g(i, j).is_zero()) continue;
      acc += u[i] * g(i, j) * v[j];
    }
  }
  return acc;
}

std::vector<Expr> column(const ExprMatrix& m, std::size_t c) {
  std::vector<Expr> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m(r, c);
  return out;
}

double eval_or_nan(const Expr& e, std::span<const double> p) {
  try {
    return evaluate(e, p);
  } catch (const DomainError&) {
    return std::nan("");
  }
}

}  // namespace

AdaptedFrame adapted_frame(const Puzzle& puzzle, const std::vector<std::vector<Expr>>& completion,
                           std::size_t samples, std::uint64_t seed) {
  if (puzzle.degree() != 1) throw PreconditionError("adapted frames need a solder 1-form");
  if (!puzzle.metric()) throw PreconditionError("adapted frames need a fiber metric");
  const std::size_t m = puzzle.dim();
  const std::size_t n = puzzle.rank();
  const std::size_t k = n - std::min(n, m);
  auto points = sample_points(puzzle.chart(), samples, seed);
  RankProfile profile = rank_profile(puzzle, points);
  if (profile.classification != RankClass::injective && profile.classification != RankClass::isomorphism) {
    throw PreconditionError("adapted frames need an injective solder form (got " + to_string(profile.classification) +
                            ")");
  }
  const ExprMatrix& g = puzzle.metric()->matrix();
  const ChartPtr& chart = puzzle.chart_ptr();

  ExprMatrix e(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = puzzle.phi()[i].one_form_coefficients();
    for (std::size_t a = 0; a < m; ++a) e(i, a) = row[a];
  }
  ExprMatrix gram = e.transpose() * g * e;
  ExprMatrix gram_inv = inverse(gram);

  std::vector<std::vector<Expr>> candidates = completion;
  if (candidates.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Expr> c(n);
      c[i] = Expr(1.0);
      candidates.push_back(std::move(c));
    }
  }
  const Point centre = puzzle.chart().center();
  std::vector<std::vector<Expr>> normals;
  for (const auto& c : candidates) {
    if (normals.size() == k) break;
    if (c.size() != n) throw DimensionError("completion vectors need one entry per bundle index");
    // Remove the tangential part: v = c - E G^{-1} E^T g c.
    std::vector<Expr> v = c;
    std::vector<Expr> etgc(m);
    for (std::size_t a = 0; a < m; ++a) etgc[a] = dot(column(e, a), g, c);
    for (std::size_t a = 0; a < m; ++a) {
      Expr coef;
      for (std::size_t b = 0; b < m; ++b) {
        if (!gram_inv(a, b).is_zero() && !etgc[b].is_zero()) coef += gram_inv(a, b) * etgc[b];
      }
      if (coef.is_zero()) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (!e(i, a).is_zero()) v[i] -= coef * e(i, a);
      }
    }
    for (const auto& nu : normals) {
      Expr proj = dot(nu, g, v);
      if (proj.is_zero()) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (!nu[i].is_zero()) v[i] -= proj * nu[i];
      }
    }
    Expr norm2 = dot(v, g, v);
    double size = eval_or_nan(norm2, centre);
    double reference = eval_or_nan(dot(c, g, c), centre);
    if (!(size > 1e-8 * std::max(1.0, reference))) continue;
    Expr inv_norm = Expr(1.0) / sqrt(norm2);
    for (auto& x : v) x = x * inv_norm;
    normals.push_back(std::move(v));
  }
  if (normals.size() != k) throw SingularError("completion does not span the normal directions");

  ExprMatrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < m; ++a) p(i, a) = e(i, a);
    for (std::size_t mu = 0; mu < k; ++mu) p(i, m + mu) = normals[mu][i];
  }
  for (const Point& x : points) {
    Eigen::MatrixXd pv = p.evaluate(x);
    if (numerical_rank(pv) < n) throw SingularError("adapted frame degenerates at a sample point");
  }

  ExprMatrix block(n, n);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) block(a, b) = gram_inv(a, b);
  for (std::size_t mu = 0; mu < k; ++mu) block(m + mu, m + mu) = Expr(1.0);
  ExprMatrix p_inv = block * p.transpose() * g;

  AdaptedFrame frame{p, p_inv, ConnectionForms(chart, n), p.transpose() * g * p, BundleValuedForm(chart, n, 1), m, n};

  std::vector<DifferentialForm> dp;
  dp.reserve(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) dp.push_back(exterior_derivative(DifferentialForm::function(chart, p(r, c))));
  // omega P
  std::vector<DifferentialForm> wp;
  wp.reserve(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      DifferentialForm acc(chart, 1);
      for (std::size_t l = 0; l < n; ++l) {
        if (!p(l, c).is_zero() && !puzzle.omega()(r, l).is_zero()) acc += p(l, c) * puzzle.omega()(r, l);
      }
      wp.push_back(std::move(acc));
    }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      DifferentialForm acc(chart, 1);
      for (std::size_t r = 0; r < n; ++r) {
        if (p_inv(i, r).is_zero()) continue;
        const auto& term = dp[r * n + j];
        const auto& rot = wp[r * n + j];
        if (!term.is_zero()) acc += p_inv(i, r) * term;
        if (!rot.is_zero()) acc += p_inv(i, r) * rot;
      }
      frame.omega.set(i, j, std::move(acc));
    }
    DifferentialForm phi(chart, 1);
    for (std::size_t r = 0; r < n; ++r) {
      if (!p_inv(i, r).is_zero()) phi += p_inv(i, r) * puzzle.phi()[r];
    }
    frame.phi.set(i, std::move(phi));
  }
  return frame;
}

std::vector<ExprMatrix> extract_h(const AdaptedFrame& frame) {
  const std::size_t m = frame.m;
  const std::size_t k = frame.n - m;
  std::vector<ExprMatrix> h;
  for (std::size_t mu = 0; mu < k; ++mu) {
    ExprMatrix hm(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) hm(a, b) = frame.omega(m + mu, a).coefficient({b});
    h.push_back(std::move(hm));
  }
  return h;
}

std::vector<ExprMatrix> extract_A(const AdaptedFrame& frame) {
  const std::size_t m = frame.m;
  const std::size_t k = frame.n - m;
  std::vector<ExprMatrix> out;
  for (std::size_t a = 0; a < m; ++a) {
    ExprMatrix am(k, k);
    for (std::size_t mu = 0; mu < k; ++mu)
      for (std::size_t nu = 0; nu < k; ++nu) am(mu, nu) = frame.omega(m + mu, m + nu).coefficient({a});
    out.push_back(std::move(am));
  }
  return out;
}

std::vector<ExprMatrix> zero_S(std::size_t m, std::size_t k) { return std::vector<ExprMatrix>(m, ExprMatrix(k, k)); }

double h_symmetry_defect(const std::vector<ExprMatrix>& h, std::span<const Point> points) {
  double worst = 0.0;
  for (const Point& p : points)
    for (const auto& hm : h) {
      Eigen::MatrixXd v = hm.evaluate(p);
      worst = std::max(worst, (v - v.transpose()).cwiseAbs().maxCoeff());
    }
  return worst;
}

double A_antisymmetry_defect(const std::vector<ExprMatrix>& a, std::span<const Point> points) {
  double worst = 0.0;
  for (const Point& p : points)
    for (const auto& am : a) {
      if (am.rows() == 0) continue;
      Eigen::MatrixXd v = am.evaluate(p);
      worst = std::max(worst, (v + v.transpose()).cwiseAbs().maxCoeff());
    }
  return worst;
}

SplitResidual split_residual(const AdaptedFrame& frame, std::span<const Point> points) {
  SplitResidual out;
  const std::size_t m = frame.m;
  for (std::size_t i = 0; i < frame.n; ++i) {
    DifferentialForm r = i < m ? exterior_derivative(frame.phi[i]) : DifferentialForm(frame.phi.chart_ptr(), 2);
    for (std::size_t b = 0; b < m; ++b) {
      if (!frame.omega(i, b).is_zero()) r += wedge(frame.omega(i, b), frame.phi[b]);
    }
    double v = max_abs_coefficient(r, points);
    if (i < m) out.tangential = std::max(out.tangential, v); else out.normal = std::max(out.normal, v);
  }
  return out;
}

AmbientMetric build_ambient_metric(const ChartPtr& base, const ExprMatrix& g_tangential,
                                   const std::vector<ExprMatrix>& h, const std::vector<ExprMatrix>& A,
                                   const std::vector<ExprMatrix>& S, std::size_t samples, std::uint64_t seed) {
  const std::size_t m = base->dim();
  const std::size_t k = h.size();
  const std::size_t n = m + k;
  if (g_tangential.rows() != m || g_tangential.cols() != m) throw DimensionError("tangential metric shape mismatch");
  if (A.size() != m || S.size() != m) throw DimensionError("A and S need one block per tangential index");
  for (std::size_t b = 0; b < m; ++b) {
    if (S[b].rows() != k || S[b].cols() != k || A[b].rows() != k || A[b].cols() != k) {
      throw DimensionError("A and S blocks must be k x k");
    }
    for (std::size_t mu = 0; mu < k; ++mu)
      for (std::size_t nu = mu + 1; nu < k; ++nu) {
        if (to_string(S[b](mu, nu)) != to_string(S[b](nu, mu))) {
          throw PreconditionError("S must be symmetric in its normal indices");
        }
      }
  }

  std::vector<std::string> names = base->coords();
  std::set<std::string> taken(names.begin(), names.end());
  for (std::size_t mu = 0; mu < k; ++mu) {
    std::string name = "t" + std::to_string(mu + 1);
    while (taken.count(name)) name = "_" + name;
    taken.insert(name);
    names.push_back(name);
  }
  std::vector<Expr> t;
  for (std::size_t mu = 0; mu < k; ++mu) t.push_back(Expr::variable(m + mu, names[m + mu]));

  ExprMatrix G(n, n);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      Expr acc = g_tangential(a, b);
      for (std::size_t mu = 0; mu < k; ++mu) {
        if (!h[mu](a, b).is_zero()) acc -= 2.0 * t[mu] * h[mu](a, b);
      }
      G(a, b) = acc;
    }
  for (std::size_t mu = 0; mu < k; ++mu) G(m + mu, m + mu) = Expr(1.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t mu = 0; mu < k; ++mu) {
      Expr acc;
      for (std::size_t nu = 0; nu < k; ++nu) {
        Expr inner = A[a](mu, nu);
        for (std::size_t b = 0; b < m; ++b) {
          if (!g_tangential(a, b).is_zero() && !S[b](mu, nu).is_zero()) inner += g_tangential(a, b) * S[b](mu, nu);
        }
        if (!inner.is_zero()) acc += t[nu] * inner;
      }
      G(a, m + mu) = acc;
      G(m + mu, a) = acc;
    }

  double radius = 0.0;
  std::vector<Interval> box = base->box();
  for (double r = 1.0; r >= 1.0 / 1024.0; r *= 0.5) {
    std::vector<Interval> trial = box;
    for (std::size_t mu = 0; mu < k; ++mu) trial.push_back({-r, r});
    Chart probe(names, trial);
    bool ok = true;
    for (const Point& p : sample_points(probe, samples, seed, 0.0)) {
      Eigen::MatrixXd gv;
      try {
        gv = G.evaluate(p);
      } catch (const DomainError&) {
        ok = false;
        break;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gv, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() <= 0.0) {
        ok = false;
        break;
      }
    }
    if (ok) {
      radius = r;
      break;
    }
  }
  std::vector<Interval> full = box;
  double extent = radius > 0.0 ? radius : 1.0 / 1024.0;
  for (std::size_t mu = 0; mu < k; ++mu) full.push_back({-extent, extent});
  return AmbientMetric{make_chart(names, full), std::move(G), radius};
}

std::vector<ExprMatrix> christoffel_symbols(const ExprMatrix& metric) {
  const std::size_t n = metric.rows();
  ExprMatrix inv = inverse(metric);
  std::vector<ExprMatrix> dg;
  for (std::size_t c = 0; c < n; ++c) dg.push_back(differentiate(metric, c));
  std::vector<ExprMatrix> gamma(n, ExprMatrix(n, n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) {
        Expr acc;
        for (std::size_t l = 0; l < n; ++l) {
          if (inv(i, l).is_zero()) continue;
          Expr lower = dg[j](l, k) + dg[k](l, j) - dg[l](j, k);
          if (!lower.is_zero()) acc += inv(i, l) * lower;
        }
        acc = 0.5 * acc;
        gamma[i](j, k) = acc;
        gamma[i](k, j) = acc;
      }
  return gamma;
}

ConnectionForms levi_civita_forms(const ChartPtr& chart, const ExprMatrix& metric) {
  const std::size_t n = metric.rows();
  if (chart->dim() != n) throw DimensionError("metric size differs from chart dimension");
  auto gamma = christoffel_symbols(metric);
  ConnectionForms varpi(chart, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      DifferentialForm w(chart, 1);
      for (std::size_t k = 0; k < n; ++k) w.set({k}, gamma[i](k, j));
      varpi.set(i, j, std::move(w));
    }
  return varpi;
}

EmbeddingReport verify_embedding(const AdaptedFrame& frame, const std::vector<ExprMatrix>& h,
                                 const std::vector<ExprMatrix>& A, const std::vector<ExprMatrix>& S,
                                 const AmbientMetric& G, const ConnectionForms& varpi, std::span<const Point> points) {
  const std::size_t m = frame.m;
  const std::size_t n = frame.n;
  const std::size_t k = n - m;
  if (varpi.rank() != n || G.chart->dim() != n) throw DimensionError("ambient data has the wrong dimension");

  ExprMatrix g_t(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) g_t(a, b) = frame.metric(a, b);

  EmbeddingReport out;
  for (const Point& x : points) {
    Point xt = x;
    xt.resize(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < m; ++a) {
          double pulled = evaluate(varpi(i, j).coefficient({a}), xt);
          double target = evaluate(frame.omega(i, j).coefficient({a}), x);
          out.pullback = std::max(out.pullback, std::abs(pulled - target));
        }

    Eigen::MatrixXd ginv = g_t.evaluate(x).inverse();
    std::vector<Eigen::MatrixXd> hv;
    for (const auto& hm : h) hv.push_back(hm.evaluate(x));
    std::vector<Eigen::MatrixXd> av;
    std::vector<Eigen::MatrixXd> sv;
    for (std::size_t a = 0; a < m; ++a) {
      av.push_back(k ? A[a].evaluate(x) : Eigen::MatrixXd());
      sv.push_back(k ? S[a].evaluate(x) : Eigen::MatrixXd());
    }
    for (std::size_t nu = 0; nu < k; ++nu) {
      const auto NU = static_cast<Eigen::Index>(nu);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double got = evaluate(varpi(i, j).coefficient({m + nu}), xt);
          double expected = 0.0;
          if (i < m && j < m) {
            for (std::size_t c = 0; c < m; ++c) {
              expected -= ginv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) *
                          hv[nu](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
            }
          } else if (i < m) {
            expected = sv[i](static_cast<Eigen::Index>(j - m), NU);
          } else if (j < m) {
            expected = av[j](static_cast<Eigen::Index>(i - m), NU);
          }
          out.first_order = std::max(out.first_order, std::abs(got - expected));
        }
    }
    ++out.samples;
  }
  return out;
}

}  // namespace solderlab
