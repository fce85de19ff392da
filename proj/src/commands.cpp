#include "solderlab/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <set>

#include "solderlab/embed.hpp"
#include "solderlab/errors.hpp"
#include "solderlab/observables.hpp"
#include "solderlab/palatini.hpp"
#include "solderlab/solderint.hpp"

namespace solderlab {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Finite-difference comparisons (quotient checks) cannot reach the residual
// tolerance; first-order ambient blocks and Einstein tensors are compared
// at 100 x tol.
constexpr double kFiniteDifferenceTol = 1e-7;
constexpr double kLooseFactor = 100.0;

class Recorder {
 public:
  explicit Recorder(PuzzleReport& r) : report_(r), start_(Clock::now()) {}

  void add(const std::string& name, double value, double tol, std::size_t samples) {
    auto now = Clock::now();
    CheckRecord c;
    c.name = name;
    c.value = value;
    c.tolerance = tol;
    c.pass = value <= tol;
    c.samples = samples;
    c.wall_ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    report_.checks.push_back(std::move(c));
  }

  void flag(const std::string& name, bool ok, std::size_t samples) { add(name, ok ? 0.0 : 1.0, 0.0, samples); }

 private:
  PuzzleReport& report_;
  Clock::time_point start_;
};

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json point_json(const Point& p) { return json(p); }

const Puzzle& puzzle_of(const PuzzleFile& f) {
  if (!f.puzzle) throw FormatError("puzzle file was not loaded");
  return *f.puzzle;
}

std::size_t integer(const PuzzleFile& f, const std::string& sec, const std::string& key, std::size_t fallback) {
  if (!f.value(sec, key)) return fallback;
  auto v = f.numbers(sec, key);
  if (v.size() != 1 || v[0] < 0 || v[0] != static_cast<double>(static_cast<std::size_t>(v[0]))) {
    throw FormatError(f.where(sec, key) + ": expected a non-negative integer");
  }
  return static_cast<std::size_t>(v[0]);
}

bool flag_value(const PuzzleFile& f, const std::string& sec, const std::string& key) {
  auto v = f.value(sec, key);
  if (!v) return false;
  if (*v == "true") return true;
  if (*v == "false") return false;
  throw FormatError(f.where(sec, key) + ": expected true or false");
}

ExprMatrix square_metric(const PuzzleFile& f, const std::string& sec, std::size_t n) {
  ExprMatrix g = ExprMatrix::identity(n);
  const Section* s = f.section(sec);
  if (!s) return g;
  bool any = false;
  std::set<std::pair<std::size_t, std::size_t>> given;
  for (const auto& [key, text] : *s) {
    if (key == "metric") {
      if (text != "identity") throw FormatError(f.where(sec, key) + ": only 'identity' is accepted here");
      continue;
    }
    if (key.rfind("metric.", 0) != 0) continue;
    auto rest = key.substr(7);
    auto dot = rest.find('.');
    if (dot == std::string::npos) throw FormatError(f.where(sec, key) + ": expected metric.i.j");
    std::size_t i = 0;
    std::size_t j = 0;
    try {
      i = std::stoul(rest.substr(0, dot));
      j = std::stoul(rest.substr(dot + 1));
    } catch (const std::exception&) {
      throw FormatError(f.where(sec, key) + ": expected metric.i.j");
    }
    if (i == 0 || j == 0 || i > n || j > n) throw FormatError(f.where(sec, key) + ": index out of range");
    if (!any) g = ExprMatrix(n, n);
    any = true;
    g(i - 1, j - 1) = f.expression(sec, key);
    given.insert({i - 1, j - 1});
  }
  for (auto [i, j] : given) {
    if (!given.count({j, i})) g(j, i) = g(i, j);
  }
  return g;
}

void require_one_form(const Puzzle& p, const std::string& command) {
  if (p.degree() != 1) throw PreconditionError(command + " needs a solder 1-form");
}

// ---------------------------------------------------------------------------

void cmd_check(const PuzzleFile& f, const RunOptions& o, PuzzleReport& r) {
  const Puzzle& p = puzzle_of(f);
  Recorder rec(r);
  rec.add("integrability", max_integrability_residual(p, o.samples, o.seed), o.tol, o.samples);
  r.info["check"] = {{"dim", p.dim()}, {"rank", p.rank()}, {"degree", p.degree()}, {"metric", p.metric().has_value()}};
}

RankProfile profile_of(const PuzzleFile& f, const RunOptions& o) {
  const Puzzle& p = puzzle_of(f);
  auto pts = sample_points(p.chart(), o.samples, o.seed);
  return rank_profile(p, pts);
}

void cmd_classify(const PuzzleFile& f, const RunOptions& o, PuzzleReport& r) {
  const Puzzle& p = puzzle_of(f);
  Recorder rec(r);
  RankProfile prof = profile_of(f, o);
  std::set<std::size_t> distinct(prof.ranks.begin(), prof.ranks.end());
  rec.add("constant_rank", static_cast<double>(distinct.size() - 1), 0.0, o.samples);
  json info = {{"classification", to_string(prof.classification)}};
  if (prof.classification != RankClass::variable) {
    info["rank"] = prof.rank;
    info["kernel_dim"] = prof.kernel_dim;
  } else {
    info["ranks_seen"] = json(std::vector<std::size_t>(distinct.begin(), distinct.end()));
  }
  if (f.has("frobenius")) {
    VectorField x(p.chart_ptr(), f.expressions("frobenius", "X"));
    VectorField y(p.chart_ptr(), f.expressions("frobenius", "Y"));
    auto pts = sample_points(p.chart(), o.samples, o.seed);
    auto fr = frobenius_residual(p, x, y, pts);
    rec.add("frobenius", fr.max_residual, o.tol, o.samples);
    info["frobenius_kernel_defect"] = fr.kernel_defect;
  }
  r.info["classify"] = std::move(info);
}

void cmd_metric(const PuzzleFile& f, const RunOptions& o, PuzzleReport& r) {
  const Puzzle& p = puzzle_of(f);
  if (!p.metric()) throw PreconditionError("metric needs a [bundle] metric");
  Recorder rec(r);
  rec.add("metric_compatibility", p.metric_defect(), Puzzle::kMetricTolerance, 50);
  auto pts = sample_points(p.chart(), o.samples, o.seed);
  double min_eig = p.metric()->min_eigenvalue(pts);
  rec.add("metric_positive", min_eig > 0.0 ? 0.0 : 1.0, 0.0, o.samples);
  json info = {{"min_eigenvalue", min_eig}};
  if (p.degree() == 1) {
    Point c = p.chart().center();
    info["induced_metric_at_center"] = matrix_json(induced_metric(p).evaluate(c));
  }
  r.info["metric"] = std::move(info);
}

std::vector<std::vector<Expr>> completion_of(const PuzzleFile& f, const Puzzle& p) {
  std::vector<std::vector<Expr>> out;
  if (!f.has("embed")) return out;
  for (std::size_t k = 1;; ++k) {
    std::string key = "completion." + std::to_string(k);
    if (!f.value("embed", key)) break;
    auto v = f.expressions("embed", key, &p.chart());
    if (v.size() != p.rank()) throw FormatError(f.where("embed", key) + ": expected one entry per bundle index");
    out.push_back(std::move(v));
  }
  return out;
}

void embed_checks(const Puzzle& p, const std::vector<std::vector<Expr>>& completion, const RunOptions& o,
                  PuzzleReport& r, const std::string& prefix) {
  require_one_form(p, "embed");
  Recorder rec(r);
  AdaptedFrame frame = adapted_frame(p, completion, o.samples, o.seed);
  auto h = extract_h(frame);
  auto a = extract_A(frame);
  auto s = zero_S(frame.m, frame.n - frame.m);
  auto pts = sample_points(p.chart(), o.samples, o.seed);
  rec.add(prefix + "h_symmetry", h_symmetry_defect(h, pts), o.tol, pts.size());
  rec.add(prefix + "A_antisymmetry", A_antisymmetry_defect(a, pts), o.tol, pts.size());
  auto split = split_residual(frame, pts);
  rec.add(prefix + "split_tangential", split.tangential, o.tol, pts.size());
  rec.add(prefix + "split_normal", split.normal, o.tol, pts.size());
  ExprMatrix gt(frame.m, frame.m);
  for (std::size_t i = 0; i < frame.m; ++i)
    for (std::size_t j = 0; j < frame.m; ++j) gt(i, j) = frame.metric(i, j);
  AmbientMetric amb = build_ambient_metric(p.chart_ptr(), gt, h, a, s, 200, o.seed);
  auto varpi = levi_civita_forms(amb.chart, amb.G);
  auto few = sample_points(p.chart(), std::min<std::size_t>(o.samples, 20), o.seed);
  auto rep = verify_embedding(frame, h, a, s, amb, varpi, few);
  rec.add(prefix + "pullback_at_t0", rep.pullback, o.tol, rep.samples);
  rec.add(prefix + "first_order_blocks", rep.first_order, kLooseFactor * o.tol, rep.samples);
  rec.add(prefix + "ambient_positive", amb.positivity_radius > 0.0 ? 0.0 : 1.0, 0.0, 200);
  Point c = p.chart().center();
  json hs = json::array();
  for (const auto& hm : h) hs.push_back(matrix_json(hm.evaluate(c)));
  json as = json::array();
  for (const auto& am : a) as.push_back(matrix_json(am.evaluate(c)));
  r.info[prefix + "embed"] = {{"m", frame.m},
                              {"n", frame.n},
                              {"positivity_radius", amb.positivity_radius},
                              {"center", point_json(c)},
                              {"h_at_center", std::move(hs)},
                              {"A_at_center", std::move(as)}};
}

void cmd_embed(const PuzzleFile& f, const RunOptions& o, PuzzleReport& r) {
  const Puzzle& p = puzzle_of(f);
  embed_checks(p, completion_of(f, p), o, r, "");
}

void cmd_quotient(const PuzzleFile& f, const RunOptions& o, PuzzleReport& r) {
  const Puzzle& p = puzzle_of(f);
  if (!f.has("quotient")) throw PreconditionError("quotient needs a [quotient] section");
  ChartPtr q = chart_from_section(f, "quotient");
  ChartMap slice(q, p.chart_ptr(), f.expressions("quotient", "map", q.get()));
  SliceSpec spec{slice, f.expressions("quotient", "level")};
  Recorder rec(r);
  QuotientPuzzle qp = build_quotient(p, spec, integer(f, "quotient", "flow_steps", 200));
  QuotientCheck check = [&] {
    if (f.value("quotient", "check.coords")) throw FormatError("[quotient] check box uses check_domain.NAME keys");
    bool sub = false;
    std::vector<Interval> box = p.chart().box();
    for (std::size_t i = 0; i < p.dim(); ++i) {
      std::string key = "check_domain." + p.chart().coords()[i];
      if (!f.value("quotient", key)) continue;
      auto v = f.numbers("quotient", key);
      if (v.size() != 2) throw FormatError(f.where("quotient", key) + ": expected 'lo, hi'");
      box[i] = {v[0], v[1]};
      sub = true;
    }
    if (!sub) return check_quotient(qp, o.samples, o.seed);
    Chart probe(p.chart().coords(), box);
    auto pts = sample_points(probe, o.samples, o.seed);
    return check_quotient(qp, pts);
  }();
  rec.add("quotient_phi", check.phi, kFiniteDifferenceTol, check.samples);
  rec.add("quotient_omega", check.omega, kFiniteDifferenceTol, check.samples);
  if (p.metric()) rec.add("quotient_metric", check.metric, kFiniteDifferenceTol, check.samples);
  rec.add("quotient_integrability", max_integrability_residual(qp.quotient(), o.samples, o.seed), o.tol, o.samples);
  RankProfile prof = rank_profile(qp.quotient(), sample_points(*q, o.samples, o.seed));
  r.info["quotient"] = {{"coords", q->coords()}, {"classification", to_string(prof.classification)}};
  if (flag_value(f, "quotient", "embed")) {
    std::vector<std::vector<Expr>> completion;
    for (std::size_t k = 1;; ++k) {
      std::string key = "completion." + std::to_string(k);
      if (!f.value("quotient", key)) break;
      completion.push_back(f.expressions("quotient", key, q.get()));
    }
    embed_checks(qp.quotient(), completion, o, r, "quotient_");
  }
}

void cmd_transport(const PuzzleFile& f, const RunOptions& o, PuzzleReport& r) {
  const Puzzle& p = puzzle_of(f);
  require_one_form(p, "transport");
  if (!f.has("transport") && !f.has("leaf")) throw PreconditionError("transport needs a [transport] or [leaf] section");
  Recorder rec(r);
  json info;
  if (f.has("transport")) {
    ChartPtr ts = SurfaceFamily::parameter_chart();
    SurfaceFamily gamma(p.chart_ptr(), f.expressions("transport", "family", ts.get()));
    double excursion = gamma.domain_excursion(200, o.seed);
    if (excursion > 0.0) throw PreconditionError("[transport] family leaves the chart domain");
    auto nodes = parameter_grid(10);
    auto id = identity_residual(p, gamma, nodes);
    rec.add("surface_identity", id.max_abs, o.tol, nodes.size());
    std::size_t t_nodes = integer(f, "transport", "t_nodes", 8);
    auto table = integrate_transport_system(p, gamma, t_nodes, o.steps);
    auto direct = direct_table(p, gamma, table);
    double diff = 0.0;
    for (std::size_t i = 0; i < table.f.size(); ++i)
      for (std::size_t k = 0; k < table.f[i].size(); ++k)
        diff = std::max(diff, (table.f[i][k] - direct.f[i][k]).cwiseAbs().maxCoeff());
    double tol = 10.0 * std::pow(table.step, 4);
    rec.add("transport_vs_direct", diff, tol, table.t.size() * table.s.size());
    info["step"] = table.step;
  }
  if (f.has("leaf")) {
    auto seed = f.numbers("leaf", "seed");
    auto dir = f.numbers("leaf", "direction");
    if (seed.size() != p.dim() || dir.size() != p.dim()) throw FormatError("[leaf] seed and direction need dim entries");
    Eigen::VectorXd sel = Eigen::Map<Eigen::VectorXd>(dir.data(), static_cast<Eigen::Index>(dir.size()));
    std::size_t steps = integer(f, "leaf", "steps", 100);
    double h = f.value("leaf", "step") ? f.numbers("leaf", "step").at(0) : 0.01;
    LeafTrace trace = leaf_flow(p, seed, sel, steps, h);
    rec.add("leaf_trace", leaf_trace_defect(p, trace), kFiniteDifferenceTol, trace.points.size());
    std::vector<VectorField> transversal;
    for (std::size_t k = 1;; ++k) {
      std::string key = "transversal." + std::to_string(k);
      if (!f.value("leaf", key)) break;
      transversal.emplace_back(p.chart_ptr(), f.expressions("leaf", key));
    }
    if (!transversal.empty()) {
      auto pf = parallel_frame_residual(p, trace, transversal);
      rec.add("parallel_frame", pf.max_abs, o.tol, trace.points.size());
    }
    info["leaf_points"] = trace.points.size();
    info["leaf_truncated"] = trace.truncated;
    info["leaf_end"] = point_json(trace.points.back());
  }
  r.info["transport"] = std::move(info);
}

void cmd_palatini(const PuzzleFile& f, const RunOptions& o, PuzzleReport& r) {
  const Puzzle& p = puzzle_of(f);
  Recorder rec(r);
  auto lambda = palatini_residual(p, o.samples, o.seed);
  rec.add("palatini_lambda", lambda.max_abs, o.tol, o.samples);
  auto pts = sample_points(p.chart(), o.samples, o.seed);
  auto einstein = einstein_residual(p, pts);
  rec.add("einstein", einstein.max_abs, kLooseFactor * o.tol, pts.size());
  bool agree = (lambda.max_abs <= o.tol) == (einstein.max_abs <= kLooseFactor * o.tol);
  rec.flag("palatini_einstein_equivalence", agree, o.samples);
  std::size_t nodes = integer(f, "palatini", "nodes", 6);
  std::vector<Interval> box = p.chart().box();
  for (std::size_t i = 0; i < 4; ++i) {
    std::string key = "box." + p.chart().coords()[i];
    if (!f.value("palatini", key)) continue;
    auto v = f.numbers("palatini", key);
    if (v.size() != 2) throw FormatError(f.where("palatini", key) + ": expected 'lo, hi'");
    box[i] = {v[0], v[1]};
  }
  r.info["palatini"] = {{"action", palatini_action(p, box, nodes)}, {"quadrature_nodes", nodes}};
}

void cmd_yangmills(const PuzzleFile& f, const RunOptions& o, PuzzleReport& r) {
  const Puzzle& p = puzzle_of(f);
  Recorder rec(r);
  ExprMatrix g = square_metric(f, "yangmills", p.dim());
  auto res = yang_mills_residual(p.omega(), g);
  auto pts = sample_points(p.chart(), o.samples, o.seed);
  rec.add("yang_mills", res.max_abs(pts), o.tol, pts.size());
}

void cmd_observable(const PuzzleFile& f, const RunOptions& o, PuzzleReport& r) {
  const Puzzle& p = puzzle_of(f);
  if (!f.has("observable")) throw PreconditionError("observable needs an [observable] section");
  Expr alpha = f.expression("observable", "alpha");
  Recorder rec(r);
  auto rep = classify_solvability(p, alpha, o.samples, o.seed, o.tol);
  json info = {{"kind", to_string(rep.kind)}, {"rank_class", to_string(rep.rank_class)}};
  if (auto want = f.value("observable", "expect")) {
    if (*want != "unique" && *want != "affine" && *want != "unsolvable") {
      throw FormatError(f.where("observable", "expect") + ": expected unique, affine or unsolvable");
    }
    rec.flag("solvability", *want == to_string(rep.kind), o.samples);
  }
  auto pts = sample_points(p.chart(), o.samples, o.seed);
  const DualSection* fixed = rep.f_fixed ? &*rep.f_fixed : (rep.f ? &*rep.f : nullptr);
  if (fixed) {
    DifferentialForm pairing(p.chart_ptr(), 1);
    for (std::size_t i = 0; i < p.rank(); ++i) pairing += fixed->f[i] * p.phi()[i];
    auto da = exterior_derivative(DifferentialForm::function(p.chart_ptr(), alpha));
    rec.add("pairing_matches_dalpha", max_abs_coefficient(pairing - da, pts), o.tol, pts.size());
    rec.add("observable_residual", max_abs_coefficient(observable_residual(p, *fixed), pts), o.tol, pts.size());
    Point c = p.chart().center();
    std::vector<double> values;
    for (const auto& e : rep.f->f) values.push_back(evaluate(e, c));
    info["f_at_center"] = values;
    info["annihilator_dim"] = rep.annihilator_dim;
  }
  if (rep.witness) {
    info["witness"] = {{"point", point_json(rep.witness->point)},
                       {"direction", std::vector<double>(rep.witness->direction.begin(), rep.witness->direction.end())},
                       {"dalpha", rep.witness->value}};
  }
  r.info["observable"] = std::move(info);
}

using Handler = void (*)(const PuzzleFile&, const RunOptions&, PuzzleReport&);

Handler handler(const std::string& command) {
  if (command == "check") return cmd_check;
  if (command == "classify") return cmd_classify;
  if (command == "metric") return cmd_metric;
  if (command == "embed") return cmd_embed;
  if (command == "quotient") return cmd_quotient;
  if (command == "transport") return cmd_transport;
  if (command == "palatini") return cmd_palatini;
  if (command == "yangmills") return cmd_yangmills;
  if (command == "observable") return cmd_observable;
  return nullptr;
}

void apply_expectations(const PuzzleFile& f, PuzzleReport& r) {
  std::set<std::string> fail;
  if (auto v = f.value("expect", "fail")) {
    for (auto& name : split_list(*v)) fail.insert(name);
  }
  if (auto v = f.value("expect", "integrable")) {
    if (*v == "false") fail.insert("integrability");
    else if (*v != "true") throw FormatError(f.where("expect", "integrable") + ": expected true or false");
  }
  if (auto v = f.value("expect", "vacuum")) {
    if (*v == "false") {
      fail.insert("palatini_lambda");
      fail.insert("einstein");
    } else if (*v != "true") {
      throw FormatError(f.where("expect", "vacuum") + ": expected true or false");
    }
  }
  std::set<std::string> seen;
  for (auto& c : r.checks) {
    if (!fail.count(c.name)) continue;
    seen.insert(c.name);
    c.expected_failure = true;
    c.pass = !c.pass;
  }
  for (const auto& name : fail) {
    if (!seen.count(name)) r.warnings.push_back("[expect] names check '" + name + "' which did not run");
  }
  const json& cls = r.info.contains("classify") ? r.info["classify"] : json();
  Recorder rec(r);
  if (auto v = f.value("expect", "classification")) {
    rec.flag("expected_classification", cls.value("classification", "") == *v, 0);
  }
  if (f.value("expect", "kernel_dim")) {
    auto want = integer(f, "expect", "kernel_dim", 0);
    rec.flag("expected_kernel_dim", cls.contains("kernel_dim") && cls["kernel_dim"].get<std::size_t>() == want, 0);
  }
}

}  // namespace

bool PuzzleReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"check",     "classify", "metric",    "embed",      "quotient",
                                                 "transport", "palatini", "yangmills", "observable", "report-all"};
  return names;
}

PuzzleReport run_command(const std::string& command, const PuzzleFile& file, const RunOptions& options) {
  if (command == "report-all") return run_all(file, options);
  Handler h = handler(command);
  if (!h) throw FormatError("unknown command '" + command + "'");
  PuzzleReport r;
  r.name = file.name;
  r.path = file.path;
  if (file.metric_warning) r.warnings.push_back("metric is not parallel for the connection");
  h(file, options, r);
  return r;
}

PuzzleReport run_all(const PuzzleFile& file, const RunOptions& options) {
  const Puzzle& p = puzzle_of(file);
  PuzzleReport r;
  r.name = file.name;
  r.path = file.path;
  if (file.metric_warning) r.warnings.push_back("metric is not parallel for the connection");
  cmd_check(file, options, r);
  cmd_classify(file, options, r);
  const std::string cls = r.info["classify"]["classification"].get<std::string>();
  if (p.metric()) cmd_metric(file, options, r);
  const bool one_form = p.degree() == 1;
  if (file.has("embed") || (one_form && p.metric() && cls == "injective")) cmd_embed(file, options, r);
  if (file.has("quotient")) cmd_quotient(file, options, r);
  if (file.has("transport") || file.has("leaf")) cmd_transport(file, options, r);
  if (file.has("palatini") || (one_form && p.metric() && p.dim() == 4 && cls == "isomorphism")) {
    cmd_palatini(file, options, r);
  }
  if (file.has("yangmills")) cmd_yangmills(file, options, r);
  if (file.has("observable")) cmd_observable(file, options, r);
  apply_expectations(file, r);
  return r;
}

json to_json(const PuzzleReport& report, bool timing) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    json j = {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}, {"samples", c.samples}};
    if (c.expected_failure) j["expected"] = "fail";
    if (timing) j["wall_ms"] = c.wall_ms;
    checks.push_back(std::move(j));
  }
  return {{"name", report.name},   {"file", report.path},         {"pass", report.pass()},
          {"checks", std::move(checks)}, {"info", report.info}, {"warnings", report.warnings}};
}

CliResult run_cli(const std::string& command, const std::string& path, const RunOptions& options) {
  namespace fs = std::filesystem;
  CliResult out;
  json puzzles = json::array();
  json errors = json::array();
  bool any_fail = false;

  std::vector<std::string> files;
  auto known = std::find(command_names().begin(), command_names().end(), command) != command_names().end();
  if (!known) {
    errors.push_back({{"file", path}, {"message", "unknown command '" + command + "'"}});
  } else if (fs::is_directory(path)) {
    if (command != "report-all") {
      errors.push_back({{"file", path}, {"message", "only report-all accepts a directory"}});
    } else {
      for (const auto& e : fs::recursive_directory_iterator(path)) {
        if (e.is_regular_file() && e.path().extension() == ".puzzle") files.push_back(e.path().string());
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) errors.push_back({{"file", path}, {"message", "no .puzzle files found"}});
    }
  } else {
    files.push_back(path);
  }

  for (const auto& file : files) {
    try {
      PuzzleFile pf = load_puzzle_file(file);
      PuzzleReport r = run_command(command, pf, options);
      any_fail = any_fail || !r.pass();
      puzzles.push_back(to_json(r, options.timing));
    } catch (const Error& e) {
      errors.push_back({{"file", file}, {"message", e.what()}});
    }
  }

  out.exit_code = !errors.empty() ? kExitInput : (any_fail ? kExitFail : kExitPass);
  out.report = {{"tool", "solderlab"},
                {"command", command},
                {"options", {{"tol", options.tol}, {"samples", options.samples}, {"steps", options.steps},
                             {"seed", options.seed}}},
                {"puzzles", std::move(puzzles)},
                {"errors", std::move(errors)},
                {"pass", out.exit_code == kExitPass},
                {"exit_code", out.exit_code}};
  return out;
}

}  // namespace solderlab
