#include "solderlab/puzzle_file.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "solderlab/errors.hpp"

namespace solderlab {

namespace {

const std::set<std::string> kSections = {"puzzle",   "chart",     "bundle",     "connection", "solder",
                                         "quotient", "transport", "leaf",       "embed",      "frobenius",
                                         "observable", "yangmills", "palatini", "expect"};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// 1-based index below `limit`, returned 0-based.
std::size_t one_based(const PuzzleFile& f, const std::string& sec, const std::string& key, const std::string& text,
                      std::size_t limit) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v == 0 || v > limit) {
    throw FormatError(f.where(sec, key) + ": index '" + text + "' out of range 1.." + std::to_string(limit));
  }
  return v - 1;
}

std::size_t count(const PuzzleFile& f, const std::string& sec, const std::string& key) {
  auto v = f.value(sec, key);
  if (!v) throw FormatError("[" + sec + "] missing key '" + key + "'");
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), n);
  if (ec != std::errc() || ptr != v->data() + v->size()) throw FormatError(f.where(sec, key) + ": expected an integer");
  return n;
}

std::vector<std::string> split_dots(const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  std::string item;
  while (std::getline(ss, item, '.')) parts.push_back(item);
  return parts;
}

void build_puzzle(PuzzleFile& f) {
  for (const auto& need : {"chart", "bundle", "solder"}) {
    if (!f.has(need)) throw FormatError(std::string("missing section [") + need + "]");
  }
  ChartPtr chart = chart_from_section(f, "chart");
  if (auto d = f.value("chart", "dim")) {
    if (count(f, "chart", "dim") != chart->dim()) throw FormatError(f.where("chart", "dim") + ": does not match coords");
  }
  for (const auto& [key, v] : *f.section("chart")) {
    if (key != "coords" && key != "dim" && key.rfind("domain.", 0) != 0) {
      throw FormatError(f.where("chart", key) + ": unknown key");
    }
  }
  const std::size_t m = chart->dim();
  const std::size_t n = count(f, "bundle", "rank");
  if (n == 0) throw FormatError(f.where("bundle", "rank") + ": rank must be positive");

  std::optional<FiberMetric> metric;
  ExprMatrix g(n, n);
  std::set<std::pair<std::size_t, std::size_t>> given;
  bool identity = false;
  for (const auto& [key, text] : *f.section("bundle")) {
    if (key == "rank") continue;
    if (key == "metric") {
      if (text != "identity") throw FormatError(f.where("bundle", key) + ": only 'identity' is accepted here");
      identity = true;
      continue;
    }
    auto parts = split_dots(key);
    if (parts.size() != 3 || parts[0] != "metric") throw FormatError(f.where("bundle", key) + ": unknown key");
    std::size_t i = one_based(f, "bundle", key, parts[1], n);
    std::size_t j = one_based(f, "bundle", key, parts[2], n);
    g(i, j) = f.expression("bundle", key);
    given.insert({i, j});
  }
  if (identity && !given.empty()) throw FormatError("[bundle] metric = identity conflicts with metric.i.j entries");
  if (identity) metric = FiberMetric::identity(chart, n);
  if (!given.empty()) {
    for (auto [i, j] : given) {
      if (!given.count({j, i})) g(j, i) = g(i, j);
    }
    metric = FiberMetric(chart, g);
  }

  ConnectionForms omega(chart, n);
  if (const Section* s = f.section("connection")) {
    for (const auto& [key, text] : *s) {
      auto parts = split_dots(key);
      if (parts.size() != 3 || parts[0] != "omega") throw FormatError(f.where("connection", key) + ": unknown key");
      std::size_t i = one_based(f, "connection", key, parts[1], n);
      std::size_t j = one_based(f, "connection", key, parts[2], n);
      auto coefs = f.expressions("connection", key);
      if (coefs.size() != m) {
        throw FormatError(f.where("connection", key) + ": expected " + std::to_string(m) + " coefficients");
      }
      omega.set(i, j, DifferentialForm::one_form(chart, coefs));
    }
  }

  const std::size_t p = f.value("solder", "degree") ? count(f, "solder", "degree") : 1;
  if (p == 0 || p > m) throw FormatError(f.where("solder", "degree") + ": degree must be in 1..dim");
  BundleValuedForm phi(chart, n, p);
  std::vector<DifferentialForm> comps(n, DifferentialForm(chart, p));
  for (const auto& [key, text] : *f.section("solder")) {
    if (key == "degree") continue;
    auto parts = split_dots(key);
    if (parts.size() != 3 || parts[0] != "phi") throw FormatError(f.where("solder", key) + ": unknown key");
    std::size_t i = one_based(f, "solder", key, parts[1], n);
    MultiIndex idx;
    for (const auto& a : split_list(parts[2])) {
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
      if (ec != std::errc() || ptr != a.data() + a.size() || v >= m) {
        throw FormatError(f.where("solder", key) + ": coordinate index '" + a + "' out of range 0.." +
                          std::to_string(m - 1));
      }
      if (!idx.empty() && v <= idx.back()) throw FormatError(f.where("solder", key) + ": multi-index must increase");
      idx.push_back(v);
    }
    if (idx.size() != p) throw FormatError(f.where("solder", key) + ": multi-index length differs from degree");
    comps[i].set(idx, f.expression("solder", key));
  }
  for (std::size_t i = 0; i < n; ++i) phi.set(i, comps[i]);

  try {
    f.puzzle.emplace(std::move(omega), std::move(phi), std::move(metric), MetricCheck::record);
  } catch (const Error& e) {
    throw FormatError(std::string("invalid puzzle: ") + e.what());
  }
  f.metric_warning = f.puzzle->metric() && !f.puzzle->metric_compatible();
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = text.find(',', start);
    out.push_back(trim(std::string_view(text).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

const Section* PuzzleFile::section(const std::string& name) const {
  auto it = sections.find(name);
  return it == sections.end() ? nullptr : &it->second;
}

std::string PuzzleFile::where(const std::string& section_name, const std::string& key) const {
  std::string out = "[" + section_name + "] " + key;
  if (auto it = lines.find(section_name + "." + key); it != lines.end()) out += " (line " + std::to_string(it->second) + ")";
  return out;
}

std::optional<std::string> PuzzleFile::value(const std::string& section_name, const std::string& key) const {
  const Section* s = section(section_name);
  if (!s) return std::nullopt;
  auto it = s->find(key);
  if (it == s->end()) return std::nullopt;
  return it->second;
}

Expr PuzzleFile::expression(const std::string& section_name, const std::string& key) const {
  auto v = value(section_name, key);
  if (!v) throw FormatError("[" + section_name + "] missing key '" + key + "'");
  try {
    return puzzle ? puzzle->chart().parse(*v) : chart_from_section(*this, "chart")->parse(*v);
  } catch (const ParseError& e) {
    throw FormatError(where(section_name, key) + ": " + e.what());
  }
}

std::vector<Expr> PuzzleFile::expressions(const std::string& section_name, const std::string& key,
                                          const Chart* chart) const {
  auto v = value(section_name, key);
  if (!v) throw FormatError("[" + section_name + "] missing key '" + key + "'");
  ChartPtr own;
  if (!chart) {
    if (puzzle) {
      chart = &puzzle->chart();
    } else {
      own = chart_from_section(*this, "chart");
      chart = own.get();
    }
  }
  std::vector<Expr> out;
  for (const auto& item : split_list(*v)) {
    try {
      out.push_back(chart->parse(item));
    } catch (const ParseError& e) {
      throw FormatError(where(section_name, key) + ": " + e.what());
    }
  }
  return out;
}

std::vector<double> PuzzleFile::numbers(const std::string& section_name, const std::string& key) const {
  auto v = value(section_name, key);
  if (!v) throw FormatError("[" + section_name + "] missing key '" + key + "'");
  std::vector<double> out;
  for (const auto& item : split_list(*v)) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw FormatError(where(section_name, key) + ": '" + item + "' is not a number");
    }
    out.push_back(x);
  }
  return out;
}

ChartPtr chart_from_section(const PuzzleFile& file, const std::string& section_name) {
  auto coords = file.value(section_name, "coords");
  if (!coords) throw FormatError("[" + section_name + "] missing key 'coords'");
  std::vector<std::string> names = split_list(*coords);
  if (names.empty()) throw FormatError(file.where(section_name, "coords") + ": no coordinates");
  std::vector<Interval> box;
  for (const auto& name : names) {
    auto v = file.numbers(section_name, "domain." + name);
    if (v.size() != 2) throw FormatError(file.where(section_name, "domain." + name) + ": expected 'lo, hi'");
    box.push_back({v[0], v[1]});
  }
  try {
    return make_chart(names, box);
  } catch (const Error& e) {
    throw FormatError("[" + section_name + "] " + e.what());
  }
}

PuzzleFile parse_puzzle_text(const std::string& text, const std::string& name) {
  PuzzleFile f;
  f.name = name;
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw FormatError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [sec, body] : tree) {
    if (body.empty()) throw FormatError("key '" + sec + "' outside any section");
    if (!kSections.count(sec)) throw FormatError("unknown section [" + sec + "]");
    Section s;
    for (const auto& [key, v] : body) s[key] = v.data();
    f.sections[sec] = std::move(s);
  }
  // Line numbers for messages.
  std::istringstream lines(text);
  std::string line;
  std::string current;
  for (std::size_t no = 1; std::getline(lines, line); ++no) {
    std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t[0] == '[') {
      current = trim(t.substr(1, t.find(']') - 1));
      continue;
    }
    auto eq = t.find('=');
    if (eq != std::string::npos) f.lines[current + "." + trim(t.substr(0, eq))] = no;
  }
  if (auto n = f.value("puzzle", "name")) f.name = *n;
  build_puzzle(f);
  return f;
}

PuzzleFile load_puzzle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  PuzzleFile f = parse_puzzle_text(buf.str(), std::filesystem::path(path).stem().string());
  f.path = path;
  return f;
}

}  // namespace solderlab
