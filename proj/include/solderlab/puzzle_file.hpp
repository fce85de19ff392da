#pragma once

// Puzzle files: INI text with dotted keys.
//
//   [puzzle]      name, description
//   [chart]       coords = x, y ; dim ; domain.x = lo, hi
//   [bundle]      rank ; metric.i.j = expr (1-based) or metric = identity
//   [connection]  omega.i.j = one expression per coordinate (1-based i, j)
//   [solder]      degree ; phi.i.a,b = expr (1-based i, 0-based multi-index)
//
// Command sections ([quotient], [transport], [leaf], [embed], [frobenius],
// [observable], [yangmills], [palatini], [expect]) are kept as raw text and
// read by the commands that use them. See docs/puzzle_format.md.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "solderlab/puzzle.hpp"

namespace solderlab {

using Section = std::map<std::string, std::string>;

struct PuzzleFile {
  std::string name;
  std::string path;
  std::map<std::string, Section> sections;
  /// Line of "section.key" in the source, for messages.
  std::map<std::string, std::size_t> lines;
  std::optional<Puzzle> puzzle;
  /// Set when the metric is not parallel for the connection (loading continues).
  bool metric_warning = false;

  const Section* section(const std::string& name) const;
  bool has(const std::string& section_name) const { return section(section_name) != nullptr; }
  /// "[section] key (line N)"
  std::string where(const std::string& section_name, const std::string& key) const;

  /// Expression over the puzzle chart; FormatError names the key on failure.
  Expr expression(const std::string& section_name, const std::string& key) const;
  /// Comma-separated expressions over `chart` (the puzzle chart by default).
  std::vector<Expr> expressions(const std::string& section_name, const std::string& key,
                                const Chart* chart = nullptr) const;
  std::vector<double> numbers(const std::string& section_name, const std::string& key) const;
  std::optional<std::string> value(const std::string& section_name, const std::string& key) const;
};

PuzzleFile parse_puzzle_text(const std::string& text, const std::string& name = "inline");
PuzzleFile load_puzzle_file(const std::string& path);

/// Splits on commas and trims blanks.
std::vector<std::string> split_list(const std::string& text);

/// Chart from "coords" and "domain.NAME" keys of a section.
ChartPtr chart_from_section(const PuzzleFile& file, const std::string& section_name);

}  // namespace solderlab
