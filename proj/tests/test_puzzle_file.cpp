#include <gtest/gtest.h>

#include <filesystem>

#include "solderlab/commands.hpp"
#include "solderlab/errors.hpp"
#include "solderlab/puzzle_file.hpp"

using namespace solderlab;

namespace {

std::string fixture(const std::string& rel) { return std::string(FIXTURE_DIR) + "/" + rel; }

const char* kFlat = R"([chart]
coords = x, y
domain.x = -1, 1
domain.y = -1, 1

[bundle]
rank = 2

[solder]
phi.1.0 = 1
phi.2.1 = 1
)";

const CheckRecord* find(const PuzzleReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST(PuzzleFile, LoadsFlat) {
  auto f = parse_puzzle_text(kFlat);
  ASSERT_TRUE(f.puzzle);
  EXPECT_EQ(f.puzzle->dim(), 2u);
  EXPECT_EQ(f.puzzle->rank(), 2u);
  EXPECT_TRUE(f.puzzle->omega()(0, 1).is_zero());
  EXPECT_FALSE(f.puzzle->metric());
  EXPECT_TRUE(f.puzzle->phi()[1].coefficient({1}).is_one());
}

TEST(PuzzleFile, Errors) {
  std::string bad_index = std::string(kFlat) + "[connection]\nomega.1.3 = 0, 1\n";
  try {
    parse_puzzle_text(bad_index);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("omega.1.3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 13"), std::string::npos);
  }
  std::string bad_expr = std::string(kFlat) + "[connection]\nomega.1.2 = 0, x +\n";
  try {
    parse_puzzle_text(bad_expr);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("omega.1.2"), std::string::npos);
  }
  EXPECT_THROW(parse_puzzle_text("[chart]\ncoords = x\n"), FormatError);
  EXPECT_THROW(parse_puzzle_text(std::string(kFlat) + "[nonsense]\na = 1\n"), FormatError);
  EXPECT_THROW(parse_puzzle_text(std::string(kFlat) + "[connection]\nomega.1.2 = 0\n"), FormatError);
  EXPECT_THROW(load_puzzle_file(fixture("does/not/exist.puzzle")), FormatError);
}

TEST(PuzzleFile, MetricWarningDoesNotStopLoading) {
  std::string text = std::string(kFlat);
  text.replace(text.find("rank = 2"), 8, "rank = 2\nmetric.1.1 = 1 + x^2\nmetric.2.2 = 1");
  auto f = parse_puzzle_text(text);
  EXPECT_TRUE(f.metric_warning);
  auto r = run_command("metric", f, RunOptions{});
  EXPECT_FALSE(r.pass());
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Commands, CheckFlatAndContact) {
  auto flat = run_command("check", load_puzzle_file(fixture("corpus/f1_flat.puzzle")), RunOptions{});
  EXPECT_TRUE(flat.pass());
  EXPECT_EQ(find(flat, "integrability")->value, 0.0);
  auto contact = run_command("check", load_puzzle_file(fixture("corpus/contact.puzzle")), RunOptions{});
  EXPECT_FALSE(contact.pass());
  EXPECT_NEAR(find(contact, "integrability")->value, 1.0, 1e-12);
}

TEST(Commands, ClassifyProjection) {
  auto r = run_command("classify", load_puzzle_file(fixture("corpus/f3_projection.puzzle")), RunOptions{});
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.info["classify"]["classification"], "surjective");
  EXPECT_EQ(r.info["classify"]["kernel_dim"], 1);
}

TEST(Commands, InapplicableCommandThrows) {
  auto f = load_puzzle_file(fixture("corpus/f1_flat.puzzle"));
  EXPECT_THROW(run_command("quotient", f, RunOptions{}), PreconditionError);
  EXPECT_THROW(run_command("frobnicate", f, RunOptions{}), FormatError);
}

TEST(Commands, CliExitCodes) {
  RunOptions o;
  EXPECT_EQ(run_cli("report-all", fixture("corpus"), o).exit_code, kExitPass);
  EXPECT_EQ(run_cli("report-all", fixture("negative"), o).exit_code, kExitFail);
  for (const auto& e : std::filesystem::directory_iterator(fixture("malformed"))) {
    EXPECT_EQ(run_cli("check", e.path().string(), o).exit_code, kExitInput) << e.path();
  }
  EXPECT_EQ(run_cli("bogus", fixture("corpus/f1_flat.puzzle"), o).exit_code, kExitInput);
}

TEST(Commands, ReportsAreDeterministic) {
  RunOptions o;
  o.seed = 7;
  auto a = run_cli("report-all", fixture("corpus/f3_projection.puzzle"), o).report.dump();
  auto b = run_cli("report-all", fixture("corpus/f3_projection.puzzle"), o).report.dump();
  EXPECT_EQ(a, b);
  o.seed = 8;
  EXPECT_NE(a, run_cli("report-all", fixture("corpus/f3_projection.puzzle"), o).report.dump());
}
