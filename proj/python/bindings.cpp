#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "solderlab/commands.hpp"
#include "solderlab/errors.hpp"
#include "solderlab/puzzle.hpp"
#include "solderlab/puzzle_file.hpp"

namespace py = pybind11;
using namespace solderlab;

namespace {

py::object to_python(const nlohmann::ordered_json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

RunOptions options(double tol, std::size_t samples, std::size_t steps, std::uint64_t seed, bool timing) {
  RunOptions o;
  o.tol = tol;
  o.samples = samples;
  o.steps = steps;
  o.seed = seed;
  o.timing = timing;
  return o;
}

const Puzzle& puzzle_of(const PuzzleFile& f) {
  if (!f.puzzle) throw FormatError(f.path + ": no puzzle");
  return *f.puzzle;
}

}  // namespace

PYBIND11_MODULE(_solderlab, m) {
  m.doc() = "Solder-form puzzles: integrability, kernels, embeddings and field equations.";

  auto error = py::register_exception<Error>(m, "SolderlabError", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", error.ptr());
  py::register_exception<SingularError>(m, "SingularError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());

  m.def("command_names", &command_names);

  m.def(
      "run",
      [](const std::string& command, const std::string& path, double tol, std::size_t samples, std::size_t steps,
         std::uint64_t seed, bool timing) {
        auto r = run_cli(command, path, options(tol, samples, steps, seed, timing));
        return py::make_tuple(r.exit_code, to_python(r.report));
      },
      py::arg("command"), py::arg("path"), py::arg("tol") = 1e-8, py::arg("samples") = 50, py::arg("steps") = 20,
      py::arg("seed") = 1, py::arg("timing") = false,
      "Runs a command on a puzzle file or directory; returns (exit_code, report).");

  m.def(
      "evaluate",
      [](const std::string& text, const std::vector<std::string>& variables, const std::vector<double>& point) {
        if (point.size() != variables.size()) throw DimensionError("point and variables differ in length");
        return evaluate(parse_expr(text, variables), point);
      },
      py::arg("expression"), py::arg("variables"), py::arg("point"));

  py::class_<PuzzleFile>(m, "Puzzle")
      .def_static("load", &load_puzzle_file, py::arg("path"))
      .def_static("parse", &parse_puzzle_text, py::arg("text"), py::arg("name") = "inline")
      .def_readonly("name", &PuzzleFile::name)
      .def_readonly("metric_warning", &PuzzleFile::metric_warning)
      .def_property_readonly("dim", [](const PuzzleFile& f) { return puzzle_of(f).dim(); })
      .def_property_readonly("rank", [](const PuzzleFile& f) { return puzzle_of(f).rank(); })
      .def_property_readonly("degree", [](const PuzzleFile& f) { return puzzle_of(f).degree(); })
      .def_property_readonly("coords", [](const PuzzleFile& f) { return puzzle_of(f).chart().coords(); })
      .def_property_readonly("has_metric", [](const PuzzleFile& f) { return puzzle_of(f).metric().has_value(); })
      .def("sample_points",
           [](const PuzzleFile& f, std::size_t count, std::uint64_t seed) {
             return sample_points(puzzle_of(f).chart(), count, seed);
           },
           py::arg("count") = 50, py::arg("seed") = 1)
      .def("integrability_residual",
           [](const PuzzleFile& f, std::size_t samples, std::uint64_t seed) {
             return max_integrability_residual(puzzle_of(f), samples, seed);
           },
           py::arg("samples") = 50, py::arg("seed") = 1)
      .def("solder_matrix", [](const PuzzleFile& f, const Point& p) { return solder_matrix(puzzle_of(f), p); },
           py::arg("point"))
      .def("kernel", [](const PuzzleFile& f, const Point& p) { return kernel_distribution(puzzle_of(f), p); },
           py::arg("point"))
      .def("classify",
           [](const PuzzleFile& f, std::size_t samples, std::uint64_t seed) {
             auto r = rank_profile(puzzle_of(f), sample_points(puzzle_of(f).chart(), samples, seed));
             py::dict d;
             d["classification"] = to_string(r.classification);
             d["rank"] = r.rank;
             d["kernel_dim"] = r.kernel_dim;
             return d;
           },
           py::arg("samples") = 50, py::arg("seed") = 1)
      .def("run",
           [](const PuzzleFile& f, const std::string& command, double tol, std::size_t samples, std::size_t steps,
              std::uint64_t seed) {
             auto o = options(tol, samples, steps, seed, false);
             auto r = command == "report-all" ? run_all(f, o) : run_command(command, f, o);
             return to_python(to_json(r, false));
           },
           py::arg("command"), py::arg("tol") = 1e-8, py::arg("samples") = 50, py::arg("steps") = 20,
           py::arg("seed") = 1);
}
