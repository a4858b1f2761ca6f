#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "limid/cli.hpp"
#include "limid/error.hpp"
#include "limid/generate.hpp"
#include "limid/serialize.hpp"

namespace py = pybind11;

namespace {

std::tuple<int, std::string, std::string> run_cli(const std::vector<std::string>& args, const std::string& input) {
  std::istringstream in(input);
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = limid::cli::run(args, in, out, err);
  }
  return {code, out.str(), err.str()};
}

// Runs a subcommand on a document and returns its JSON output, raising on a
// nonzero exit code.
std::string command(std::vector<std::string> args, const std::string& document) {
  args.emplace_back("-");
  auto [code, out, err] = run_cli(args, document);
  if (code == limid::cli::kExitResource) throw limid::ResourceLimit(err);
  if (code != limid::cli::kExitOk) throw limid::InvalidArgument(err);
  return out;
}

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

PYBIND11_MODULE(_limid, m) {
  m.doc() = "Solver for limited-memory influence diagrams (JSON in, JSON out).";

  py::register_exception<limid::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<limid::ResourceLimit>(m, "ResourceLimit", PyExc_RuntimeError);
  py::register_exception<limid::InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def("run_cli", &run_cli, py::arg("args"), py::arg("stdin") = "",
        "Run the command-line front-end; returns (exit code, stdout, stderr).");

  m.def(
      "canonical",
      [](const std::string& document) {
        const auto doc = limid::parse_document(document);
        auto j = limid::diagram_to_json(doc.diagram);
        if (doc.decomposition) j["decomposition"] = limid::decomposition_to_json(doc.diagram, *doc.decomposition);
        return limid::dump(j);
      },
      py::arg("document"));

  m.def(
      "validate",
      [](const std::string& document) {
        const auto doc = limid::parse_document(document);
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& v : limid::validate_diagram(doc.diagram)) out.emplace_back(v.variable, v.message);
        return out;
      },
      py::arg("document"), "List of (variable, message) violations; empty when valid.");

  m.def(
      "solve",
      [](const std::string& document, double epsilon, bool exact, bool stats) {
        std::vector<std::string> args{"solve", "--epsilon", format_double(epsilon)};
        if (exact) args.emplace_back("--exact");
        if (stats) args.emplace_back("--stats");
        return command(args, document);
      },
      py::arg("document"), py::arg("epsilon") = 0.1, py::arg("exact") = false, py::arg("stats") = false);

  m.def(
      "oracle",
      [](const std::string& document, std::uint64_t cap) {
        return command({"oracle", "--cap", std::to_string(cap)}, document);
      },
      py::arg("document"), py::arg("cap") = limid::kDefaultStrategyCap);

  m.def(
      "reduce", [](const std::string& document) { return command({"reduce"}, document); }, py::arg("document"));

  m.def(
      "expected_utility",
      [](const std::string& document, const std::string& strategy) {
        const auto doc = limid::parse_document(document);
        const auto s = limid::strategy_from_json(doc.diagram, limid::json::parse(strategy));
        return limid::expected_utility(doc.diagram, s);
      },
      py::arg("document"), py::arg("strategy"));

  m.def(
      "generate",
      [](int chance, int decisions, int card, int max_parents, int values, std::uint64_t seed) {
        limid::GenParams p{chance, decisions, card, max_parents, values, seed};
        return limid::dump(limid::diagram_to_json(limid::generate_diagram(p)));
      },
      py::arg("chance") = 4, py::arg("decisions") = 2, py::arg("card") = 2, py::arg("max_parents") = 2,
      py::arg("values") = 1, py::arg("seed") = 0);
}
