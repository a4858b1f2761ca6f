#include "limid/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "limid/error.hpp"
#include "limid/generate.hpp"
#include "limid/reduction.hpp"
#include "limid/serialize.hpp"
#include "limid/solver.hpp"

namespace limid::cli {

namespace {

struct Failure {
  int code;
  std::string message;
};

std::string read_input(const std::string& file, std::istream& in) {
  if (file.empty() || file == "-") return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::ifstream f(file, std::ios::binary);
  if (!f) throw Failure{kExitUsage, "cannot open " + file};
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

DiagramDocument load_valid(const std::string& file, std::istream& in) {
  DiagramDocument doc = parse_document(read_input(file, in));
  if (auto report = validate_diagram(doc.diagram); !report.empty())
    throw Failure{kExitInvalid, "invalid diagram: " + report.front().variable + ": " + report.front().message};
  if (doc.decomposition) {
    if (auto report = validate_decomposition(doc.diagram, *doc.decomposition); !report.empty())
      throw Failure{kExitInvalid, "invalid decomposition: " + report.front().variable + ": " + report.front().message};
  }
  return doc;
}

std::uint64_t max_set_size() {
  if (const char* env = std::getenv("LIMID_MAX_SET_SIZE"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || v == 0) throw Failure{kExitUsage, "LIMID_MAX_SET_SIZE must be a positive integer"};
    return v;
  }
  return kDefaultMaxSetSize;
}

// Binary rooted decomposition with value leaves, starting from the one in the
// document when present.
TreeDecomposition prepare(const DiagramDocument& doc) {
  TreeDecomposition t = doc.decomposition ? *doc.decomposition : build_decomposition(doc.diagram);
  const std::optional<int> root = doc.decomposition ? doc.decomposition->root : std::nullopt;
  t = ensure_value_leaves(doc.diagram, binarize(t));
  if (!t.is_rooted() || (root && t.root != root)) t = root_and_order(t, default_root(t));
  return t;
}

void cmd_solve(const std::string& file, double epsilon, bool exact, bool stats, std::istream& in, std::ostream& out) {
  if (!(epsilon >= 0.0)) throw Failure{kExitUsage, "--epsilon must be >= 0"};
  const DiagramDocument doc = load_valid(file, in);
  SolverConfig config;
  config.epsilon = exact ? 0.0 : epsilon;
  config.exact_mode = exact;
  config.max_set_size = max_set_size();
  config.collect_stats = stats;

  json result;
  if (doc.diagram.value_variables().empty()) {
    const SolverResult r = solve_full(doc.diagram, config);
    result = {{"value", r.value}, {"strategy", strategy_to_json(doc.diagram, r.strategy)}, {"alpha", 1.0}, {"m", 0}};
    if (stats) result["stats"] = json::array();
  } else {
    const TreeDecomposition t = prepare(doc);
    const ReductionResult red = reduce_to_single_value(doc.diagram, t);
    const NormalizedDiagram norm = normalize_utilities(red.diagram);
    const SolverResult r = solve(norm.diagram, red.decomposition, config);
    result = {{"value", norm.offset + norm.scale * r.value},
              {"strategy", strategy_to_json(doc.diagram, r.strategy)},
              {"alpha", r.stats.alpha},
              {"m", r.stats.m}};
    if (stats) {
      result["stats"] = stats_to_json(red.diagram, r.stats);
      result["total_kept"] = r.stats.total_kept;
    }
  }
  out << dump(result);
}

void cmd_reduce(const std::string& file, std::istream& in, std::ostream& out) {
  const DiagramDocument doc = load_valid(file, in);
  if (doc.diagram.value_variables().empty()) throw Failure{kExitInvalid, "diagram has no value variables"};
  const TreeDecomposition t = prepare(doc);
  const ReductionResult red = reduce_to_single_value(doc.diagram, t);
  json result = diagram_to_json(red.diagram);
  result["decomposition"] = decomposition_to_json(red.diagram, red.decomposition);
  json w = json::array(), o = json::array();
  for (VarId v : red.w_vars) w.push_back(red.diagram.var(v).name);
  for (VarId v : red.o_vars) o.push_back(red.diagram.var(v).name);
  result["reduction"] = {{"lower", red.bounds.lower}, {"upper", red.bounds.upper}, {"q", red.q},
                         {"w", std::move(w)},         {"o", std::move(o)},          {"value", red.diagram.var(red.value_var).name}};
  out << dump(result);
}

void cmd_oracle(const std::string& file, std::uint64_t cap, std::istream& in, std::ostream& out) {
  const DiagramDocument doc = load_valid(file, in);
  const MeuResult r = brute_force_meu(doc.diagram, cap);
  out << dump({{"value", r.value}, {"strategy", strategy_to_json(doc.diagram, r.strategy)}});
}

void cmd_validate(const std::string& file, std::istream& in, std::ostream& out, int& code) {
  const DiagramDocument doc = parse_document(read_input(file, in));
  const ValidationReport report = validate_diagram(doc.diagram);
  json result = {{"valid", report.empty()}, {"violations", report_to_json(report)}};
  bool ok = report.empty();
  if (doc.decomposition) {
    const ValidationReport dr = validate_decomposition(doc.diagram, *doc.decomposition);
    result["decomposition_violations"] = report_to_json(dr);
    ok = ok && dr.empty();
    result["valid"] = ok;
  }
  out << dump(result);
  code = ok ? kExitOk : kExitInvalid;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate and exact solver for limited-memory influence diagrams", "limid"};
  app.require_subcommand(1);

  std::string file;
  double epsilon = 0.1;
  bool exact = false, stats = false;
  auto* solve_cmd = app.add_subcommand("solve", "Approximate (or exact) maximum expected utility");
  solve_cmd->add_option("--epsilon", epsilon, "Relative error bound")->capture_default_str();
  solve_cmd->add_flag("--exact", exact, "Disable covering");
  solve_cmd->add_flag("--stats", stats, "Emit per-node set sizes");
  solve_cmd->add_option("file", file, "Document path, '-' for stdin");

  auto* reduce_cmd = app.add_subcommand("reduce", "Rewrite to a single value variable");
  reduce_cmd->add_option("file", file, "Document path, '-' for stdin");

  std::uint64_t cap = kDefaultStrategyCap;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force maximum expected utility");
  oracle_cmd->add_option("--cap", cap, "Largest number of pure strategies to enumerate")->capture_default_str();
  oracle_cmd->add_option("file", file, "Document path, '-' for stdin");

  GenParams gen;
  auto* gen_cmd = app.add_subcommand("gen", "Random diagram");
  gen_cmd->add_option("--chance", gen.chance)->capture_default_str()->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--decisions", gen.decisions)->capture_default_str()->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--card", gen.card, "Largest cardinality")->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--max-parents", gen.max_parents)->capture_default_str()->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--values", gen.values)->capture_default_str()->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();

  auto* validate_cmd = app.add_subcommand("validate", "Check a document");
  validate_cmd->add_option("file", file, "Document path, '-' for stdin");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    int code = kExitOk;
    if (*solve_cmd)
      cmd_solve(file, epsilon, exact, stats, in, out);
    else if (*reduce_cmd)
      cmd_reduce(file, in, out);
    else if (*oracle_cmd)
      cmd_oracle(file, cap, in, out);
    else if (*gen_cmd)
      out << dump(diagram_to_json(generate_diagram(gen)));
    else if (*validate_cmd)
      cmd_validate(file, in, out, code);
    return code;
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ResourceLimit& e) {
    err << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace limid::cli
