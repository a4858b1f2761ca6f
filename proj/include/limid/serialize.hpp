#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "limid/model.hpp"
#include "limid/solver.hpp"
#include "limid/treedecomp.hpp"

namespace limid {

using json = nlohmann::json;

/// JSON interchange document:
///
///   {"variables": [{"id", "kind", "cardinality"?, "states"?}],
///    "arcs": [[from, to]],
///    "cpts": {id: {"parents": [ids], "table": [...]}},
///    "rewards": {id: {"parents": [ids], "table": [...]}},
///    "decomposition"?: {"clusters": [[ids]], "edges": [[i, j]], "root"?}}
///
/// Tables use the child-fastest layout of Table.
struct DiagramDocument {
  InfluenceDiagram diagram;
  std::optional<TreeDecomposition> decomposition;
};

/// Structural parse: unknown ids, wrong types and table shapes raise
/// ParseError naming the offending key. Numerical invariants (column sums,
/// acyclicity, ...) are left to validate_diagram.
DiagramDocument parse_document(std::string_view text);
DiagramDocument document_from_json(const json& doc);

json diagram_to_json(const InfluenceDiagram& d);
json decomposition_to_json(const InfluenceDiagram& d, const TreeDecomposition& t);
json strategy_to_json(const InfluenceDiagram& d, const Strategy& s);
json report_to_json(const ValidationReport& report);
json stats_to_json(const InfluenceDiagram& d, const SolverStats& stats);

/// Reads a strategy in the strategy_to_json format.
Strategy strategy_from_json(const InfluenceDiagram& d, const json& j);

/// Pretty-printed JSON followed by a newline. Object keys come out sorted.
std::string dump(const json& j);

/// Same variables, tables and arc set (arc order ignored).
bool same_structure(const InfluenceDiagram& a, const InfluenceDiagram& b);

}  // namespace limid
