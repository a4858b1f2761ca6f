#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace limid {

/// Index of a variable inside InfluenceDiagram::variables. The index order
/// is the global variable order used by every table in the library.
using VarId = int;

enum class VarKind { chance, decision, value };

std::string_view to_string(VarKind kind);

struct Variable {
  std::string name;
  VarKind kind = VarKind::chance;
  /// Number of states; zero for value variables.
  int cardinality = 0;
  std::vector<std::string> states;
};

/// Conditional table over a child and an ordered parent list.
///
/// For a chance variable the entry for child state c and parent assignment
/// (p1, ..., pk) lives at c + |child| * (p1 + |P1| * (p2 + ...)): child index
/// fastest, then parents in the listed order. Reward tables use the same
/// layout without the child index.
struct Table {
  std::vector<VarId> parents;
  std::vector<double> values;
};

/// Chance, decision and value variables over a DAG, with one CPT per chance
/// variable and one reward table per value variable.
struct InfluenceDiagram {
  std::vector<Variable> variables;
  std::vector<std::pair<VarId, VarId>> arcs;
  std::map<VarId, Table> cpts;
  std::map<VarId, Table> rewards;

  int size() const { return static_cast<int>(variables.size()); }
  const Variable& var(VarId id) const { return variables.at(static_cast<std::size_t>(id)); }
  int cardinality(VarId id) const { return var(id).cardinality; }

  std::optional<VarId> find(std::string_view name) const;

  /// Parents read from the arc list, sorted by id.
  std::vector<VarId> parents(VarId id) const;
  std::vector<VarId> children(VarId id) const;
  /// Parents plus the variable itself, sorted by id.
  std::vector<VarId> family(VarId id) const;

  std::vector<VarId> chance_variables() const;
  std::vector<VarId> decision_variables() const;
  std::vector<VarId> value_variables() const;

  /// Parent order of a variable's table: the CPT or reward parent list when
  /// present, otherwise the sorted arc parents (decisions).
  std::vector<VarId> table_parents(VarId id) const;
};

struct Violation {
  std::string variable;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

/// Lists every broken structural or numerical invariant; empty when the
/// diagram is well formed.
ValidationReport validate_diagram(const InfluenceDiagram& d);

/// Variables of kind chance or decision in a topological order (ties by id).
/// Requires an acyclic arc set.
std::vector<VarId> topological_order(const InfluenceDiagram& d);

/// Conditional distribution of a decision given its parents, stored with the
/// same layout as a CPT (action index fastest, parents in sorted-id order).
struct Policy {
  VarId decision = -1;
  std::vector<VarId> parents;
  std::vector<double> table;

  bool is_pure() const;
};

/// One policy per decision variable, keyed by decision id.
struct Strategy {
  std::map<VarId, Policy> policies;
};

/// Number of pure policies |D|^gamma for a decision, saturating at
/// UINT64_MAX.
std::uint64_t pure_policy_count(const InfluenceDiagram& d, VarId decision);

/// Builds the pure policy with the given index. Policies are ordered
/// lexicographically by their action vector over parent assignments, the
/// first parent assignment being the most significant digit.
Policy pure_policy(const InfluenceDiagram& d, VarId decision, std::uint64_t index);

/// All |D|^gamma pure policies in index order.
std::vector<Policy> enumerate_pure_policies(const InfluenceDiagram& d, VarId decision);

/// Strategy made of pure policy 0 for every decision.
Strategy default_strategy(const InfluenceDiagram& d);

/// Exact expected utility of a strategy by enumerating joint assignments of
/// the chance and decision variables. Assignments of probability zero are
/// skipped since they contribute nothing to the sum.
double expected_utility(const InfluenceDiagram& d, const Strategy& s);

struct MeuResult {
  double value = 0.0;
  Strategy strategy;
};

inline constexpr std::uint64_t kDefaultStrategyCap = 10'000'000;

/// Number of pure strategies of the diagram, saturating at UINT64_MAX.
std::uint64_t pure_strategy_count(const InfluenceDiagram& d);

/// Maximum expected utility over all pure strategies. The first maximiser in
/// enumeration order wins ties (decisions in id order, first decision most
/// significant). Throws ResourceLimit when the strategy count exceeds the cap.
MeuResult brute_force_meu(const InfluenceDiagram& d, std::uint64_t cap = kDefaultStrategyCap);

}  // namespace limid
