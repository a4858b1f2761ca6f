#include "limid/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "limid/error.hpp"

namespace limid {

std::string_view to_string(VarKind kind) {
  switch (kind) {
    case VarKind::chance:
      return "chance";
    case VarKind::decision:
      return "decision";
    case VarKind::value:
      return "value";
  }
  return "unknown";
}

std::optional<VarId> InfluenceDiagram::find(std::string_view name) const {
  for (VarId i = 0; i < size(); ++i) {
    if (variables[static_cast<std::size_t>(i)].name == name) return i;
  }
  return std::nullopt;
}

std::vector<VarId> InfluenceDiagram::parents(VarId id) const {
  std::vector<VarId> out;
  for (const auto& [from, to] : arcs) {
    if (to == id) out.push_back(from);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<VarId> InfluenceDiagram::children(VarId id) const {
  std::vector<VarId> out;
  for (const auto& [from, to] : arcs) {
    if (from == id) out.push_back(to);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<VarId> InfluenceDiagram::family(VarId id) const {
  auto out = parents(id);
  out.insert(std::upper_bound(out.begin(), out.end(), id), id);
  return out;
}

namespace {

std::vector<VarId> of_kind(const InfluenceDiagram& d, VarKind kind) {
  std::vector<VarId> out;
  for (VarId i = 0; i < d.size(); ++i) {
    if (d.var(i).kind == kind) out.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<VarId> InfluenceDiagram::chance_variables() const { return of_kind(*this, VarKind::chance); }
std::vector<VarId> InfluenceDiagram::decision_variables() const { return of_kind(*this, VarKind::decision); }
std::vector<VarId> InfluenceDiagram::value_variables() const { return of_kind(*this, VarKind::value); }

std::vector<VarId> InfluenceDiagram::table_parents(VarId id) const {
  if (auto it = cpts.find(id); it != cpts.end()) return it->second.parents;
  if (auto it = rewards.find(id); it != rewards.end()) return it->second.parents;
  return parents(id);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class ReportBuilder {
 public:
  explicit ReportBuilder(const InfluenceDiagram& d) : d_(d) {}

  void add(VarId id, std::string message) {
    std::string name = (id >= 0 && id < d_.size()) ? d_.var(id).name : std::to_string(id);
    report_.push_back({std::move(name), std::move(message)});
  }
  void add_named(std::string name, std::string message) {
    report_.push_back({std::move(name), std::move(message)});
  }
  ValidationReport take() { return std::move(report_); }

 private:
  const InfluenceDiagram& d_;
  ValidationReport report_;
};

bool valid_id(const InfluenceDiagram& d, VarId id) { return id >= 0 && id < d.size(); }

// Checks a table's parent list against the arc parents; returns the expected
// number of entries, or nullopt when the shape cannot be determined.
std::optional<std::size_t> check_table_parents(const InfluenceDiagram& d, VarId id, const Table& t,
                                               ReportBuilder& report) {
  std::vector<VarId> listed = t.parents;
  for (VarId p : listed) {
    if (!valid_id(d, p)) {
      report.add(id, "table parent " + std::to_string(p) + " does not exist");
      return std::nullopt;
    }
  }
  std::sort(listed.begin(), listed.end());
  if (std::adjacent_find(listed.begin(), listed.end()) != listed.end()) {
    report.add(id, "table lists a parent twice");
    return std::nullopt;
  }
  if (listed != d.parents(id)) {
    report.add(id, "table parents do not match the arcs entering the variable");
    return std::nullopt;
  }
  std::size_t n = 1;
  for (VarId p : t.parents) {
    const Variable& pv = d.var(p);
    if (pv.kind == VarKind::value || pv.cardinality < 1) return std::nullopt;
    n *= static_cast<std::size_t>(pv.cardinality);
  }
  return n;
}

}  // namespace

ValidationReport validate_diagram(const InfluenceDiagram& d) {
  ReportBuilder report(d);

  std::set<std::string> names;
  for (VarId i = 0; i < d.size(); ++i) {
    const Variable& v = d.var(i);
    if (v.name.empty()) report.add_named("#" + std::to_string(i), "variable has an empty id");
    if (!names.insert(v.name).second) report.add(i, "duplicate variable id");
    if (v.kind == VarKind::value) {
      if (v.cardinality != 0) report.add(i, "value variable must not have a cardinality");
      if (!v.states.empty()) report.add(i, "value variable must not have state labels");
    } else {
      if (v.cardinality < 1) report.add(i, "cardinality must be at least 1");
      if (!v.states.empty() && static_cast<int>(v.states.size()) != v.cardinality)
        report.add(i, "number of state labels differs from cardinality");
    }
  }

  bool arcs_ok = true;
  std::set<std::pair<VarId, VarId>> seen;
  for (const auto& [from, to] : d.arcs) {
    if (!valid_id(d, from) || !valid_id(d, to)) {
      report.add_named("arc", "arc references an unknown variable");
      arcs_ok = false;
      continue;
    }
    if (from == to) {
      report.add(from, "self loop");
      arcs_ok = false;
    }
    if (!seen.insert({from, to}).second) report.add(to, "duplicate arc");
    if (d.var(from).kind == VarKind::value) report.add(from, "value variable has child");
  }

  if (arcs_ok) {
    // Kahn's algorithm over all variables.
    std::vector<int> indegree(static_cast<std::size_t>(d.size()), 0);
    for (const auto& [from, to] : seen) ++indegree[static_cast<std::size_t>(to)];
    std::vector<std::vector<VarId>> out(static_cast<std::size_t>(d.size()));
    for (const auto& [from, to] : seen) out[static_cast<std::size_t>(from)].push_back(to);
    std::vector<VarId> stack;
    for (VarId i = 0; i < d.size(); ++i)
      if (indegree[static_cast<std::size_t>(i)] == 0) stack.push_back(i);
    int visited = 0;
    while (!stack.empty()) {
      VarId v = stack.back();
      stack.pop_back();
      ++visited;
      for (VarId c : out[static_cast<std::size_t>(v)])
        if (--indegree[static_cast<std::size_t>(c)] == 0) stack.push_back(c);
    }
    if (visited != d.size()) {
      for (VarId i = 0; i < d.size(); ++i)
        if (indegree[static_cast<std::size_t>(i)] > 0) report.add(i, "variable lies on a directed cycle");
    }
  }

  for (const auto& [id, table] : d.cpts) {
    if (!valid_id(d, id)) {
      report.add_named(std::to_string(id), "CPT for unknown variable");
    } else if (d.var(id).kind != VarKind::chance) {
      report.add(id, "CPT attached to a non-chance variable");
    }
  }
  for (const auto& [id, table] : d.rewards) {
    if (!valid_id(d, id)) {
      report.add_named(std::to_string(id), "reward table for unknown variable");
    } else if (d.var(id).kind != VarKind::value) {
      report.add(id, "reward table attached to a non-value variable");
    }
  }

  for (VarId i = 0; i < d.size() && arcs_ok; ++i) {
    const Variable& v = d.var(i);
    if (v.kind == VarKind::chance) {
      auto it = d.cpts.find(i);
      if (it == d.cpts.end()) {
        report.add(i, "chance variable has no CPT");
        continue;
      }
      for (VarId p : d.parents(i))
        if (d.var(p).kind == VarKind::value) report.add(i, "value variable has child");
      auto columns = check_table_parents(d, i, it->second, report);
      if (!columns || v.cardinality < 1) continue;
      const auto card = static_cast<std::size_t>(v.cardinality);
      const auto& values = it->second.values;
      if (values.size() != card * *columns) {
        std::ostringstream msg;
        msg << "CPT has " << values.size() << " entries, expected " << card * *columns;
        report.add(i, msg.str());
        continue;
      }
      bool range_ok = true;
      for (double p : values) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) range_ok = false;
      }
      if (!range_ok) report.add(i, "CPT entry outside [0, 1]");
      for (std::size_t col = 0; col < *columns; ++col) {
        double sum = 0.0;
        for (std::size_t c = 0; c < card; ++c) sum += values[col * card + c];
        if (!(std::abs(sum - 1.0) <= 1e-12)) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "CPT column " << col << " sums to " << sum;
          report.add(i, msg.str());
        }
      }
    } else if (v.kind == VarKind::value) {
      auto it = d.rewards.find(i);
      if (it == d.rewards.end()) {
        report.add(i, "value variable has no reward table");
        continue;
      }
      auto columns = check_table_parents(d, i, it->second, report);
      if (!columns) continue;
      if (it->second.values.size() != *columns) {
        std::ostringstream msg;
        msg << "reward table has " << it->second.values.size() << " entries, expected " << *columns;
        report.add(i, msg.str());
        continue;
      }
      for (double u : it->second.values) {
        if (!std::isfinite(u)) {
          report.add(i, "reward is not finite");
          break;
        }
      }
    }
  }
  return report.take();
}

std::vector<VarId> topological_order(const InfluenceDiagram& d) {
  std::vector<int> indegree(static_cast<std::size_t>(d.size()), 0);
  std::vector<std::vector<VarId>> out(static_cast<std::size_t>(d.size()));
  for (const auto& [from, to] : d.arcs) {
    ++indegree[static_cast<std::size_t>(to)];
    out[static_cast<std::size_t>(from)].push_back(to);
  }
  std::priority_queue<VarId, std::vector<VarId>, std::greater<>> ready;
  for (VarId i = 0; i < d.size(); ++i)
    if (indegree[static_cast<std::size_t>(i)] == 0) ready.push(i);
  std::vector<VarId> order;
  while (!ready.empty()) {
    VarId v = ready.top();
    ready.pop();
    if (d.var(v).kind != VarKind::value) order.push_back(v);
    for (VarId c : out[static_cast<std::size_t>(v)])
      if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push(c);
  }
  return order;
}

// ---------------------------------------------------------------------------
// Policies

bool Policy::is_pure() const {
  for (double p : table)
    if (p != 0.0 && p != 1.0) return false;
  return true;
}

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) r = saturating_mul(r, base);
  return r;
}

std::uint64_t parent_assignments(const InfluenceDiagram& d, VarId decision) {
  std::uint64_t gamma = 1;
  for (VarId p : d.parents(decision)) gamma = saturating_mul(gamma, static_cast<std::uint64_t>(d.cardinality(p)));
  return gamma;
}

void require_decision(const InfluenceDiagram& d, VarId decision) {
  if (decision < 0 || decision >= d.size() || d.var(decision).kind != VarKind::decision)
    throw InvalidArgument("variable " + std::to_string(decision) + " is not a decision variable");
}

// Writes the pure policy with the given index into `table` (already sized).
void fill_pure_table(std::vector<double>& table, std::uint64_t card, std::uint64_t gamma, std::uint64_t index) {
  std::fill(table.begin(), table.end(), 0.0);
  for (std::uint64_t j = gamma; j-- > 0;) {
    const std::uint64_t action = index % card;
    index /= card;
    table[j * card + action] = 1.0;
  }
}

}  // namespace

std::uint64_t pure_policy_count(const InfluenceDiagram& d, VarId decision) {
  require_decision(d, decision);
  return saturating_pow(static_cast<std::uint64_t>(d.cardinality(decision)), parent_assignments(d, decision));
}

Policy pure_policy(const InfluenceDiagram& d, VarId decision, std::uint64_t index) {
  const std::uint64_t count = pure_policy_count(d, decision);
  if (index >= count) throw InvalidArgument("pure policy index out of range");
  const auto card = static_cast<std::uint64_t>(d.cardinality(decision));
  const std::uint64_t gamma = parent_assignments(d, decision);
  Policy p{decision, d.parents(decision), std::vector<double>(static_cast<std::size_t>(card * gamma), 0.0)};
  fill_pure_table(p.table, card, gamma, index);
  return p;
}

std::vector<Policy> enumerate_pure_policies(const InfluenceDiagram& d, VarId decision) {
  const std::uint64_t count = pure_policy_count(d, decision);
  if (count == std::numeric_limits<std::uint64_t>::max()) throw ResourceLimit("too many pure policies to enumerate");
  std::vector<Policy> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t k = 0; k < count; ++k) out.push_back(pure_policy(d, decision, k));
  return out;
}

Strategy default_strategy(const InfluenceDiagram& d) {
  Strategy s;
  for (VarId dec : d.decision_variables()) s.policies.emplace(dec, pure_policy(d, dec, 0));
  return s;
}

std::uint64_t pure_strategy_count(const InfluenceDiagram& d) {
  std::uint64_t total = 1;
  for (VarId dec : d.decision_variables()) total = saturating_mul(total, pure_policy_count(d, dec));
  return total;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

struct TableView {
  VarId var = -1;
  std::size_t card = 1;  // 1 for reward tables
  std::vector<std::size_t> parent_slots;
  std::vector<std::size_t> strides;
  const std::vector<double>* values = nullptr;

  std::size_t offset(const std::vector<int>& assignment) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < parent_slots.size(); ++k)
      off += static_cast<std::size_t>(assignment[parent_slots[k]]) * strides[k];
    return off;
  }
};

TableView make_view(const InfluenceDiagram& d, VarId var, std::size_t card, const std::vector<VarId>& parents,
                    const std::vector<double>& values) {
  TableView v;
  v.var = var;
  v.card = card;
  v.values = &values;
  std::size_t stride = card;
  for (VarId p : parents) {
    v.parent_slots.push_back(static_cast<std::size_t>(p));
    v.strides.push_back(stride);
    stride *= static_cast<std::size_t>(d.cardinality(p));
  }
  return v;
}

// Sums P_S(C, D) U(C, D) over all joint assignments by depth-first enumeration
// in topological order. Decision tables are supplied by the caller so the
// brute-force search can swap policies without rebuilding the views.
class Enumerator {
 public:
  explicit Enumerator(const InfluenceDiagram& d) : d_(d), order_(topological_order(d)) {
    views_.resize(order_.size());
    decision_slot_.assign(static_cast<std::size_t>(d.size()), -1);
    for (std::size_t k = 0; k < order_.size(); ++k) {
      const VarId v = order_[k];
      if (d.var(v).kind == VarKind::chance) {
        const Table& t = d.cpts.at(v);
        views_[k] = make_view(d, v, static_cast<std::size_t>(d.cardinality(v)), t.parents, t.values);
      } else {
        decision_slot_[static_cast<std::size_t>(v)] = static_cast<int>(k);
      }
    }
    for (VarId v : d.value_variables()) {
      const Table& t = d.rewards.at(v);
      rewards_.push_back(make_view(d, v, 1, t.parents, t.values));
    }
    assignment_.assign(static_cast<std::size_t>(d.size()), 0);
  }

  void set_policy(VarId decision, const std::vector<VarId>& parents, const std::vector<double>& table) {
    const int slot = decision_slot_.at(static_cast<std::size_t>(decision));
    views_[static_cast<std::size_t>(slot)] =
        make_view(d_, decision, static_cast<std::size_t>(d_.cardinality(decision)), parents, table);
  }

  double run() {
    total_ = 0.0;
    descend(0, 1.0);
    return total_;
  }

 private:
  void descend(std::size_t depth, double prob) {
    if (depth == order_.size()) {
      double u = 0.0;
      for (const TableView& r : rewards_) u += (*r.values)[r.offset(assignment_)];
      total_ += prob * u;
      return;
    }
    const TableView& view = views_[depth];
    const std::size_t base = view.offset(assignment_);
    int& slot = assignment_[static_cast<std::size_t>(view.var)];
    for (std::size_t s = 0; s < view.card; ++s) {
      const double p = (*view.values)[base + s];
      if (p == 0.0) continue;
      slot = static_cast<int>(s);
      descend(depth + 1, prob * p);
    }
    slot = 0;
  }

  const InfluenceDiagram& d_;
  std::vector<VarId> order_;
  std::vector<TableView> views_;
  std::vector<TableView> rewards_;
  std::vector<int> decision_slot_;
  std::vector<int> assignment_;
  double total_ = 0.0;
};

void check_strategy(const InfluenceDiagram& d, const Strategy& s) {
  const auto decisions = d.decision_variables();
  if (s.policies.size() != decisions.size()) throw InvalidArgument("strategy does not cover every decision exactly once");
  for (VarId dec : decisions) {
    auto it = s.policies.find(dec);
    if (it == s.policies.end())
      throw InvalidArgument("strategy has no policy for decision " + d.var(dec).name);
    const Policy& p = it->second;
    if (p.decision != dec || p.parents != d.parents(dec))
      throw InvalidArgument("policy for " + d.var(dec).name + " has the wrong scope");
    const auto card = static_cast<std::size_t>(d.cardinality(dec));
    std::size_t gamma = 1;
    for (VarId q : p.parents) gamma *= static_cast<std::size_t>(d.cardinality(q));
    if (p.table.size() != card * gamma)
      throw InvalidArgument("policy for " + d.var(dec).name + " has the wrong table size");
    for (std::size_t col = 0; col < gamma; ++col) {
      double sum = 0.0;
      for (std::size_t a = 0; a < card; ++a) {
        const double x = p.table[col * card + a];
        if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("policy entry outside [0, 1] for " + d.var(dec).name);
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw InvalidArgument("policy column does not sum to one for " + d.var(dec).name);
    }
  }
}

}  // namespace

double expected_utility(const InfluenceDiagram& d, const Strategy& s) {
  check_strategy(d, s);
  Enumerator e(d);
  for (const auto& [dec, p] : s.policies) e.set_policy(dec, p.parents, p.table);
  return e.run();
}

MeuResult brute_force_meu(const InfluenceDiagram& d, std::uint64_t cap) {
  const auto decisions = d.decision_variables();
  const std::uint64_t total = pure_strategy_count(d);
  if (total > cap) {
    std::ostringstream msg;
    msg << "instance too large: " << (total == std::numeric_limits<std::uint64_t>::max() ? std::string(">2^64") : std::to_string(total))
        << " pure strategies exceed the cap of " << cap;
    throw ResourceLimit(msg.str());
  }

  const std::size_t n = decisions.size();
  std::vector<std::uint64_t> counts(n), index(n, 0), cards(n), gammas(n);
  std::vector<std::vector<VarId>> parents(n);
  std::vector<std::vector<double>> tables(n);
  Enumerator e(d);
  for (std::size_t k = 0; k < n; ++k) {
    counts[k] = pure_policy_count(d, decisions[k]);
    cards[k] = static_cast<std::uint64_t>(d.cardinality(decisions[k]));
    gammas[k] = parent_assignments(d, decisions[k]);
    parents[k] = d.parents(decisions[k]);
    tables[k].assign(static_cast<std::size_t>(cards[k] * gammas[k]), 0.0);
    fill_pure_table(tables[k], cards[k], gammas[k], 0);
    e.set_policy(decisions[k], parents[k], tables[k]);
  }

  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> best_index = index;
  for (std::uint64_t visited = 0; visited < total; ++visited) {
    const double value = e.run();
    if (value > best) {
      best = value;
      best_index = index;
    }
    // Odometer with the last decision fastest.
    for (std::size_t k = n; k-- > 0;) {
      if (++index[k] < counts[k]) {
        fill_pure_table(tables[k], cards[k], gammas[k], index[k]);
        break;
      }
      index[k] = 0;
      fill_pure_table(tables[k], cards[k], gammas[k], 0);
    }
  }

  MeuResult result;
  result.value = best;
  for (std::size_t k = 0; k < n; ++k)
    result.strategy.policies.emplace(decisions[k], pure_policy(d, decisions[k], best_index[k]));
  return result;
}

}  // namespace limid
