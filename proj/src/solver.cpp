#include "limid/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "limid/error.hpp"
#include "limid/reduction.hpp"

namespace limid {

FactorAssignment assign_factors(const InfluenceDiagram& d, const TreeDecomposition& t) {
  FactorAssignment sigma;
  for (VarId v = 0; v < d.size(); ++v) {
    const auto need = d.var(v).kind == VarKind::value ? d.parents(v) : d.family(v);
    if (auto leaf = t.value_leaves.find(v); leaf != t.value_leaves.end()) {
      sigma[v] = leaf->second;
      continue;
    }
    int node = -1;
    for (int i = 0; i < t.size(); ++i) {
      const auto& c = t.clusters[static_cast<std::size_t>(i)];
      if (std::includes(c.begin(), c.end(), need.begin(), need.end())) {
        node = i;
        break;
      }
    }
    if (node < 0) throw InvalidArgument("family not covered: " + d.var(v).name);
    sigma[v] = node;
  }
  return sigma;
}

namespace {

std::vector<int> cards_of(const InfluenceDiagram& d, const std::vector<VarId>& vars) {
  std::vector<int> cards;
  for (VarId v : vars) cards.push_back(d.cardinality(v));
  return cards;
}

Potential cpt_potential(const InfluenceDiagram& d, VarId v) {
  const Table& t = d.cpts.at(v);
  std::vector<VarId> layout{v};
  layout.insert(layout.end(), t.parents.begin(), t.parents.end());
  return Potential::from_layout(layout, cards_of(d, layout), t.values);
}

Potential reward_potential(const InfluenceDiagram& d, VarId v) {
  const Table& t = d.rewards.at(v);
  return Potential::from_layout(t.parents, cards_of(d, t.parents), t.values);
}

PotentialSet policy_set(const InfluenceDiagram& d, VarId decision) {
  std::vector<VarId> layout{decision};
  const auto parents = d.parents(decision);
  layout.insert(layout.end(), parents.begin(), parents.end());
  const auto cards = cards_of(d, layout);
  PotentialSet set;
  set.scope = Scope::of_variables(d, layout);
  const std::uint64_t count = pure_policy_count(d, decision);
  if (count > std::numeric_limits<std::uint32_t>::max())
    throw ResourceLimit("decision " + d.var(decision).name + " has too many pure policies");
  for (std::uint64_t k = 0; k < count; ++k) {
    const Policy p = pure_policy(d, decision, k);
    set.members.push_back({Potential::from_layout(layout, cards, p.table), Provenance::single(decision, k)});
  }
  return set;
}

void check_solver_input(const InfluenceDiagram& d, const TreeDecomposition& t, const SolverConfig& config) {
  if (!(config.epsilon >= 0.0) || !std::isfinite(config.epsilon)) throw InvalidArgument("epsilon must be finite and >= 0");
  const auto values = d.value_variables();
  if (values.size() != 1) throw InvalidArgument("solve needs exactly one value variable");
  for (double u : d.rewards.at(values.front()).values)
    if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("utilities must lie in [0, 1]");
  if (auto report = validate_decomposition(d, t); !report.empty())
    throw InvalidArgument("invalid decomposition: " + report.front().variable + ": " + report.front().message);
  if (t.max_degree() > 3) throw InvalidArgument("decomposition is not binary");
  if (!t.is_rooted()) throw InvalidArgument("decomposition is not rooted");
}

std::vector<int> children_first(const TreeDecomposition& t) {
  std::vector<int> order{*t.root};
  for (std::size_t k = 0; k < order.size(); ++k)
    for (int c : t.children[static_cast<std::size_t>(order[k])]) order.push_back(c);
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

SolverResult solve(const InfluenceDiagram& d, const TreeDecomposition& t, const SolverConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  check_solver_input(d, t, config);
  const bool exact = config.exact_mode || config.epsilon == 0.0;
  const int m = t.size();

  SolverResult result;
  result.stats.m = m;
  result.stats.alpha = exact ? 1.0 : 1.0 + config.epsilon / (2.0 * m);
  const double alpha = result.stats.alpha;

  // Initialisation.
  const FactorAssignment sigma = assign_factors(d, t);
  std::vector<std::vector<PotentialSet>> factors(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    factors[static_cast<std::size_t>(i)].push_back(
        PotentialSet::singleton(unit_potential(Scope::of_variables(d, t.clusters[static_cast<std::size_t>(i)]))));
  for (VarId v : d.chance_variables())
    factors[static_cast<std::size_t>(sigma.at(v))].push_back(PotentialSet::singleton(cpt_potential(d, v)));
  for (VarId v : d.decision_variables()) factors[static_cast<std::size_t>(sigma.at(v))].push_back(policy_set(d, v));
  const VarId value = d.value_variables().front();
  factors[static_cast<std::size_t>(sigma.at(value))].push_back(PotentialSet::singleton(reward_potential(d, value)));

  std::vector<PotentialSet> initial(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) initial[static_cast<std::size_t>(i)] = combine_sets(factors[static_cast<std::size_t>(i)]);
  factors.clear();

  // Propagation, children before parents.
  std::vector<PotentialSet> messages(static_cast<std::size_t>(m));
  std::vector<NodeStats> node_stats(static_cast<std::size_t>(m));
  for (int i : children_first(t)) {
    const auto ui = static_cast<std::size_t>(i);
    NodeStats& ns = node_stats[ui];
    ns.node = i;
    ns.cluster = t.clusters[ui];
    ns.k_size = initial[ui].size();

    std::vector<PotentialSet> inputs;
    inputs.push_back(std::move(initial[ui]));
    double product = static_cast<double>(inputs.front().size());
    for (int c : t.children[ui]) {
      product *= static_cast<double>(messages[static_cast<std::size_t>(c)].size());
      inputs.push_back(std::move(messages[static_cast<std::size_t>(c)]));
    }
    if (config.max_set_size && product > static_cast<double>(*config.max_set_size)) {
      std::ostringstream msg;
      msg << "set size cap exceeded at node " << i << ": |K| = " << inputs.front().size();
      for (std::size_t k = 1; k < inputs.size(); ++k) msg << ", |C_" << t.children[ui][k - 1] << "| = " << inputs[k].size();
      msg << " (product " << product << " > " << *config.max_set_size << ")";
      throw ResourceLimit(msg.str());
    }

    const int up = t.parent[ui];
    std::vector<VarId> eliminate;
    for (VarId v : t.clusters[ui])
      if (up < 0 || !t.contains(up, v)) eliminate.push_back(v);

    CombineStats cs;
    PotentialSet b = combine_and_sum_out(inputs, eliminate, &cs);
    inputs.clear();
    ns.a_size = cs.tuples - cs.conflicts;
    ns.b_size = b.size();
    if (cs.conflicts != 0) throw std::logic_error("conflicting policy choices met during propagation");

    if (exact) {
      ns.c_size = b.size();
      ns.bound = std::numeric_limits<double>::infinity();
      messages[ui] = std::move(b);
    } else {
      auto [kept, cov] = covering(b, alpha);
      if (config.covering_observer) config.covering_observer(b, kept, cov);
      ns.c_size = kept.size();
      ns.smallest_positive = cov.smallest_positive;
      ns.bound = cov.has_zero ? cov.bound_with_zero : cov.bound;
      messages[ui] = std::move(kept);
    }
    result.stats.total_kept += ns.c_size;
  }

  // Extraction at the root: maximum value, ties by smallest provenance.
  const PotentialSet& top = messages[static_cast<std::size_t>(*t.root)];
  if (top.empty()) throw std::logic_error("root message is empty");
  const Member* best = nullptr;
  for (const Member& mem : top.members) {
    const double v = mem.potential.scalar_value();
    if (!best || v > best->potential.scalar_value() ||
        (v == best->potential.scalar_value() && mem.provenance < best->provenance))
      best = &mem;
  }
  result.value = best->potential.scalar_value();
  for (VarId dec : d.decision_variables()) {
    const std::uint64_t k = best->provenance.choice_for(dec).value_or(0);
    result.strategy.policies.emplace(dec, pure_policy(d, dec, k));
  }

  if (config.collect_stats) result.stats.nodes = std::move(node_stats);
  result.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

namespace {

void expect_valid(const InfluenceDiagram& d, const TreeDecomposition& t, const char* stage) {
  if (auto report = validate_decomposition(d, t); !report.empty())
    throw std::logic_error(std::string(stage) + " produced an invalid decomposition: " + report.front().message);
}

}  // namespace

SolverResult solve_full(const InfluenceDiagram& d, const SolverConfig& config) {
  if (auto report = validate_diagram(d); !report.empty())
    throw InvalidArgument("invalid diagram: " + report.front().variable + ": " + report.front().message);

  if (d.value_variables().empty()) {
    if (!(config.epsilon >= 0.0) || !std::isfinite(config.epsilon)) throw InvalidArgument("epsilon must be finite and >= 0");
    SolverResult r;
    r.value = 0.0;
    r.strategy = default_strategy(d);
    return r;
  }

  const TreeDecomposition built = build_decomposition(d);
  expect_valid(d, built, "build_decomposition");
  const TreeDecomposition binary = binarize(built);
  expect_valid(d, binary, "binarize");
  const TreeDecomposition leaves = ensure_value_leaves(d, binary);
  expect_valid(d, leaves, "ensure_value_leaves");
  if (binary.width() > built.width() || leaves.width() > binary.width() || leaves.max_degree() > 3)
    throw std::logic_error("decomposition transforms increased the width or degree");
  const TreeDecomposition rooted = root_and_order(leaves, default_root(leaves));
  expect_valid(d, rooted, "root_and_order");

  const ReductionResult reduced = reduce_to_single_value(d, rooted);
  expect_valid(reduced.diagram, reduced.decomposition, "reduce_to_single_value");
  if (reduced.decomposition.width() > rooted.width() + 3) throw std::logic_error("reduction increased the width by more than 3");
  const NormalizedDiagram normalized = normalize_utilities(reduced.diagram);

  SolverResult r = solve(normalized.diagram, reduced.decomposition, config);
  r.value = normalized.offset + normalized.scale * r.value;
  return r;
}

}  // namespace limid
