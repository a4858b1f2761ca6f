#include "limid/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "limid/error.hpp"

namespace limid {

UtilityBounds utility_bounds(const InfluenceDiagram& d) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (VarId v : d.value_variables()) {
    for (double u : d.rewards.at(v).values) {
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
  }
  if (!std::isfinite(lo)) throw InvalidArgument("utility bounds need at least one reward entry");
  if (hi <= lo) hi = lo + 1.0;
  return {lo, hi};
}

namespace {

std::string fresh_name(const InfluenceDiagram& d, std::string name) {
  while (d.find(name)) name += "'";
  return name;
}

VarId add_variable(InfluenceDiagram& d, std::string name, VarKind kind, int card) {
  d.variables.push_back({fresh_name(d, std::move(name)), kind, card, {}});
  return d.size() - 1;
}

void check_preconditions(const InfluenceDiagram& d, const TreeDecomposition& t) {
  if (auto report = validate_decomposition(d, t); !report.empty())
    throw InvalidArgument("invalid decomposition: " + report.front().variable + ": " + report.front().message);
  if (t.max_degree() > 3) throw InvalidArgument("decomposition is not binary");
  if (!t.is_rooted()) throw InvalidArgument("decomposition is not rooted");
  for (VarId v : d.value_variables())
    if (!t.value_leaves.count(v)) throw InvalidArgument("no value leaf for " + d.var(v).name);
  if (d.value_variables().empty()) throw InvalidArgument("diagram has no value variable");
}

}  // namespace

ReductionResult reduce_to_single_value(const InfluenceDiagram& d, const TreeDecomposition& t) {
  check_preconditions(d, t);

  // Order value variables by the first appearance of their leaf on the tour.
  std::vector<std::size_t> first_seen(static_cast<std::size_t>(t.size()), t.euler_tour.size());
  for (std::size_t pos = t.euler_tour.size(); pos-- > 0;)
    first_seen[static_cast<std::size_t>(t.euler_tour[pos])] = pos;
  std::vector<VarId> values = d.value_variables();
  std::stable_sort(values.begin(), values.end(), [&](VarId a, VarId b) {
    return first_seen[static_cast<std::size_t>(t.value_leaves.at(a))] <
           first_seen[static_cast<std::size_t>(t.value_leaves.at(b))];
  });

  ReductionResult r;
  r.bounds = utility_bounds(d);
  r.values = values;
  r.q = static_cast<int>(values.size());
  const double lo = r.bounds.lower;
  const double span = r.bounds.upper - r.bounds.lower;

  InfluenceDiagram& out = r.diagram;
  out = d;
  for (VarId v : values) {
    Variable& w = out.variables[static_cast<std::size_t>(v)];
    w.kind = VarKind::chance;
    w.cardinality = 2;
    w.states.clear();
    w.name = fresh_name(d, "W[" + d.var(v).name + "]");
    Table cpt;
    cpt.parents = d.rewards.at(v).parents;
    for (double u : d.rewards.at(v).values) {
      const double p = std::clamp((u - lo) / span, 0.0, 1.0);
      cpt.values.push_back(p);
      cpt.values.push_back(1.0 - p);
    }
    out.rewards.erase(v);
    out.cpts[v] = std::move(cpt);
    r.w_vars.push_back(v);
  }

  for (int i = 1; i <= r.q; ++i) {
    const VarId o = add_variable(out, "O" + std::to_string(i), VarKind::chance, 2);
    const VarId w = r.w_vars[static_cast<std::size_t>(i - 1)];
    Table cpt;
    if (i == 1) {
      cpt.parents = {w};
      cpt.values = {1.0, 0.0, 0.0, 1.0};
    } else {
      const VarId prev = r.o_vars.back();
      const double k = static_cast<double>(i);
      cpt.parents = {prev, w};
      // Columns ordered (o_prev, w_i) = (0,0), (1,0), (0,1), (1,1).
      const double up_low = (k - 1.0) / k;  // o_prev = 0, w_i = 1
      const double down_high = 1.0 / k;     // o_prev = 1, w_i = 0
      cpt.values = {1.0, 0.0, down_high, 1.0 - down_high, up_low, 1.0 - up_low, 0.0, 1.0};
      out.arcs.emplace_back(prev, o);
    }
    out.arcs.emplace_back(w, o);
    out.cpts[o] = std::move(cpt);
    r.o_vars.push_back(o);
  }

  r.value_var = add_variable(out, "V", VarKind::value, 0);
  out.arcs.emplace_back(r.o_vars.back(), r.value_var);
  const double q = static_cast<double>(r.q);
  out.rewards[r.value_var] = Table{{r.o_vars.back()}, {q * r.bounds.upper, q * r.bounds.lower}};

  // Decomposition: value leaves absorb W_i, O_i, O_{i-1}; O_{i-1} is then
  // threaded through every node visited between consecutive value leaves.
  TreeDecomposition& td = r.decomposition;
  td = t;
  td.value_leaves.clear();
  auto insert = [&td](int node, VarId v) {
    auto& c = td.clusters[static_cast<std::size_t>(node)];
    auto it = std::lower_bound(c.begin(), c.end(), v);
    if (it == c.end() || *it != v) c.insert(it, v);
  };
  for (int i = 0; i < r.q; ++i) {
    const int leaf = t.value_leaves.at(values[static_cast<std::size_t>(i)]);
    insert(leaf, r.w_vars[static_cast<std::size_t>(i)]);
    insert(leaf, r.o_vars[static_cast<std::size_t>(i)]);
    if (i > 0) {
      const VarId prev = r.o_vars[static_cast<std::size_t>(i - 1)];
      insert(leaf, prev);
      const std::size_t from = first_seen[static_cast<std::size_t>(t.value_leaves.at(values[static_cast<std::size_t>(i - 1)]))];
      const std::size_t to = first_seen[static_cast<std::size_t>(leaf)];
      for (std::size_t pos = from + 1; pos < to; ++pos) insert(t.euler_tour[pos], prev);
    }
  }
  return r;
}

double verify_chain_identity(const ReductionResult& r, const InfluenceDiagram& original, std::uint64_t cap) {
  std::vector<VarId> vars;
  std::uint64_t total = 1;
  for (VarId v = 0; v < original.size(); ++v) {
    if (original.var(v).kind == VarKind::value) continue;
    vars.push_back(v);
    total *= static_cast<std::uint64_t>(original.cardinality(v));
    if (total > cap) throw ResourceLimit("instance too large for chain identity enumeration");
  }

  const InfluenceDiagram& red = r.diagram;
  auto column = [&red](const Table& t, const std::vector<int>& assignment) {
    std::size_t off = 0, stride = 1;
    for (VarId p : t.parents) {
      off += static_cast<std::size_t>(assignment[static_cast<std::size_t>(p)]) * stride;
      stride *= static_cast<std::size_t>(red.cardinality(p));
    }
    return off;
  };

  std::vector<int> assignment(static_cast<std::size_t>(red.size()), 0);
  std::vector<double> pw(static_cast<std::size_t>(r.q));
  double worst = 0.0;
  for (std::uint64_t n = 0; n < total; ++n) {
    for (int i = 0; i < r.q; ++i) {
      const Table& t = red.cpts.at(r.w_vars[static_cast<std::size_t>(i)]);
      pw[static_cast<std::size_t>(i)] = t.values[2 * column(t, assignment)];
    }
    // Marginal of each O_i given (C, D), pushed through the chain CPTs.
    double po = 0.0;
    double running = 0.0;
    for (int i = 0; i < r.q; ++i) {
      const Table& t = red.cpts.at(r.o_vars[static_cast<std::size_t>(i)]);
      const double w1 = pw[static_cast<std::size_t>(i)];
      double next = 0.0;
      if (i == 0) {
        next = t.values[0] * w1 + t.values[2] * (1.0 - w1);
      } else {
        const double marg_o[2] = {po, 1.0 - po};
        const double marg_w[2] = {w1, 1.0 - w1};
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) next += t.values[static_cast<std::size_t>(2 * (a + 2 * b))] * marg_o[a] * marg_w[b];
      }
      po = next;
      running += w1;
      worst = std::max(worst, std::abs(po - running / static_cast<double>(i + 1)));
    }
    for (VarId v : vars) {
      auto& a = assignment[static_cast<std::size_t>(v)];
      if (++a < original.cardinality(v)) break;
      a = 0;
    }
  }
  return worst;
}

NormalizedDiagram normalize_utilities(const InfluenceDiagram& d) {
  const auto values = d.value_variables();
  if (values.size() != 1) throw InvalidArgument("normalisation needs exactly one value variable");
  NormalizedDiagram n;
  n.diagram = d;
  auto& table = n.diagram.rewards.at(values.front()).values;
  if (table.empty()) return n;
  const auto [lo, hi] = std::minmax_element(table.begin(), table.end());
  n.offset = *lo;
  n.scale = (*hi > *lo) ? *hi - *lo : 1.0;
  for (double& u : table) u = std::clamp((u - n.offset) / n.scale, 0.0, 1.0);
  return n;
}

}  // namespace limid
