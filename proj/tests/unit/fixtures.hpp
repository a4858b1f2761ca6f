#pragma once

// Small diagrams and brute-force reference computations shared by the tests.
// The references deliberately avoid the library's own enumeration code.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "limid/generate.hpp"
#include "limid/model.hpp"
#include "limid/treedecomp.hpp"

namespace fixtures {

using limid::InfluenceDiagram;
using limid::Strategy;
using limid::Table;
using limid::VarId;
using limid::VarKind;

inline VarId add(InfluenceDiagram& d, std::string name, VarKind kind, int card = 0) {
  d.variables.push_back({std::move(name), kind, kind == VarKind::value ? 0 : card, {}});
  return d.size() - 1;
}

inline void arc(InfluenceDiagram& d, VarId from, VarId to) { d.arcs.emplace_back(from, to); }

// D1 -> C1 -> V1, C1 -> C2, D2 -> C2, C2 -> V2, all binary.
inline InfluenceDiagram two_stage(bool uniform = false, double reward = 1.0) {
  InfluenceDiagram d;
  const VarId d1 = add(d, "D1", VarKind::decision, 2);
  const VarId c1 = add(d, "C1", VarKind::chance, 2);
  const VarId d2 = add(d, "D2", VarKind::decision, 2);
  const VarId c2 = add(d, "C2", VarKind::chance, 2);
  const VarId v1 = add(d, "V1", VarKind::value);
  const VarId v2 = add(d, "V2", VarKind::value);
  arc(d, d1, c1);
  arc(d, c1, v1);
  arc(d, c1, c2);
  arc(d, d2, c2);
  arc(d, c2, v2);
  if (uniform) {
    d.cpts[c1] = {{d1}, {0.5, 0.5, 0.5, 0.5}};
    d.cpts[c2] = {{c1, d2}, std::vector<double>(8, 0.5)};
    d.rewards[v1] = {{c1}, {reward, reward}};
    d.rewards[v2] = {{c2}, {reward, reward}};
  } else {
    d.cpts[c1] = {{d1}, {0.9, 0.1, 0.2, 0.8}};
    d.cpts[c2] = {{c1, d2}, {0.7, 0.3, 0.4, 0.6, 0.1, 0.9, 0.5, 0.5}};
    d.rewards[v1] = {{c1}, {1.0, 0.0}};
    d.rewards[v2] = {{c2}, {0.3, 1.0}};
  }
  return d;
}

// D binary, C binary with P(c1 | d1) = 0.8, P(c1 | d2) = 0.3, U(c1) = 1,
// U(c2) = 0.
inline InfluenceDiagram two_strategy() {
  InfluenceDiagram d;
  const VarId dd = add(d, "D", VarKind::decision, 2);
  const VarId c = add(d, "C", VarKind::chance, 2);
  const VarId v = add(d, "V", VarKind::value);
  arc(d, dd, c);
  arc(d, c, v);
  d.cpts[c] = {{dd}, {0.8, 0.2, 0.3, 0.7}};
  d.rewards[v] = {{c}, {1.0, 0.0}};
  return d;
}

inline InfluenceDiagram random_diagram(std::uint64_t seed, int chance, int decisions, int card, int parents,
                                       int values) {
  limid::GenParams p;
  p.chance = chance;
  p.decisions = decisions;
  p.card = card;
  p.max_parents = parents;
  p.values = values;
  p.seed = seed;
  return limid::generate_diagram(p);
}

// Offset of a child-fastest table entry under the full assignment `x`.
inline std::size_t index_of(const InfluenceDiagram& d, const std::vector<VarId>& parents, int child_card,
                            int child_state, const std::vector<int>& x) {
  std::size_t offset = static_cast<std::size_t>(child_state), stride = static_cast<std::size_t>(child_card);
  for (VarId p : parents) {
    offset += stride * static_cast<std::size_t>(x[static_cast<std::size_t>(p)]);
    stride *= static_cast<std::size_t>(d.cardinality(p));
  }
  return offset;
}

// Sum over every joint assignment of chance and decision variables of
// P(x) * sum_V U(pa_V), with no pruning and no ordering tricks.
inline double naive_expected_utility(const InfluenceDiagram& d, const Strategy& s) {
  std::vector<int> x(static_cast<std::size_t>(d.size()), 0);
  std::vector<VarId> free;
  for (VarId v = 0; v < d.size(); ++v)
    if (d.var(v).kind != VarKind::value) free.push_back(v);
  double total = 0.0;
  while (true) {
    double p = 1.0;
    for (VarId v : free) {
      const int card = d.cardinality(v);
      const int state = x[static_cast<std::size_t>(v)];
      if (d.var(v).kind == VarKind::chance) {
        const Table& t = d.cpts.at(v);
        p *= t.values[index_of(d, t.parents, card, state, x)];
      } else {
        const auto& pol = s.policies.at(v);
        p *= pol.table[index_of(d, pol.parents, card, state, x)];
      }
    }
    double u = 0.0;
    for (const auto& [v, t] : d.rewards) u += t.values[index_of(d, t.parents, 1, 0, x)];
    total += p * u;
    std::size_t k = 0;
    for (; k < free.size(); ++k) {
      auto& xv = x[static_cast<std::size_t>(free[k])];
      if (++xv < d.cardinality(free[k])) break;
      xv = 0;
    }
    if (k == free.size()) break;
  }
  return total;
}

// Random (generally non-pure) strategy.
inline Strategy random_strategy(const InfluenceDiagram& d, limid::Random& rng) {
  Strategy s;
  for (VarId dec : d.decision_variables()) {
    limid::Policy p;
    p.decision = dec;
    p.parents = d.parents(dec);
    std::size_t columns = 1;
    for (VarId q : p.parents) columns *= static_cast<std::size_t>(d.cardinality(q));
    const int card = d.cardinality(dec);
    for (std::size_t c = 0; c < columns; ++c) {
      std::vector<double> col(static_cast<std::size_t>(card));
      double sum = 0.0;
      for (double& v : col) sum += (v = rng.exponential());
      for (double& v : col) v /= sum;
      p.table.insert(p.table.end(), col.begin(), col.end());
    }
    s.policies[dec] = std::move(p);
  }
  return s;
}

// Maximum of naive_expected_utility over the product of pure policies.
inline double naive_meu(const InfluenceDiagram& d) {
  const auto decisions = d.decision_variables();
  std::vector<std::vector<limid::Policy>> all;
  for (VarId dec : decisions) all.push_back(limid::enumerate_pure_policies(d, dec));
  std::vector<std::size_t> pick(decisions.size(), 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    Strategy s;
    for (std::size_t k = 0; k < decisions.size(); ++k) s.policies[decisions[k]] = all[k][pick[k]];
    best = std::max(best, naive_expected_utility(d, s));
    std::size_t k = 0;
    for (; k < pick.size(); ++k) {
      if (++pick[k] < all[k].size()) break;
      pick[k] = 0;
    }
    if (k == pick.size()) break;
  }
  return best;
}

// Minimum induced width over all elimination orders (tiny graphs only).
inline int exhaustive_treewidth(const std::vector<std::vector<bool>>& g, const std::vector<int>& vertices) {
  std::vector<int> order = vertices;
  std::sort(order.begin(), order.end());
  int best = std::numeric_limits<int>::max();
  do {
    auto h = g;
    std::vector<bool> gone(g.size(), false);
    int width = 0;
    for (int v : order) {
      std::vector<int> nb;
      for (int u : vertices)
        if (!gone[static_cast<std::size_t>(u)] && u != v && h[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)])
          nb.push_back(u);
      width = std::max(width, static_cast<int>(nb.size()));
      for (int a : nb)
        for (int b : nb)
          if (a != b) h[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
      gone[static_cast<std::size_t>(v)] = true;
    }
    best = std::min(best, width);
  } while (std::next_permutation(order.begin(), order.end()));
  return vertices.empty() ? -1 : best;
}

}  // namespace fixtures
