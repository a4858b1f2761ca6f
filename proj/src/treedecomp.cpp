#include "limid/treedecomp.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <string>

#include "limid/error.hpp"

namespace limid {

int TreeDecomposition::width() const {
  int w = -1;
  for (const auto& c : clusters) w = std::max(w, static_cast<int>(c.size()) - 1);
  return w;
}

std::vector<std::vector<int>> TreeDecomposition::adjacency() const {
  std::vector<std::vector<int>> adj(clusters.size());
  for (const auto& [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  return adj;
}

int TreeDecomposition::max_degree() const {
  int deg = 0;
  for (const auto& n : adjacency()) deg = std::max(deg, static_cast<int>(n.size()));
  return deg;
}

bool TreeDecomposition::contains(int node, VarId v) const {
  const auto& c = clusters.at(static_cast<std::size_t>(node));
  return std::binary_search(c.begin(), c.end(), v);
}

void TreeDecomposition::clear_rooting() {
  root.reset();
  parent.clear();
  children.clear();
  euler_tour.clear();
  leaf_order.clear();
}

std::vector<std::vector<bool>> moral_graph(const InfluenceDiagram& d) {
  const auto n = static_cast<std::size_t>(d.size());
  std::vector<std::vector<bool>> g(n, std::vector<bool>(n, false));
  auto clique = [&](const std::vector<VarId>& vars) {
    for (VarId a : vars)
      for (VarId b : vars)
        if (a != b) g[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
  };
  for (VarId v = 0; v < d.size(); ++v) {
    if (d.var(v).kind == VarKind::value)
      clique(d.parents(v));
    else
      clique(d.family(v));
  }
  return g;
}

namespace {

using Graph = std::vector<std::vector<bool>>;

// Number of vertices outside `eliminated` and other than v that v reaches
// through paths whose interior lies in `eliminated`.
int reach_count(const Graph& g, std::uint32_t eliminated, int v) {
  const int n = static_cast<int>(g.size());
  std::uint32_t seen = 1u << v;
  std::vector<int> stack{v};
  int count = 0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int w = 0; w < n; ++w) {
      if (!g[static_cast<std::size_t>(u)][static_cast<std::size_t>(w)] || (seen >> w & 1u)) continue;
      seen |= 1u << w;
      if (eliminated >> w & 1u)
        stack.push_back(w);
      else
        ++count;
    }
  }
  return count;
}

std::vector<int> exact_order(const Graph& g) {
  const int n = static_cast<int>(g.size());
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1u);
  std::vector<int> best(static_cast<std::size_t>(full) + 1, std::numeric_limits<int>::max());
  std::vector<int> last(static_cast<std::size_t>(full) + 1, -1);
  best[0] = -1;
  for (std::uint32_t s = 1; s <= full; ++s) {
    for (int v = 0; v < n; ++v) {
      if (!(s >> v & 1u)) continue;
      const std::uint32_t rest = s & ~(1u << v);
      const int w = std::max(best[rest], reach_count(g, rest, v));
      if (w < best[s]) {
        best[s] = w;
        last[s] = v;
      }
    }
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::uint32_t s = full;
  for (int k = n - 1; k >= 0; --k) {
    const int v = last[s];
    order[static_cast<std::size_t>(k)] = v;
    s &= ~(1u << v);
  }
  return order;
}

std::vector<int> min_fill_order(Graph g) {
  const auto n = g.size();
  std::vector<bool> done(n, false);
  std::vector<int> order;
  order.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    std::size_t best_fill = 0, best_deg = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v]) continue;
      std::vector<std::size_t> nb;
      for (std::size_t w = 0; w < n; ++w)
        if (!done[w] && g[v][w]) nb.push_back(w);
      std::size_t fill = 0;
      for (std::size_t a = 0; a < nb.size(); ++a)
        for (std::size_t b = a + 1; b < nb.size(); ++b)
          if (!g[nb[a]][nb[b]]) ++fill;
      if (best == n || fill < best_fill || (fill == best_fill && nb.size() < best_deg)) {
        best = v;
        best_fill = fill;
        best_deg = nb.size();
      }
    }
    std::vector<std::size_t> nb;
    for (std::size_t w = 0; w < n; ++w)
      if (!done[w] && g[best][w]) nb.push_back(w);
    for (std::size_t a : nb)
      for (std::size_t b : nb)
        if (a != b) g[a][b] = true;
    done[best] = true;
    order.push_back(static_cast<int>(best));
  }
  return order;
}

}  // namespace

std::vector<int> elimination_order(const Graph& graph, std::size_t exact_limit) {
  if (graph.size() <= std::min<std::size_t>(exact_limit, 20)) return exact_order(graph);
  return min_fill_order(graph);
}

int induced_width(const Graph& graph, const std::vector<int>& order) {
  Graph g = graph;
  const auto n = g.size();
  std::vector<bool> done(n, false);
  int width = -1;
  for (int v : order) {
    const auto uv = static_cast<std::size_t>(v);
    std::vector<std::size_t> nb;
    for (std::size_t w = 0; w < n; ++w)
      if (!done[w] && g[uv][w]) nb.push_back(w);
    width = std::max(width, static_cast<int>(nb.size()));
    for (std::size_t a : nb)
      for (std::size_t b : nb)
        if (a != b) g[a][b] = true;
    done[uv] = true;
  }
  return width;
}

TreeDecomposition build_decomposition(const InfluenceDiagram& d, const DecompositionOptions& options) {
  std::vector<VarId> vars;
  for (VarId v = 0; v < d.size(); ++v)
    if (d.var(v).kind != VarKind::value) vars.push_back(v);

  TreeDecomposition t;
  if (vars.empty()) {
    t.clusters.emplace_back();
    return t;
  }

  const Graph full = moral_graph(d);
  const auto n = vars.size();
  Graph g(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      g[a][b] = full[static_cast<std::size_t>(vars[a])][static_cast<std::size_t>(vars[b])];

  const std::vector<int> order = elimination_order(g, options.exact_limit);
  std::vector<std::size_t> position(n);
  for (std::size_t k = 0; k < n; ++k) position[static_cast<std::size_t>(order[k])] = k;

  // One cluster per eliminated vertex, linked to the cluster of its first
  // eliminated higher neighbour.
  std::vector<std::set<std::size_t>> clusters(n);
  std::vector<std::set<std::size_t>> adj(n);
  std::vector<bool> done(n, false);
  std::vector<std::size_t> roots;
  for (std::size_t k = 0; k < n; ++k) {
    const auto v = static_cast<std::size_t>(order[k]);
    std::vector<std::size_t> nb;
    for (std::size_t w = 0; w < n; ++w)
      if (!done[w] && g[v][w]) nb.push_back(w);
    clusters[k].insert(v);
    clusters[k].insert(nb.begin(), nb.end());
    for (std::size_t a : nb)
      for (std::size_t b : nb)
        if (a != b) g[a][b] = true;
    done[v] = true;
    if (nb.empty()) {
      roots.push_back(k);
    } else {
      std::size_t first = n;
      for (std::size_t w : nb) first = std::min(first, position[w]);
      adj[k].insert(first);
      adj[first].insert(k);
    }
  }
  // Join the components of a disconnected graph through empty separators.
  for (std::size_t r = 0; r + 1 < roots.size(); ++r) {
    adj[roots[r]].insert(roots.back());
    adj[roots.back()].insert(roots[r]);
  }

  // Absorb clusters contained in a neighbour.
  std::vector<bool> alive(n, true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < n && !changed; ++a) {
      if (!alive[a]) continue;
      for (std::size_t b : adj[a]) {
        if (!std::includes(clusters[b].begin(), clusters[b].end(), clusters[a].begin(), clusters[a].end())) continue;
        for (std::size_t c : adj[a]) {
          adj[c].erase(a);
          if (c != b) {
            adj[c].insert(b);
            adj[b].insert(c);
          }
        }
        adj[a].clear();
        alive[a] = false;
        changed = true;
        break;
      }
    }
  }

  std::vector<int> rename(n, -1);
  for (std::size_t k = 0; k < n; ++k) {
    if (!alive[k]) continue;
    rename[k] = t.size();
    std::vector<VarId> cluster;
    for (std::size_t local : clusters[k]) cluster.push_back(vars[local]);
    std::sort(cluster.begin(), cluster.end());
    t.clusters.push_back(std::move(cluster));
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (!alive[a]) continue;
    for (std::size_t b : adj[a])
      if (a < b) t.edges.emplace_back(rename[a], rename[b]);
  }
  std::sort(t.edges.begin(), t.edges.end());
  return t;
}

ValidationReport validate_decomposition(const InfluenceDiagram& d, const TreeDecomposition& t) {
  ValidationReport report;
  auto node_name = [](int i) { return "node " + std::to_string(i); };
  const int m = t.size();
  if (m == 0) {
    report.push_back({"", "decomposition has no nodes"});
    return report;
  }

  for (int i = 0; i < m; ++i) {
    const auto& c = t.clusters[static_cast<std::size_t>(i)];
    if (!std::is_sorted(c.begin(), c.end()) || std::adjacent_find(c.begin(), c.end()) != c.end())
      report.push_back({node_name(i), "cluster is not a sorted set"});
    for (VarId v : c) {
      if (v < 0 || v >= d.size())
        report.push_back({node_name(i), "cluster contains unknown variable " + std::to_string(v)});
      else if (d.var(v).kind == VarKind::value)
        report.push_back({d.var(v).name, "value variable inside a cluster"});
    }
  }
  if (!report.empty()) return report;

  // Tree-ness.
  bool tree = true;
  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : t.edges) {
    if (a < 0 || a >= m || b < 0 || b >= m || a == b) {
      report.push_back({"", "edge with invalid endpoints"});
      tree = false;
      continue;
    }
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
      report.push_back({"", "duplicate edge"});
      tree = false;
    }
  }
  if (tree && static_cast<int>(t.edges.size()) != m - 1) {
    report.push_back({"", "edge count is not m - 1"});
    tree = false;
  }
  const auto adj = tree ? t.adjacency() : std::vector<std::vector<int>>{};
  if (tree) {
    std::vector<bool> reached(static_cast<std::size_t>(m), false);
    std::vector<int> stack{0};
    reached[0] = true;
    int count = 0;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      ++count;
      for (int w : adj[static_cast<std::size_t>(u)])
        if (!reached[static_cast<std::size_t>(w)]) {
          reached[static_cast<std::size_t>(w)] = true;
          stack.push_back(w);
        }
    }
    if (count != m) {
      report.push_back({"", "decomposition is not connected"});
      tree = false;
    }
  }

  // Family preservation.
  auto covered = [&](const std::vector<VarId>& vars) {
    for (const auto& c : t.clusters)
      if (std::includes(c.begin(), c.end(), vars.begin(), vars.end())) return true;
    return false;
  };
  for (VarId v = 0; v < d.size(); ++v) {
    const auto need = d.var(v).kind == VarKind::value ? d.parents(v) : d.family(v);
    if (!covered(need)) report.push_back({d.var(v).name, "family not covered"});
  }

  // Running intersection.
  if (tree) {
    for (VarId v = 0; v < d.size(); ++v) {
      std::vector<int> holders;
      for (int i = 0; i < m; ++i)
        if (t.contains(i, v)) holders.push_back(i);
      if (holders.size() <= 1) continue;
      std::vector<bool> reached(static_cast<std::size_t>(m), false);
      std::vector<int> stack{holders.front()};
      reached[static_cast<std::size_t>(holders.front())] = true;
      std::size_t count = 0;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        ++count;
        for (int w : adj[static_cast<std::size_t>(u)])
          if (!reached[static_cast<std::size_t>(w)] && t.contains(w, v)) {
            reached[static_cast<std::size_t>(w)] = true;
            stack.push_back(w);
          }
      }
      if (count != holders.size()) report.push_back({d.var(v).name, "running intersection violated"});
    }
  }

  // Value leaves.
  std::set<int> leaf_nodes;
  for (const auto& [v, node] : t.value_leaves) {
    const std::string name = (v >= 0 && v < d.size()) ? d.var(v).name : std::to_string(v);
    if (v < 0 || v >= d.size() || d.var(v).kind != VarKind::value) {
      report.push_back({name, "value leaf registered for a non-value variable"});
      continue;
    }
    if (node < 0 || node >= m) {
      report.push_back({name, "value leaf refers to an unknown node"});
      continue;
    }
    if (!leaf_nodes.insert(node).second) report.push_back({name, "value leaf shared by two value variables"});
    if (tree && adj[static_cast<std::size_t>(node)].size() > 1) report.push_back({name, "value leaf is not a leaf"});
    if (t.clusters[static_cast<std::size_t>(node)] != d.parents(v))
      report.push_back({name, "value leaf cluster differs from the parent set"});
  }

  // Rooted structure.
  if (t.root && tree) {
    const int r = *t.root;
    bool ok = r >= 0 && r < m && static_cast<int>(t.parent.size()) == m &&
              static_cast<int>(t.children.size()) == m && t.parent[static_cast<std::size_t>(r)] == -1;
    if (ok) {
      for (const auto& [a, b] : t.edges) {
        if (t.parent[static_cast<std::size_t>(a)] != b && t.parent[static_cast<std::size_t>(b)] != a) ok = false;
      }
      ok = ok && static_cast<int>(t.euler_tour.size()) == 2 * m - 1;
    }
    if (!ok) report.push_back({"", "rooted structure inconsistent with the tree"});
  }
  return report;
}

TreeDecomposition binarize(const TreeDecomposition& t) {
  if (t.max_degree() <= 3) return t;
  TreeDecomposition out = t;
  out.clear_rooting();
  for (int i = 0; i < out.size(); ++i) {
    // Edge indices incident to i, in adjacency order.
    std::vector<std::size_t> incident;
    for (std::size_t e = 0; e < out.edges.size(); ++e)
      if (out.edges[e].first == i || out.edges[e].second == i) incident.push_back(e);
    if (incident.size() <= 3) continue;
    const int copy = out.size();
    out.clusters.push_back(out.clusters[static_cast<std::size_t>(i)]);
    for (std::size_t k = 2; k < incident.size(); ++k) {
      auto& e = out.edges[incident[k]];
      (e.first == i ? e.first : e.second) = copy;
    }
    out.edges.emplace_back(i, copy);
    // The copy now has incident.size() - 1 neighbours and is revisited later.
  }
  return out;
}

TreeDecomposition ensure_value_leaves(const InfluenceDiagram& d, const TreeDecomposition& t) {
  TreeDecomposition out = t;
  const auto values = d.value_variables();
  if (values.empty()) return out;

  std::map<int, VarId> taken;
  for (const auto& [v, node] : out.value_leaves) taken[node] = v;

  bool reshaped = false;
  for (VarId v : values) {
    if (out.value_leaves.count(v)) continue;
    const auto pa = d.parents(v);
    const auto adj = out.adjacency();
    int leaf = -1;
    for (int i = 0; i < out.size(); ++i) {
      if (adj[static_cast<std::size_t>(i)].size() <= 1 && !taken.count(i) &&
          out.clusters[static_cast<std::size_t>(i)] == pa) {
        leaf = i;
        break;
      }
    }
    if (leaf < 0) {
      int cover = -1;
      for (int i = 0; i < out.size(); ++i) {
        const auto& c = out.clusters[static_cast<std::size_t>(i)];
        if (!std::includes(c.begin(), c.end(), pa.begin(), pa.end())) continue;
        if (cover < 0 || (taken.count(cover) && !taken.count(i))) cover = i;
        if (!taken.count(cover)) break;
      }
      if (cover < 0) throw InvalidArgument("no cluster covers the parents of value variable " + d.var(v).name);
      const int j = out.size();
      out.clusters.push_back(out.clusters[static_cast<std::size_t>(cover)]);
      for (auto& e : out.edges) {
        if (e.first == cover) e.first = j;
        if (e.second == cover) e.second = j;
      }
      const int k = out.size();
      out.clusters.push_back(pa);
      out.edges.emplace_back(cover, j);
      out.edges.emplace_back(cover, k);
      // A displaced value leaf gets a fresh copy hanging off the split node.
      if (auto it = taken.find(cover); it != taken.end()) {
        const int copy = out.size();
        out.clusters.push_back(out.clusters[static_cast<std::size_t>(cover)]);
        out.edges.emplace_back(cover, copy);
        out.value_leaves[it->second] = copy;
        taken[copy] = it->second;
        taken.erase(it);
      }
      leaf = k;
      reshaped = true;
    }
    out.value_leaves[v] = leaf;
    taken[leaf] = v;
  }
  if (!reshaped) return out;
  out.clear_rooting();
  return binarize(out);
}

TreeDecomposition root_and_order(const TreeDecomposition& t, int r) {
  const int m = t.size();
  if (r < 0 || r >= m) throw InvalidArgument("unknown root node " + std::to_string(r));
  if (static_cast<int>(t.edges.size()) != m - 1) throw InvalidArgument("decomposition is not a tree");
  TreeDecomposition out = t;
  out.clear_rooting();
  const auto adj = t.adjacency();
  out.root = r;
  out.parent.assign(static_cast<std::size_t>(m), -1);
  out.children.assign(static_cast<std::size_t>(m), {});

  // Iterative Euler tour: a node is printed on entry and after each child.
  std::vector<bool> visited(static_cast<std::size_t>(m), false);
  std::vector<std::pair<int, std::size_t>> stack{{r, 0}};
  visited[static_cast<std::size_t>(r)] = true;
  out.euler_tour.push_back(r);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto& nb = adj[static_cast<std::size_t>(node)];
    while (next < nb.size() && nb[next] == out.parent[static_cast<std::size_t>(node)]) ++next;
    if (next == nb.size()) {
      if (out.children[static_cast<std::size_t>(node)].empty()) out.leaf_order.push_back(node);
      stack.pop_back();
      if (!stack.empty()) out.euler_tour.push_back(stack.back().first);
      continue;
    }
    const int child = nb[next++];
    if (visited[static_cast<std::size_t>(child)]) throw InvalidArgument("decomposition contains a cycle");
    visited[static_cast<std::size_t>(child)] = true;
    out.parent[static_cast<std::size_t>(child)] = node;
    out.children[static_cast<std::size_t>(node)].push_back(child);
    out.euler_tour.push_back(child);
    stack.emplace_back(child, 0);
  }
  if (std::find(visited.begin(), visited.end(), false) != visited.end())
    throw InvalidArgument("decomposition is not connected");
  return out;
}

int default_root(const TreeDecomposition& t) {
  if (t.value_leaves.size() == 1) return t.value_leaves.begin()->second;
  const auto adj = t.adjacency();
  if (t.size() <= 1 || adj[0].size() <= 2) return 0;
  for (int i = 0; i < t.size(); ++i)
    if (adj[static_cast<std::size_t>(i)].size() <= 2) return i;
  return 0;
}

}  // namespace limid
