#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "limid/error.hpp"
#include "limid/treedecomp.hpp"

using namespace limid;
using fixtures::add;
using fixtures::arc;

namespace {

bool mentions(const ValidationReport& r, const std::string& text) {
  return std::any_of(r.begin(), r.end(), [&](const Violation& v) { return v.message.find(text) != std::string::npos; });
}

// Chance variables X0 -> X1 -> ... with uniform CPTs.
InfluenceDiagram chain(int n) {
  InfluenceDiagram d;
  for (int i = 0; i < n; ++i) {
    const VarId v = add(d, "X" + std::to_string(i), VarKind::chance, 2);
    if (i > 0) arc(d, v - 1, v);
    d.cpts[v] = {i > 0 ? std::vector<VarId>{v - 1} : std::vector<VarId>{},
                 std::vector<double>(i > 0 ? 4 : 2, 0.5)};
  }
  return d;
}

// Every variable is a parent of every later one.
InfluenceDiagram clique(int k) {
  InfluenceDiagram d;
  for (int i = 0; i < k; ++i) {
    const VarId v = add(d, "X" + std::to_string(i), VarKind::chance, 2);
    std::vector<VarId> parents(static_cast<std::size_t>(i));
    std::iota(parents.begin(), parents.end(), 0);
    for (VarId p : parents) arc(d, p, v);
    d.cpts[v] = {parents, std::vector<double>(std::size_t{2} << i, 0.5)};
  }
  return d;
}

std::vector<int> non_value(const InfluenceDiagram& d) {
  std::vector<int> out;
  for (VarId v = 0; v < d.size(); ++v)
    if (d.var(v).kind != VarKind::value) out.push_back(v);
  return out;
}

// Star: A with five children B1..B5, clusters {A} and {A, Bi}.
std::pair<InfluenceDiagram, TreeDecomposition> star() {
  InfluenceDiagram d;
  const VarId a = add(d, "A", VarKind::chance, 2);
  d.cpts[a] = {{}, {0.5, 0.5}};
  TreeDecomposition t;
  t.clusters.push_back({a});
  for (int i = 1; i <= 5; ++i) {
    const VarId b = add(d, "B" + std::to_string(i), VarKind::chance, 2);
    arc(d, a, b);
    d.cpts[b] = {{a}, {0.5, 0.5, 0.5, 0.5}};
    t.clusters.push_back({a, b});
    t.edges.emplace_back(0, i);
  }
  return {d, t};
}

std::vector<int> tour_counts(const TreeDecomposition& t) {
  std::vector<int> count(static_cast<std::size_t>(t.size()), 0);
  for (int n : t.euler_tour) ++count[static_cast<std::size_t>(n)];
  return count;
}

}  // namespace

TEST_CASE("chain has width 1") {
  const auto d = chain(3);
  const auto t = build_decomposition(d);
  CHECK(t.width() == 1);
  CHECK(validate_decomposition(d, t).empty());
}

TEST_CASE("two-stage width agrees with exhaustive search") {
  const auto d = fixtures::two_stage();
  const auto g = moral_graph(d);
  const int oracle = fixtures::exhaustive_treewidth(g, non_value(d));
  CHECK(oracle == 2);
  const auto t = build_decomposition(d);
  CHECK(t.width() == oracle);
  CHECK(validate_decomposition(d, t).empty());
}

TEST_CASE("clique of k variables has width k - 1") {
  for (int k = 1; k <= 6; ++k) {
    const auto d = clique(k);
    const auto t = build_decomposition(d);
    CHECK(t.width() == k - 1);
    CHECK(t.size() == 1);
  }
}

TEST_CASE("empty diagram decomposes into one empty node") {
  const auto t = build_decomposition(InfluenceDiagram{});
  CHECK(t.size() == 1);
  CHECK(t.clusters.front().empty());
  CHECK(t.width() == -1);
}

TEST_CASE("moral graph marries parents and value parent sets") {
  const auto d = fixtures::two_stage();
  const auto g = moral_graph(d);
  const auto id = [&](const char* n) { return static_cast<std::size_t>(*d.find(n)); };
  CHECK(g[id("C1")][id("D2")]);
  CHECK(g[id("D1")][id("C1")]);
  CHECK(!g[id("D1")][id("D2")]);
  CHECK(!g[id("D1")][id("C2")]);
  for (std::size_t v = 0; v < g.size(); ++v) CHECK(!g[id("V1")][v]);
}

TEST_CASE("exact elimination order is optimal on small graphs") {
  Random rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = rng.between(1, 7);
    std::vector<std::vector<bool>> g(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (rng.uniform() < 0.45) g[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = g[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = true;
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    const auto order = elimination_order(g);
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == all);
    CHECK(induced_width(g, order) == fixtures::exhaustive_treewidth(g, all));
  }
}

TEST_CASE("built decompositions are valid and tight on random diagrams") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto d = fixtures::random_diagram(seed, 4, 3, 3, 2, 2);
    const auto t = build_decomposition(d);
    CHECK(validate_decomposition(d, t).empty());
    CHECK(t.width() == fixtures::exhaustive_treewidth(moral_graph(d), non_value(d)));
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = fixtures::random_diagram(seed, 14, 6, 2, 3, 3);
    const auto t = build_decomposition(d);
    CHECK(validate_decomposition(d, t).empty());
  }
}

TEST_CASE("validation catches broken decompositions") {
  const auto d = chain(3);
  SUBCASE("running intersection") {
    TreeDecomposition t;
    t.clusters = {{0, 1}, {1, 2}, {0, 2}};
    t.edges = {{0, 1}, {1, 2}};
    CHECK(mentions(validate_decomposition(d, t), "running intersection violated"));
  }
  SUBCASE("family not covered") {
    auto f = fixtures::two_stage();
    TreeDecomposition t;
    t.clusters = {{*f.find("D1"), *f.find("C1")}, {*f.find("C1"), *f.find("C2")}};
    t.edges = {{0, 1}};
    CHECK(mentions(validate_decomposition(f, t), "family not covered"));
  }
  SUBCASE("not a tree") {
    TreeDecomposition t;
    t.clusters = {{0, 1}, {1, 2}, {1}};
    t.edges = {{0, 1}, {1, 2}, {0, 2}};
    CHECK(!validate_decomposition(d, t).empty());
  }
  SUBCASE("disconnected") {
    TreeDecomposition t;
    t.clusters = {{0, 1}, {1, 2}};
    CHECK(!validate_decomposition(d, t).empty());
  }
}

TEST_CASE("binarize splits a star of degree 5") {
  const auto [d, t] = star();
  REQUIRE(validate_decomposition(d, t).empty());
  CHECK(t.max_degree() == 5);
  const auto b = binarize(t);
  CHECK(b.max_degree() <= 3);
  CHECK(b.width() == t.width());
  CHECK(validate_decomposition(d, b).empty());
  for (int i = 0; i < t.size(); ++i) CHECK(b.clusters[static_cast<std::size_t>(i)] == t.clusters[static_cast<std::size_t>(i)]);
}

TEST_CASE("binarize leaves binary trees alone") {
  const auto d = chain(5);
  const auto t = build_decomposition(d);
  const auto b = binarize(t);
  CHECK(b.clusters == t.clusters);
  CHECK(b.edges == t.edges);

  TreeDecomposition single;
  single.clusters = {{0, 1}};
  const auto s = binarize(single);
  CHECK(s.size() == 1);
  CHECK(s.edges.empty());
}

TEST_CASE("value leaf already present") {
  InfluenceDiagram d;
  const VarId a = add(d, "A", VarKind::chance, 2);
  const VarId b = add(d, "B", VarKind::chance, 2);
  const VarId v = add(d, "V", VarKind::value);
  arc(d, a, b);
  arc(d, a, v);
  arc(d, b, v);
  d.cpts[a] = {{}, {0.5, 0.5}};
  d.cpts[b] = {{a}, {0.5, 0.5, 0.5, 0.5}};
  d.rewards[v] = {{a, b}, {0, 1, 2, 3}};
  const auto t = build_decomposition(d);
  REQUIRE(t.size() == 1);
  const auto e = ensure_value_leaves(d, t);
  CHECK(e.clusters == t.clusters);
  CHECK(e.edges == t.edges);
  CHECK(e.value_leaves == std::map<VarId, int>{{v, 0}});
  CHECK(validate_decomposition(d, e).empty());
}

TEST_CASE("two value variables on one internal node get two new leaves") {
  auto d = chain(4);
  const VarId v1 = add(d, "V1", VarKind::value);
  const VarId v2 = add(d, "V2", VarKind::value);
  arc(d, 1, v1);
  arc(d, 2, v1);
  arc(d, 2, v2);
  d.rewards[v1] = {{1, 2}, {0, 1, 2, 3}};
  d.rewards[v2] = {{2}, {0, 1}};
  TreeDecomposition t;
  t.clusters = {{0, 1}, {1, 2}, {2, 3}};
  t.edges = {{0, 1}, {1, 2}};
  REQUIRE(validate_decomposition(d, t).empty());
  const auto e = ensure_value_leaves(d, t);
  CHECK(validate_decomposition(d, e).empty());
  CHECK(e.width() == t.width());
  CHECK(e.max_degree() <= 3);
  REQUIRE(e.value_leaves.size() == 2);
  const int l1 = e.value_leaves.at(v1), l2 = e.value_leaves.at(v2);
  CHECK(l1 != l2);
  CHECK(l1 >= t.size());
  CHECK(l2 >= t.size());
  CHECK(e.clusters[static_cast<std::size_t>(l1)] == std::vector<VarId>{1, 2});
  CHECK(e.clusters[static_cast<std::size_t>(l2)] == std::vector<VarId>{2});
}

TEST_CASE("no value variables: ensure_value_leaves is the identity") {
  const auto d = chain(4);
  const auto t = build_decomposition(d);
  const auto e = ensure_value_leaves(d, t);
  CHECK(e.clusters == t.clusters);
  CHECK(e.edges == t.edges);
  CHECK(e.value_leaves.empty());
}

TEST_CASE("uncovered value parents are rejected") {
  auto d = chain(3);
  const VarId v = add(d, "V", VarKind::value);
  arc(d, 0, v);
  arc(d, 2, v);
  d.rewards[v] = {{0, 2}, {0, 1, 2, 3}};
  TreeDecomposition t;
  t.clusters = {{0, 1}, {1, 2}};
  t.edges = {{0, 1}};
  CHECK_THROWS_AS(ensure_value_leaves(d, t), InvalidArgument);
}

TEST_CASE("rooting a path at an end") {
  TreeDecomposition t;
  t.clusters = {{0}, {0, 1}, {1}};
  t.edges = {{0, 1}, {1, 2}};
  const auto r = root_and_order(t, 0);
  CHECK(r.parent == std::vector<int>{-1, 0, 1});
  CHECK(r.children[0] == std::vector<int>{1});
  CHECK(r.children[1] == std::vector<int>{2});
  CHECK(r.euler_tour == std::vector<int>{0, 1, 2, 1, 0});
  CHECK(r.leaf_order == std::vector<int>{2});
}

TEST_CASE("rooting a single node") {
  TreeDecomposition t;
  t.clusters = {{0}};
  const auto r = root_and_order(t, 0);
  CHECK(r.root == 0);
  CHECK(r.children[0].empty());
  CHECK(r.euler_tour == std::vector<int>{0});
}

TEST_CASE("pipeline decompositions: valid, binary, Euler tour of 2m - 1") {
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    const auto d = fixtures::random_diagram(seed, 5, 3, 3, 2, 1 + static_cast<int>(seed % 3));
    const auto built = build_decomposition(d);
    const auto bin = binarize(built);
    const auto leaves = ensure_value_leaves(d, bin);
    const auto rooted = root_and_order(leaves, default_root(leaves));
    CHECK(validate_decomposition(d, bin).empty());
    CHECK(validate_decomposition(d, leaves).empty());
    CHECK(validate_decomposition(d, rooted).empty());
    CHECK(bin.width() <= built.width());
    CHECK(leaves.width() <= bin.width());
    CHECK(rooted.max_degree() <= 3);
    CHECK(rooted.euler_tour.size() == static_cast<std::size_t>(2 * rooted.size() - 1));
    const auto counts = tour_counts(rooted);
    for (int n = 0; n < rooted.size(); ++n) {
      CHECK(counts[static_cast<std::size_t>(n)] == static_cast<int>(rooted.children[static_cast<std::size_t>(n)].size()) + 1);
      CHECK(counts[static_cast<std::size_t>(n)] <= 3);
    }
    std::set<int> leaf_nodes(rooted.leaf_order.begin(), rooted.leaf_order.end());
    for (const auto& [v, node] : rooted.value_leaves)
      if (node != *rooted.root) CHECK(leaf_nodes.count(node) == 1);
  }
}
