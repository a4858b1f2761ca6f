#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "limid/model.hpp"

namespace limid {

/// Tree of variable clusters over the chance and decision variables.
///
/// Clusters hold sorted variable ids. Node ids are indices into `clusters`;
/// adjacency follows the order of `edges`, which fixes the left-to-right child
/// order once the tree is rooted.
struct TreeDecomposition {
  std::vector<std::vector<VarId>> clusters;
  std::vector<std::pair<int, int>> edges;
  std::map<VarId, int> value_leaves;

  /// Populated by root_and_order.
  std::optional<int> root;
  std::vector<int> parent;
  std::vector<std::vector<int>> children;
  std::vector<int> euler_tour;
  std::vector<int> leaf_order;

  int size() const { return static_cast<int>(clusters.size()); }
  /// Largest cluster size minus one (-1 for an empty decomposition).
  int width() const;
  std::vector<std::vector<int>> adjacency() const;
  int max_degree() const;
  bool is_rooted() const { return root.has_value(); }
  bool contains(int node, VarId v) const;
  /// Drops the rooted structure; used by transformations that change shape.
  void clear_rooting();
};

/// Undirected interaction graph over all variables of the diagram: every
/// chance/decision family and every value parent set is a clique. Value
/// variables are isolated vertices.
std::vector<std::vector<bool>> moral_graph(const InfluenceDiagram& d);

/// Orders vertices for elimination. Graphs with at most `exact_limit`
/// vertices are solved exactly by dynamic programming over subsets, larger
/// ones with the min-fill heuristic (ties by degree, then id).
std::vector<int> elimination_order(const std::vector<std::vector<bool>>& graph, std::size_t exact_limit = 10);

/// Induced width of an elimination order.
int induced_width(const std::vector<std::vector<bool>>& graph, const std::vector<int>& order);

struct DecompositionOptions {
  std::size_t exact_limit = 10;
};

/// Tree decomposition of the moralised diagram built from an elimination
/// order. Clusters that are contained in a neighbour are absorbed.
TreeDecomposition build_decomposition(const InfluenceDiagram& d, const DecompositionOptions& options = {});

/// Reports tree-ness, family preservation, running intersection and, when
/// present, value-leaf and rooting consistency. Empty iff valid.
ValidationReport validate_decomposition(const InfluenceDiagram& d, const TreeDecomposition& t);

/// Splits nodes with more than three neighbours into chains of copies.
/// Original node ids and clusters are kept; new nodes are appended.
TreeDecomposition binarize(const TreeDecomposition& t);

/// Guarantees a distinct leaf whose cluster equals Pa(V) for every value
/// variable V, splitting a covering node i into i, j (taking i's neighbours)
/// and the new leaf k when needed, then re-binarises. Throws InvalidArgument
/// when no cluster covers some Pa(V).
TreeDecomposition ensure_value_leaves(const InfluenceDiagram& d, const TreeDecomposition& t);

/// Roots the tree at node r and fills parent/children, the Euler tour
/// (2m - 1 entries) and the leaf sequence in depth-first order.
TreeDecomposition root_and_order(const TreeDecomposition& t, int r);

/// Root used by the pipeline: the unique value leaf when there is exactly one,
/// otherwise node 0, falling back to the smallest-id node with at most two
/// neighbours so that every node has at most two children.
int default_root(const TreeDecomposition& t);

}  // namespace limid
