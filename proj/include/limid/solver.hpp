#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "limid/model.hpp"
#include "limid/potential.hpp"
#include "limid/treedecomp.hpp"

namespace limid {

/// Called after every covering with the input set, the kept subset and the
/// covering statistics.
using CoveringObserver = std::function<void(const PotentialSet& input, const PotentialSet& kept, const CoveringStats&)>;

struct SolverConfig {
  /// Approximation factor; 0 selects exact mode.
  double epsilon = 0.1;
  /// Skip coverings entirely and return the maximum expected utility.
  bool exact_mode = false;
  /// Largest product set (|K_i| times the child message sizes) a node may form.
  std::optional<std::size_t> max_set_size;
  /// Record per-node statistics in the result.
  bool collect_stats = false;
  CoveringObserver covering_observer;
};

struct NodeStats {
  int node = -1;
  std::vector<VarId> cluster;
  std::size_t k_size = 0;  ///< |K_i| after initialisation
  std::size_t a_size = 0;  ///< |A_i|
  std::size_t b_size = 0;  ///< |B_i|
  std::size_t c_size = 0;  ///< |C_i|
  std::optional<double> smallest_positive;
  double bound = 0.0;  ///< covering size bound for B_i (inf when unbounded)
};

struct SolverStats {
  double alpha = 1.0;
  int m = 0;
  double seconds = 0.0;
  /// Sum of |C_i| over all nodes; always recorded.
  std::size_t total_kept = 0;
  std::vector<NodeStats> nodes;
};

struct SolverResult {
  double value = 0.0;
  Strategy strategy;
  SolverStats stats;
};

/// Node receiving each variable's table: chance CPTs, decision policy sets
/// and the utility table go to the smallest-id node whose cluster covers the
/// family (value variables: the parent set, or their registered value leaf).
using FactorAssignment = std::map<VarId, int>;

FactorAssignment assign_factors(const InfluenceDiagram& d, const TreeDecomposition& t);

/// Propagates sets of potentials from the leaves to the root, pruning each
/// message to an alpha-covering with alpha = 1 + epsilon / (2m), and returns
/// the best root value together with the strategy that produced it.
///
/// Requires a single value variable with utilities in [0, 1] and a valid,
/// binary, rooted decomposition. The returned value is the expected utility
/// of the returned strategy and is at least MEU / (1 + epsilon).
SolverResult solve(const InfluenceDiagram& d, const TreeDecomposition& t, const SolverConfig& config);

/// Full pipeline for arbitrary diagrams: decomposition, binarisation, value
/// leaves, rooting, reduction to one value variable, normalisation and
/// solve. The value is reported on the original utility scale. When all
/// rewards are nonnegative the multiplicative guarantee carries over to it.
SolverResult solve_full(const InfluenceDiagram& d, const SolverConfig& config);

}  // namespace limid
