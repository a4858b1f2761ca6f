#pragma once

#include <cstdint>
#include <vector>

#include "limid/model.hpp"
#include "limid/treedecomp.hpp"

namespace limid {

struct UtilityBounds {
  double lower = 0.0;
  double upper = 1.0;
};

/// Smallest and largest reward over all reward tables. A constant reward
/// range is widened to (lower, lower + 1) so that upper > lower.
UtilityBounds utility_bounds(const InfluenceDiagram& d);

/// Diagram with a single value variable equivalent to the input, together
/// with the decomposition grown from the input one.
///
/// Each value variable V_i becomes a binary chance variable W_i with
/// P(w_i = 0 | Pa(V_i)) = (U(Pa(V_i)) - lower) / (upper - lower). A chain of
/// binary variables O_1 -> ... -> O_q keeps P(o_i = 0 | C, D) equal to the
/// mean of P(w_j = 0 | C, D) over j <= i, and the new value variable reads
/// q * upper or q * lower from O_q. State 0 of W_i and O_i is the "first"
/// state; V_i keeps its id (now naming W_i) while the O_i and the new value
/// variable are appended.
struct ReductionResult {
  InfluenceDiagram diagram;
  TreeDecomposition decomposition;
  UtilityBounds bounds;
  /// Original value variables in leaf order; W_i reuses the id values[i].
  std::vector<VarId> values;
  std::vector<VarId> w_vars;
  std::vector<VarId> o_vars;
  VarId value_var = -1;
  int q = 0;
};

/// Requires a valid binary rooted decomposition of d with a value leaf for
/// every value variable; value variables are chained in the order in which
/// their leaves first appear on the Euler tour.
ReductionResult reduce_to_single_value(const InfluenceDiagram& d, const TreeDecomposition& t);

/// Largest absolute gap between P(o_i = 0 | C, D), obtained by pushing the
/// W marginals through the chain CPTs, and the mean of P(w_j = 0 | C, D) for
/// j <= i, over every joint assignment of the original chance and decision
/// variables. Throws ResourceLimit above `cap` assignments.
double verify_chain_identity(const ReductionResult& r, const InfluenceDiagram& original, std::uint64_t cap = 1'000'000);

struct NormalizedDiagram {
  InfluenceDiagram diagram;
  double offset = 0.0;
  double scale = 1.0;
};

/// Maps the single utility table affinely onto [0, 1]: u -> (u - offset) /
/// scale. Expected utilities transform the same way, so optimal strategies
/// are unchanged. Throws InvalidArgument unless there is exactly one value
/// variable.
NormalizedDiagram normalize_utilities(const InfluenceDiagram& d);

}  // namespace limid
