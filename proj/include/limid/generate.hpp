#pragma once

#include <cstdint>
#include <random>

#include "limid/model.hpp"

namespace limid {

struct GenParams {
  int chance = 4;
  int decisions = 2;
  /// Largest cardinality; each variable draws its own from [2, card].
  int card = 2;
  int max_parents = 2;
  int values = 1;
  std::uint64_t seed = 0;
};

/// Random valid diagram, identical for identical parameters.
///
/// Chance and decision variables are placed in a random topological order;
/// each draws up to max_parents parents uniformly among its predecessors.
/// CPT columns follow a symmetric Dirichlet(1), rewards are uniform on
/// [0, 1), and every value variable gets between one and max_parents
/// chance/decision parents.
InfluenceDiagram generate_diagram(const GenParams& params);

/// Portable draws from a 64-bit Mersenne twister (the standard
/// distributions are implementation defined).
class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer on [lo, hi].
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  /// Exponential(1), the Gamma(1) draw behind Dirichlet(1).
  double exponential();

 private:
  std::mt19937_64 engine_;
};

}  // namespace limid
