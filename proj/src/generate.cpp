#include "limid/generate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "limid/error.hpp"

namespace limid {

std::uint64_t Random::below(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Random::exponential() { return -std::log1p(-uniform()); }

namespace {

// k distinct entries of `pool`, sorted.
std::vector<VarId> sample(Random& rng, std::vector<VarId> pool, int k) {
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

InfluenceDiagram generate_diagram(const GenParams& params) {
  if (params.chance < 0 || params.decisions < 0 || params.values < 0 || params.max_parents < 0 || params.card < 1)
    throw InvalidArgument("generator parameters must be nonnegative and card >= 1");
  Random rng(params.seed);
  InfluenceDiagram d;
  const int lo_card = std::min(2, params.card);
  for (int i = 1; i <= params.chance; ++i)
    d.variables.push_back({"C" + std::to_string(i), VarKind::chance, rng.between(lo_card, params.card), {}});
  for (int i = 1; i <= params.decisions; ++i)
    d.variables.push_back({"D" + std::to_string(i), VarKind::decision, rng.between(lo_card, params.card), {}});
  const int n = params.chance + params.decisions;

  std::vector<VarId> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);

  for (int k = 0; k < n; ++k) {
    const VarId v = order[static_cast<std::size_t>(k)];
    const int count = rng.between(0, std::min(params.max_parents, k));
    std::vector<VarId> preds(order.begin(), order.begin() + k);
    for (VarId p : sample(rng, preds, count)) d.arcs.emplace_back(p, v);
  }

  for (VarId v = 0; v < params.chance; ++v) {
    Table t;
    t.parents = d.parents(v);
    std::size_t columns = 1;
    for (VarId p : t.parents) columns *= static_cast<std::size_t>(d.cardinality(p));
    const auto card = static_cast<std::size_t>(d.cardinality(v));
    for (std::size_t c = 0; c < columns; ++c) {
      std::vector<double> column(card);
      double sum = 0.0;
      for (double& x : column) sum += (x = rng.exponential());
      for (double& x : column) x /= sum;
      t.values.insert(t.values.end(), column.begin(), column.end());
    }
    d.cpts[v] = std::move(t);
  }

  std::vector<VarId> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int i = 1; i <= params.values; ++i) {
    d.variables.push_back({"V" + std::to_string(i), VarKind::value, 0, {}});
    const VarId v = d.size() - 1;
    const int count = n == 0 ? 0 : rng.between(std::min(1, params.max_parents), std::min(params.max_parents, n));
    Table t;
    t.parents = sample(rng, pool, count);
    for (VarId p : t.parents) d.arcs.emplace_back(p, v);
    std::size_t columns = 1;
    for (VarId p : t.parents) columns *= static_cast<std::size_t>(d.cardinality(p));
    for (std::size_t c = 0; c < columns; ++c) t.values.push_back(rng.uniform());
    d.rewards[v] = std::move(t);
  }
  std::sort(d.arcs.begin(), d.arcs.end());
  return d;
}

}  // namespace limid
