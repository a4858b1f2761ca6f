#include "limid/potential.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>

#include "limid/error.hpp"

namespace limid {

// ---------------------------------------------------------------------------
// Scope

std::size_t Scope::assignments() const {
  std::size_t n = 1;
  for (int c : cards) n *= static_cast<std::size_t>(c);
  return n;
}

bool Scope::contains(VarId v) const { return std::binary_search(vars.begin(), vars.end(), v); }

int Scope::cardinality_of(VarId v) const {
  auto it = std::lower_bound(vars.begin(), vars.end(), v);
  if (it == vars.end() || *it != v) throw InvalidArgument("variable " + std::to_string(v) + " not in scope");
  return cards[static_cast<std::size_t>(it - vars.begin())];
}

Scope Scope::of(std::vector<std::pair<VarId, int>> entries) {
  std::sort(entries.begin(), entries.end());
  Scope s;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0 && entries[i].first == entries[i - 1].first) {
      if (entries[i].second != entries[i - 1].second)
        throw InvalidArgument("inconsistent cardinality for variable " + std::to_string(entries[i].first));
      continue;
    }
    if (entries[i].second < 1) throw InvalidArgument("cardinality must be positive");
    s.vars.push_back(entries[i].first);
    s.cards.push_back(entries[i].second);
  }
  return s;
}

Scope Scope::of_variables(const InfluenceDiagram& d, std::vector<VarId> vars) {
  std::vector<std::pair<VarId, int>> entries;
  for (VarId v : vars) entries.emplace_back(v, d.cardinality(v));
  return of(std::move(entries));
}

Scope scope_union(const Scope& a, const Scope& b) {
  std::vector<std::pair<VarId, int>> entries;
  for (std::size_t i = 0; i < a.arity(); ++i) entries.emplace_back(a.vars[i], a.cards[i]);
  for (std::size_t i = 0; i < b.arity(); ++i) entries.emplace_back(b.vars[i], b.cards[i]);
  return Scope::of(std::move(entries));
}

Scope scope_minus(const Scope& a, std::span<const VarId> removed) {
  Scope s;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (std::find(removed.begin(), removed.end(), a.vars[i]) != removed.end()) continue;
    s.vars.push_back(a.vars[i]);
    s.cards.push_back(a.cards[i]);
  }
  return s;
}

namespace {

// For every joint assignment of `outer`, the linear index of its restriction
// to `inner` (inner must be a subset of outer).
std::vector<std::size_t> projection_map(const Scope& outer, const Scope& inner) {
  std::vector<std::size_t> stride(outer.arity(), 0);
  std::size_t s = 1;
  for (std::size_t k = inner.arity(); k-- > 0;) {
    auto it = std::lower_bound(outer.vars.begin(), outer.vars.end(), inner.vars[k]);
    if (it == outer.vars.end() || *it != inner.vars[k]) throw InvalidArgument("scope is not a subset");
    const auto pos = static_cast<std::size_t>(it - outer.vars.begin());
    if (outer.cards[pos] != inner.cards[k])
      throw InvalidArgument("inconsistent cardinality for variable " + std::to_string(inner.vars[k]));
    stride[pos] = s;
    s *= static_cast<std::size_t>(inner.cards[k]);
  }
  const std::size_t n = outer.assignments();
  std::vector<std::size_t> map(n);
  std::vector<int> digit(outer.arity(), 0);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    map[i] = idx;
    for (std::size_t k = outer.arity(); k-- > 0;) {
      idx += stride[k];
      if (++digit[k] < outer.cards[k]) break;
      idx -= stride[k] * static_cast<std::size_t>(outer.cards[k]);
      digit[k] = 0;
    }
  }
  return map;
}

}  // namespace

// ---------------------------------------------------------------------------
// Potential

Potential::Potential(Scope scope, std::vector<double> values) : scope_(std::move(scope)), values_(std::move(values)) {
  if (!std::is_sorted(scope_.vars.begin(), scope_.vars.end()) ||
      std::adjacent_find(scope_.vars.begin(), scope_.vars.end()) != scope_.vars.end() ||
      scope_.vars.size() != scope_.cards.size())
    throw InvalidArgument("potential scope must be a sorted set");
  if (values_.size() != scope_.assignments())
    throw InvalidArgument("potential table has " + std::to_string(values_.size()) + " entries, expected " +
                          std::to_string(scope_.assignments()));
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("potential entries must be finite and nonnegative");
}

Potential Potential::unit(Scope scope) {
  const std::size_t n = scope.assignments();
  return Potential(std::move(scope), std::vector<double>(n, 1.0));
}

Potential Potential::scalar(double value) { return Potential(Scope{}, {value}); }

Potential Potential::from_layout(std::span<const VarId> layout, std::span<const int> cards,
                                 std::span<const double> values) {
  if (layout.size() != cards.size()) throw InvalidArgument("layout and cardinalities differ in length");
  std::vector<std::pair<VarId, int>> entries;
  for (std::size_t i = 0; i < layout.size(); ++i) entries.emplace_back(layout[i], cards[i]);
  Scope sorted = Scope::of(entries);
  if (sorted.arity() != layout.size()) throw InvalidArgument("layout lists a variable twice");
  if (values.size() != sorted.assignments()) throw InvalidArgument("table size does not match the layout");

  // Walk the sorted scope and locate each entry in the given layout.
  std::vector<std::size_t> stride(sorted.arity());
  std::size_t s = 1;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(sorted.vars.begin(), sorted.vars.end(), layout[k]) - sorted.vars.begin());
    stride[pos] = s;
    s *= static_cast<std::size_t>(cards[k]);
  }
  std::vector<double> out(values.size());
  std::vector<int> digit(sorted.arity(), 0);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = values[idx];
    for (std::size_t k = sorted.arity(); k-- > 0;) {
      idx += stride[k];
      if (++digit[k] < sorted.cards[k]) break;
      idx -= stride[k] * static_cast<std::size_t>(sorted.cards[k]);
      digit[k] = 0;
    }
  }
  return Potential(std::move(sorted), std::move(out));
}

double Potential::scalar_value() const {
  if (!scope_.vars.empty()) throw InvalidArgument("potential is not a scalar");
  return values_[0];
}

Potential unit_potential(Scope scope) { return Potential::unit(std::move(scope)); }

Potential multiply(const Potential& p, const Potential& q) {
  Scope u = scope_union(p.scope(), q.scope());
  const auto mp = projection_map(u, p.scope());
  const auto mq = projection_map(u, q.scope());
  std::vector<double> out(mp.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = p[mp[i]] * q[mq[i]];
  return Potential(std::move(u), std::move(out));
}

Potential sum_out(const Potential& p, std::span<const VarId> vars) {
  for (VarId v : vars)
    if (!p.scope().contains(v)) throw InvalidArgument("cannot sum out variable " + std::to_string(v) + ": not in scope");
  Scope kept = scope_minus(p.scope(), vars);
  const auto map = projection_map(p.scope(), kept);
  std::vector<double> out(kept.assignments(), 0.0);
  for (std::size_t i = 0; i < map.size(); ++i) out[map[i]] += p[i];
  return Potential(std::move(kept), std::move(out));
}

// ---------------------------------------------------------------------------
// Provenance

Provenance::Provenance(std::vector<PolicyChoice> choices) : choices_(std::move(choices)) {
  std::sort(choices_.begin(), choices_.end());
  choices_.erase(std::unique(choices_.begin(), choices_.end()), choices_.end());
  for (std::size_t i = 1; i < choices_.size(); ++i)
    if (choices_[i].first == choices_[i - 1].first)
      throw InvalidArgument("provenance holds two policies for decision " + std::to_string(choices_[i].first));
}

std::optional<std::uint64_t> Provenance::choice_for(VarId decision) const {
  auto it = std::lower_bound(choices_.begin(), choices_.end(), PolicyChoice{decision, 0});
  if (it == choices_.end() || it->first != decision) return std::nullopt;
  return it->second;
}

std::optional<Provenance> Provenance::merge(const Provenance& a, const Provenance& b) {
  Provenance out;
  out.choices_.reserve(a.choices_.size() + b.choices_.size());
  auto i = a.choices_.begin();
  auto j = b.choices_.begin();
  while (i != a.choices_.end() || j != b.choices_.end()) {
    if (j == b.choices_.end() || (i != a.choices_.end() && i->first < j->first)) {
      out.choices_.push_back(*i++);
    } else if (i == a.choices_.end() || j->first < i->first) {
      out.choices_.push_back(*j++);
    } else {
      if (i->second != j->second) return std::nullopt;
      out.choices_.push_back(*i);
      ++i;
      ++j;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sets

PotentialSet PotentialSet::singleton(Potential p, Provenance prov) {
  PotentialSet s;
  s.scope = p.scope();
  s.members.push_back({std::move(p), std::move(prov)});
  return s;
}

namespace {

std::size_t hash_member(const Member& m) {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  for (const auto& [dec, idx] : m.provenance.choices()) {
    mix(static_cast<std::uint64_t>(dec));
    mix(idx);
  }
  for (double v : m.potential.values()) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

}  // namespace

void PotentialSet::dedup() {
  std::unordered_map<std::size_t, std::vector<std::size_t>> seen;
  std::vector<Member> kept;
  kept.reserve(members.size());
  for (auto& m : members) {
    auto& bucket = seen[hash_member(m)];
    bool duplicate = false;
    for (std::size_t k : bucket) {
      if (kept[k].provenance == m.provenance && kept[k].potential == m.potential) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    bucket.push_back(kept.size());
    kept.push_back(std::move(m));
  }
  members = std::move(kept);
}

PotentialSet combine_and_sum_out(std::span<const PotentialSet> sets, std::span<const VarId> vars,
                                 CombineStats* stats) {
  Scope u;
  for (const auto& s : sets) u = scope_union(u, s.scope);
  for (VarId v : vars)
    if (!u.contains(v)) throw InvalidArgument("cannot sum out variable " + std::to_string(v) + ": not in scope");
  Scope kept = scope_minus(u, vars);

  std::vector<std::vector<std::size_t>> maps;
  maps.reserve(sets.size());
  for (const auto& s : sets) maps.push_back(projection_map(u, s.scope));
  const auto out_map = projection_map(u, kept);

  PotentialSet result;
  result.scope = kept;
  CombineStats local;
  const bool any_empty = std::any_of(sets.begin(), sets.end(), [](const PotentialSet& s) { return s.empty(); });
  if (!any_empty) {
    const std::size_t n = sets.size();
    std::vector<std::size_t> pick(n, 0);
    std::vector<double> product(u.assignments());
    const std::size_t width = kept.assignments();
    while (true) {
      std::optional<Provenance> prov = Provenance{};
      for (std::size_t k = 0; k < n && prov; ++k) prov = Provenance::merge(*prov, sets[k].members[pick[k]].provenance);
      ++local.tuples;
      if (!prov) {
        ++local.conflicts;
      } else {
        std::fill(product.begin(), product.end(), 1.0);
        for (std::size_t k = 0; k < n; ++k) {
          const auto vals = sets[k].members[pick[k]].potential.values();
          const auto& map = maps[k];
          for (std::size_t i = 0; i < product.size(); ++i) product[i] *= vals[map[i]];
        }
        std::vector<double> out(width, 0.0);
        for (std::size_t i = 0; i < product.size(); ++i) out[out_map[i]] += product[i];
        result.members.push_back({Potential(kept, std::move(out)), std::move(*prov)});
      }
      // Odometer, last set fastest.
      std::size_t k = n;
      while (k > 0 && ++pick[k - 1] == sets[k - 1].size()) {
        pick[k - 1] = 0;
        --k;
      }
      if (k == 0) break;
    }
  }
  result.dedup();
  if (stats) *stats = local;
  return result;
}

PotentialSet combine_sets(std::span<const PotentialSet> sets) { return combine_and_sum_out(sets, {}, nullptr); }

PotentialSet sum_out_set(const PotentialSet& set, std::span<const VarId> vars) {
  for (VarId v : vars)
    if (!set.scope.contains(v)) throw InvalidArgument("cannot sum out variable " + std::to_string(v) + ": not in scope");
  PotentialSet out;
  out.scope = scope_minus(set.scope, vars);
  out.members.reserve(set.size());
  for (const auto& m : set.members) out.members.push_back({sum_out(m.potential, vars), m.provenance});
  out.dedup();
  return out;
}

// ---------------------------------------------------------------------------
// Covering

std::int64_t floor_log(double x, double alpha) {
  const double q = std::log(x) / std::log(alpha);
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-12) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::floor(q));
}

std::vector<std::int64_t> covering_signature(const Potential& p, double alpha) {
  std::vector<std::int64_t> sig;
  sig.reserve(p.size());
  for (double v : p.values()) sig.push_back(v == 0.0 ? kZeroSignature : floor_log(v, alpha));
  return sig;
}

namespace {

struct SignatureHash {
  std::size_t operator()(const std::vector<std::int64_t>& s) const {
    std::size_t h = 0;
    for (auto x : s) h ^= std::hash<std::int64_t>{}(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace

std::pair<PotentialSet, CoveringStats> covering(const PotentialSet& set, double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) throw InvalidArgument("covering requires alpha > 1");
  CoveringStats stats;
  stats.input_size = set.size();
  stats.assignments = set.scope.assignments();

  PotentialSet out;
  out.scope = set.scope;
  std::unordered_map<std::vector<std::int64_t>, std::size_t, SignatureHash> buckets;
  for (const auto& m : set.members) {
    for (double v : m.potential.values()) {
      stats.largest = std::max(stats.largest, v);
      if (v == 0.0)
        stats.has_zero = true;
      else if (!stats.smallest_positive || v < *stats.smallest_positive)
        stats.smallest_positive = v;
    }
    auto [it, inserted] = buckets.emplace(covering_signature(m.potential, alpha), out.members.size());
    if (inserted) out.members.push_back(m);
  }
  stats.output_size = out.size();
  if (stats.smallest_positive) {
    const double levels = 1.0 - static_cast<double>(floor_log(*stats.smallest_positive, alpha));
    stats.bound = std::pow(levels, static_cast<double>(stats.assignments));
    stats.bound_with_zero = std::pow(levels + 1.0, static_cast<double>(stats.assignments));
  } else if (!set.empty()) {
    // Only the all-zero signature is possible.
    stats.bound = 1.0;
    stats.bound_with_zero = 1.0;
  }
  return {std::move(out), stats};
}

bool is_alpha_covering(const PotentialSet& full, const PotentialSet& cover, double alpha, double tolerance) {
  for (const auto& p : full.members) {
    bool found = false;
    for (const auto& q : cover.members) {
      bool dominated = true;
      for (std::size_t i = 0; i < p.potential.size() && dominated; ++i)
        dominated = p.potential[i] <= alpha * q.potential[i] * (1.0 + tolerance);
      if (dominated) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace limid
