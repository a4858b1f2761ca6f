#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "limid/model.hpp"

namespace limid {

/// Ordered set of variables (ascending id) with their cardinalities.
struct Scope {
  std::vector<VarId> vars;
  std::vector<int> cards;

  std::size_t arity() const { return vars.size(); }
  /// Number of joint assignments (1 for the empty scope).
  std::size_t assignments() const;
  bool contains(VarId v) const;
  int cardinality_of(VarId v) const;

  /// Builds a scope from unordered (variable, cardinality) pairs.
  static Scope of(std::vector<std::pair<VarId, int>> entries);
  static Scope of_variables(const InfluenceDiagram& d, std::vector<VarId> vars);

  friend bool operator==(const Scope&, const Scope&) = default;
};

/// Union of two scopes; throws InvalidArgument on a cardinality mismatch.
Scope scope_union(const Scope& a, const Scope& b);
/// Variables of `a` that are not listed in `removed`.
Scope scope_minus(const Scope& a, std::span<const VarId> removed);

/// Nonnegative table over a scope, row-major: the last scope variable varies
/// fastest.
class Potential {
 public:
  Potential() : values_{1.0} {}
  Potential(Scope scope, std::vector<double> values);

  /// All-ones table; the empty scope gives the scalar 1.
  static Potential unit(Scope scope);
  static Potential scalar(double value);

  /// Re-indexes a table whose variables are listed fastest-first in
  /// `layout` (the CPT convention: child, then parents in table order).
  static Potential from_layout(std::span<const VarId> layout, std::span<const int> cards,
                               std::span<const double> values);

  const Scope& scope() const { return scope_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  /// Value of a scalar potential.
  double scalar_value() const;

  friend bool operator==(const Potential&, const Potential&) = default;

 private:
  Scope scope_;
  std::vector<double> values_;
};

Potential unit_potential(Scope scope);
/// Pointwise product over the union scope.
Potential multiply(const Potential& p, const Potential& q);
/// Sums the listed variables out; throws InvalidArgument when one is not in
/// the scope.
Potential sum_out(const Potential& p, std::span<const VarId> vars);

/// (decision, pure-policy index) choice recorded while propagating.
using PolicyChoice = std::pair<VarId, std::uint64_t>;

/// Pure policies used to build a potential, at most one per decision,
/// sorted by decision id.
class Provenance {
 public:
  Provenance() = default;
  explicit Provenance(std::vector<PolicyChoice> choices);

  static Provenance single(VarId decision, std::uint64_t index) { return Provenance({{decision, index}}); }

  const std::vector<PolicyChoice>& choices() const { return choices_; }
  bool empty() const { return choices_.empty(); }
  std::optional<std::uint64_t> choice_for(VarId decision) const;

  /// Union of two provenances, or nullopt when they pick different policies
  /// for the same decision.
  static std::optional<Provenance> merge(const Provenance& a, const Provenance& b);

  friend bool operator==(const Provenance&, const Provenance&) = default;
  friend auto operator<=>(const Provenance&, const Provenance&) = default;

 private:
  std::vector<PolicyChoice> choices_;
};

struct Member {
  Potential potential;
  Provenance provenance;
};

/// Set of potentials over a common scope, each with its provenance.
struct PotentialSet {
  Scope scope;
  std::vector<Member> members;

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }

  static PotentialSet singleton(Potential p, Provenance prov = {});
  /// Removes members equal in both values and provenance, keeping the first.
  void dedup();
};

/// Cartesian product of the sets: every choice of one member per set is
/// multiplied and its provenances are merged. The first set is the outermost
/// loop. Tuples whose provenances conflict are skipped.
PotentialSet combine_sets(std::span<const PotentialSet> sets);

/// Member-wise sum_out with provenance carried over.
PotentialSet sum_out_set(const PotentialSet& set, std::span<const VarId> vars);

struct CombineStats {
  std::size_t tuples = 0;     ///< product members formed (|A|)
  std::size_t conflicts = 0;  ///< tuples skipped for conflicting provenance
};

/// sum_out_set(combine_sets(sets), vars) without materialising the product
/// set. Members are produced in the same order.
PotentialSet combine_and_sum_out(std::span<const PotentialSet> sets, std::span<const VarId> vars,
                                 CombineStats* stats = nullptr);

/// floor(log_alpha(x)) for x > 0. Quotients within 1e-12 of an integer are
/// rounded to it so values at bucket boundaries get a stable signature.
std::int64_t floor_log(double x, double alpha);

/// Signature entry used for zero values; distinct from every floor_log.
inline constexpr std::int64_t kZeroSignature = std::numeric_limits<std::int64_t>::min();

std::vector<std::int64_t> covering_signature(const Potential& p, double alpha);

struct CoveringStats {
  std::size_t input_size = 0;
  std::size_t output_size = 0;
  std::size_t assignments = 0;  ///< eta, joint assignments of the scope
  /// Smallest strictly positive entry; nullopt when every entry is zero.
  std::optional<double> smallest_positive;
  double largest = 0.0;
  bool has_zero = false;
  /// (1 - floor_log(t))^eta, the bound for sets without zeros and entries <= 1.
  double bound = std::numeric_limits<double>::infinity();
  /// (2 - floor_log(t))^eta, the bound once the zero signature is allowed.
  double bound_with_zero = std::numeric_limits<double>::infinity();
};

/// Keeps the first member of every signature bucket; the result is an
/// alpha-covering of the input. Throws InvalidArgument unless alpha > 1.
std::pair<PotentialSet, CoveringStats> covering(const PotentialSet& set, double alpha);

/// True when every member of `full` is bounded pointwise by alpha times some
/// member of `cover` (relative slack `tolerance`). Quadratic; meant for tests
/// and audits.
bool is_alpha_covering(const PotentialSet& full, const PotentialSet& cover, double alpha, double tolerance = 1e-9);

}  // namespace limid
