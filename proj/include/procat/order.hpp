#pragma once

#include <compare>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procat/common.hpp"

namespace procat {

// An element of an index poset.  Finite posets use a single coordinate (the
// position in the declared element list), omega uses the natural number
// itself, products concatenate the coordinates of their factors and
// rule-backed posets use a natural-number id.
struct Elem {
  std::vector<std::int64_t> c;

  Elem() = default;
  explicit Elem(std::int64_t v) : c{v} {}
  explicit Elem(std::vector<std::int64_t> v) : c(std::move(v)) {}

  auto operator<=>(const Elem&) const = default;
  bool operator==(const Elem&) const = default;
};

class IndexPoset {
 public:
  enum class Kind { Finite, Omega, Product, Rule };

  // Callbacks of a rule-backed poset on the naturals.  `below` must list every
  // predecessor (including the element itself), so cofiniteness holds by
  // construction.
  struct RuleOps {
    std::string name;
    std::function<bool(std::int64_t, std::int64_t)> leq;
    std::function<std::int64_t(std::int64_t, std::int64_t)> join;
    std::function<std::vector<std::int64_t>(std::int64_t)> below;
    std::function<std::string(std::int64_t)> label;
  };

  // Finite poset with the relation taken exactly as given (no closure); the
  // laws are checked by poset_properties.
  static IndexPoset finite_raw(std::vector<std::string> labels,
                               const std::vector<std::pair<std::size_t, std::size_t>>& relation);
  // Finite poset generated by `pairs` under reflexive-transitive closure.
  static IndexPoset finite(std::vector<std::string> labels,
                           const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
  // Chain with labels 1..n.
  static IndexPoset chain(std::size_t n);
  static IndexPoset singleton();
  static IndexPoset omega();
  static IndexPoset product(const IndexPoset& left, const IndexPoset& right);
  static IndexPoset rule(RuleOps ops);

  IndexPoset();

  Kind kind() const;
  bool is_finite() const;
  std::size_t arity() const;
  std::size_t size() const;                   // finite only
  const std::vector<Elem>& elements() const;  // finite only, enumeration order
  std::size_t index_of(const Elem& e) const;  // finite only
  bool contains(const Elem& e) const;
  bool leq(const Elem& a, const Elem& b) const;
  bool less(const Elem& a, const Elem& b) const { return !(a == b) && leq(a, b); }

  // Least (in enumeration order) minimal upper bound of a nonempty set.
  Elem upper_bound(std::span<const Elem> s) const;
  Elem join(const Elem& a, const Elem& b) const;

  // Every x <= e, in enumeration order.
  std::vector<Elem> below(const Elem& e) const;
  // Deterministic candidates >= base, ascending; complete upper set for finite
  // posets, a cofinal chain of at most `horizon` steps otherwise.
  std::vector<Elem> ascent(const Elem& base, std::int64_t horizon) const;
  // Finite only: sorted by predecessor count, then enumeration order.
  const std::vector<Elem>& linear_extension() const;
  // Finite prefix used for bounded scans of infinite posets (box of the given
  // side for products, ids below `side` for rule-backed posets).
  std::vector<Elem> sample(std::int64_t side) const;
  // The bottom element if one exists.
  std::optional<Elem> bottom() const;

  IndexPoset left() const;   // product only
  IndexPoset right() const;  // product only
  Elem left_part(const Elem& e) const;
  Elem right_part(const Elem& e) const;
  static Elem pair(const Elem& l, const Elem& r);

  std::string label(const Elem& e) const;
  Elem parse(std::string_view text) const;
  std::string describe() const;
  bool same_as(const IndexPoset& other) const;
  // True when the poset is omega or a finite product of copies of omega.
  bool is_omega_power() const;

 private:
  struct Impl;
  explicit IndexPoset(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

struct PosetReport {
  Verdict partial_order;
  Verdict directed;
  Verdict cofinite;
  Verdict has_max;
  Verdict well_ordered;
};

PosetReport poset_properties(const IndexPoset& p, const Limits& limits = {});
Json to_json(const PosetReport& r);

// One output coordinate of an affine map on omega powers: mul * x[src] + add,
// or the constant `add` when src < 0.
struct AffineTerm {
  int src = -1;
  std::int64_t mul = 0;
  std::int64_t add = 0;
  bool operator==(const AffineTerm&) const = default;
};
using AffineMap = std::vector<AffineTerm>;

class IndexFunction {
 public:
  IndexFunction();
  static IndexFunction table(IndexPoset dom, IndexPoset cod, std::vector<Elem> values);
  static IndexFunction affine(IndexPoset dom, IndexPoset cod, AffineMap map);
  static IndexFunction rule(IndexPoset dom, IndexPoset cod, std::function<Elem(const Elem&)> fn,
                            std::string description);
  static IndexFunction identity(IndexPoset p);

  Elem operator()(const Elem& e) const;
  const IndexPoset& domain() const;
  const IndexPoset& codomain() const;
  const std::optional<AffineMap>& affine_map() const;
  bool is_identity() const;
  std::string describe() const;
  Json to_json() const;

 private:
  struct Impl;
  explicit IndexFunction(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

// (f . g)(x) = f(g(x)); requires g.codomain == f.domain.
IndexFunction compose(const IndexFunction& f, const IndexFunction& g);

std::vector<std::pair<Elem, Elem>> covering_pairs(const IndexPoset& p, std::int64_t side);

Verdict check_increasing(const IndexFunction& f, const Limits& limits = {});
// Pointwise comparison f <= g over the domain (finite) or a prefix.
bool pointwise_leq(const IndexFunction& f, const IndexFunction& g, std::int64_t side);

IndexFunction increasing_majorant(const IndexFunction& f, const Limits& limits = {});
Verdict check_cofinal_increasing(const IndexFunction& phi, const Limits& limits = {});
Elem min_threshold(const IndexFunction& phi, const Elem& k, const Limits& limits = {});

// True when phi is affine from omega into an omega power with every output
// coordinate of the form n + c (c >= 0).
bool is_unit_diagonal(const IndexFunction& phi);
// True when phi is affine from omega with every coordinate strictly increasing.
bool is_strict_affine(const IndexFunction& phi);

}  // namespace procat
