#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "procat/cat.hpp"
#include "procat/order.hpp"

namespace procat {

// value(j) == value(j + period) for every j >= start (families over omega).
struct Periodicity {
  std::int64_t start = 0;
  std::int64_t period = 1;
  bool operator==(const Periodicity&) const = default;
};

// A J-indexed family of morphisms source -> target.
//
// Leaves: Constant, Step (pieces sorted by the linear extension of a finite J,
// or by threshold over omega; the value at j is the last piece whose threshold
// is <= j), Rule (cyclic-group residues given by a polynomial in j, over
// omega) and Periodic (finite prefix followed by a repeating cycle, over
// omega).  Interior nodes: pointwise composition, transfer along a cofinal
// increasing J -> K (value(k) = base(least j with k <= phi(j))) and pull-back
// along J -> K (value(j) = base(phi(j))).
class MorphismFamily {
 public:
  enum class Kind { Constant, Step, Rule, Periodic, Composite, Transferred, PulledBack };

  struct Piece {
    Elem threshold;
    Morphism value;
  };
  // Residue c(j) = (sum coeffs[i] * j^i) mod modulus, then reduced modulo the
  // target; modulus 0 means the target modulus.
  struct Polynomial {
    std::vector<std::int64_t> coeffs;
    std::int64_t modulus = 0;
  };

  MorphismFamily();
  static MorphismFamily constant(Category c, IndexPoset j, Morphism m);
  static MorphismFamily step(Category c, IndexPoset j, std::vector<Piece> pieces);
  // Full table over a finite J, one value per element in enumeration order.
  static MorphismFamily table(Category c, IndexPoset j, const std::vector<Morphism>& values);
  static MorphismFamily rule(Category c, IndexPoset j, Obj src, Obj tgt, Polynomial p);
  static MorphismFamily periodic(Category c, IndexPoset j, std::vector<Morphism> prefix,
                                 std::vector<Morphism> cycle);
  // Pointwise g . f.
  static MorphismFamily compose(const MorphismFamily& g, const MorphismFamily& f);
  static MorphismFamily transferred(const MorphismFamily& base, const IndexFunction& phi);
  static MorphismFamily pulled_back(const MorphismFamily& base, const IndexFunction& phi);

  MorphismFamily then(const Morphism& post) const;   // post . this
  MorphismFamily after(const Morphism& pre) const;   // this . pre

  Morphism at(const Elem& j) const;
  Kind kind() const;
  const Category& category() const;
  const IndexPoset& index() const;
  Obj source() const;
  Obj target() const;
  std::optional<Morphism> constant_value() const;
  // Operands of interior nodes (g, f for composites; the base otherwise).
  std::vector<MorphismFamily> children() const;
  // The transfer or pull-back map of those nodes.
  const std::optional<IndexFunction>& index_map() const;
  // Exact eventual periodicity over omega, when derivable from the structure.
  std::optional<Periodicity> periodicity() const;

  // Workspace syntax for leaves; a structural description otherwise.
  std::string describe() const;
  Json to_json() const;

  struct Node;

 private:
  explicit MorphismFamily(std::shared_ptr<const Node> n);
  std::shared_ptr<const Node> node_;
};

// Holds(witness j) iff there is j with a(j') == b(j') for every j' >= j.
Verdict eventually_equal(const MorphismFamily& a, const MorphismFamily& b, const Limits& limits = {});
// a(j') == b(j') for every j' >= j0.
Verdict tail_equal_from(const MorphismFamily& a, const MorphismFamily& b, const Elem& j0,
                        const Limits& limits = {});
// a(j) == b(j) for every j.
Verdict all_equal(const MorphismFamily& a, const MorphismFamily& b, const Limits& limits = {});

}  // namespace procat
