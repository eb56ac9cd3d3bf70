#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "procat/cat.hpp"
#include "procat/order.hpp"

namespace procat {

struct SystemViolation {
  std::string law;  // IdentityBondViolation, FunctorialityViolation, TypeMismatch, Malformed
  std::string detail;
};

class SystemError : public Error {
 public:
  explicit SystemError(std::vector<SystemViolation> v);
  const std::vector<SystemViolation>& violations() const noexcept { return violations_; }

 private:
  std::vector<SystemViolation> violations_;
};

// Unvalidated description of a system over a finite index poset.  Bonds are
// given on some related pairs; a missing p(l, l) is the identity and other
// missing pairs are composed along an intermediate element.
struct RawSystem {
  struct Bond {
    Elem lo, hi;  // lo <= hi, morphism X_hi -> X_lo
    Morphism m;
  };
  Category cat;
  IndexPoset index;
  std::vector<Obj> objects;  // one per element, enumeration order
  std::vector<Bond> bonds;
};

// X = (X_l, p(l, l'), L) with p(l, l'): X_l' -> X_l for l <= l'.
class InverseSystem {
 public:
  enum class Rep { Table, Tower, Constant, Rule };

  InverseSystem();
  // Z/base^(n+offset) over omega with bonds residue 1.
  static InverseSystem tower(std::int64_t base, std::int64_t offset);
  // X_l = x with identity bonds over any index poset.
  static InverseSystem constant(Category c, IndexPoset index, Obj x);
  // Objects and bonds given by callbacks; laws are checked over a prefix.
  static InverseSystem rule(Category c, IndexPoset index, std::function<Obj(const Elem&)> object,
                            std::function<Morphism(const Elem&, const Elem&)> bond, std::string description);
  static InverseSystem rudimentary(Category c, Obj x);
  // Finite table system; laws must already hold (see validate_system).
  static InverseSystem from_table(Category c, IndexPoset index, std::vector<Obj> objects,
                                  std::vector<Morphism> bonds);

  Rep rep() const;
  const Category& category() const;
  const IndexPoset& index() const;
  Obj object(const Elem& l) const;
  Morphism bond(const Elem& lo, const Elem& hi) const;
  // Tower and constant systems satisfy the laws symbolically.
  bool certified() const;
  std::string describe() const;
  Json to_json() const;

  InverseSystem truncate(const std::vector<Elem>& subset) const;

 private:
  struct Impl;
  explicit InverseSystem(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

InverseSystem validate_system(const RawSystem& raw);
// Law violations: exhaustive for finite index posets, over a prefix of the
// given side otherwise (certified systems report none).
std::vector<SystemViolation> system_violations(const InverseSystem& x, std::int64_t side = 16);
Verdict check_system(const InverseSystem& x, const Limits& limits = {});
InverseSystem rudimentary(const Category& c, Obj x);
InverseSystem truncate(const InverseSystem& x, const std::vector<Elem>& subset);
// Same index labels, objects and bonds (finite index posets).
bool same_system_data(const InverseSystem& a, const InverseSystem& b);
bool same_system(const InverseSystem& a, const InverseSystem& b);

}  // namespace procat
