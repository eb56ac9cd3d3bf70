#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "procat/family.hpp"
#include "procat/invsys.hpp"

namespace procat {

// The families (f_mu) of a J-morphism, indexed by M: a table for finite M, a
// generator otherwise.
class FamilyMap {
 public:
  FamilyMap() = default;
  static FamilyMap table(IndexPoset m, std::vector<MorphismFamily> families);
  static FamilyMap generator(IndexPoset m, std::function<MorphismFamily(const Elem&)> gen, std::string description);

  MorphismFamily operator()(const Elem& mu) const;
  bool is_table() const { return !gen_; }
  const std::string& description() const { return desc_; }

 private:
  IndexPoset m_;
  std::vector<MorphismFamily> table_;
  std::function<MorphismFamily(const Elem&)> gen_;
  std::string desc_;
};

// (f, f_mu^j): X -> Y with X over L, Y over M, f: M -> L and
// f_mu^j: X_f(mu) -> Y_mu for j in J.
class JMorphism {
 public:
  JMorphism(InverseSystem source, InverseSystem target, IndexPoset j, IndexFunction index_fn, FamilyMap families);

  const InverseSystem& source() const { return source_; }
  const InverseSystem& target() const { return target_; }
  const IndexPoset& J() const { return j_; }
  const IndexFunction& index_fn() const { return f_; }
  const FamilyMap& families() const { return fam_; }
  MorphismFamily family(const Elem& mu) const { return fam_(mu); }
  const Category& category() const { return source_.category(); }

  Json to_json() const;

 private:
  InverseSystem source_, target_;
  IndexPoset j_;
  IndexFunction f_;
  FamilyMap fam_;
};

// Builds a JMorphism after type-checking every family (finite M) or a prefix.
JMorphism make_jmorphism(InverseSystem source, InverseSystem target, IndexPoset j, IndexFunction index_fn,
                         FamilyMap families, std::int64_t side = 16);

struct JCheck {
  Verdict verdict;
  bool commutative = false;
  bool simple = false;
  bool level = false;
};
Json to_json(const JCheck& c);

// Witness search for one related pair mu <= mu'.
struct PairWitness {
  Outcome outcome = Outcome::Inconclusive;
  std::optional<Elem> lambda;
  Json evidence;
};
PairWitness pair_witness(const JMorphism& f, const Elem& mu, const Elem& mu_prime, const Limits& limits = {});
// Re-verifies a recorded (lambda, j) for a pair.
Verdict verify_pair_witness(const JMorphism& f, const Elem& mu, const Elem& mu_prime, const Elem& lambda,
                            const Elem& j, const Limits& limits = {});

JCheck check_jmorphism(const JMorphism& f, const Limits& limits = {});
// The J-morphism condition alone (no classification); stops at the first failing pair.
Outcome jmorphism_condition(const JMorphism& f, const Limits& limits = {});
JMorphism identity_jmorphism(const InverseSystem& x, const IndexPoset& j);
// g . f for f: X -> Y, g: Y -> Z.
JMorphism compose_jmorphisms(const JMorphism& g, const JMorphism& f);
Verdict equivalent_jmorphisms(const JMorphism& a, const JMorphism& b, const Limits& limits = {});
// Raw data equality: index functions and families agree everywhere.
Verdict data_equal(const JMorphism& a, const JMorphism& b, const Limits& limits = {});

// inv-C morphisms are J-morphisms over the singleton J.
JMorphism induce(const JMorphism& pro, const IndexPoset& j);
JMorphism collapse_to_pro(const JMorphism& f);

struct SimplifyResult {
  JMorphism morphism;
  Verdict simple;
  Verdict equivalent;
};
SimplifyResult simplify(const JMorphism& f, const Limits& limits = {});

// Hypotheses of the transfer: J well ordered without max, K directed without
// max, phi cofinal and increasing.
Verdict check_transfer_hypotheses(const IndexFunction& phi, const Limits& limits = {});
JMorphism transfer(const JMorphism& f, const IndexFunction& phi, const Limits& limits = {});
JMorphism transfer_iso_back(const JMorphism& g, const IndexFunction& phi, const Limits& limits = {});

}  // namespace procat
