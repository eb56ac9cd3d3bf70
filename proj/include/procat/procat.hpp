#pragma once

#include <optional>
#include <string>
#include <vector>

#include "procat/jmor.hpp"

namespace procat {

// A level morphism X -> Y over a common index poset (identity index function).
struct LevelPair {
  JMorphism morphism;

  // Throws NotLevel unless the index function is the identity of a shared poset.
  static LevelPair from(JMorphism f);
  const InverseSystem& X() const { return morphism.source(); }
  const InverseSystem& Y() const { return morphism.target(); }
};

// One class of (pro^J-C)(X, Y): the first candidate found and the number of
// enumerated candidates equivalent to it.
struct JMorphismClass {
  JMorphism representative;
  std::int64_t members = 1;
};

struct HomClassOptions {
  // false: families are taken up to eventual equality (one constant family per
  // morphism).  true: every family is enumerated (finite J: all tables; omega:
  // steps with thresholds below `step_horizon`).
  bool exhaustive_families = false;
  std::int64_t step_horizon = 2;
};

std::vector<JMorphismClass> hom_classes(const InverseSystem& x, const InverseSystem& y, const IndexPoset& j,
                                        const Limits& limits = {}, const HomClassOptions& options = {});

// Exhaustive-search inverse for tiny instances: Holds with the index of an
// inverse class of hom_classes(Y, X).
Verdict inverse_by_search(const JMorphism& f, const Limits& limits = {}, const HomClassOptions& options = {});

struct ReindexResult {
  InverseSystem x_level, y_level;
  JMorphism level;       // X' -> Y', identity index on N
  JMorphism i, j;        // X -> X', Y -> Y'
  JMorphism i_inverse;   // X' -> X
  JMorphism j_inverse;   // Y' -> Y
  Verdict level_ok, square, i_iso, j_iso;
  Json to_json() const;
};

ReindexResult reindex(const JMorphism& f, const Limits& limits = {});

// Per-lambda witness: lambda' >= lambda, a threshold j_lambda and h^j for
// j >= j_lambda.  Over omega the table is periodic: `h_prefix` covers
// j_lambda .. start-1, `h_cycle` repeats from `start`.
struct MoritaStage {
  Elem lambda, lambda_prime, j_threshold;
  std::vector<std::pair<Elem, Morphism>> h_table;  // finite J
  std::vector<Morphism> h_prefix, h_cycle;         // omega
  std::int64_t cycle_start = 0;

  Morphism h_at(const IndexPoset& j, const Elem& at) const;
};

struct MoritaWitness {
  std::vector<MoritaStage> stages;  // finite Lambda: all; omega: a prefix
  Json to_json(const LevelPair& f) const;
};

struct MoritaResult {
  Verdict verdict;
  std::optional<MoritaWitness> witness;
};

MoritaResult morita_check(const LevelPair& f, const Limits& limits = {});
// Reads MoritaWitness::to_json output back and re-checks both triangles at
// every recorded stage.
MoritaWitness parse_witness(const LevelPair& f, const Json& j);
Verdict verify_witness(const LevelPair& f, const MoritaWitness& w);
JMorphism morita_inverse(const LevelPair& f, const MoritaWitness& w, const Limits& limits = {});
// Both composites of f and g are equivalent to identities.
Verdict verify_inverse(const JMorphism& f, const JMorphism& g, const Limits& limits = {});

Verdict cofinal_iso_check(const LevelPair& f, const Limits& limits = {});

// gamma(j) = mul * j + add.
struct Radius {
  std::int64_t mul = 1;
  std::int64_t add = 0;
  std::int64_t operator()(std::int64_t j) const { return mul * j + add; }
  std::string describe() const;
};

// Stage j of the sufficient tower condition is checked for j below
// min(horizon, 16).
Verdict tower_iso_check(const JMorphism& f, const Radius& gamma, const Limits& limits = {});
// The necessary direction: for each m (prefix), m' >= m and a threshold j_m
// with h: Y_m' -> X_f(m) satisfying both triangles for every j >= j_m.
Verdict tower_iso_dual(const JMorphism& f, const Limits& limits = {});

}  // namespace procat
