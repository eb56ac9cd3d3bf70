#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "procat/procat.hpp"

namespace procat {

// p: X -> (X_l) with p_l: x -> X_l, one morphism per index in enumeration order.
struct Expansion {
  Obj object = 0;
  InverseSystem system;
  std::vector<Morphism> p;

  Morphism at(const Elem& l) const { return p.at(system.index().index_of(l)); }
  Json to_json() const;
};

// The identity expansion 1: P -> [P].
Expansion rudimentary_expansion(const Category& c, Obj p);

// (C, D) with D the full subcategory on an object subset and one designated
// expansion per object (objects of D default to their rudimentary expansion).
class ProReflectivePair {
 public:
  ProReflectivePair(Category c, std::vector<Obj> d, std::map<Obj, Expansion> designated);

  const Category& category() const { return c_; }
  const std::vector<Obj>& subcategory() const { return d_; }
  bool in_d(Obj x) const;
  const Expansion& expansion(Obj x) const;

 private:
  Category c_;
  std::vector<Obj> d_;
  std::map<Obj, Expansion> exp_;
};

// Structural checks: D-valued system, p_l: X -> X_l, and q(l, l') p_l' = p_l.
Verdict check_compatibility(const ProReflectivePair& pair, const Expansion& e);
// Compatibility, then (E1) factorization of every X -> P (P in D) through some
// p_l and (E2) merging of factorizations that agree after p_l.
Verdict check_expansion(const ProReflectivePair& pair, const Expansion& e);
// Runs check_expansion on every designated expansion.
Verdict check_pair(const ProReflectivePair& pair);

struct JShapeMorphism {
  Obj source = 0, target = 0;
  Expansion source_expansion, target_expansion;
  JMorphism representative;
  Json to_json() const;
};

// The pro-D morphism i with i p = p', read over J = {1}.
JMorphism canonical_pro_iso(const ProReflectivePair& pair, const Expansion& p, const Expansion& pp);
// canonical_pro_iso induced into J, with its invertibility verified.
JMorphism canonical_iso(const ProReflectivePair& pair, const Expansion& p, const Expansion& pp, const IndexPoset& j,
                        const Limits& limits = {});

// Wraps f between designated expansions.
JShapeMorphism shape_morphism(const ProReflectivePair& pair, Obj x, Obj y, const JMorphism& f);
// Equality after transporting along the canonical isomorphisms.
Verdict shape_equal(const ProReflectivePair& pair, const JShapeMorphism& a, const JShapeMorphism& b,
                    const Limits& limits = {});
// G . F (F's target expansion must be G's source expansion).
JShapeMorphism compose_shape(const JShapeMorphism& g, const JShapeMorphism& f);
JShapeMorphism identity_shape(const ProReflectivePair& pair, Obj x, const IndexPoset& j);

// S^J(f) for a C-morphism f: X -> Y.
JShapeMorphism shape_functor(const ProReflectivePair& pair, const Morphism& f, const IndexPoset& j);

// F: X -> Q induced by a family X -> Q that factors through one p_l for all j.
JShapeMorphism uniform_factorize(const ProReflectivePair& pair, const MorphismFamily& phis);
// The family F^j . p_f(*) inducing F (F into a rudimentary expansion).
MorphismFamily decompose(const JShapeMorphism& f);
Verdict almost_equal(const ProReflectivePair& pair, const MorphismFamily& a, const MorphismFamily& b,
                     const Limits& limits = {});

Verdict same_shape_on_D(const ProReflectivePair& pair, Obj p, Obj q, const IndexPoset& j, const Limits& limits = {});

// F: X -> Y with S^J(q_mu) F = H_mu; `cone` holds one shape morphism X -> Y_mu
// per index of Y's designated expansion, in enumeration order.
JShapeMorphism lift_system_morphism(const ProReflectivePair& pair, Obj x, Obj y, const std::vector<JShapeMorphism>& cone,
                                    const Limits& limits = {});
// Re-checks S^J(q_mu) F = H_mu for every mu.
Verdict verify_lift(const ProReflectivePair& pair, const JShapeMorphism& f, const std::vector<JShapeMorphism>& cone,
                    const Limits& limits = {});

}  // namespace procat
