#include "procat/shape.hpp"

#include <algorithm>

namespace procat {

namespace {

struct Factor {
  Elem lambda;
  Morphism through;
};

// First (l, h_l) in linear-extension order with h_l . p_l = h.
std::optional<Factor> factor_through(const Category& c, const Expansion& e, const Morphism& h) {
  const auto& L = e.system.index();
  for (const auto& l : L.linear_extension()) {
    const auto m = c.first_solution(e.system.object(l), h.tgt, {{std::nullopt, e.at(l), h}});
    if (m) return Factor{l, *m};
  }
  return std::nullopt;
}

bool same_expansion(const Expansion& a, const Expansion& b) {
  return a.object == b.object && a.p == b.p && same_system(a.system, b.system);
}

JMorphism constant_map(const InverseSystem& src, const InverseSystem& tgt, const IndexPoset& j, const Morphism& m) {
  const auto& M = tgt.index();
  std::vector<MorphismFamily> fams;
  std::vector<Elem> idx;
  for (std::size_t k = 0; k < M.size(); ++k) {
    idx.push_back(src.index().elements().front());
    fams.push_back(MorphismFamily::constant(src.category(), j, m));
  }
  return JMorphism(src, tgt, j, IndexFunction::table(M, src.index(), idx), FamilyMap::table(M, fams));
}

}  // namespace

Json Expansion::to_json() const {
  const auto& c = system.category();
  const auto& L = system.index();
  Json p_json = Json::object();
  for (const auto& l : L.elements()) p_json[L.label(l)] = c.morphism_name(at(l));
  return {{"object", c.object_name(object)}, {"system", system.describe()}, {"p", p_json}};
}

Expansion rudimentary_expansion(const Category& c, Obj p) {
  return {p, InverseSystem::rudimentary(c, p), {c.identity(p)}};
}

ProReflectivePair::ProReflectivePair(Category c, std::vector<Obj> d, std::map<Obj, Expansion> designated)
    : c_(std::move(c)), d_(std::move(d)), exp_(std::move(designated)) {
  if (!c_.is_finite()) throw Error("Unsupported", "pro-reflective pairs need a finite category");
  std::sort(d_.begin(), d_.end());
  d_.erase(std::unique(d_.begin(), d_.end()), d_.end());
  for (Obj x : d_) {
    if (!c_.is_object(x)) throw Error("Malformed", "subcategory names an unknown object");
    exp_.try_emplace(x, rudimentary_expansion(c_, x));
  }
  for (const auto& [x, e] : exp_) {
    if (!c_.is_object(x) || e.object != x) throw Error("Malformed", "expansion attached to the wrong object");
    if (!e.system.index().is_finite()) throw Error("Unsupported", "expansions need finite index posets");
    if (e.p.size() != e.system.index().size()) throw Error("Malformed", "expansion needs one morphism per index");
  }
}

bool ProReflectivePair::in_d(Obj x) const { return std::binary_search(d_.begin(), d_.end(), x); }

const Expansion& ProReflectivePair::expansion(Obj x) const {
  auto it = exp_.find(x);
  if (it == exp_.end()) throw Error("UnresolvedReference", "no designated expansion for " + c_.object_name(x));
  return it->second;
}

Verdict check_compatibility(const ProReflectivePair& pair, const Expansion& e) {
  const auto& c = pair.category();
  const auto& X = e.system;
  const auto& L = X.index();
  if (!X.category().same_as(c)) return Verdict::fails({{"reason", "system lives in another category"}});
  for (const auto& l : L.elements()) {
    if (!pair.in_d(X.object(l)))
      return Verdict::fails({{"reason", "system object outside D"}, {"lambda", L.label(l)}});
    const Morphism p = e.at(l);
    if (p.src != e.object || p.tgt != X.object(l))
      return Verdict::fails({{"reason", "p_lambda has the wrong type"}, {"lambda", L.label(l)}});
  }
  for (const auto& l : L.elements())
    for (const auto& lp : L.elements())
      if (L.leq(l, lp) && !(c.compose(X.bond(l, lp), e.at(lp)) == e.at(l)))
        return Verdict::fails({{"reason", "q(l,l') p_l' differs from p_l"}, {"lambda", L.label(l)}, {"lambda_prime", L.label(lp)}});
  return Verdict::holds({{"checked", "compatibility"}});
}

Verdict check_expansion(const ProReflectivePair& pair, const Expansion& e) {
  Verdict comp = check_compatibility(pair, e);
  if (!comp.is_holds()) return comp;
  const auto& c = pair.category();
  const auto& X = e.system;
  const auto& L = X.index();
  std::int64_t e1 = 0, e2 = 0;
  for (Obj P : pair.subcategory()) {
    for (const auto& h : c.hom(e.object, P)) {
      ++e1;
      if (!factor_through(c, e, h))
        return Verdict::fails({{"property", "E1"}, {"h", c.morphism_name(h)}, {"target", c.object_name(P)}});
    }
  }
  for (const auto& l : L.elements()) {
    for (Obj P : pair.subcategory()) {
      const auto& hom = c.hom(X.object(l), P);
      for (std::size_t a = 0; a < hom.size(); ++a)
        for (std::size_t b = a + 1; b < hom.size(); ++b) {
          if (!(c.compose(hom[a], e.at(l)) == c.compose(hom[b], e.at(l)))) continue;
          ++e2;
          bool merged = false;
          for (const auto& lp : L.ascent(l, 0)) {
            const Morphism q = X.bond(l, lp);
            if (c.compose(hom[a], q) == c.compose(hom[b], q)) { merged = true; break; }
          }
          if (!merged)
            return Verdict::fails({{"property", "E2"}, {"lambda", L.label(l)}, {"h", c.morphism_name(hom[a])},
                                   {"h_prime", c.morphism_name(hom[b])}});
        }
    }
  }
  return Verdict::holds({{"E1_morphisms", e1}, {"E2_pairs", e2}});
}

Verdict check_pair(const ProReflectivePair& pair) {
  Json checked = Json::object();
  for (Obj x : pair.category().objects()) {
    const Expansion* e = nullptr;
    try {
      e = &pair.expansion(x);
    } catch (const Error&) {
      return Verdict::fails({{"object", pair.category().object_name(x)}, {"reason", "no designated expansion"}});
    }
    Verdict v = check_expansion(pair, *e);
    if (!v.is_holds()) {
      Json ev = v.evidence;
      ev["object"] = pair.category().object_name(x);
      return Verdict::fails(ev);
    }
    checked[pair.category().object_name(x)] = v.evidence;
  }
  return Verdict::holds({{"expansions", checked}});
}

Json JShapeMorphism::to_json() const {
  const auto& c = representative.category();
  return {{"source", c.object_name(source)}, {"target", c.object_name(target)}, {"representative", representative.to_json()}};
}

JMorphism canonical_pro_iso(const ProReflectivePair& pair, const Expansion& p, const Expansion& pp) {
  if (p.object != pp.object) throw Error("TypeMismatch", "expansions of different objects");
  const auto& c = pair.category();
  const auto& M = pp.system.index();
  const IndexPoset one = IndexPoset::singleton();
  std::vector<Elem> idx;
  std::vector<MorphismFamily> fams;
  for (const auto& mu : M.elements()) {
    const auto f = factor_through(c, p, pp.at(mu));
    if (!f) throw Error("NotAnExpansion", "p'_" + M.label(mu) + " does not factor through p");
    idx.push_back(f->lambda);
    fams.push_back(MorphismFamily::constant(c, one, f->through));
  }
  JMorphism i(p.system, pp.system, one, IndexFunction::table(M, p.system.index(), idx), FamilyMap::table(M, fams));
  if (jmorphism_condition(i) != Outcome::Holds) throw Error("NotAnExpansion", "factorizations do not form a pro-morphism");
  return i;
}

JMorphism canonical_iso(const ProReflectivePair& pair, const Expansion& p, const Expansion& pp, const IndexPoset& j,
                        const Limits& limits) {
  const JMorphism i = induce(canonical_pro_iso(pair, p, pp), j);
  const JMorphism back = induce(canonical_pro_iso(pair, pp, p), j);
  const Verdict v = verify_inverse(i, back, limits);
  if (!v.is_holds()) throw Error("NotAnExpansion", "canonical morphism is not invertible: " + v.evidence.dump());
  return i;
}

JShapeMorphism shape_morphism(const ProReflectivePair& pair, Obj x, Obj y, const JMorphism& f) {
  const Expansion& ex = pair.expansion(x);
  const Expansion& ey = pair.expansion(y);
  if (!same_system(f.source(), ex.system) || !same_system(f.target(), ey.system))
    throw Error("TypeMismatch", "representative must run between the designated expansions");
  return {x, y, ex, ey, f};
}

Verdict shape_equal(const ProReflectivePair& pair, const JShapeMorphism& a, const JShapeMorphism& b, const Limits& limits) {
  if (a.source != b.source || a.target != b.target) return Verdict::fails({{"reason", "different source or target"}});
  if (!a.representative.J().same_as(b.representative.J())) throw Error("IndexPosetMismatch", "shape morphisms over different J");
  if (same_expansion(a.source_expansion, b.source_expansion) && same_expansion(a.target_expansion, b.target_expansion))
    return equivalent_jmorphisms(a.representative, b.representative, limits);
  const auto& J = a.representative.J();
  const JMorphism i = canonical_iso(pair, a.source_expansion, b.source_expansion, J, limits);
  const JMorphism j = canonical_iso(pair, a.target_expansion, b.target_expansion, J, limits);
  Verdict v = equivalent_jmorphisms(compose_jmorphisms(j, a.representative), compose_jmorphisms(b.representative, i), limits);
  v.evidence["transported"] = true;
  return v;
}

JShapeMorphism compose_shape(const JShapeMorphism& g, const JShapeMorphism& f) {
  if (f.target != g.source || !same_expansion(f.target_expansion, g.source_expansion))
    throw Error("NonComposable", "shape morphisms do not meet at a common expansion");
  return {f.source, g.target, f.source_expansion, g.target_expansion, compose_jmorphisms(g.representative, f.representative)};
}

JShapeMorphism identity_shape(const ProReflectivePair& pair, Obj x, const IndexPoset& j) {
  const Expansion& e = pair.expansion(x);
  return {x, x, e, e, identity_jmorphism(e.system, j)};
}

JShapeMorphism shape_functor(const ProReflectivePair& pair, const Morphism& f, const IndexPoset& j) {
  const auto& c = pair.category();
  if (!c.is_morphism(f)) throw Error("TypeMismatch", "not a morphism of the category");
  const Expansion& p = pair.expansion(f.src);
  const Expansion& q = pair.expansion(f.tgt);
  const auto& M = q.system.index();
  const IndexPoset one = IndexPoset::singleton();
  std::vector<Elem> idx;
  std::vector<MorphismFamily> fams;
  for (const auto& mu : M.elements()) {
    const auto fac = factor_through(c, p, c.compose(q.at(mu), f));
    if (!fac) throw Error("NotAnExpansion", "q_" + M.label(mu) + " f does not factor through the source expansion");
    idx.push_back(fac->lambda);
    fams.push_back(MorphismFamily::constant(c, one, fac->through));
  }
  const JMorphism pro(p.system, q.system, one, IndexFunction::table(M, p.system.index(), idx), FamilyMap::table(M, fams));
  if (jmorphism_condition(pro) != Outcome::Holds) throw Error("NotAnExpansion", "factorizations do not form a pro-morphism");
  return {f.src, f.tgt, p, q, induce(pro, j)};
}

JShapeMorphism uniform_factorize(const ProReflectivePair& pair, const MorphismFamily& phis) {
  const auto& c = pair.category();
  const Obj x = phis.source(), q = phis.target();
  if (!pair.in_d(q)) throw Error("HypothesisViolation", "target of the family is not in D");
  const Expansion& p = pair.expansion(x);
  const Expansion target = rudimentary_expansion(c, q);
  const auto& J = phis.index();
  const auto& L = p.system.index();
  std::vector<Elem> js;
  std::int64_t cycle_start = 0;
  if (J.is_finite()) {
    js = J.elements();
  } else {
    if (J.kind() != IndexPoset::Kind::Omega) throw Error("Unsupported", "families over finite J or omega");
    const auto per = phis.periodicity();
    if (!per) throw Error("Inconclusive", "family is not eventually periodic");
    cycle_start = per->start;
    for (std::int64_t k = 0; k < per->start + per->period; ++k) js.push_back(Elem(k));
  }
  for (const auto& l : L.linear_extension()) {
    std::vector<Morphism> vals;
    for (const auto& jj : js) {
      const auto h = c.first_solution(p.system.object(l), q, {{std::nullopt, p.at(l), phis.at(jj)}});
      if (!h) break;
      vals.push_back(*h);
    }
    if (vals.size() != js.size()) continue;
    MorphismFamily fam;
    if (J.is_finite()) {
      fam = MorphismFamily::table(c, J, vals);
    } else {
      std::vector<Morphism> prefix(vals.begin(), vals.begin() + cycle_start), cycle(vals.begin() + cycle_start, vals.end());
      fam = prefix.empty() && cycle.size() == 1 ? MorphismFamily::constant(c, J, cycle.front())
                                                : MorphismFamily::periodic(c, J, prefix, cycle);
    }
    const auto& M = target.system.index();
    JMorphism f(p.system, target.system, J, IndexFunction::table(M, L, {l}), FamilyMap::table(M, {fam}));
    return {x, q, p, target, f};
  }
  throw Error("NotUniformlyFactorizable", "no single index factors the whole family");
}

MorphismFamily decompose(const JShapeMorphism& f) {
  const auto& M = f.representative.target().index();
  if (!M.is_finite() || M.size() != 1) throw Error("TypeMismatch", "decompose expects a morphism into a rudimentary expansion");
  const Elem star = M.elements().front();
  const Elem l = f.representative.index_fn()(star);
  return f.representative.family(star).after(f.source_expansion.at(l));
}

Verdict almost_equal(const ProReflectivePair& pair, const MorphismFamily& a, const MorphismFamily& b, const Limits& limits) {
  uniform_factorize(pair, a);
  uniform_factorize(pair, b);
  return eventually_equal(a, b, limits);
}

Verdict same_shape_on_D(const ProReflectivePair& pair, Obj p, Obj q, const IndexPoset& j, const Limits& limits) {
  if (!pair.in_d(p) || !pair.in_d(q)) throw Error("HypothesisViolation", "objects must lie in D");
  const auto& c = pair.category();
  const InverseSystem X = InverseSystem::rudimentary(c, p);
  const InverseSystem Y = InverseSystem::rudimentary(c, q);
  const auto forward = hom_classes(X, Y, j, limits);
  const auto backward = hom_classes(Y, X, j, limits);
  for (std::size_t a = 0; a < forward.size(); ++a)
    for (std::size_t b = 0; b < backward.size(); ++b) {
      const Verdict v = verify_inverse(forward[a].representative, backward[b].representative, limits);
      if (v.is_holds())
        return Verdict::holds({{"forward", forward[a].representative.to_json()}, {"backward", backward[b].representative.to_json()}});
    }
  return Verdict::fails({{"forward_classes", forward.size()}, {"backward_classes", backward.size()}});
}

JShapeMorphism lift_system_morphism(const ProReflectivePair& pair, Obj x, Obj y, const std::vector<JShapeMorphism>& cone,
                                    const Limits& limits) {
  const Expansion& p = pair.expansion(x);
  const Expansion& q = pair.expansion(y);
  const auto& M = q.system.index();
  if (cone.size() != M.size()) throw Error("Malformed", "cone needs one shape morphism per index of the target expansion");
  if (cone.empty()) throw Error("Malformed", "empty cone");
  const IndexPoset J = cone.front().representative.J();
  for (std::size_t k = 0; k < cone.size(); ++k) {
    const auto& h = cone[k];
    const Obj ym = q.system.object(M.elements()[k]);
    if (h.source != x || h.target != ym) throw Error("TypeMismatch", "cone component " + M.label(M.elements()[k]) + " has the wrong type");
    if (!same_system(h.representative.source(), p.system)) throw Error("TypeMismatch", "cone must start at the designated expansion");
    const auto& hm = h.representative.target().index();
    if (!hm.is_finite() || hm.size() != 1) throw Error("TypeMismatch", "cone components must end at rudimentary expansions");
    if (!h.representative.J().same_as(J)) throw Error("IndexPosetMismatch", "cone components over different J");
  }
  for (std::size_t a = 0; a < M.size(); ++a)
    for (std::size_t b = 0; b < M.size(); ++b) {
      const Elem& mu = M.elements()[a];
      const Elem& mup = M.elements()[b];
      if (!M.less(mu, mup)) continue;
      const JMorphism bond = constant_map(cone[b].representative.target(), cone[a].representative.target(), J, q.system.bond(mu, mup));
      const Verdict v = equivalent_jmorphisms(compose_jmorphisms(bond, cone[b].representative), cone[a].representative, limits);
      if (!v.is_holds())
        throw Error("IncompatibleCone", "H_" + M.label(mu) + " differs from q(" + M.label(mu) + "," + M.label(mup) + ") H_" + M.label(mup));
    }
  std::vector<Elem> idx;
  std::vector<MorphismFamily> fams;
  for (const auto& h : cone) {
    const Elem star = h.representative.target().index().elements().front();
    idx.push_back(h.representative.index_fn()(star));
    fams.push_back(h.representative.family(star));
  }
  JMorphism f(p.system, q.system, J, IndexFunction::table(M, p.system.index(), idx), FamilyMap::table(M, fams));
  if (jmorphism_condition(f, limits) != Outcome::Holds) throw Error("IncompatibleCone", "glued components do not form a J-morphism");
  return {x, y, p, q, f};
}

Verdict verify_lift(const ProReflectivePair& pair, const JShapeMorphism& f, const std::vector<JShapeMorphism>& cone,
                    const Limits& limits) {
  const Expansion& q = pair.expansion(f.target);
  const auto& M = q.system.index();
  Json per = Json::array();
  Outcome acc = Outcome::Holds;
  for (std::size_t k = 0; k < M.size(); ++k) {
    const JShapeMorphism sq = shape_functor(pair, q.at(M.elements()[k]), f.representative.J());
    const Verdict v = shape_equal(pair, compose_shape(sq, f), cone.at(k), limits);
    acc = meet(acc, v.outcome);
    per.push_back({{"mu", M.label(M.elements()[k])}, {"outcome", to_string(v.outcome)}});
  }
  Json ev = {{"components", per}};
  if (acc == Outcome::Holds) return Verdict::holds(ev);
  if (acc == Outcome::Fails) return Verdict::fails(ev);
  return Verdict::inconclusive(limits.horizon, ev);
}

}  // namespace procat
