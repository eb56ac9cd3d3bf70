#include "procat/jmor.hpp"

#include <algorithm>

namespace procat {

namespace {

constexpr std::int64_t kPrefixSide = 16;

std::int64_t prefix_side(const Limits& limits) { return std::min(limits.horizon, kPrefixSide); }

std::vector<Elem> index_scope(const IndexPoset& m, std::int64_t side) {
  return m.is_finite() ? m.elements() : m.sample(side);
}

std::vector<std::pair<Elem, Elem>> related_pairs(const IndexPoset& m, std::int64_t side) {
  std::vector<std::pair<Elem, Elem>> out;
  if (!m.is_finite()) return covering_pairs(m, side);
  for (const auto& a : m.elements())
    for (const auto& b : m.elements())
      if (m.less(a, b)) out.emplace_back(a, b);
  return out;
}

Json scope_json(const IndexPoset& m, std::int64_t side) {
  if (m.is_finite()) return "all related pairs";
  return "covering pairs below " + std::to_string(side);
}

FamilyMap build_map(const IndexPoset& m, std::function<MorphismFamily(const Elem&)> gen, std::string desc) {
  if (m.is_finite()) {
    std::vector<MorphismFamily> fams;
    for (const auto& e : m.elements()) fams.push_back(gen(e));
    return FamilyMap::table(m, std::move(fams));
  }
  return FamilyMap::generator(m, std::move(gen), std::move(desc));
}

// Ascending lambda candidates; for finite L the top element is returned first
// separately so failure there settles the search.
template <class Test>
std::pair<Outcome, std::optional<Elem>> search_lambda(const IndexPoset& L, const Elem& lam0, const Limits& limits,
                                                      Test&& test, Json& last) {
  if (L.is_finite()) {
    const Elem top = L.linear_extension().back();
    Verdict vt = test(top);
    if (vt.is_fails()) {
      last = vt.evidence;
      last["lambda"] = L.label(top);
      return {Outcome::Fails, std::nullopt};
    }
    for (const auto& lam : L.ascent(lam0, 0)) {
      Verdict v = lam == top ? vt : test(lam);
      if (v.is_holds()) {
        last = v.evidence;
        return {Outcome::Holds, lam};
      }
    }
    last = vt.evidence;
    return {Outcome::Inconclusive, std::nullopt};
  }
  std::int64_t tried = 0;
  try {
    for (const auto& lam : L.ascent(lam0, limits.horizon)) {
      ++tried;
      Verdict v = test(lam);
      if (v.is_holds()) {
        last = v.evidence;
        return {Outcome::Holds, lam};
      }
    }
  } catch (const Error& e) {
    if (e.kind() != "Overflow") throw;
  }
  last = {{"lambda_candidates", tried}};
  return {Outcome::Inconclusive, std::nullopt};
}

}  // namespace

FamilyMap FamilyMap::table(IndexPoset m, std::vector<MorphismFamily> families) {
  if (!m.is_finite() || families.size() != m.size()) throw Error("TypeMismatch", "one family per index element is required");
  FamilyMap f;
  f.m_ = std::move(m);
  f.table_ = std::move(families);
  return f;
}

FamilyMap FamilyMap::generator(IndexPoset m, std::function<MorphismFamily(const Elem&)> gen, std::string description) {
  FamilyMap f;
  f.m_ = std::move(m);
  f.gen_ = std::move(gen);
  f.desc_ = std::move(description);
  return f;
}

MorphismFamily FamilyMap::operator()(const Elem& mu) const {
  if (gen_) return gen_(mu);
  return table_.at(m_.index_of(mu));
}

JMorphism::JMorphism(InverseSystem source, InverseSystem target, IndexPoset j, IndexFunction index_fn, FamilyMap families)
    : source_(std::move(source)), target_(std::move(target)), j_(std::move(j)), f_(std::move(index_fn)),
      fam_(std::move(families)) {}

Json JMorphism::to_json() const {
  Json out = {{"J", j_.describe()}, {"index", f_.to_json()}};
  const auto& M = target_.index();
  if (M.is_finite()) {
    Json fams = Json::object();
    for (const auto& mu : M.elements()) fams[M.label(mu)] = family(mu).describe();
    out["families"] = fams;
  } else {
    out["families"] = fam_.description().empty() ? family(Elem(0)).describe() : fam_.description();
  }
  return out;
}

JMorphism make_jmorphism(InverseSystem source, InverseSystem target, IndexPoset j, IndexFunction index_fn,
                         FamilyMap families, std::int64_t side) {
  const auto& L = source.index();
  const auto& M = target.index();
  if (!source.category().same_as(target.category()))
    throw Error("TypeMismatch", "source and target live in different categories");
  if (!index_fn.domain().same_as(M) || !index_fn.codomain().same_as(L))
    throw Error("IndexPosetMismatch", "index function must map the target index poset to the source index poset");
  for (const auto& mu : index_scope(M, side)) {
    const auto fam = families(mu);
    const Elem l = index_fn(mu);
    if (!fam.index().same_as(j)) throw Error("IndexPosetMismatch", "family at " + M.label(mu) + " is not indexed by J");
    if (!fam.category().same_as(source.category()))
      throw Error("TypeMismatch", "family at " + M.label(mu) + " lives in another category");
    if (fam.source() != source.object(l) || fam.target() != target.object(mu))
      throw Error("TypeMismatch", "family at " + M.label(mu) + " must map " +
                                      source.category().object_name(source.object(l)) + " -> " +
                                      source.category().object_name(target.object(mu)));
  }
  return JMorphism(std::move(source), std::move(target), std::move(j), std::move(index_fn), std::move(families));
}

Json to_json(const JCheck& c) {
  Json j = to_json(c.verdict);
  j["classification"] = {{"commutative", c.commutative}, {"simple", c.simple}, {"level", c.level}};
  return j;
}

namespace {

struct PairFamilies {
  MorphismFamily fm, qfmp;
  Elem lm, lmp;
};

PairFamilies pair_families(const JMorphism& f, const Elem& mu, const Elem& mu_prime) {
  const auto& Y = f.target();
  return {f.family(mu), f.family(mu_prime).then(Y.bond(mu, mu_prime)), f.index_fn()(mu), f.index_fn()(mu_prime)};
}

std::pair<MorphismFamily, MorphismFamily> sides_at(const JMorphism& f, const PairFamilies& p, const Elem& lam) {
  const auto& X = f.source();
  return {p.fm.after(X.bond(p.lm, lam)), p.qfmp.after(X.bond(p.lmp, lam))};
}

}  // namespace

PairWitness pair_witness(const JMorphism& f, const Elem& mu, const Elem& mu_prime, const Limits& limits) {
  const auto& L = f.source().index();
  const auto& M = f.target().index();
  const auto p = pair_families(f, mu, mu_prime);
  auto test = [&](const Elem& lam) {
    auto [a, b] = sides_at(f, p, lam);
    return eventually_equal(a, b, limits);
  };
  Json ev;
  auto [out, lam] = search_lambda(L, L.join(p.lm, p.lmp), limits, test, ev);
  PairWitness w;
  w.outcome = out;
  w.lambda = lam;
  w.evidence = {{"mu", M.label(mu)}, {"mu_prime", M.label(mu_prime)}};
  if (out == Outcome::Holds) {
    w.evidence["lambda"] = L.label(*lam);
    w.evidence["j"] = ev["j"];
  } else if (out == Outcome::Fails) {
    w.evidence["lambda"] = ev["lambda"];
    w.evidence["counterexample"] = ev;
    w.evidence["counterexample"].erase("lambda");
  } else {
    w.evidence["search"] = ev;
  }
  return w;
}

Verdict verify_pair_witness(const JMorphism& f, const Elem& mu, const Elem& mu_prime, const Elem& lambda,
                            const Elem& j, const Limits& limits) {
  const auto p = pair_families(f, mu, mu_prime);
  const auto& L = f.source().index();
  if (!L.leq(p.lm, lambda) || !L.leq(p.lmp, lambda)) return Verdict::fails({{"reason", "lambda below f(mu) or f(mu')"}});
  auto [a, b] = sides_at(f, p, lambda);
  return tail_equal_from(a, b, j, limits);
}

JCheck check_jmorphism(const JMorphism& f, const Limits& limits) {
  const auto& L = f.source().index();
  const auto& M = f.target().index();
  const std::int64_t side = prefix_side(limits);
  JCheck out;
  const Verdict inc = check_increasing(f.index_fn(), limits);
  bool simple = !inc.is_fails();  // within the checked scope, like the pair witnesses
  bool commutative = true;
  Json pairs = Json::array();
  Outcome acc = Outcome::Holds;
  Json failure;
  for (const auto& [mu, mup] : related_pairs(M, side)) {
    PairWitness w = pair_witness(f, mu, mup, limits);
    acc = meet(acc, w.outcome);
    if (w.outcome == Outcome::Fails && failure.is_null()) failure = w.evidence;
    if (w.outcome != Outcome::Holds) {
      simple = false;
      commutative = false;
      pairs.push_back(w.evidence);
      continue;
    }
    pairs.push_back(w.evidence);
    if (!(*w.lambda == f.index_fn()(mup))) simple = false;
    if (commutative) {
      const auto p = pair_families(f, mu, mup);
      bool found = false;
      for (const auto& lam : L.ascent(L.join(p.lm, p.lmp), L.is_finite() ? 0 : std::min<std::int64_t>(limits.horizon, 4))) {
        auto [a, b] = sides_at(f, p, lam);
        if (all_equal(a, b, limits).is_holds()) {
          found = true;
          break;
        }
      }
      commutative = found;
    }
  }
  out.commutative = acc == Outcome::Holds && commutative;
  out.simple = acc == Outcome::Holds && simple;
  out.level = out.simple && M.same_as(L) && f.index_fn().is_identity();
  Json ev = {{"scope", scope_json(M, side)}, {"increasing", inc.is_holds()}};
  if (acc == Outcome::Fails) {
    ev["counterexample"] = failure;
    out.verdict = Verdict::fails(ev);
  } else if (acc == Outcome::Inconclusive) {
    ev["pairs"] = pairs;
    out.verdict = Verdict::inconclusive(limits.horizon, ev);
  } else {
    ev["pairs"] = pairs;
    out.verdict = Verdict::holds(ev);
  }
  return out;
}

Outcome jmorphism_condition(const JMorphism& f, const Limits& limits) {
  Outcome acc = Outcome::Holds;
  for (const auto& [mu, mup] : related_pairs(f.target().index(), prefix_side(limits))) {
    acc = meet(acc, pair_witness(f, mu, mup, limits).outcome);
    if (acc == Outcome::Fails) break;
  }
  return acc;
}

JMorphism identity_jmorphism(const InverseSystem& x, const IndexPoset& j) {
  const auto& L = x.index();
  auto gen = [x, j](const Elem& l) { return MorphismFamily::constant(x.category(), j, x.category().identity(x.object(l))); };
  return JMorphism(x, x, j, IndexFunction::identity(L), build_map(L, gen, "const(id)"));
}

JMorphism compose_jmorphisms(const JMorphism& g, const JMorphism& f) {
  if (!same_system(f.target(), g.source())) throw Error("NonComposable", "target of the first morphism is not the source of the second");
  if (!f.J().same_as(g.J())) throw Error("IndexPosetMismatch", "J-morphisms over different J");
  const auto& N = g.target().index();
  auto gen = [f, g](const Elem& nu) { return MorphismFamily::compose(g.family(nu), f.family(g.index_fn()(nu))); };
  std::string desc;
  if (!N.is_finite()) desc = "(" + g.family(Elem(0)).describe() + ") . (" + f.family(g.index_fn()(Elem(0))).describe() + ")";
  return JMorphism(f.source(), g.target(), f.J(), compose(f.index_fn(), g.index_fn()), build_map(N, gen, desc));
}

Verdict equivalent_jmorphisms(const JMorphism& a, const JMorphism& b, const Limits& limits) {
  if (!same_system(a.source(), b.source()) || !same_system(a.target(), b.target()))
    throw Error("TypeMismatch", "J-morphisms have different source or target");
  if (!a.J().same_as(b.J())) throw Error("IndexPosetMismatch", "J-morphisms over different J");
  const auto& X = a.source();
  const auto& L = X.index();
  const auto& M = a.target().index();
  const std::int64_t side = prefix_side(limits);
  Json per = Json::array();
  Outcome acc = Outcome::Holds;
  Json failure;
  for (const auto& mu : index_scope(M, side)) {
    const Elem la = a.index_fn()(mu), lb = b.index_fn()(mu);
    const auto fa = a.family(mu), fb = b.family(mu);
    auto test = [&](const Elem& lam) {
      return eventually_equal(fa.after(X.bond(la, lam)), fb.after(X.bond(lb, lam)), limits);
    };
    Json ev;
    auto [out, lam] = search_lambda(L, L.join(la, lb), limits, test, ev);
    acc = meet(acc, out);
    Json e = {{"mu", M.label(mu)}};
    if (out == Outcome::Holds) {
      e["lambda"] = L.label(*lam);
      e["j"] = ev["j"];
    } else if (out == Outcome::Fails) {
      e["lambda"] = ev["lambda"];
      ev.erase("lambda");
      e["counterexample"] = ev;
      if (failure.is_null()) failure = e;
    } else {
      e["search"] = ev;
    }
    per.push_back(e);
  }
  const Json scope = M.is_finite() ? Json("all indices") : Json("indices below " + std::to_string(side));
  if (acc == Outcome::Fails) return Verdict::fails({{"scope", scope}, {"counterexample", failure}});
  if (acc == Outcome::Inconclusive) return Verdict::inconclusive(limits.horizon, {{"scope", scope}, {"indices", per}});
  return Verdict::holds({{"scope", scope}, {"indices", per}});
}

Verdict data_equal(const JMorphism& a, const JMorphism& b, const Limits& limits) {
  if (!same_system(a.source(), b.source()) || !same_system(a.target(), b.target()) || !a.J().same_as(b.J()))
    return Verdict::fails({{"reason", "different source, target or J"}});
  const auto& M = a.target().index();
  const std::int64_t side = prefix_side(limits);
  Outcome acc = Outcome::Holds;
  for (const auto& mu : index_scope(M, side)) {
    if (!(a.index_fn()(mu) == b.index_fn()(mu))) return Verdict::fails({{"mu", M.label(mu)}, {"reason", "index function"}});
    Verdict v = all_equal(a.family(mu), b.family(mu), limits);
    if (v.is_fails()) return Verdict::fails({{"mu", M.label(mu)}, {"family", v.evidence}});
    acc = meet(acc, v.outcome);
  }
  if (acc == Outcome::Inconclusive) return Verdict::inconclusive(limits.horizon);
  return Verdict::holds({{"scope", M.is_finite() ? Json("all indices") : Json("indices below " + std::to_string(side))}});
}

JMorphism induce(const JMorphism& pro, const IndexPoset& j) {
  if (!pro.J().is_finite() || pro.J().size() != 1) throw Error("TypeMismatch", "induce expects an inv-C morphism (J = {1})");
  const Elem one = pro.J().elements().front();
  const auto& M = pro.target().index();
  auto gen = [pro, j, one](const Elem& mu) {
    return MorphismFamily::constant(pro.category(), j, pro.family(mu).at(one));
  };
  std::string desc;
  if (!M.is_finite()) desc = "const(" + pro.category().morphism_name(pro.family(Elem(0)).at(one)) + ")";
  return JMorphism(pro.source(), pro.target(), j, pro.index_fn(), build_map(M, gen, desc));
}

JMorphism collapse_to_pro(const JMorphism& f) {
  const auto& J = f.J();
  if (!J.is_finite()) throw Error("NoMax", "J has no maximum");
  const Elem top = J.linear_extension().back();
  for (const auto& e : J.elements())
    if (!J.leq(e, top)) throw Error("NoMax", "J has no maximum");
  const IndexPoset one = IndexPoset::singleton();
  const auto& M = f.target().index();
  auto gen = [f, top, one](const Elem& mu) { return MorphismFamily::constant(f.category(), one, f.family(mu).at(top)); };
  return JMorphism(f.source(), f.target(), one, f.index_fn(), build_map(M, gen, "slice at max J"));
}

SimplifyResult simplify(const JMorphism& f, const Limits& limits) {
  const auto& X = f.source();
  const auto& L = X.index();
  const auto& M = f.target().index();
  auto witness = [f, limits](const Elem& lo, const Elem& hi) {
    PairWitness w = pair_witness(f, lo, hi, limits);
    if (w.outcome == Outcome::Fails) throw Error("NotAJMorphism", "pair " + w.evidence.dump() + " violates the J-morphism condition");
    if (w.outcome == Outcome::Inconclusive) throw Error("Inconclusive", "witness search exceeded the horizon");
    return *w.lambda;
  };
  IndexFunction phi;
  if (M.is_finite()) {
    std::vector<Elem> vals;
    for (const auto& mu : M.elements()) {
      std::vector<Elem> bag{f.index_fn()(mu)};
      for (const auto& lo : M.elements())
        if (M.less(lo, mu)) bag.push_back(witness(lo, mu));
      vals.push_back(L.upper_bound(bag));
    }
    phi = IndexFunction::table(M, L, std::move(vals));
  } else if (M.kind() == IndexPoset::Kind::Omega) {
    phi = IndexFunction::rule(
        M, L,
        [f, L, witness](const Elem& n) {
          const Elem base = f.index_fn()(n);
          if (n.c[0] == 0) return base;
          return L.join(base, witness(Elem(n.c[0] - 1), n));
        },
        "pair witness bound");
  } else {
    throw Error("Unsupported", "simplify supports finite index posets and omega");
  }
  const IndexFunction fp = increasing_majorant(phi, limits);
  auto gen = [f, X, fp](const Elem& mu) { return f.family(mu).after(X.bond(f.index_fn()(mu), fp(mu))); };
  std::string desc;
  if (!M.is_finite()) desc = f.families().description();
  JMorphism g(X, f.target(), f.J(), fp, build_map(M, gen, desc));
  const JCheck c = check_jmorphism(g, limits);
  Verdict simple = c.simple ? Verdict::holds(c.verdict.evidence) : Verdict{c.verdict.is_holds() ? Outcome::Fails : c.verdict.outcome, c.verdict.evidence, c.verdict.horizon};
  return {g, simple, equivalent_jmorphisms(g, f, limits)};
}

Verdict check_transfer_hypotheses(const IndexFunction& phi, const Limits& limits) {
  const auto pj = poset_properties(phi.domain(), limits);
  const auto pk = poset_properties(phi.codomain(), limits);
  Json ev = {{"J_well_ordered", to_string(pj.well_ordered.outcome)},
             {"J_has_max", to_string(pj.has_max.outcome)},
             {"K_directed", to_string(pk.directed.outcome)},
             {"K_has_max", to_string(pk.has_max.outcome)}};
  if (!pj.well_ordered.is_holds() || !pj.has_max.is_fails() || !pk.directed.is_holds() || !pk.has_max.is_fails())
    return Verdict::fails(ev);
  const Verdict ci = check_cofinal_increasing(phi, limits);
  ev["cofinal_increasing"] = to_json(ci);
  if (ci.is_holds()) return Verdict::holds(ev);
  if (ci.is_fails()) return Verdict::fails(ev);
  return Verdict::inconclusive(limits.horizon, ev);
}

namespace {

void require_transfer(const IndexFunction& phi, const Limits& limits) {
  const Verdict v = check_transfer_hypotheses(phi, limits);
  if (!v.is_holds()) throw Error("HypothesisViolation", "transfer hypotheses do not hold: " + v.evidence.dump());
}

}  // namespace

JMorphism transfer(const JMorphism& f, const IndexFunction& phi, const Limits& limits) {
  if (!f.J().same_as(phi.domain())) throw Error("IndexPosetMismatch", "transfer map must start at J");
  require_transfer(phi, limits);
  const auto& M = f.target().index();
  auto gen = [f, phi](const Elem& mu) { return MorphismFamily::transferred(f.family(mu), phi); };
  std::string desc;
  if (!M.is_finite()) desc = "transfer(" + f.family(Elem(0)).describe() + ", " + phi.describe() + ")";
  return JMorphism(f.source(), f.target(), phi.codomain(), f.index_fn(), build_map(M, gen, desc));
}

JMorphism transfer_iso_back(const JMorphism& g, const IndexFunction& phi, const Limits& limits) {
  if (!g.J().same_as(phi.codomain())) throw Error("IndexPosetMismatch", "pull-back map must end at K");
  require_transfer(phi, limits);
  const auto& M = g.target().index();
  auto gen = [g, phi](const Elem& mu) { return MorphismFamily::pulled_back(g.family(mu), phi); };
  std::string desc;
  if (!M.is_finite()) desc = "pullback(" + g.family(Elem(0)).describe() + ", " + phi.describe() + ")";
  return JMorphism(g.source(), g.target(), phi.domain(), g.index_fn(), build_map(M, gen, desc));
}

}  // namespace procat
