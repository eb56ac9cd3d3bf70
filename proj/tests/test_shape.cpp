#include <doctest.h>

#include "support.hpp"

using namespace procat;
using tsupport::Rng;

namespace {

const IndexPoset& omega() {
  static const IndexPoset w = IndexPoset::omega();
  return w;
}

std::vector<Morphism> morphisms(const Category& c) {
  std::vector<Morphism> v;
  for (std::size_t k = 0; k < c.morphism_count(); ++k) v.push_back(c.morphism_at(k));
  return v;
}

Category cat_of(const std::string& text) { return validate_category(parse_category_text(text).raw); }

// r, t: X -> P with nothing relating them; [P] through r misses t.
Category two_arrows() {
  return cat_of("objects X P; morphism idX : X -> X; morphism idP : P -> P; morphism r : X -> P; morphism t : X -> P;"
                "identity X = idX; identity P = idP");
}

// z idempotent on P with z . r = r: idP and z agree after r but never merge.
Category absorbed() {
  return cat_of("objects X P; morphism idX : X -> X; morphism idP : P -> P; morphism z : P -> P; morphism r : X -> P;"
                "identity X = idX; identity P = idP; compose z . z = z; compose z . r = r");
}

// P and Q isomorphic through u and v.
Category iso_pair() {
  return cat_of("objects P Q; morphism idP : P -> P; morphism idQ : Q -> Q; morphism u : P -> Q; morphism v : Q -> P;"
                "identity P = idP; identity Q = idQ; compose v . u = idP; compose u . v = idQ");
}

std::optional<Expansion> random_expansion(Rng& rng, const Category& c, const std::vector<Obj>& D, Obj x) {
  const IndexPoset L = IndexPoset::chain(static_cast<std::size_t>(rng.uniform(1, 2)));
  RawSystem raw{c, L, {}, {}};
  for (std::size_t k = 0; k < L.size(); ++k) raw.objects.push_back(rng.pick(D));
  for (const auto& [lo, hi] : covering_pairs(L, 0)) {
    const auto& h = c.hom(raw.objects[L.index_of(hi)], raw.objects[L.index_of(lo)]);
    if (h.empty()) return std::nullopt;
    raw.bonds.push_back({lo, hi, rng.pick(h)});
  }
  InverseSystem sys;
  try {
    sys = validate_system(raw);
  } catch (const SystemError&) {
    return std::nullopt;
  }
  std::vector<Morphism> p;
  for (const auto& l : L.elements()) {
    const auto& h = c.hom(x, sys.object(l));
    if (h.empty()) return std::nullopt;
    p.push_back(rng.pick(h));
  }
  return Expansion{x, sys, p};
}

MorphismFamily random_xp_family(Rng& rng, const Category& c, Obj x, Obj p) {
  return tsupport::random_family(rng, c, {omega(), 4}, x, p);
}

}  // namespace

TEST_SUITE("shape") {
  TEST_CASE("rudimentary expansions of objects of D") {
    const Category a = tsupport::arrow();
    const ProReflectivePair pair(a, a.objects(), {});
    for (Obj o : a.objects()) CHECK(check_expansion(pair, rudimentary_expansion(a, o)).is_holds());
    CHECK(check_pair(pair).is_holds());
    CHECK(check_pair(tsupport::cone_pair()).is_holds());
  }

  TEST_CASE("expansion failures") {
    const Category c = two_arrows();
    const Obj X = c.parse_object("X"), P = c.parse_object("P");
    const Expansion through_r{X, InverseSystem::rudimentary(c, P), {c.parse_morphism("r")}};
    const ProReflectivePair pair(c, {P}, {{X, through_r}});
    const Verdict v = check_expansion(pair, through_r);
    REQUIRE(v.is_fails());
    CHECK(v.evidence["property"] == "E1");
    CHECK(v.evidence["h"] == "t");

    const Category d = absorbed();
    const Obj X2 = d.parse_object("X"), P2 = d.parse_object("P");
    const Expansion e2{X2, InverseSystem::rudimentary(d, P2), {d.parse_morphism("r")}};
    const Verdict w = check_expansion(ProReflectivePair(d, {P2}, {{X2, e2}}), e2);
    REQUIRE(w.is_fails());
    CHECK(w.evidence["property"] == "E2");

    const Category a = tsupport::arrow();
    const Expansion wrong{a.parse_object("A"), InverseSystem::rudimentary(a, a.parse_object("A")), {a.parse_morphism("u")}};
    CHECK_FALSE(check_compatibility(ProReflectivePair(a, a.objects(), {}), wrong).is_holds());
  }

  TEST_CASE("expansion check agrees with the brute-force law evaluation") {
    Rng rng(53);
    int good = 0, bad = 0;
    for (int k = 0; k < 600; ++k) {
      const Category c = tsupport::random_category(rng, 3, 8);
      const auto objs = c.objects();
      std::vector<Obj> D;
      for (Obj o : objs)
        if (rng.coin()) D.push_back(o);
      if (D.empty()) D.push_back(objs.front());
      const Obj x = rng.pick(objs);
      auto e = random_expansion(rng, c, D, x);
      if (!e) continue;
      const ProReflectivePair pair(c, D, {});
      const bool expect = tsupport::brute_is_expansion(c, D, *e);
      CHECK(check_expansion(pair, *e).is_holds() == expect);
      (expect ? good : bad)++;
    }
    CHECK(good > 20);
    CHECK(bad > 20);
  }

  TEST_CASE("canonical isomorphisms") {
    const Category z = tsupport::z2();
    const ProReflectivePair pair(z, {0}, {});
    const Expansion p = rudimentary_expansion(z, 0);
    const Expansion ps{0, InverseSystem::rudimentary(z, 0), {z.parse_morphism("s")}};
    CHECK(check_expansion(pair, ps).is_holds());
    const Elem one = IndexPoset::singleton().elements().front();
    CHECK(z.is_identity(canonical_pro_iso(pair, p, p).family(one).at(one)));
    const JMorphism i = canonical_iso(pair, p, ps, omega());
    CHECK(i.family(one).at(Elem(3)) == z.parse_morphism("s"));
    const JMorphism back = canonical_iso(pair, ps, p, omega());
    CHECK(equivalent_jmorphisms(compose_jmorphisms(back, i), identity_jmorphism(p.system, omega())).is_holds());

    // Y expanded by the 2-chain or by [P].
    const ProReflectivePair cp = tsupport::cone_pair();
    const Category& c = cp.category();
    const Obj Y = c.parse_object("Y"), P = c.parse_object("P");
    const Expansion flat{Y, InverseSystem::rudimentary(c, P), {c.parse_morphism("rY")}};
    REQUIRE(check_expansion(cp, flat).is_holds());
    const JMorphism j1 = canonical_iso(cp, cp.expansion(Y), flat, IndexPoset::chain(3));
    const JMorphism j2 = canonical_iso(cp, flat, cp.expansion(Y), IndexPoset::chain(3));
    CHECK(verify_inverse(j1, j2).is_holds());
  }

  TEST_CASE("shape morphisms transport along canonical isomorphisms") {
    const ProReflectivePair cp = tsupport::cone_pair();
    const Category& c = cp.category();
    const Obj Y = c.parse_object("Y"), P = c.parse_object("P");
    const Expansion flat{Y, InverseSystem::rudimentary(c, P), {c.parse_morphism("rY")}};
    const ProReflectivePair alt(c, {P}, {{c.parse_object("X"), cp.expansion(c.parse_object("X"))}, {Y, flat}});
    const Morphism tY = c.parse_morphism("tY"), rY = c.parse_morphism("rY");
    for (const IndexPoset& J : {IndexPoset::chain(2), omega()}) {
      const JShapeMorphism a = shape_functor(cp, tY, J), b = shape_functor(alt, tY, J);
      CHECK_FALSE(same_system(a.source_expansion.system, b.source_expansion.system));
      CHECK(shape_equal(cp, a, b).is_holds());
      CHECK(shape_equal(cp, a, shape_functor(alt, rY, J)).is_fails());
      CHECK(shape_equal(cp, a, a).is_holds());
      const JShapeMorphism w = shape_morphism(cp, Y, P, a.representative);
      CHECK(shape_equal(cp, w, a).is_holds());
    }
    CHECK_THROWS_AS(shape_morphism(cp, c.parse_object("X"), P, shape_functor(cp, tY, omega()).representative), Error);
  }

  TEST_CASE("shape functor laws") {
    const ProReflectivePair cp = tsupport::cone_pair();
    const Category& c = cp.category();
    for (const IndexPoset& J : {IndexPoset::singleton(), IndexPoset::chain(3), omega()}) {
      for (Obj o : c.objects())
        CHECK(shape_equal(cp, shape_functor(cp, c.identity(o), J), identity_shape(cp, o, J)).is_holds());
      for (const auto& f : morphisms(c))
        for (const auto& g : morphisms(c)) {
          if (f.tgt != g.src) continue;
          const JShapeMorphism sgf = shape_functor(cp, c.compose(g, f), J);
          CHECK(shape_equal(cp, sgf, compose_shape(shape_functor(cp, g, J), shape_functor(cp, f, J))).is_holds());
        }
      // Through the ordinary shape functor.
      for (const auto& f : morphisms(c)) {
        const JShapeMorphism plain = shape_functor(cp, f, IndexPoset::singleton());
        CHECK(equivalent_jmorphisms(induce(plain.representative, J), shape_functor(cp, f, J).representative).is_holds());
      }
    }
  }

  TEST_CASE("shape functor on random categories") {
    Rng rng(59);
    int pairs = 0;
    for (int k = 0; k < 400 && pairs < 100; ++k) {
      const Category c = tsupport::random_category(rng, 3, 8);
      const ProReflectivePair pair(c, c.objects(), {});
      const auto mors = morphisms(c);
      const Morphism f = rng.pick(mors);
      std::vector<Morphism> after;
      for (const auto& g : mors)
        if (g.src == f.tgt) after.push_back(g);
      const Morphism g = rng.pick(after);
      const IndexPoset J = rng.coin() ? omega() : rng.pick(tsupport::small_index_posets());
      ++pairs;
      CHECK(shape_equal(pair, shape_functor(pair, c.compose(g, f), J),
                        compose_shape(shape_functor(pair, g, J), shape_functor(pair, f, J)))
                .is_holds());
    }
    CHECK(pairs == 100);
  }

  TEST_CASE("uniform factorization and almost equality") {
    const ProReflectivePair cp = tsupport::cone_pair();
    const Category& c = cp.category();
    const Obj X = c.parse_object("X"), P = c.parse_object("P");
    const Morphism rX = c.parse_morphism("rX"), tX = c.parse_morphism("tX");
    const auto konst = MorphismFamily::constant(c, omega(), rX);
    const auto late = MorphismFamily::step(c, omega(), {{Elem(0), tX}, {Elem(2), rX}});
    const auto flip = MorphismFamily::periodic(c, omega(), {}, {rX, tX});
    const Verdict v = almost_equal(cp, konst, late);
    REQUIRE(v.is_holds());
    CHECK(v.evidence["j"] == "2");
    CHECK(almost_equal(cp, konst, konst).is_holds());
    CHECK(almost_equal(cp, konst, flip).is_fails());
    CHECK(shape_equal(cp, uniform_factorize(cp, konst), uniform_factorize(cp, late)).is_holds());
    CHECK(shape_equal(cp, uniform_factorize(cp, konst), uniform_factorize(cp, flip)).is_fails());
    CHECK(uniform_factorize(cp, konst).target == P);

    const Category t = two_arrows();
    const Obj tx = t.parse_object("X"), tp = t.parse_object("P");
    const ProReflectivePair broken(t, {tp}, {{tx, Expansion{tx, InverseSystem::rudimentary(t, tp), {t.parse_morphism("r")}}}});
    try {
      uniform_factorize(broken, MorphismFamily::step(t, omega(), {{Elem(0), t.parse_morphism("r")}, {Elem(1), t.parse_morphism("t")}}));
      FAIL("expected NotUniformlyFactorizable");
    } catch (const Error& e) {
      CHECK(e.kind() == "NotUniformlyFactorizable");
    }
  }

  TEST_CASE("round trips through decompose") {
    const ProReflectivePair cp = tsupport::cone_pair();
    const Category& c = cp.category();
    const Obj X = c.parse_object("X"), Y = c.parse_object("Y"), P = c.parse_object("P");
    Rng rng(61);
    for (int k = 0; k < 200; ++k) {
      const Obj src = rng.coin() ? X : Y;
      const MorphismFamily a = random_xp_family(rng, c, src, P);
      const MorphismFamily b = random_xp_family(rng, c, src, P);
      const JShapeMorphism fa = uniform_factorize(cp, a), fb = uniform_factorize(cp, b);
      CHECK(almost_equal(cp, a, b).is_holds() == shape_equal(cp, fa, fb).is_holds());
      const MorphismFamily back = decompose(fa);
      CHECK(almost_equal(cp, a, back).is_holds());
      CHECK(shape_equal(cp, uniform_factorize(cp, back), fa).is_holds());
    }
  }

  TEST_CASE("shape type on D") {
    const Category a = tsupport::arrow();
    const ProReflectivePair ab(a, a.objects(), {});
    const Obj A = a.parse_object("A"), B = a.parse_object("B");
    CHECK(same_shape_on_D(ab, A, A, omega()).is_holds());
    CHECK(same_shape_on_D(ab, A, B, omega()).is_fails());
    const Category i = iso_pair();
    CHECK(same_shape_on_D(ProReflectivePair(i, i.objects(), {}), i.parse_object("P"), i.parse_object("Q"), IndexPoset::chain(2)).is_holds());
    CHECK_THROWS_AS(same_shape_on_D(tsupport::cone_pair(), 0, 2, omega()), Error);

    Rng rng(67);
    for (int k = 0; k < 100; ++k) {
      const Category c = tsupport::random_category(rng, 3, 8);
      const ProReflectivePair pair(c, c.objects(), {});
      const Obj p = rng.pick(c.objects()), q = rng.pick(c.objects());
      const IndexPoset J = rng.coin() ? omega() : IndexPoset::chain(2);
      CHECK(same_shape_on_D(pair, p, q, J).is_holds() == tsupport::brute_isomorphic(c, p, q));
    }
  }

  TEST_CASE("lifting a cone into the expansion of Y") {
    const ProReflectivePair cp = tsupport::cone_pair();
    const Category& c = cp.category();
    const Obj X = c.parse_object("X"), Y = c.parse_object("Y");
    const IndexPoset J = IndexPoset::chain(2);
    const Expansion& ey = cp.expansion(Y);

    // H from the identity of Y returns the identity.
    std::vector<JShapeMorphism> from_id;
    for (const auto& mu : ey.system.index().elements()) from_id.push_back(shape_functor(cp, ey.at(mu), J));
    const JShapeMorphism id = lift_system_morphism(cp, Y, Y, from_id);
    CHECK(verify_lift(cp, id, from_id).is_holds());
    CHECK(shape_equal(cp, id, identity_shape(cp, Y, J)).is_holds());

    Rng rng(71);
    for (int k = 0; k < 30; ++k) {
      const MorphismFamily phis = tsupport::random_family(rng, c, {J, 0}, X, c.parse_object("P"));
      const JShapeMorphism h = uniform_factorize(cp, phis);
      const std::vector<JShapeMorphism> cone{h, h};
      const JShapeMorphism f = lift_system_morphism(cp, X, Y, cone);
      REQUIRE(verify_lift(cp, f, cone).is_holds());
      // Exhaustive uniqueness among all J-morphisms between the expansions.
      int solutions = 0;
      tsupport::for_each_jmorphism(cp.expansion(X).system, ey.system, J, [&](const JMorphism& g) {
        const JShapeMorphism cand = shape_morphism(cp, X, Y, g);
        if (verify_lift(cp, cand, cone).is_holds()) {
          ++solutions;
          CHECK(shape_equal(cp, cand, f).is_holds());
        }
      });
      CHECK(solutions >= 1);
    }

    // Incompatible cone.
    const JShapeMorphism r = uniform_factorize(cp, MorphismFamily::constant(c, J, c.parse_morphism("rX")));
    const JShapeMorphism t = uniform_factorize(cp, MorphismFamily::constant(c, J, c.parse_morphism("tX")));
    CHECK_THROWS_AS(lift_system_morphism(cp, X, Y, {r, t}), Error);
  }
}
