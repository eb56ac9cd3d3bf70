#include <doctest.h>

#include "support.hpp"

using namespace procat;
using tsupport::Rng;

namespace {

IndexPoset v_poset() { return IndexPoset::finite({"a", "b", "c"}, {{0, 2}, {1, 2}}); }

// Every increasing g >= f from a finite poset into a finite poset.
std::vector<std::vector<std::size_t>> increasing_majorants(const IndexPoset& dom, const IndexPoset& cod,
                                                           const std::vector<std::size_t>& f) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> g(dom.size(), 0);
  for (;;) {
    bool ok = true;
    for (std::size_t a = 0; a < dom.size() && ok; ++a) {
      ok = cod.leq(cod.elements()[f[a]], cod.elements()[g[a]]);
      for (std::size_t b = 0; b < dom.size() && ok; ++b)
        if (dom.leq(dom.elements()[a], dom.elements()[b])) ok = cod.leq(cod.elements()[g[a]], cod.elements()[g[b]]);
    }
    if (ok) out.push_back(g);
    std::size_t k = 0;
    while (k < g.size() && ++g[k] == cod.size()) g[k++] = 0;
    if (k == g.size()) return out;
  }
}

}  // namespace

TEST_SUITE("order") {
  TEST_CASE("finite chain properties") {
    const auto r = poset_properties(IndexPoset::chain(3));
    CHECK(r.partial_order.is_holds());
    CHECK(r.directed.is_holds());
    CHECK(r.has_max.is_holds());
    CHECK(r.has_max.evidence.at("max") == "3");
    CHECK(r.well_ordered.is_holds());
    CHECK(r.cofinite.is_holds());
  }

  TEST_CASE("antichain is not directed") {
    const auto r = poset_properties(IndexPoset::finite({"a", "b"}, {}));
    CHECK(r.partial_order.is_holds());
    REQUIRE(r.directed.is_fails());
    CHECK(r.directed.evidence.at("pair") == Json::array({"a", "b"}));
  }

  TEST_CASE("omega axioms") {
    const auto r = poset_properties(IndexPoset::omega());
    CHECK(r.directed.is_holds());
    CHECK(r.has_max.is_fails());
    CHECK(r.cofinite.is_holds());
    CHECK(r.well_ordered.is_holds());
  }

  TEST_CASE("malformed relation is rejected") {
    CHECK_THROWS_AS(IndexPoset::finite_raw({"a"}, {{0, 3}}), Error);
  }

  TEST_CASE("upper bounds") {
    const auto c3 = IndexPoset::chain(3);
    const Elem s1[] = {c3.parse("1"), c3.parse("3")};
    CHECK(c3.label(c3.upper_bound(s1)) == "3");
    const auto w = IndexPoset::omega();
    const Elem s2[] = {Elem(4), Elem(7)};
    CHECK(w.upper_bound(s2) == Elem(7));
    const auto k = IndexPoset::product(w, w);
    const Elem s3[] = {k.parse("(1,5)"), k.parse("(4,2)")};
    const Elem ub = k.upper_bound(s3);
    CHECK(k.label(ub) == "(4,5)");
    // Minimality: no other upper bound in a box around it lies below it.
    for (const auto& e : k.sample(8))
      if (k.leq(s3[0], e) && k.leq(s3[1], e)) CHECK(k.leq(ub, e));
  }

  TEST_CASE("increasing majorant on V") {
    const auto M = v_poset();
    const auto L = IndexPoset::chain(3);
    const auto f = IndexFunction::table(M, L, {L.parse("2"), L.parse("1"), L.parse("1")});
    const auto g = increasing_majorant(f);
    CHECK(L.label(g(M.parse("a"))) == "2");
    CHECK(L.label(g(M.parse("b"))) == "1");
    CHECK(L.label(g(M.parse("c"))) == "2");
    // Oracle: the result is a pointwise-minimal element among all increasing majorants.
    const auto all = increasing_majorants(M, L, {1, 0, 0});
    const std::vector<std::size_t> got{1, 0, 1};
    CHECK(std::find(all.begin(), all.end(), got) != all.end());
    for (const auto& h : all) {
      bool below = true, differs = false;
      for (std::size_t k = 0; k < 3; ++k) {
        below = below && h[k] <= got[k];
        differs = differs || h[k] != got[k];
      }
      CHECK_FALSE((below && differs));
    }
  }

  TEST_CASE("majorant of an increasing map is itself") {
    const auto L = IndexPoset::chain(3);
    const auto M = v_poset();
    const auto f = IndexFunction::table(M, L, {L.parse("1"), L.parse("2"), L.parse("3")});
    const auto g = increasing_majorant(f);
    for (const auto& e : M.elements()) CHECK(g(e) == f(e));
  }

  TEST_CASE("majorant over omega is the running maximum") {
    const auto w = IndexPoset::omega();
    const auto f = IndexFunction::rule(w, w, [](const Elem& n) { return n.c[0] % 2 == 0 ? n : Elem(0); }, "even-or-zero");
    const auto g = increasing_majorant(f);
    std::int64_t runmax = 0;
    for (std::int64_t n = 0; n < 50; ++n) {
      runmax = std::max(runmax, n % 2 == 0 ? n : 0);
      CHECK(g(Elem(n)) == Elem(runmax));
    }
    CHECK(g(Elem(5)) == Elem(4));
  }

  TEST_CASE("random majorants are increasing and dominate") {
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
      const auto M = tsupport::random_directed(rng, 5);
      const auto L = tsupport::random_directed(rng, 4);
      std::vector<Elem> vals;
      for (std::size_t k = 0; k < M.size(); ++k) vals.push_back(rng.pick(L.elements()));
      const auto f = IndexFunction::table(M, L, vals);
      const auto g = increasing_majorant(f);
      for (const auto& a : M.elements()) {
        CHECK(L.leq(f(a), g(a)));
        for (const auto& b : M.elements())
          if (M.leq(a, b)) CHECK(L.leq(g(a), g(b)));
      }
    }
  }

  TEST_CASE("cofinal increasing maps") {
    const auto w = IndexPoset::omega();
    const auto k = IndexPoset::product(w, w);
    CHECK(check_cofinal_increasing(IndexFunction::identity(w)).is_holds());
    CHECK(check_cofinal_increasing(IndexFunction::affine(w, k, {{0, 1, 0}, {0, 1, 0}})).is_holds());
    const Verdict bad = check_cofinal_increasing(IndexFunction::affine(w, k, {{0, 1, 0}, {-1, 0, 0}}));
    REQUIRE(bad.is_fails());
    CHECK(bad.evidence.dump().find("(0,1)") != std::string::npos);
  }

  TEST_CASE("minimal thresholds") {
    const auto w = IndexPoset::omega();
    const auto k = IndexPoset::product(w, w);
    const auto diag = IndexFunction::affine(w, k, {{0, 1, 0}, {0, 1, 0}});
    const auto twice = IndexFunction::affine(w, k, {{0, 2, 0}, {0, 1, 0}});
    auto scan = [&](const IndexFunction& phi, const Elem& e) {
      for (std::int64_t n = 0;; ++n)
        if (k.leq(e, phi(Elem(n)))) return Elem(n);
    };
    CHECK(min_threshold(diag, k.parse("(2,5)")) == Elem(5));
    CHECK(min_threshold(diag, k.parse("(0,0)")) == Elem(0));
    CHECK(min_threshold(twice, k.parse("(3,1)")) == Elem(2));
    for (const auto& e : k.sample(7)) {
      CHECK(min_threshold(diag, e) == scan(diag, e));
      CHECK(min_threshold(twice, e) == scan(twice, e));
    }
  }

  TEST_CASE("minimal thresholds are monotone") {
    const auto w = IndexPoset::omega();
    const auto k = IndexPoset::product(w, w);
    const auto phi = IndexFunction::affine(w, k, {{0, 2, 1}, {0, 1, 0}});
    const auto pts = k.sample(6);
    for (const auto& a : pts)
      for (const auto& b : pts)
        if (k.leq(a, b)) CHECK(min_threshold(phi, a).c[0] <= min_threshold(phi, b).c[0]);
  }

  TEST_CASE("finite directed posets have a maximum") {
    Rng rng(5);
    for (int t = 0; t < 200; ++t) CHECK(poset_properties(tsupport::random_directed(rng, 6)).has_max.is_holds());
  }

  TEST_CASE("validator agrees with the brute-force law checker") {
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
      const auto raw = tsupport::random_raw_poset(rng);
      const auto laws = tsupport::brute_poset_laws(raw);
      const auto r = poset_properties(tsupport::to_poset(raw));
      CHECK(r.partial_order.is_holds() == laws.partial_order);
      if (laws.partial_order) CHECK(r.directed.is_holds() == laws.directed);
    }
  }

  TEST_CASE("labels round trip") {
    const auto w = IndexPoset::omega();
    const auto k = IndexPoset::product(w, IndexPoset::chain(2));
    for (const auto& e : k.sample(4)) CHECK(k.parse(k.label(e)) == e);
    CHECK(k.describe() == "product(omega,{1,2})");
  }
}
