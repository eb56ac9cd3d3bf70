// Shared test helpers: fixture loading, random instance generators and
// brute-force oracles written independently of the library's decision code.
// The oracles only use primitive accessors (composition, bonds, family values).
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "procat/cli.hpp"

namespace tsupport {

using namespace procat;

inline std::filesystem::path fixtures() { return PROCAT_FIXTURES_DIR; }
inline Category arrow() { return load_category_file(fixtures() / "arrow.cat", "Arrow"); }
inline Category z2() { return load_category_file(fixtures() / "z2.cat", "Z2"); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {  // inclusive
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen_); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v.at(static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(v.size()) - 1)));
  }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Categories

// Concrete category of maps between small finite sets: objects are set sizes,
// morphisms are functions closed under composition.  Always a valid category.
struct ConcreteCat {
  std::vector<int> sizes;
  struct Map {
    int src, tgt;
    std::vector<int> f;
    bool operator==(const Map&) const = default;
  };
  std::vector<Map> maps;

  RawCategory raw() const {
    RawCategory r;
    for (std::size_t i = 0; i < sizes.size(); ++i) r.objects.push_back("O" + std::to_string(i));
    auto name = [](std::size_t k) { return "m" + std::to_string(k); };
    for (std::size_t k = 0; k < maps.size(); ++k)
      r.morphisms.push_back({name(k), r.objects[static_cast<std::size_t>(maps[k].src)], r.objects[static_cast<std::size_t>(maps[k].tgt)]});
    for (std::size_t k = 0; k < maps.size(); ++k) {
      const auto& m = maps[k];
      bool id = m.src == m.tgt;
      for (std::size_t x = 0; x < m.f.size() && id; ++x) id = m.f[x] == static_cast<int>(x);
      if (id) r.identities.emplace_back(r.objects[static_cast<std::size_t>(m.src)], name(k));
    }
    for (std::size_t g = 0; g < maps.size(); ++g)
      for (std::size_t f = 0; f < maps.size(); ++f) {
        if (maps[f].tgt != maps[g].src) continue;
        Map h{maps[f].src, maps[g].tgt, {}};
        for (int x : maps[f].f) h.f.push_back(maps[g].f[static_cast<std::size_t>(x)]);
        const auto it = std::find(maps.begin(), maps.end(), h);
        r.composites.push_back({name(g), name(f), name(static_cast<std::size_t>(it - maps.begin()))});
      }
    return r;
  }
};

// Random concrete category with at most `max_objects` objects and
// `max_morphisms` morphisms; nullopt when the closure got too big.
inline std::optional<ConcreteCat> random_concrete(Rng& rng, int max_objects = 3, std::size_t max_morphisms = 8) {
  ConcreteCat c;
  const int n = static_cast<int>(rng.uniform(1, max_objects));
  for (int i = 0; i < n; ++i) c.sizes.push_back(static_cast<int>(rng.uniform(1, 3)));
  for (int i = 0; i < n; ++i) {
    ConcreteCat::Map id{i, i, {}};
    for (int x = 0; x < c.sizes[static_cast<std::size_t>(i)]; ++x) id.f.push_back(x);
    c.maps.push_back(id);
  }
  const int gens = static_cast<int>(rng.uniform(0, 3));
  for (int g = 0; g < gens; ++g) {
    ConcreteCat::Map m{static_cast<int>(rng.uniform(0, n - 1)), static_cast<int>(rng.uniform(0, n - 1)), {}};
    for (int x = 0; x < c.sizes[static_cast<std::size_t>(m.src)]; ++x)
      m.f.push_back(static_cast<int>(rng.uniform(0, c.sizes[static_cast<std::size_t>(m.tgt)] - 1)));
    if (std::find(c.maps.begin(), c.maps.end(), m) == c.maps.end()) c.maps.push_back(m);
  }
  for (bool grew = true; grew;) {
    grew = false;
    const auto snapshot = c.maps;
    for (const auto& g : snapshot)
      for (const auto& f : snapshot) {
        if (f.tgt != g.src) continue;
        ConcreteCat::Map h{f.src, g.tgt, {}};
        for (int x : f.f) h.f.push_back(g.f[static_cast<std::size_t>(x)]);
        if (std::find(c.maps.begin(), c.maps.end(), h) == c.maps.end()) {
          c.maps.push_back(h);
          grew = true;
          if (c.maps.size() > max_morphisms) return std::nullopt;
        }
      }
  }
  return c;
}

inline Category random_category(Rng& rng, int max_objects = 3, std::size_t max_morphisms = 8) {
  for (;;)
    if (auto c = random_concrete(rng, max_objects, max_morphisms)) return validate_category(c->raw(), "R");
}

// Damages a raw table in one of several ways; the result may still be valid.
inline RawCategory mutate(RawCategory r, Rng& rng) {
  if (r.morphisms.empty()) return r;
  auto any_name = [&] { return rng.pick(r.morphisms).name; };
  switch (rng.uniform(0, 4)) {
    case 0:
      if (!r.composites.empty()) r.composites.erase(r.composites.begin() + rng.uniform(0, static_cast<std::int64_t>(r.composites.size()) - 1));
      break;
    case 1:
      if (!r.composites.empty()) r.composites[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(r.composites.size()) - 1))].h = any_name();
      break;
    case 2:
      if (!r.identities.empty()) r.identities[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(r.identities.size()) - 1))].second = any_name();
      break;
    case 3:
      r.composites.push_back({any_name(), any_name(), any_name()});
      break;
    default:
      if (!r.identities.empty()) r.identities.pop_back();
      break;
  }
  return r;
}

// Law checker over string tables, independent of category_violations.
inline bool raw_category_valid(const RawCategory& r) {
  std::set<std::string> objs(r.objects.begin(), r.objects.end());
  if (objs.size() != r.objects.size()) return false;
  std::map<std::string, std::pair<std::string, std::string>> type;
  for (const auto& a : r.morphisms) {
    if (!objs.count(a.src) || !objs.count(a.tgt)) return false;
    if (!type.emplace(a.name, std::make_pair(a.src, a.tgt)).second) return false;
  }
  std::map<std::string, std::set<std::string>> ids;
  for (const auto& [o, f] : r.identities) {
    if (!objs.count(o) || !type.count(f)) return false;
    if (type[f] != std::make_pair(o, o)) return false;
    ids[o].insert(f);
  }
  for (const auto& o : r.objects)
    if (ids[o].size() != 1) return false;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> table;
  for (const auto& e : r.composites) {
    if (!type.count(e.g) || !type.count(e.f) || !type.count(e.h)) return false;
    if (type[e.f].second != type[e.g].first) return false;
    if (type[e.h] != std::make_pair(type[e.f].first, type[e.g].second)) return false;
    table[{e.g, e.f}].insert(e.h);
  }
  for (const auto& [g, tg] : type)
    for (const auto& [f, tf] : type) {
      if (tf.second != tg.first) continue;
      auto it = table.find({g, f});
      if (it == table.end() || it->second.size() != 1) return false;
    }
  auto comp = [&](const std::string& g, const std::string& f) { return *table.at({g, f}).begin(); };
  for (const auto& [f, tf] : type) {
    if (comp(*ids[tf.second].begin(), f) != f) return false;
    if (comp(f, *ids[tf.first].begin()) != f) return false;
  }
  for (const auto& [h, th] : type)
    for (const auto& [g, tg] : type) {
      if (tg.second != th.first) continue;
      for (const auto& [f, tf] : type) {
        if (tf.second != tg.first) continue;
        if (comp(comp(h, g), f) != comp(h, comp(g, f))) return false;
      }
    }
  return true;
}

// ---------------------------------------------------------------------------
// Posets

struct RawPoset {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> rel;
};

inline RawPoset random_raw_poset(Rng& rng, std::size_t max_n = 6) {
  RawPoset p;
  p.n = static_cast<std::size_t>(rng.uniform(1, static_cast<std::int64_t>(max_n)));
  const bool closed = rng.coin(0.6);
  std::vector<std::vector<bool>> m(p.n, std::vector<bool>(p.n, false));
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = 0; j < p.n; ++j)
      if (closed ? (i < j && rng.coin(0.4)) : rng.coin(0.3)) m[i][j] = true;
  if (closed) {
    if (rng.coin(0.6))  // a top element keeps many instances directed
      for (std::size_t i = 0; i < p.n; ++i) m[i][p.n - 1] = true;
    for (std::size_t i = 0; i < p.n; ++i) m[i][i] = true;
    for (std::size_t k = 0; k < p.n; ++k)
      for (std::size_t i = 0; i < p.n; ++i)
        for (std::size_t j = 0; j < p.n; ++j)
          if (m[i][k] && m[k][j]) m[i][j] = true;
    if (rng.coin(0.2)) m[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(p.n) - 1))][0] = !m[0][0];
  }
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = 0; j < p.n; ++j)
      if (m[i][j]) p.rel.emplace_back(i, j);
  return p;
}

inline IndexPoset to_poset(const RawPoset& p) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < p.n; ++i) labels.push_back("e" + std::to_string(i));
  return IndexPoset::finite_raw(labels, p.rel);
}

struct PosetLaws {
  bool partial_order = false;
  bool directed = false;
};

inline PosetLaws brute_poset_laws(const RawPoset& p) {
  std::set<std::pair<std::size_t, std::size_t>> r(p.rel.begin(), p.rel.end());
  auto le = [&](std::size_t a, std::size_t b) { return r.count({a, b}) > 0; };
  PosetLaws out{true, true};
  for (std::size_t a = 0; a < p.n; ++a) {
    if (!le(a, a)) out.partial_order = false;
    for (std::size_t b = 0; b < p.n; ++b) {
      if (a != b && le(a, b) && le(b, a)) out.partial_order = false;
      for (std::size_t c = 0; c < p.n; ++c)
        if (le(a, b) && le(b, c) && !le(a, c)) out.partial_order = false;
      bool bound = false;
      for (std::size_t c = 0; c < p.n; ++c) bound = bound || (le(a, c) && le(b, c));
      if (!bound) out.directed = false;
    }
  }
  return out;
}

// Random finite directed poset (a partial order) on at most max_n elements.
inline IndexPoset random_directed(Rng& rng, std::size_t max_n = 4) {
  for (;;) {
    RawPoset p = random_raw_poset(rng, max_n);
    const PosetLaws l = brute_poset_laws(p);
    if (l.partial_order && l.directed) return to_poset(p);
  }
}

// ---------------------------------------------------------------------------
// J domains for the oracles: a finite poset, or omega with families that are
// constant from `stable` on (Step and Constant families).

struct JDomain {
  IndexPoset poset;
  std::int64_t stable = 0;  // omega only

  std::vector<Elem> points() const {
    if (poset.is_finite()) return poset.elements();
    std::vector<Elem> v;
    for (std::int64_t k = 0; k <= stable; ++k) v.emplace_back(k);
    return v;
  }
  bool leq(const Elem& a, const Elem& b) const { return poset.leq(a, b); }
  // There is j with pred(j') for every j' >= j.
  bool eventually(const std::function<bool(const Elem&)>& pred) const {
    const auto pts = points();
    for (const auto& j : pts) {
      bool all = true;
      for (const auto& jp : pts)
        if (leq(j, jp) && !pred(jp)) {
          all = false;
          break;
        }
      if (all) return true;
    }
    return false;
  }
  bool always(const std::function<bool(const Elem&)>& pred) const {
    for (const auto& j : points())
      if (!pred(j)) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Systems and J-morphisms

inline std::vector<IndexPoset> small_index_posets() {
  static const std::vector<IndexPoset> v = {IndexPoset::singleton(), IndexPoset::chain(2), IndexPoset::chain(3),
                                            IndexPoset::finite({"a", "b", "c"}, {{0, 2}, {1, 2}})};
  return v;
}

// Random valid system: objects chosen freely, bonds on covering pairs, the
// rest composed.  nullopt when some needed hom-set is empty.
inline std::optional<InverseSystem> random_system(Rng& rng, const Category& c, const IndexPoset& L) {
  const auto objs = c.objects();
  for (int attempt = 0; attempt < 20; ++attempt) {
    RawSystem raw{c, L, {}, {}};
    for (std::size_t k = 0; k < L.size(); ++k) raw.objects.push_back(rng.pick(objs));
    bool ok = true;
    for (const auto& [lo, hi] : covering_pairs(L, 0)) {
      const auto& hom = c.hom(raw.objects[L.index_of(hi)], raw.objects[L.index_of(lo)]);
      if (hom.empty()) {
        ok = false;
        break;
      }
      raw.bonds.push_back({lo, hi, rng.pick(hom)});
    }
    if (!ok) continue;
    try {
      return validate_system(raw);
    } catch (const SystemError&) {
    }
  }
  return std::nullopt;
}

inline MorphismFamily random_family(Rng& rng, const Category& c, const JDomain& J, Obj a, Obj b, bool constant_only = false) {
  const auto& hom = c.hom(a, b);
  if (constant_only || rng.coin(0.4)) return MorphismFamily::constant(c, J.poset, rng.pick(hom));
  if (J.poset.is_finite()) {
    std::vector<Morphism> vals;
    for (std::size_t k = 0; k < J.poset.size(); ++k) vals.push_back(rng.pick(hom));
    return MorphismFamily::table(c, J.poset, vals);
  }
  std::vector<MorphismFamily::Piece> pieces{{Elem(0), rng.pick(hom)}};
  std::int64_t t = 0;
  const int extra = static_cast<int>(rng.uniform(1, 2));
  for (int k = 0; k < extra && t < J.stable; ++k) {
    t = rng.uniform(t + 1, J.stable);
    pieces.push_back({Elem(t), rng.pick(hom)});
  }
  return MorphismFamily::step(c, J.poset, pieces);
}

// Random candidate (f, f_mu^j): X -> Y; not necessarily a J-morphism.
inline std::optional<JMorphism> random_candidate(Rng& rng, const InverseSystem& X, const InverseSystem& Y, const JDomain& J,
                                                 bool identity_index = false, bool constant_only = false) {
  const auto& c = X.category();
  const auto& L = X.index();
  const auto& M = Y.index();
  std::vector<Elem> idx;
  for (const auto& mu : M.elements()) idx.push_back(identity_index ? mu : rng.pick(L.elements()));
  std::vector<MorphismFamily> fams;
  for (std::size_t k = 0; k < M.size(); ++k) {
    const Obj a = X.object(idx[k]), b = Y.object(M.elements()[k]);
    if (c.hom(a, b).empty()) return std::nullopt;
    fams.push_back(random_family(rng, c, J, a, b, constant_only));
  }
  const IndexFunction fn = identity_index ? IndexFunction::identity(M) : IndexFunction::table(M, L, idx);
  return JMorphism(X, Y, J.poset, fn, FamilyMap::table(M, fams));
}

// J-morphism condition by direct quantifier evaluation.
inline bool brute_is_jmorphism(const JMorphism& f, const JDomain& J) {
  const auto& c = f.category();
  const auto& X = f.source();
  const auto& Y = f.target();
  const auto& L = X.index();
  const auto& M = Y.index();
  for (const auto& mu : M.elements())
    for (const auto& mup : M.elements()) {
      if (!M.leq(mu, mup)) continue;
      const Elem a = f.index_fn()(mu), b = f.index_fn()(mup);
      bool found = false;
      for (const auto& lam : L.elements()) {
        if (!L.leq(a, lam) || !L.leq(b, lam)) continue;
        found = J.eventually([&](const Elem& j) {
          return c.compose(f.family(mu).at(j), X.bond(a, lam)) ==
                 c.compose(c.compose(Y.bond(mu, mup), f.family(mup).at(j)), X.bond(b, lam));
        });
        if (found) break;
      }
      if (!found) return false;
    }
  return true;
}

inline bool brute_is_commutative(const JMorphism& f, const JDomain& J) {
  const auto& c = f.category();
  const auto& X = f.source();
  const auto& Y = f.target();
  const auto& L = X.index();
  const auto& M = Y.index();
  for (const auto& mu : M.elements())
    for (const auto& mup : M.elements()) {
      if (!M.leq(mu, mup)) continue;
      const Elem a = f.index_fn()(mu), b = f.index_fn()(mup);
      bool found = false;
      for (const auto& lam : L.elements()) {
        if (!L.leq(a, lam) || !L.leq(b, lam)) continue;
        found = J.always([&](const Elem& j) {
          return c.compose(f.family(mu).at(j), X.bond(a, lam)) ==
                 c.compose(c.compose(Y.bond(mu, mup), f.family(mup).at(j)), X.bond(b, lam));
        });
        if (found) break;
      }
      if (!found) return false;
    }
  return true;
}

// Equivalence of J-morphisms by direct quantifier evaluation.
inline bool brute_equivalent(const JMorphism& a, const JMorphism& b, const JDomain& J) {
  const auto& c = a.category();
  const auto& X = a.source();
  const auto& L = X.index();
  for (const auto& mu : a.target().index().elements()) {
    const Elem la = a.index_fn()(mu), lb = b.index_fn()(mu);
    bool found = false;
    for (const auto& lam : L.elements()) {
      if (!L.leq(la, lam) || !L.leq(lb, lam)) continue;
      found = J.eventually([&](const Elem& j) {
        return c.compose(a.family(mu).at(j), X.bond(la, lam)) == c.compose(b.family(mu).at(j), X.bond(lb, lam));
      });
      if (found) break;
    }
    if (!found) return false;
  }
  return true;
}

// Simple: increasing index and lambda = f(mu') witnesses every pair.
inline bool brute_is_simple(const JMorphism& f, const JDomain& J) {
  const auto& c = f.category();
  const auto& X = f.source();
  const auto& Y = f.target();
  const auto& L = X.index();
  const auto& M = Y.index();
  for (const auto& mu : M.elements())
    for (const auto& mup : M.elements()) {
      if (!M.leq(mu, mup)) continue;
      const Elem a = f.index_fn()(mu), b = f.index_fn()(mup);
      if (!L.leq(a, b)) return false;
      const bool ok = J.eventually([&](const Elem& j) {
        return c.compose(f.family(mu).at(j), X.bond(a, b)) == c.compose(Y.bond(mu, mup), f.family(mup).at(j));
      });
      if (!ok) return false;
    }
  return true;
}

// Random J-morphism X -> Y by rejection against the brute-force condition.
inline std::optional<JMorphism> random_jmorphism(Rng& rng, const InverseSystem& X, const InverseSystem& Y, const JDomain& J,
                                                 int attempts = 40, bool identity_index = false) {
  for (int k = 0; k < attempts; ++k) {
    auto f = random_candidate(rng, X, Y, J, identity_index);
    if (f && brute_is_jmorphism(*f, J)) return f;
  }
  return std::nullopt;
}

// All inv-C morphisms X -> Y over finite index posets (constant families over
// J = {1}).
inline std::vector<JMorphism> all_pro_morphisms(const InverseSystem& X, const InverseSystem& Y) {
  const auto& c = X.category();
  const auto& L = X.index();
  const auto& M = Y.index();
  const IndexPoset one = IndexPoset::singleton();
  const JDomain J{one, 0};
  std::vector<JMorphism> out;
  std::vector<std::size_t> idx(M.size(), 0);
  for (;;) {
    std::vector<Elem> vals;
    for (std::size_t k = 0; k < M.size(); ++k) vals.push_back(L.elements()[idx[k]]);
    // components
    std::vector<std::vector<Morphism>> homs;
    for (std::size_t k = 0; k < M.size(); ++k) homs.push_back(c.hom(X.object(vals[k]), Y.object(M.elements()[k])));
    const bool empty = std::any_of(homs.begin(), homs.end(), [](const auto& h) { return h.empty(); });
    if (!empty) {
      std::vector<std::size_t> pick(M.size(), 0);
      for (;;) {
        std::vector<MorphismFamily> fams;
        for (std::size_t k = 0; k < M.size(); ++k) fams.push_back(MorphismFamily::constant(c, one, homs[k][pick[k]]));
        JMorphism f(X, Y, one, IndexFunction::table(M, L, vals), FamilyMap::table(M, fams));
        if (brute_is_jmorphism(f, J)) out.push_back(f);
        std::size_t k = 0;
        while (k < M.size() && ++pick[k] == homs[k].size()) pick[k++] = 0;
        if (k == M.size()) break;
      }
    }
    std::size_t k = 0;
    while (k < M.size() && ++idx[k] == L.size()) idx[k++] = 0;
    if (k == M.size()) break;
  }
  return out;
}

// Number of classes of a list under an equivalence predicate.
inline std::size_t count_classes(const std::vector<JMorphism>& v, const std::function<bool(const JMorphism&, const JMorphism&)>& eq) {
  std::vector<std::size_t> reps;
  for (std::size_t k = 0; k < v.size(); ++k) {
    bool seen = false;
    for (std::size_t r : reps)
      if (eq(v[r], v[k])) {
        seen = true;
        break;
      }
    if (!seen) reps.push_back(k);
  }
  return reps.size();
}

// Constant-family J-morphism built from an inv-C morphism over J = {1}.
inline JMorphism constant_lift(const JMorphism& pro, const IndexPoset& J) {
  const auto& M = pro.target().index();
  std::vector<MorphismFamily> fams;
  for (const auto& mu : M.elements())
    fams.push_back(MorphismFamily::constant(pro.category(), J, pro.family(mu).at(IndexPoset::singleton().elements().front())));
  return JMorphism(pro.source(), pro.target(), J, pro.index_fn(), FamilyMap::table(M, fams));
}

// Every J-morphism X -> Y over a finite J: all index functions, all family
// tables.  Calls `visit` on each one passing the brute-force condition.
inline void for_each_jmorphism(const InverseSystem& X, const InverseSystem& Y, const IndexPoset& J,
                               const std::function<void(const JMorphism&)>& visit) {
  const auto& c = X.category();
  const auto& L = X.index();
  const auto& M = Y.index();
  const JDomain dom{J, 0};
  const std::size_t nj = J.size();
  std::vector<std::size_t> idx(M.size(), 0);
  for (;;) {
    std::vector<Elem> vals;
    std::vector<std::vector<Morphism>> homs;
    for (std::size_t k = 0; k < M.size(); ++k) {
      vals.push_back(L.elements()[idx[k]]);
      homs.push_back(c.hom(X.object(vals.back()), Y.object(M.elements()[k])));
    }
    if (std::none_of(homs.begin(), homs.end(), [](const auto& h) { return h.empty(); })) {
      // One digit per (mu, j).
      std::vector<std::size_t> pick(M.size() * nj, 0);
      for (;;) {
        std::vector<MorphismFamily> fams;
        for (std::size_t k = 0; k < M.size(); ++k) {
          std::vector<Morphism> t;
          for (std::size_t q = 0; q < nj; ++q) t.push_back(homs[k][pick[k * nj + q]]);
          fams.push_back(MorphismFamily::table(c, J, t));
        }
        JMorphism f(X, Y, J, IndexFunction::table(M, L, vals), FamilyMap::table(M, fams));
        if (brute_is_jmorphism(f, dom)) visit(f);
        std::size_t d = 0;
        while (d < pick.size() && ++pick[d] == homs[d / nj].size()) pick[d++] = 0;
        if (d == pick.size()) break;
      }
    }
    std::size_t k = 0;
    while (k < M.size() && ++idx[k] == L.size()) idx[k++] = 0;
    if (k == M.size()) break;
  }
}

// g . f from the raw data: index g's then f's, families pointwise in j.
inline JMorphism brute_compose(const JMorphism& g, const JMorphism& f, const JDomain& J) {
  const auto& c = f.category();
  const auto& N = g.target().index();
  const auto& L = f.source().index();
  std::vector<Elem> idx;
  std::vector<MorphismFamily> fams;
  for (const auto& nu : N.elements()) {
    idx.push_back(f.index_fn()(g.index_fn()(nu)));
    std::vector<Morphism> t;
    for (const auto& j : J.points()) t.push_back(c.compose(g.family(nu).at(j), f.family(g.index_fn()(nu)).at(j)));
    fams.push_back(MorphismFamily::table(c, J.poset, t));
  }
  return JMorphism(f.source(), g.target(), J.poset, IndexFunction::table(N, L, idx), FamilyMap::table(N, fams));
}

inline JMorphism brute_identity(const InverseSystem& X, const JDomain& J) {
  const auto& c = X.category();
  const auto& L = X.index();
  std::vector<MorphismFamily> fams;
  for (const auto& l : L.elements()) fams.push_back(MorphismFamily::constant(c, J.poset, c.identity(X.object(l))));
  return JMorphism(X, X, J.poset, IndexFunction::table(L, L, L.elements()), FamilyMap::table(L, fams));
}

// Invertibility in pro^J-C over a finite J by exhaustive search of Y -> X.
inline bool brute_invertible(const JMorphism& f) {
  const JDomain J{f.J(), 0};
  const JMorphism idX = brute_identity(f.source(), J), idY = brute_identity(f.target(), J);
  bool found = false;
  for_each_jmorphism(f.target(), f.source(), f.J(), [&](const JMorphism& g) {
    if (!found && brute_equivalent(brute_compose(g, f, J), idX, J) && brute_equivalent(brute_compose(f, g, J), idY, J))
      found = true;
  });
  return found;
}

// ---------------------------------------------------------------------------
// Shape fixtures

// X, Y, P with s an involution of P, r, t: X -> P and Y -> P swapped by s.
inline Category cone_category() {
  return validate_category(parse_category_text(
      "objects X Y P; morphism idX : X -> X; morphism idY : Y -> Y; morphism e : P -> P; morphism s : P -> P;"
      "morphism rX : X -> P; morphism tX : X -> P; morphism rY : Y -> P; morphism tY : Y -> P;"
      "identity X = idX; identity Y = idY; identity P = e; compose s . s = e;"
      "compose s . rX = tX; compose s . tX = rX; compose s . rY = tY; compose s . tY = rY").raw);
}

// D = {P}; X expands to [P] through rX, Y to the constant 2-chain at P
// through (rY, rY).
inline ProReflectivePair cone_pair() {
  const Category c = cone_category();
  const Obj X = c.parse_object("X"), Y = c.parse_object("Y"), P = c.parse_object("P");
  const Expansion ex{X, InverseSystem::rudimentary(c, P), {c.parse_morphism("rX")}};
  const Expansion ey{Y, InverseSystem::constant(c, IndexPoset::chain(2), P), {c.parse_morphism("rY"), c.parse_morphism("rY")}};
  return ProReflectivePair(c, {P}, {{X, ex}, {Y, ey}});
}

// Expansion law check by direct quantifier evaluation.
inline bool brute_is_expansion(const Category& c, const std::vector<Obj>& D, const Expansion& e) {
  const auto& L = e.system.index();
  auto in_d = [&](Obj o) { return std::find(D.begin(), D.end(), o) != D.end(); };
  for (const auto& l : L.elements()) {
    if (!in_d(e.system.object(l)) || e.at(l).src != e.object || e.at(l).tgt != e.system.object(l)) return false;
    for (const auto& lp : L.elements())
      if (L.leq(l, lp) && !(c.compose(e.system.bond(l, lp), e.at(lp)) == e.at(l))) return false;
  }
  for (Obj P : D)
    for (const auto& h : c.hom(e.object, P)) {
      bool factors = false;
      for (const auto& l : L.elements())
        for (const auto& g : c.hom(e.system.object(l), P))
          if (c.compose(g, e.at(l)) == h) factors = true;
      if (!factors) return false;
    }
  for (const auto& l : L.elements())
    for (Obj P : D)
      for (const auto& g : c.hom(e.system.object(l), P))
        for (const auto& g2 : c.hom(e.system.object(l), P)) {
          if (!(c.compose(g, e.at(l)) == c.compose(g2, e.at(l)))) continue;
          bool merged = false;
          for (const auto& lp : L.elements())
            if (L.leq(l, lp) && c.compose(g, e.system.bond(l, lp)) == c.compose(g2, e.system.bond(l, lp))) merged = true;
          if (!merged) return false;
        }
  return true;
}

// ---------------------------------------------------------------------------
// CLI fixtures

inline std::filesystem::path demo_workspace() { return fixtures() / "demo.ws"; }

struct FixtureCommand {
  std::string command;
  std::vector<std::string> args;
  int exit_code;
  std::int64_t horizon = 64;
  std::optional<std::string> gamma;
};

// Every documented command on the fixture workspace; tower maps whose stages
// outgrow the modulus limit at the default horizon run at 24.
inline const std::vector<FixtureCommand>& fixture_commands() {
  static const std::vector<FixtureCommand> v = {
      {"validate", {}, 0},
      {"check-jmorphism", {"fu"}, 0},
      {"check-jmorphism", {"tshift"}, 0, 24},
      {"compose", {"fu", "ida"}, 0},
      {"equivalent", {"fu", "fu"}, 0},
      {"equivalent", {"tid", "tshift"}, 0, 24},
      {"simplify", {"gu"}, 0},
      {"simplify", {"tshift"}, 0, 24},
      {"reindex", {"gu"}, 0},
      {"reindex", {"tshift"}, 0, 24},
      {"is-iso", {"fu"}, 1},
      {"is-iso", {"sigma"}, 0},
      {"is-iso", {"fv"}, 0},
      {"is-iso", {"tshift"}, 0, 24},
      {"hom-classes", {"XA", "YB", "J2"}, 0},
      {"transfer", {"tid", "diag"}, 0},
      {"collapse", {"fu"}, 0},
      {"shape-eq", {"A", "B"}, 1},
      {"shape-eq", {"A", "A"}, 0},
      {"expand-check", {"A"}, 0},
      {"lift", {"H"}, 0},
      {"tower-iso", {"tid"}, 0, 64, "j"},
      {"tower-iso", {"tshift"}, 0, 24, "j"},
  };
  return v;
}

inline CliOptions options_for(const FixtureCommand& fc) {
  CliOptions o;
  o.json = true;
  o.limits.horizon = fc.horizon;
  o.gamma = fc.gamma;
  return o;
}

// An isomorphism P -> Q in a finite category, by exhaustive scan.
inline bool brute_isomorphic(const Category& c, Obj p, Obj q) {
  for (const auto& u : c.hom(p, q))
    for (const auto& v : c.hom(q, p))
      if (c.compose(v, u) == c.identity(p) && c.compose(u, v) == c.identity(q)) return true;
  return false;
}

}  // namespace tsupport
