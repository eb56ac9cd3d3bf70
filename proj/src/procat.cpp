#include "procat/procat.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace procat {

namespace {

constexpr std::int64_t kPrefixSide = 16;
constexpr std::int64_t kWindowLimit = 1 << 16;

std::int64_t prefix_side(const Limits& limits) { return std::min(limits.horizon, kPrefixSide); }

std::vector<Elem> scope_of(const IndexPoset& p, std::int64_t side) {
  return p.is_finite() ? p.elements() : p.sample(side);
}

Json scope_json(const IndexPoset& p, std::int64_t side) {
  if (p.is_finite()) return "all indices";
  return "indices below " + std::to_string(side);
}

bool is_level(const JMorphism& f, std::int64_t side) {
  const auto& g = f.index_fn();
  if (!g.domain().same_as(g.codomain())) return false;
  if (g.is_identity()) return true;
  for (const auto& e : scope_of(g.domain(), side))
    if (!(g(e) == e)) return false;
  return g.domain().is_finite();
}

MorphismFamily values_family(const Category& c, const IndexPoset& j, const std::vector<Morphism>& prefix,
                             const std::vector<Morphism>& cycle) {
  if (j.is_finite()) return MorphismFamily::table(c, j, prefix);
  return MorphismFamily::periodic(c, j, prefix, cycle);
}

// Memoized evaluation of an index function on its domain.
IndexFunction memoized(const IndexFunction& f) {
  if (f.domain().is_finite()) return f;
  struct Cache {
    std::mutex mu;
    std::map<Elem, Elem> values;
  };
  auto cache = std::make_shared<Cache>();
  return IndexFunction::rule(
      f.domain(), f.codomain(),
      [f, cache](const Elem& e) {
        {
          std::lock_guard<std::mutex> lock(cache->mu);
          auto it = cache->values.find(e);
          if (it != cache->values.end()) return it->second;
        }
        Elem v = f(e);
        std::lock_guard<std::mutex> lock(cache->mu);
        cache->values.emplace(e, v);
        return v;
      },
      f.describe());
}

// ---------------------------------------------------------------------------
// Stage search shared by morita_check and tower_iso_dual.

struct StageProblem {
  Obj from, to;
  MorphismFamily fm, fmp;
  Morphism q, p;
};

StageProblem stage_problem(const JMorphism& f, const Elem& mu, const Elem& mup) {
  const auto& X = f.source();
  const auto& Y = f.target();
  const Elem lm = f.index_fn()(mu), lmp = f.index_fn()(mup);
  return {Y.object(mup), X.object(lm), f.family(mu), f.family(mup), Y.bond(mu, mup), X.bond(lm, lmp)};
}

std::optional<Morphism> solve_stage(const Category& c, const StageProblem& s, const Elem& j) {
  return c.first_solution(s.from, s.to,
                          {{s.fm.at(j), std::nullopt, s.q}, {std::nullopt, s.fmp.at(j), s.p}});
}

struct Window {
  std::int64_t start = 0, period = 1;
};

Window omega_window(const MorphismFamily& a, const MorphismFamily& b) {
  const auto pa = a.periodicity(), pb = b.periodicity();
  if (!pa || !pb) throw Error("Inconclusive", "families are not eventually periodic");
  Window w{std::max(pa->start, pb->start), lcm64(pa->period, pb->period)};
  if (w.start + w.period > kWindowLimit) throw Error("BudgetExceeded", "periodicity window exceeds " + std::to_string(kWindowLimit));
  return w;
}

// The stage (mu, mu') when some threshold exists, else nullopt.
std::optional<MoritaStage> try_stage(const JMorphism& f, const Elem& mu, const Elem& mup) {
  const auto& L = f.source().index();
  if (!L.leq(f.index_fn()(mu), f.index_fn()(mup))) return std::nullopt;
  const auto& J = f.J();
  const auto& C = f.category();
  const StageProblem s = stage_problem(f, mu, mup);
  MoritaStage st;
  st.lambda = mu;
  st.lambda_prime = mup;
  if (J.is_finite()) {
    std::vector<std::optional<Morphism>> sol;
    for (const auto& e : J.elements()) sol.push_back(solve_stage(C, s, e));
    for (const auto& t : J.linear_extension()) {
      bool ok = true;
      for (const auto& e : J.elements())
        if (J.leq(t, e) && !sol[J.index_of(e)]) ok = false;
      if (!ok) continue;
      st.j_threshold = t;
      for (const auto& e : J.elements())
        if (J.leq(t, e)) st.h_table.emplace_back(e, *sol[J.index_of(e)]);
      return st;
    }
    return std::nullopt;
  }
  if (J.kind() != IndexPoset::Kind::Omega) throw Error("Unsupported", "stage search supports finite J and omega");
  const Window w = omega_window(s.fm, s.fmp);
  std::vector<std::optional<Morphism>> sol;
  for (std::int64_t j = 0; j < w.start + w.period; ++j) sol.push_back(solve_stage(C, s, Elem(j)));
  for (std::int64_t j = w.start; j < w.start + w.period; ++j)
    if (!sol[static_cast<std::size_t>(j)]) return std::nullopt;
  std::int64_t t = w.start;
  while (t > 0 && sol[static_cast<std::size_t>(t - 1)]) --t;
  st.j_threshold = Elem(t);
  for (std::int64_t j = t; j < w.start; ++j) st.h_prefix.push_back(*sol[static_cast<std::size_t>(j)]);
  for (std::int64_t j = w.start; j < w.start + w.period; ++j) st.h_cycle.push_back(*sol[static_cast<std::size_t>(j)]);
  st.cycle_start = w.start;
  return st;
}

// Morphisms of hom(Y_mu', X_f(mu)) satisfying both triangles at the top of J
// (or anywhere in the omega window).
Json candidates_json(const JMorphism& f, const Elem& mu, const Elem& mup) {
  const auto& C = f.category();
  const auto& J = f.J();
  const StageProblem s = stage_problem(f, mu, mup);
  std::vector<Elem> js;
  if (J.is_finite()) {
    js.push_back(J.linear_extension().back());
  } else {
    const Window w = omega_window(s.fm, s.fmp);
    for (std::int64_t j = w.start; j < w.start + w.period; ++j) js.push_back(Elem(j));
  }
  Json out = Json::array();
  if (C.hom_size(s.from, s.to) > 4096) return out;
  for (const auto& h : C.hom(s.from, s.to)) {
    for (const auto& j : js) {
      if (C.compose(s.fm.at(j), h) == s.q && C.compose(h, s.fmp.at(j)) == s.p) {
        out.push_back(C.morphism_name(h));
        break;
      }
    }
  }
  return out;
}

Json stage_json(const MoritaStage& st, const JMorphism& f) {
  const auto& M = f.target().index();
  const auto& J = f.J();
  const auto& C = f.category();
  Json j = {{"lambda", M.label(st.lambda)}, {"lambda_prime", M.label(st.lambda_prime)},
            {"j_threshold", J.label(st.j_threshold)}};
  if (J.is_finite()) {
    Json t = Json::object();
    for (const auto& [e, h] : st.h_table) t[J.label(e)] = C.morphism_name(h);
    j["h_table"] = t;
  } else {
    Json pre = Json::array(), cyc = Json::array();
    for (const auto& h : st.h_prefix) pre.push_back(C.morphism_name(h));
    for (const auto& h : st.h_cycle) cyc.push_back(C.morphism_name(h));
    j["h_table"] = {{"prefix", pre}, {"cycle_start", st.cycle_start}, {"cycle", cyc}};
  }
  return j;
}

MoritaResult stage_search(const JMorphism& f, const Limits& limits) {
  const auto& M = f.target().index();
  const std::int64_t side = prefix_side(limits);
  MoritaWitness w;
  Outcome acc = Outcome::Holds;
  Json pending;
  for (const auto& mu : scope_of(M, side)) {
    bool found = false, cut = false;
    std::int64_t tried = 0;
    try {
      for (const auto& mup : M.ascent(mu, M.is_finite() ? 0 : limits.horizon)) {
        ++tried;
        if (auto st = try_stage(f, mu, mup)) {
          w.stages.push_back(*st);
          found = true;
          break;
        }
      }
    } catch (const Error& e) {
      if (e.kind() != "Overflow") throw;
      cut = true;
    }
    if (found) continue;
    if (M.is_finite() && !cut) {
      const Elem top = M.linear_extension().back();
      return {Verdict::fails({{"lambda", M.label(mu)},
                              {"lambda_prime_tried", tried},
                              {"h_candidates", candidates_json(f, mu, top)}}),
              std::nullopt};
    }
    acc = Outcome::Inconclusive;
    if (pending.is_null()) pending = {{"lambda", M.label(mu)}, {"lambda_prime_tried", tried}};
  }
  if (acc == Outcome::Inconclusive)
    return {Verdict::inconclusive(limits.horizon, {{"scope", scope_json(M, side)}, {"unresolved", pending}}), std::nullopt};
  Json ev = w.to_json(LevelPair{f});
  ev["scope"] = scope_json(M, side);
  return {Verdict::holds(ev), w};
}

// ---------------------------------------------------------------------------
// hom_classes

std::vector<MorphismFamily> family_options(const Category& c, const IndexPoset& j, Obj a, Obj b,
                                           const HomClassOptions& opt, std::int64_t budget) {
  const auto& hom = c.hom(a, b);
  std::vector<MorphismFamily> out;
  if (hom.empty()) return out;
  if (!opt.exhaustive_families) {
    for (const auto& m : hom) out.push_back(MorphismFamily::constant(c, j, m));
    return out;
  }
  const std::size_t slots = j.is_finite() ? j.size() : static_cast<std::size_t>(opt.step_horizon) + 1;
  double count = std::pow(static_cast<double>(hom.size()), static_cast<double>(slots));
  if (count > static_cast<double>(budget))
    throw Error("BudgetExceeded", "family enumeration needs " + std::to_string(static_cast<long long>(count)) +
                                      " candidates, budget " + std::to_string(budget));
  std::vector<std::size_t> digit(slots, 0);
  while (true) {
    std::vector<Morphism> vals;
    for (auto d : digit) vals.push_back(hom[d]);
    if (j.is_finite()) {
      out.push_back(MorphismFamily::table(c, j, vals));
    } else {
      std::vector<MorphismFamily::Piece> pieces;
      for (std::size_t k = 0; k < vals.size(); ++k) pieces.push_back({Elem(static_cast<std::int64_t>(k)), vals[k]});
      out.push_back(MorphismFamily::step(c, j, pieces));
    }
    std::size_t k = 0;
    while (k < slots && ++digit[k] == hom.size()) digit[k++] = 0;
    if (k == slots) break;
  }
  return out;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  std::size_t add() {
    parent.push_back(parent.size());
    return parent.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// ---------------------------------------------------------------------------
// reindex over omega: N = {(a, b) : w(b) <= a} enumerated by Cantor pairing of
// (b, a - w(b)).

struct OmegaNodes {
  IndexFunction w;
  std::pair<std::int64_t, std::int64_t> decode(std::int64_t id) const {
    auto s = static_cast<std::int64_t>((std::sqrt(8.0 * static_cast<double>(id) + 1.0) - 1.0) / 2.0);
    while (s * (s + 1) / 2 > id) --s;
    while ((s + 1) * (s + 2) / 2 <= id) ++s;
    const std::int64_t d = id - s * (s + 1) / 2;
    const std::int64_t b = s - d;
    return {w(Elem(b)).c[0] + d, b};
  }
  std::int64_t encode(std::int64_t a, std::int64_t b) const {
    const std::int64_t d = a - w(Elem(b)).c[0];
    if (d < 0) throw Error("PosetError", "pair outside the reindexing poset");
    const std::int64_t s = b + d;
    return s * (s + 1) / 2 + d;
  }
};

}  // namespace

// ---------------------------------------------------------------------------

LevelPair LevelPair::from(JMorphism f) {
  if (!f.source().index().same_as(f.target().index()) || !is_level(f, kPrefixSide))
    throw Error("NotLevel", "morphism does not have the identity index function");
  return LevelPair{std::move(f)};
}

std::vector<JMorphismClass> hom_classes(const InverseSystem& x, const InverseSystem& y, const IndexPoset& j,
                                        const Limits& limits, const HomClassOptions& options) {
  const auto& C = x.category();
  if (!C.is_finite()) throw Error("Unsupported", "hom_classes needs a finite category");
  if (!C.same_as(y.category())) throw Error("TypeMismatch", "systems live in different categories");
  const auto& L = x.index();
  const auto& M = y.index();
  if (!L.is_finite() || !M.is_finite()) throw Error("Unsupported", "hom_classes needs finite index posets");
  if (!j.is_finite() && j.kind() != IndexPoset::Kind::Omega) throw Error("Unsupported", "hom_classes needs finite J or omega");
  if (options.exhaustive_families && !j.is_finite() && options.step_horizon > limits.horizon)
    throw Error("BudgetExceeded", "step thresholds exceed the horizon");

  const auto& lam = L.elements();
  const auto& mus = M.elements();
  // options[l][m]: families X_l -> Y_m
  std::vector<std::vector<std::vector<MorphismFamily>>> opts(lam.size());
  for (std::size_t a = 0; a < lam.size(); ++a)
    for (std::size_t b = 0; b < mus.size(); ++b)
      opts[a].push_back(family_options(C, j, x.object(lam[a]), y.object(mus[b]), options, limits.budget));

  // Size of the search space.
  double total = 0;
  {
    std::vector<std::size_t> pick(mus.size(), 0);
    double fns = std::pow(static_cast<double>(lam.size()), static_cast<double>(mus.size()));
    if (fns > static_cast<double>(limits.budget))
      throw Error("BudgetExceeded", "search space has " + std::to_string(static_cast<long long>(fns)) +
                                        " index functions, budget " + std::to_string(limits.budget));
    while (true) {
      double prod = 1;
      for (std::size_t b = 0; b < mus.size(); ++b) prod *= static_cast<double>(opts[pick[b]][b].size());
      total += prod;
      if (total > static_cast<double>(limits.budget))
        throw Error("BudgetExceeded", "search space exceeds the budget of " + std::to_string(limits.budget) + " candidates");
      std::size_t k = 0;
      while (k < mus.size() && ++pick[k] == lam.size()) pick[k++] = 0;
      if (k == mus.size()) break;
    }
  }

  std::vector<JMorphismClass> classes;
  std::vector<std::size_t> class_node;
  DisjointSets sets;
  std::vector<std::size_t> index_pick(mus.size(), 0);
  while (true) {
    std::vector<Elem> values;
    for (auto p : index_pick) values.push_back(lam[p]);
    const IndexFunction fn = IndexFunction::table(M, L, values);
    std::vector<std::size_t> fam_pick(mus.size(), 0);
    bool any = true;
    for (std::size_t b = 0; b < mus.size(); ++b) any = any && !opts[index_pick[b]][b].empty();
    while (any) {
      std::vector<MorphismFamily> fams;
      for (std::size_t b = 0; b < mus.size(); ++b) fams.push_back(opts[index_pick[b]][b][fam_pick[b]]);
      JMorphism cand(x, y, j, fn, FamilyMap::table(M, fams));
      const Outcome ok = jmorphism_condition(cand, limits);
      if (ok == Outcome::Inconclusive) throw Error("Inconclusive", "candidate validity undecided within the horizon");
      if (ok == Outcome::Holds) {
        const std::size_t node = sets.add();
        bool placed = false;
        for (std::size_t c = 0; c < classes.size(); ++c) {
          const Verdict v = equivalent_jmorphisms(cand, classes[c].representative, limits);
          if (v.is_inconclusive()) throw Error("Inconclusive", "equivalence undecided within the horizon");
          if (v.is_holds()) {
            sets.unite(node, class_node[c]);
            ++classes[c].members;
            placed = true;
            break;
          }
        }
        if (!placed) {
          classes.push_back({cand, 1});
          class_node.push_back(node);
        }
      }
      std::size_t k = 0;
      while (k < mus.size() && ++fam_pick[k] == opts[index_pick[k]][k].size()) fam_pick[k++] = 0;
      if (k == mus.size()) break;
    }
    std::size_t k = 0;
    while (k < mus.size() && ++index_pick[k] == lam.size()) index_pick[k++] = 0;
    if (k == mus.size()) break;
  }
  return classes;
}

Verdict inverse_by_search(const JMorphism& f, const Limits& limits, const HomClassOptions& options) {
  const auto classes = hom_classes(f.target(), f.source(), f.J(), limits, options);
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const Verdict v = verify_inverse(f, classes[k].representative, limits);
    if (v.is_holds())
      return Verdict::holds({{"class", k}, {"classes", classes.size()}, {"inverse", classes[k].representative.to_json()}});
  }
  return Verdict::fails({{"classes", classes.size()}});
}

Verdict verify_inverse(const JMorphism& f, const JMorphism& g, const Limits& limits) {
  const Verdict left = equivalent_jmorphisms(compose_jmorphisms(g, f), identity_jmorphism(f.source(), f.J()), limits);
  const Verdict right = equivalent_jmorphisms(compose_jmorphisms(f, g), identity_jmorphism(f.target(), f.J()), limits);
  Json ev = {{"g_after_f", to_json(left)}, {"f_after_g", to_json(right)}};
  switch (meet(left.outcome, right.outcome)) {
    case Outcome::Holds: return Verdict::holds(ev);
    case Outcome::Fails: return Verdict::fails(ev);
    default: return Verdict::inconclusive(limits.horizon, ev);
  }
}

// ---------------------------------------------------------------------------

Json ReindexResult::to_json() const {
  const auto& N = x_level.index();
  Json nodes = Json::array();
  for (const auto& e : scope_of(N, 8)) nodes.push_back(N.label(e));
  return {{"N", N.describe()},
          {"nodes", nodes},
          {"level", level.to_json()},
          {"level_ok", procat::to_json(level_ok)},
          {"square", procat::to_json(square)},
          {"i_iso", procat::to_json(i_iso)},
          {"j_iso", procat::to_json(j_iso)}};
}

ReindexResult reindex(const JMorphism& f, const Limits& limits) {
  const auto& X = f.source();
  const auto& Y = f.target();
  const auto& A = X.index();
  const auto& B = Y.index();
  const auto& C = f.category();
  const auto& J = f.J();
  const bool finite = A.is_finite() && B.is_finite();
  const bool omega = A.kind() == IndexPoset::Kind::Omega && B.kind() == IndexPoset::Kind::Omega;
  if (!finite && !omega) throw Error("Unsupported", "reindex supports finite index posets or omega on both sides");

  const SimplifyResult s = simplify(f, limits);
  if (s.simple.is_inconclusive() || s.equivalent.is_inconclusive())
    throw Error("Inconclusive", "simplification undecided within the horizon");
  if (!s.simple.is_holds() || !s.equivalent.is_holds())
    throw Error("HypothesisViolation", "simplified representative is not simple or not equivalent");
  const JMorphism w = s.morphism;
  const IndexFunction wf = memoized(w.index_fn());

  IndexPoset N;
  std::function<std::pair<Elem, Elem>(const Elem&)> parts;  // nu -> (alpha, beta)
  std::function<Elem(const Elem&, const Elem&)> node;       // (alpha, beta) -> nu
  std::vector<Elem> n_elems;
  if (finite) {
    std::vector<std::pair<Elem, Elem>> pairs;
    std::vector<std::string> labels;
    for (const auto& a : A.elements())
      for (const auto& b : B.elements())
        if (A.leq(wf(b), a)) {
          pairs.emplace_back(a, b);
          labels.push_back("(" + A.label(a) + "," + B.label(b) + ")");
        }
    std::vector<std::pair<std::size_t, std::size_t>> rel;
    for (std::size_t u = 0; u < pairs.size(); ++u)
      for (std::size_t v = 0; v < pairs.size(); ++v)
        if (u != v && A.leq(pairs[u].first, pairs[v].first) && B.leq(pairs[u].second, pairs[v].second)) rel.emplace_back(u, v);
    N = IndexPoset::finite(labels, rel);
    n_elems = N.elements();
    parts = [pairs, N](const Elem& nu) { return pairs[N.index_of(nu)]; };
    node = [pairs, n_elems](const Elem& a, const Elem& b) {
      for (std::size_t u = 0; u < pairs.size(); ++u)
        if (pairs[u].first == a && pairs[u].second == b) return n_elems[u];
      throw Error("PosetError", "pair outside the reindexing poset");
    };
  } else {
    auto nodes = std::make_shared<OmegaNodes>(OmegaNodes{wf});
    IndexPoset::RuleOps ops;
    ops.name = "reindex";
    ops.leq = [nodes](std::int64_t u, std::int64_t v) {
      auto [a, b] = nodes->decode(u);
      auto [c, d] = nodes->decode(v);
      return a <= c && b <= d;
    };
    ops.join = [nodes](std::int64_t u, std::int64_t v) {
      auto [a, b] = nodes->decode(u);
      auto [c, d] = nodes->decode(v);
      return nodes->encode(std::max(a, c), std::max(b, d));
    };
    ops.below = [nodes](std::int64_t u) {
      auto [a, b] = nodes->decode(u);
      std::vector<std::int64_t> out;
      for (std::int64_t bb = 0; bb <= b; ++bb)
        for (std::int64_t aa = nodes->w(Elem(bb)).c[0]; aa <= a; ++aa) out.push_back(nodes->encode(aa, bb));
      return out;
    };
    ops.label = [nodes](std::int64_t u) {
      auto [a, b] = nodes->decode(u);
      return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
    };
    N = IndexPoset::rule(ops);
    parts = [nodes](const Elem& nu) {
      auto [a, b] = nodes->decode(nu.c[0]);
      return std::pair<Elem, Elem>{Elem(a), Elem(b)};
    };
    node = [nodes](const Elem& a, const Elem& b) { return Elem(nodes->encode(a.c[0], b.c[0])); };
  }

  auto make_map = [&](const IndexPoset& dom, std::function<MorphismFamily(const Elem&)> gen, std::string desc) {
    if (dom.is_finite()) {
      std::vector<MorphismFamily> fams;
      for (const auto& e : dom.elements()) fams.push_back(gen(e));
      return FamilyMap::table(dom, std::move(fams));
    }
    return FamilyMap::generator(dom, std::move(gen), std::move(desc));
  };
  auto make_fn = [&](const IndexPoset& dom, const IndexPoset& cod, std::function<Elem(const Elem&)> fn, std::string desc) {
    if (dom.is_finite()) {
      std::vector<Elem> vals;
      for (const auto& e : dom.elements()) vals.push_back(fn(e));
      return IndexFunction::table(dom, cod, std::move(vals));
    }
    return IndexFunction::rule(dom, cod, std::move(fn), std::move(desc));
  };

  InverseSystem Xp, Yp;
  if (finite) {
    std::vector<Obj> xo, yo;
    std::vector<Morphism> xb, yb;
    for (const auto& u : n_elems) {
      xo.push_back(X.object(parts(u).first));
      yo.push_back(Y.object(parts(u).second));
    }
    for (const auto& u : n_elems)
      for (const auto& v : n_elems) {
        const auto [a, b] = parts(u);
        const auto [c, d] = parts(v);
        const bool rel = N.leq(u, v);
        xb.push_back(rel ? X.bond(a, c) : C.identity(X.object(a)));
        yb.push_back(rel ? Y.bond(b, d) : C.identity(Y.object(b)));
      }
    Xp = InverseSystem::from_table(C, N, xo, xb);
    Yp = InverseSystem::from_table(C, N, yo, yb);
  } else {
    Xp = InverseSystem::rule(
        C, N, [X, parts](const Elem& u) { return X.object(parts(u).first); },
        [X, parts](const Elem& u, const Elem& v) { return X.bond(parts(u).first, parts(v).first); }, "X reindexed");
    Yp = InverseSystem::rule(
        C, N, [Y, parts](const Elem& u) { return Y.object(parts(u).second); },
        [Y, parts](const Elem& u, const Elem& v) { return Y.bond(parts(u).second, parts(v).second); }, "Y reindexed");
  }

  const JMorphism level(Xp, Yp, J, IndexFunction::identity(N),
                        make_map(
                            N,
                            [w, wf, X, parts](const Elem& u) {
                              const auto [a, b] = parts(u);
                              return w.family(b).after(X.bond(wf(b), a));
                            },
                            "components of the simple representative"));
  const JMorphism i(X, Xp, J, make_fn(N, A, [parts](const Elem& u) { return parts(u).first; }, "nu -> alpha"),
                    make_map(
                        N, [X, C, J, parts](const Elem& u) { return MorphismFamily::constant(C, J, C.identity(X.object(parts(u).first))); },
                        "const(id)"));
  const JMorphism jm(Y, Yp, J, make_fn(N, B, [parts](const Elem& u) { return parts(u).second; }, "nu -> beta"),
                     make_map(
                         N, [Y, C, J, parts](const Elem& u) { return MorphismFamily::constant(C, J, C.identity(Y.object(parts(u).second))); },
                         "const(id)"));
  const Elem b0 = finite ? B.linear_extension().front() : Elem(0);
  const Elem wb0 = wf(b0);
  const JMorphism i_inv(Xp, X, J, make_fn(A, N, [A, b0, wb0, node](const Elem& a) { return node(A.join(a, wb0), b0); }, "alpha -> (alpha v w(b0), b0)"),
                        make_map(
                            A, [A, X, C, J, wb0](const Elem& a) { return MorphismFamily::constant(C, J, X.bond(a, A.join(a, wb0))); },
                            "const(bond)"));
  const JMorphism j_inv(Yp, Y, J, make_fn(B, N, [wf, node](const Elem& b) { return node(wf(b), b); }, "beta -> (w(beta), beta)"),
                        make_map(
                            B, [Y, C, J](const Elem& b) { return MorphismFamily::constant(C, J, C.identity(Y.object(b))); },
                            "const(id)"));

  const JCheck lc = check_jmorphism(level, limits);
  Verdict level_ok = lc.level ? Verdict::holds(to_json(lc))
                              : Verdict{lc.verdict.is_inconclusive() ? Outcome::Inconclusive : Outcome::Fails, to_json(lc), limits.horizon};
  Verdict square = equivalent_jmorphisms(compose_jmorphisms(jm, f), compose_jmorphisms(level, i), limits);
  Verdict i_iso = verify_inverse(i, i_inv, limits);
  Verdict j_iso = verify_inverse(jm, j_inv, limits);
  return {Xp, Yp, level, i, jm, i_inv, j_inv, level_ok, square, i_iso, j_iso};
}

// ---------------------------------------------------------------------------

Morphism MoritaStage::h_at(const IndexPoset& j, const Elem& at) const {
  if (j.is_finite()) {
    const Elem key = j.leq(j_threshold, at) ? at : j_threshold;
    for (const auto& [e, h] : h_table)
      if (e == key) return h;
    throw Error("Malformed", "witness table misses " + j.label(key));
  }
  const std::int64_t t = j_threshold.c[0];
  const std::int64_t n = std::max(at.c[0], t);
  if (n < cycle_start) return h_prefix.at(static_cast<std::size_t>(n - t));
  return h_cycle.at(static_cast<std::size_t>((n - cycle_start) % static_cast<std::int64_t>(h_cycle.size())));
}

Json MoritaWitness::to_json(const LevelPair& f) const {
  Json out = Json::array();
  for (const auto& st : stages) out.push_back(stage_json(st, f.morphism));
  return {{"stages", out}};
}

MoritaResult morita_check(const LevelPair& f, const Limits& limits) {
  return stage_search(f.morphism, limits);
}

namespace {

MorphismFamily stage_family(const JMorphism& f, const MoritaStage& st) {
  const auto& J = f.J();
  const auto& C = f.category();
  if (J.is_finite()) {
    std::vector<Morphism> vals;
    for (const auto& e : J.elements()) vals.push_back(st.h_at(J, e));
    return MorphismFamily::table(C, J, vals);
  }
  std::vector<Morphism> prefix;
  const std::int64_t t = st.j_threshold.c[0];
  for (std::int64_t k = 0; k < t; ++k) prefix.push_back(st.h_at(J, st.j_threshold));
  prefix.insert(prefix.end(), st.h_prefix.begin(), st.h_prefix.end());
  return values_family(C, J, prefix, st.h_cycle);
}

bool stage_still_valid(const JMorphism& f, const MoritaStage& st) {
  const auto& J = f.J();
  const auto& C = f.category();
  const StageProblem s = stage_problem(f, st.lambda, st.lambda_prime);
  auto ok = [&](const Elem& j) {
    const Morphism h = st.h_at(J, j);
    return h.src == s.from && h.tgt == s.to && C.compose(s.fm.at(j), h) == s.q && C.compose(h, s.fmp.at(j)) == s.p;
  };
  if (J.is_finite()) {
    for (const auto& e : J.elements())
      if (J.leq(st.j_threshold, e) && !ok(e)) return false;
    return true;
  }
  const std::int64_t end = st.cycle_start + static_cast<std::int64_t>(st.h_cycle.size());
  for (std::int64_t j = st.j_threshold.c[0]; j < end; ++j)
    if (!ok(Elem(j))) return false;
  const Window w = omega_window(s.fm, s.fmp);
  return st.cycle_start >= w.start && static_cast<std::int64_t>(st.h_cycle.size()) % w.period == 0;
}

}  // namespace

MoritaWitness parse_witness(const LevelPair& lp, const Json& j) {
  const JMorphism& f = lp.morphism;
  const auto& M = f.target().index();
  const auto& J = f.J();
  const auto& C = f.category();
  MoritaWitness w;
  for (const auto& s : j.at("stages")) {
    MoritaStage st;
    st.lambda = M.parse(s.at("lambda").get<std::string>());
    st.lambda_prime = M.parse(s.at("lambda_prime").get<std::string>());
    st.j_threshold = J.parse(s.at("j_threshold").get<std::string>());
    const StageProblem p = stage_problem(f, st.lambda, st.lambda_prime);
    auto morph = [&](const Json& name) { return C.parse_morphism(name.get<std::string>(), p.from, p.to); };
    const Json& t = s.at("h_table");
    if (J.is_finite()) {
      for (const auto& [k, v] : t.items()) st.h_table.emplace_back(J.parse(k), morph(v));
    } else {
      for (const auto& v : t.at("prefix")) st.h_prefix.push_back(morph(v));
      for (const auto& v : t.at("cycle")) st.h_cycle.push_back(morph(v));
      st.cycle_start = t.at("cycle_start").get<std::int64_t>();
      if (st.h_cycle.empty()) throw Error("Malformed", "witness cycle is empty");
    }
    w.stages.push_back(std::move(st));
  }
  return w;
}

Verdict verify_witness(const LevelPair& lp, const MoritaWitness& w) {
  const JMorphism& f = lp.morphism;
  const auto& M = f.target().index();
  for (const auto& st : w.stages) {
    if (!M.leq(st.lambda, st.lambda_prime)) return Verdict::fails({{"lambda", M.label(st.lambda)}, {"reason", "lambda' below lambda"}});
    if (!stage_still_valid(f, st)) return Verdict::fails({{"lambda", M.label(st.lambda)}, {"reason", "triangles fail"}});
  }
  if (M.is_finite())
    for (const auto& lam : M.elements())
      if (std::none_of(w.stages.begin(), w.stages.end(), [&](const MoritaStage& s) { return s.lambda == lam; }))
        return Verdict::fails({{"lambda", M.label(lam)}, {"reason", "no stage recorded"}});
  return Verdict::holds({{"stages", w.stages.size()}});
}

JMorphism morita_inverse(const LevelPair& lp, const MoritaWitness& w, const Limits& limits) {
  const JMorphism& f = lp.morphism;
  const auto& X = f.source();
  const auto& Y = f.target();
  const auto& L = X.index();
  for (const auto& st : w.stages)
    if (!stage_still_valid(f, st)) throw Error("StaleWitness", "witness stage at " + L.label(st.lambda) + " no longer satisfies both triangles");

  IndexFunction idx;
  FamilyMap fams;
  if (L.is_finite()) {
    std::vector<Elem> vals;
    std::vector<MorphismFamily> fs;
    for (const auto& lam : L.elements()) {
      auto it = std::find_if(w.stages.begin(), w.stages.end(), [&](const MoritaStage& s) { return s.lambda == lam; });
      if (it == w.stages.end()) throw Error("StaleWitness", "witness has no stage at " + L.label(lam));
      vals.push_back(it->lambda_prime);
      fs.push_back(stage_family(f, *it));
    }
    idx = IndexFunction::table(L, L, vals);
    fams = FamilyMap::table(L, fs);
  } else {
    struct Cache {
      std::mutex mu;
      std::map<Elem, MoritaStage> stages;
    };
    auto cache = std::make_shared<Cache>();
    for (const auto& st : w.stages) cache->stages.emplace(st.lambda, st);
    const std::int64_t horizon = limits.horizon;
    auto stage = [f, cache, horizon](const Elem& lam) {
      {
        std::lock_guard<std::mutex> lock(cache->mu);
        auto it = cache->stages.find(lam);
        if (it != cache->stages.end()) return it->second;
      }
      for (const auto& mup : f.target().index().ascent(lam, horizon)) {
        if (auto st = try_stage(f, lam, mup)) {
          std::lock_guard<std::mutex> lock(cache->mu);
          return cache->stages.emplace(lam, *st).first->second;
        }
      }
      throw Error("Inconclusive", "no stage found within the horizon at " + f.target().index().label(lam));
    };
    idx = IndexFunction::rule(L, L, [stage](const Elem& lam) { return stage(lam).lambda_prime; }, "lambda -> lambda'");
    fams = FamilyMap::generator(L, [f, stage](const Elem& lam) { return stage_family(f, stage(lam)); }, "stage inverses");
  }
  JMorphism g(Y, X, f.J(), idx, fams);
  const Verdict v = verify_inverse(f, g, limits);
  if (v.is_fails()) throw Error("StaleWitness", "constructed inverse fails verification: " + v.evidence.dump());
  return g;
}

// ---------------------------------------------------------------------------

namespace {

// Invertibility of f^j for every j past some threshold.
Outcome eventually_invertible(const MorphismFamily& fam) {
  const auto& J = fam.index();
  const auto& C = fam.category();
  if (J.is_finite()) return find_inverse(C, fam.at(J.linear_extension().back())) ? Outcome::Holds : Outcome::Fails;
  if (J.kind() != IndexPoset::Kind::Omega) return Outcome::Inconclusive;
  const auto p = fam.periodicity();
  if (!p || p->start + p->period > kWindowLimit) return Outcome::Inconclusive;
  for (std::int64_t j = p->start; j < p->start + p->period; ++j)
    if (!find_inverse(C, fam.at(Elem(j)))) return Outcome::Fails;
  return Outcome::Holds;
}

}  // namespace

Verdict cofinal_iso_check(const LevelPair& lp, const Limits& limits) {
  const JMorphism& f = lp.morphism;
  const auto& L = f.target().index();
  const std::int64_t side = prefix_side(limits);
  Json subset = Json::array();
  std::vector<std::pair<Elem, Outcome>> status;
  for (const auto& lam : scope_of(L, side)) {
    Outcome o = Outcome::Inconclusive;
    try {
      o = eventually_invertible(f.family(lam));
    } catch (const Error& e) {
      if (e.kind() != "Overflow") throw;
    }
    status.emplace_back(lam, o);
    if (o == Outcome::Holds) subset.push_back(L.label(lam));
  }
  if (L.is_finite()) {
    const Elem top = L.linear_extension().back();
    Outcome o = Outcome::Inconclusive;
    for (const auto& [lam, s] : status)
      if (lam == top) o = s;
    if (o == Outcome::Holds) return Verdict::holds({{"cofinal_subset", subset}, {"scope", "all indices"}});
    if (o == Outcome::Fails)
      return Verdict::fails({{"lambda", L.label(top)}, {"reason", "component at the top index is not eventually invertible"},
                             {"invertible_at", subset}});
    return Verdict::inconclusive(limits.horizon, {{"lambda", L.label(top)}});
  }
  for (const auto& [lam, s] : status)
    if (s == Outcome::Holds && lam.c[0] >= side / 2)
      return Verdict::holds({{"cofinal_subset", subset}, {"scope", scope_json(L, side)}});
  return Verdict::inconclusive(limits.horizon, {{"invertible_at", subset}, {"scope", scope_json(L, side)}});
}

// ---------------------------------------------------------------------------

std::string Radius::describe() const {
  return std::to_string(mul) + "*j+" + std::to_string(add);
}

Verdict tower_iso_check(const JMorphism& f, const Radius& gamma, const Limits& limits) {
  const auto& X = f.source();
  const auto& Y = f.target();
  const auto& C = f.category();
  const bool omega = X.index().kind() == IndexPoset::Kind::Omega && Y.index().kind() == IndexPoset::Kind::Omega &&
                     f.J().kind() == IndexPoset::Kind::Omega;
  if (!omega) throw Error("Unsupported", "tower_iso_check needs towers over omega and J = omega");
  if (gamma.mul < 0 || gamma.add < 0) throw Error("HypothesisViolation", "radius must be nondecreasing and nonnegative");
  const std::int64_t side = prefix_side(limits);
  const auto& idx = f.index_fn();
  for (std::int64_t m = 0; m + 1 < side; ++m)
    if (!(idx(Elem(m)).c[0] < idx(Elem(m + 1)).c[0]))
      throw Error("HypothesisViolation", "index function is not strictly increasing at " + std::to_string(m));
  const JCheck c = check_jmorphism(f, limits);
  if (!c.simple) throw Error("HypothesisViolation", "tower morphism is not simple: " + to_json(c).dump());

  std::int64_t work = 0;
  Json table = Json::object();
  try {
    for (std::int64_t j = 0; j < side; ++j) {
      const Elem je(j);
      const std::int64_t r = gamma(j);
      work += r;
      if (work > limits.budget) throw Error("BudgetExceeded", "radius scan exceeds the budget");
      Json row = Json::object();
      for (std::int64_t m = 0; m < r; ++m) {
        const Elem me(m), m1(m + 1);
        const Elem fm = idx(me), fm1 = idx(m1);
        const Morphism p = X.bond(fm, fm1);
        const Morphism q = Y.bond(me, m1);
        const Morphism lo = f.family(me).at(je), hi = f.family(m1).at(je);
        if (!(C.compose(lo, p) == C.compose(q, hi)))
          throw Error("GammaInconsistent", "radius " + gamma.describe() + " claims exact commutativity at j=" +
                                               std::to_string(j) + ", m=" + std::to_string(m) + " but the square differs");
        const auto h = C.first_solution(Y.object(m1), X.object(fm), {{lo, std::nullopt, q}, {std::nullopt, hi, p}});
        if (!h) return Verdict::fails({{"j", j}, {"m", m}, {"h_candidates", Json::array()}, {"radius", gamma.describe()}});
        if (j < 4) row[std::to_string(m)] = C.morphism_name(*h);
      }
      if (j < 4) table[std::to_string(j)] = row;
    }
  } catch (const Error& e) {
    if (e.kind() != "Overflow") throw;
    return Verdict::inconclusive(limits.horizon, {{"reason", e.what()}});
  }
  return Verdict::holds({{"radius", gamma.describe()},
                         {"scope", "j below " + std::to_string(side) + ", m below radius(j)"},
                         {"h_table", table}});
}

Verdict tower_iso_dual(const JMorphism& f, const Limits& limits) {
  const auto& X = f.source();
  const auto& Y = f.target();
  const bool omega = X.index().kind() == IndexPoset::Kind::Omega && Y.index().kind() == IndexPoset::Kind::Omega &&
                     f.J().kind() == IndexPoset::Kind::Omega;
  if (!omega) throw Error("Unsupported", "tower_iso_dual needs towers over omega and J = omega");
  return stage_search(f, limits).verdict;
}

}  // namespace procat
