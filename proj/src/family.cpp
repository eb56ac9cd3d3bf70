#include "procat/family.hpp"

#include <algorithm>

namespace procat {

namespace {

constexpr std::int64_t kTabulateLimit = 4096;
constexpr std::int64_t kPeriodLimit = std::int64_t{1} << 40;
constexpr std::int64_t kRuleScanLimit = 1'000'000;

Error family_error(const std::string& msg) { return Error("TypeMismatch", msg); }

bool is_omega(const IndexPoset& p) { return p.kind() == IndexPoset::Kind::Omega; }

bool is_omega2(const IndexPoset& p) {
  return p.kind() == IndexPoset::Kind::Product && p.arity() == 2 && p.is_omega_power();
}

bool same_function(const IndexFunction& a, const IndexFunction& b) {
  if (!a.domain().same_as(b.domain()) || !a.codomain().same_as(b.codomain())) return false;
  if (a.affine_map() && b.affine_map()) return *a.affine_map() == *b.affine_map();
  if (a.domain().is_finite()) {
    for (const auto& e : a.domain().elements())
      if (!(a(e) == b(e))) return false;
    return true;
  }
  return false;
}

std::int64_t eval_poly(const std::vector<std::int64_t>& coeffs, std::int64_t j, std::int64_t k) {
  std::int64_t acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = mod64(mulmod64(acc, j, k) + mod64(*it, k), k);
  return acc;
}

std::string describe_poly(const MorphismFamily::Polynomial& p) {
  std::string s;
  for (std::size_t i = p.coeffs.size(); i-- > 0;) {
    const std::int64_t c = p.coeffs[i];
    if (c == 0) continue;
    std::string term;
    if (i == 0) term = std::to_string(c < 0 ? -c : c);
    else {
      term = (c == 1 || c == -1) ? "" : std::to_string(c < 0 ? -c : c) + "*";
      term += i == 1 ? "j" : "j^" + std::to_string(i);
    }
    if (s.empty()) s = (c < 0 ? "-" : "") + term;
    else s += (c < 0 ? " - " : " + ") + term;
  }
  if (s.empty()) s = "0";
  if (p.modulus > 0) s += " mod " + std::to_string(p.modulus);
  return s;
}

}  // namespace

struct MorphismFamily::Node {
  Kind kind = Kind::Constant;
  Category cat;
  IndexPoset J;
  Obj src = 0, tgt = 0;
  Morphism m;
  std::vector<Piece> pieces;
  Polynomial poly;
  std::int64_t rule_period = 1;
  std::vector<Morphism> prefix, cycle;
  std::shared_ptr<const Node> a, b;  // composite: a . b; transfer/pull-back: base = a
  std::optional<IndexFunction> phi;
};

MorphismFamily::MorphismFamily() : MorphismFamily(constant(Category::cycgrp(), IndexPoset::singleton(), {1, 1, 0})) {}
MorphismFamily::MorphismFamily(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

MorphismFamily MorphismFamily::constant(Category c, IndexPoset j, Morphism m) {
  if (!c.is_morphism(m)) throw family_error("constant family value is not a morphism of " + c.name());
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->cat = std::move(c);
  n->J = std::move(j);
  n->src = m.src;
  n->tgt = m.tgt;
  n->m = m;
  return MorphismFamily(n);
}

MorphismFamily MorphismFamily::step(Category c, IndexPoset j, std::vector<Piece> pieces) {
  if (pieces.empty()) throw family_error("step family needs at least one piece");
  if (!j.is_finite() && !is_omega(j)) throw family_error("step families need a finite J or omega");
  const Obj s = pieces.front().value.src, t = pieces.front().value.tgt;
  for (const auto& p : pieces) {
    if (!j.contains(p.threshold)) throw family_error("step threshold outside J");
    if (p.value.src != s || p.value.tgt != t || !c.is_morphism(p.value))
      throw family_error("step family pieces must lie in one hom-set");
  }
  auto rank = [&](const Elem& e) -> std::int64_t {
    if (!j.is_finite()) return e.c[0];
    const auto& le = j.linear_extension();
    return static_cast<std::int64_t>(std::find(le.begin(), le.end(), e) - le.begin());
  };
  std::sort(pieces.begin(), pieces.end(), [&](const Piece& x, const Piece& y) { return rank(x.threshold) < rank(y.threshold); });
  for (std::size_t i = 1; i < pieces.size(); ++i)
    if (pieces[i].threshold == pieces[i - 1].threshold) throw Error("Malformed", "duplicate step threshold");
  if (j.is_finite()) {
    for (const auto& e : j.elements()) {
      bool covered = false;
      for (const auto& p : pieces) covered = covered || j.leq(p.threshold, e);
      if (!covered) throw Error("Malformed", "step family has no piece at or below " + j.label(e));
    }
  } else if (pieces.front().threshold.c[0] != 0) {
    throw Error("Malformed", "step family over omega needs a base piece at 0");
  }
  bool all_same = std::all_of(pieces.begin(), pieces.end(), [&](const Piece& p) { return p.value == pieces.front().value; });
  if (all_same) return constant(std::move(c), std::move(j), pieces.front().value);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Step;
  n->cat = std::move(c);
  n->J = std::move(j);
  n->src = s;
  n->tgt = t;
  n->pieces = std::move(pieces);
  return MorphismFamily(n);
}

MorphismFamily MorphismFamily::table(Category c, IndexPoset j, const std::vector<Morphism>& values) {
  if (!j.is_finite() || values.size() != j.size()) throw family_error("table family needs one value per element of a finite J");
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < values.size(); ++i) pieces.push_back({j.elements()[i], values[i]});
  return step(std::move(c), std::move(j), std::move(pieces));
}

MorphismFamily MorphismFamily::rule(Category c, IndexPoset j, Obj src, Obj tgt, Polynomial p) {
  if (c.is_finite()) throw family_error("rule families need the cyclic-group category");
  if (!is_omega(j)) throw family_error("rule families are indexed by omega");
  if (!c.is_object(src) || !c.is_object(tgt)) throw family_error("rule family objects are not moduli");
  if (p.coeffs.empty()) p.coeffs = {0};
  const std::int64_t k = p.modulus > 0 ? p.modulus : tgt;
  if (k > kRuleScanLimit) throw Error("BudgetExceeded", "rule family period exceeds the scan limit");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Rule;
  n->cat = c;
  n->J = std::move(j);
  n->src = src;
  n->tgt = tgt;
  n->poly = std::move(p);
  n->rule_period = k;
  for (std::int64_t i = 0; i < k; ++i) {
    const Morphism v{src, tgt, mod64(eval_poly(n->poly.coeffs, i, k), tgt)};
    if (!c.is_morphism(v))
      throw family_error("rule value " + std::to_string(v.value) + " at j=" + std::to_string(i) +
                         " is not a homomorphism " + c.object_name(src) + "->" + c.object_name(tgt));
  }
  return MorphismFamily(n);
}

namespace {

// Canonical leaf for an omega family given by values on [0, T) and a cycle.
MorphismFamily omega_from_values(const Category& c, const IndexPoset& j, std::vector<Morphism> prefix,
                                 std::vector<Morphism> cycle) {
  // shrink cycle to its least period
  const std::size_t L = cycle.size();
  for (std::size_t d = 1; d <= L; ++d) {
    if (L % d != 0) continue;
    bool ok = true;
    for (std::size_t i = d; ok && i < L; ++i) ok = cycle[i] == cycle[i - d];
    if (ok) {
      cycle.resize(d);
      break;
    }
  }
  // absorb the tail of the prefix into the cycle
  while (!prefix.empty() && prefix.back() == cycle.back()) {
    std::rotate(cycle.rbegin(), cycle.rbegin() + 1, cycle.rend());
    prefix.pop_back();
  }
  if (cycle.size() == 1) {
    std::vector<MorphismFamily::Piece> pieces;
    std::vector<Morphism> all = prefix;
    all.push_back(cycle[0]);
    for (std::size_t i = 0; i < all.size(); ++i)
      if (i == 0 || !(all[i] == all[i - 1])) pieces.push_back({Elem(static_cast<std::int64_t>(i)), all[i]});
    return MorphismFamily::step(c, j, std::move(pieces));
  }
  return MorphismFamily::periodic(c, j, std::move(prefix), std::move(cycle));
}

}  // namespace

MorphismFamily MorphismFamily::periodic(Category c, IndexPoset j, std::vector<Morphism> prefix,
                                        std::vector<Morphism> cycle) {
  if (!is_omega(j)) throw family_error("periodic families are indexed by omega");
  if (cycle.empty()) throw family_error("periodic family needs a nonempty cycle");
  const Obj s = cycle.front().src, t = cycle.front().tgt;
  for (const auto* v : {&prefix, &cycle})
    for (const auto& m : *v)
      if (m.src != s || m.tgt != t || !c.is_morphism(m)) throw family_error("periodic family values must lie in one hom-set");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Periodic;
  n->cat = std::move(c);
  n->J = std::move(j);
  n->src = s;
  n->tgt = t;
  n->prefix = std::move(prefix);
  n->cycle = std::move(cycle);
  return MorphismFamily(n);
}

MorphismFamily MorphismFamily::compose(const MorphismFamily& g, const MorphismFamily& f) {
  const Node& G = *g.node_;
  const Node& F = *f.node_;
  if (!G.cat.same_as(F.cat)) throw family_error("families live in different categories");
  if (!G.J.same_as(F.J)) throw Error("IndexPosetMismatch", "families are indexed by different posets");
  if (F.tgt != G.src) throw Error("NonComposable", "family target does not match the next source");
  const Category& c = G.cat;
  if (G.kind == Kind::Constant && F.kind == Kind::Constant) return constant(c, G.J, c.compose(G.m, F.m));
  if (F.kind == Kind::Constant && c.is_identity(F.m)) return g;
  if (G.kind == Kind::Constant && c.is_identity(G.m)) return f;
  if (G.J.is_finite()) {
    std::vector<Morphism> vals;
    for (const auto& e : G.J.elements()) vals.push_back(c.compose(g.at(e), f.at(e)));
    return table(c, G.J, vals);
  }
  // same transfer on both sides
  const bool gt = G.kind == Kind::Transferred, ft = F.kind == Kind::Transferred;
  if (gt && ft && same_function(*G.phi, *F.phi))
    return transferred(compose(MorphismFamily(G.a), MorphismFamily(F.a)), *G.phi);
  if (gt && F.kind == Kind::Constant) {
    const MorphismFamily base(G.a);
    return transferred(compose(base, constant(c, base.index(), F.m)), *G.phi);
  }
  if (ft && G.kind == Kind::Constant) {
    const MorphismFamily base(F.a);
    return transferred(compose(constant(c, base.index(), G.m), base), *F.phi);
  }
  if (is_omega(G.J)) {
    auto pg = g.periodicity(), pf = f.periodicity();
    if (pg && pf) {
      const std::int64_t T = std::max(pg->start, pf->start);
      const std::int64_t L = lcm64(pg->period, pf->period);
      if (T + L <= kTabulateLimit) {
        std::vector<Morphism> prefix, cycle;
        for (std::int64_t i = 0; i < T; ++i) prefix.push_back(c.compose(g.at(Elem(i)), f.at(Elem(i))));
        for (std::int64_t i = T; i < T + L; ++i) cycle.push_back(c.compose(g.at(Elem(i)), f.at(Elem(i))));
        return omega_from_values(c, G.J, std::move(prefix), std::move(cycle));
      }
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Composite;
  n->cat = c;
  n->J = G.J;
  n->src = F.src;
  n->tgt = G.tgt;
  n->a = g.node_;
  n->b = f.node_;
  return MorphismFamily(n);
}

MorphismFamily MorphismFamily::transferred(const MorphismFamily& base, const IndexFunction& phi) {
  const Node& B = *base.node_;
  if (!phi.domain().same_as(B.J)) throw Error("IndexPosetMismatch", "transfer map domain is not the family index");
  if (B.kind == Kind::Constant) return constant(B.cat, phi.codomain(), B.m);
  if (phi.is_identity()) return base;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Transferred;
  n->cat = B.cat;
  n->J = phi.codomain();
  n->src = B.src;
  n->tgt = B.tgt;
  n->a = base.node_;
  n->phi = phi;
  return MorphismFamily(n);
}

MorphismFamily MorphismFamily::pulled_back(const MorphismFamily& base, const IndexFunction& phi) {
  const Node& B = *base.node_;
  if (!phi.codomain().same_as(B.J)) throw Error("IndexPosetMismatch", "pull-back map codomain is not the family index");
  const IndexPoset& dom = phi.domain();
  if (B.kind == Kind::Constant) return constant(B.cat, dom, B.m);
  if (phi.is_identity()) return base;
  if (dom.is_finite()) {
    std::vector<Morphism> vals;
    for (const auto& e : dom.elements()) vals.push_back(base.at(phi(e)));
    return table(B.cat, dom, vals);
  }
  if (B.kind == Kind::Transferred && is_strict_affine(phi) && same_function(*B.phi, phi)) return MorphismFamily(B.a);
  if (B.kind == Kind::Composite) return compose(pulled_back(MorphismFamily(B.a), phi), pulled_back(MorphismFamily(B.b), phi));
  // transferred along psi, pulled back along phi, both unit-diagonal: a shift on omega
  if (B.kind == Kind::Transferred && is_unit_diagonal(phi) && is_unit_diagonal(*B.phi) &&
      phi.codomain().arity() == B.phi->codomain().arity()) {
    std::int64_t s = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < phi.affine_map()->size(); ++i)
      s = std::max(s, (*phi.affine_map())[i].add - (*B.phi->affine_map())[i].add);
    if (s >= 0) {
      const IndexPoset w = IndexPoset::omega();
      return pulled_back(MorphismFamily(B.a), IndexFunction::affine(w, w, {{0, 1, s}}));
    }
  }
  if (is_omega(dom)) {
    const MorphismFamily probe = [&] {
      auto n = std::make_shared<Node>();
      n->kind = Kind::PulledBack;
      n->cat = B.cat;
      n->J = dom;
      n->src = B.src;
      n->tgt = B.tgt;
      n->a = base.node_;
      n->phi = phi;
      return MorphismFamily(n);
    }();
    if (auto per = probe.periodicity(); per && per->start + per->period <= kTabulateLimit) {
      std::vector<Morphism> prefix, cycle;
      for (std::int64_t i = 0; i < per->start; ++i) prefix.push_back(probe.at(Elem(i)));
      for (std::int64_t i = per->start; i < per->start + per->period; ++i) cycle.push_back(probe.at(Elem(i)));
      return omega_from_values(B.cat, dom, std::move(prefix), std::move(cycle));
    }
    return probe;
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::PulledBack;
  n->cat = B.cat;
  n->J = dom;
  n->src = B.src;
  n->tgt = B.tgt;
  n->a = base.node_;
  n->phi = phi;
  return MorphismFamily(n);
}

MorphismFamily MorphismFamily::then(const Morphism& post) const {
  return compose(constant(node_->cat, node_->J, post), *this);
}

MorphismFamily MorphismFamily::after(const Morphism& pre) const {
  return compose(*this, constant(node_->cat, node_->J, pre));
}

Morphism MorphismFamily::at(const Elem& j) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant: return n.m;
    case Kind::Step: {
      if (n.J.is_finite()) {
        for (auto it = n.pieces.rbegin(); it != n.pieces.rend(); ++it)
          if (n.J.leq(it->threshold, j)) return it->value;
        throw family_error("step family undefined at " + n.J.label(j));
      }
      auto it = std::upper_bound(n.pieces.begin(), n.pieces.end(), j.c.at(0),
                                 [](std::int64_t v, const Piece& p) { return v < p.threshold.c[0]; });
      return std::prev(it)->value;
    }
    case Kind::Rule: {
      const std::int64_t k = n.rule_period;
      return {n.src, n.tgt, mod64(eval_poly(n.poly.coeffs, mod64(j.c.at(0), k), k), n.tgt)};
    }
    case Kind::Periodic: {
      const auto i = j.c.at(0);
      if (i < static_cast<std::int64_t>(n.prefix.size())) return n.prefix[static_cast<std::size_t>(i)];
      const auto r = (i - static_cast<std::int64_t>(n.prefix.size())) % static_cast<std::int64_t>(n.cycle.size());
      return n.cycle[static_cast<std::size_t>(r)];
    }
    case Kind::Composite:
      return n.cat.compose(MorphismFamily(n.a).at(j), MorphismFamily(n.b).at(j));
    case Kind::Transferred:
      return MorphismFamily(n.a).at(min_threshold(*n.phi, j));
    case Kind::PulledBack:
      return MorphismFamily(n.a).at((*n.phi)(j));
  }
  throw family_error("unknown family kind");
}

MorphismFamily::Kind MorphismFamily::kind() const { return node_->kind; }
const Category& MorphismFamily::category() const { return node_->cat; }
const IndexPoset& MorphismFamily::index() const { return node_->J; }
Obj MorphismFamily::source() const { return node_->src; }
Obj MorphismFamily::target() const { return node_->tgt; }

std::vector<MorphismFamily> MorphismFamily::children() const {
  std::vector<MorphismFamily> out;
  if (node_->a) out.push_back(MorphismFamily(node_->a));
  if (node_->b) out.push_back(MorphismFamily(node_->b));
  return out;
}

const std::optional<IndexFunction>& MorphismFamily::index_map() const { return node_->phi; }

std::optional<Morphism> MorphismFamily::constant_value() const {
  if (node_->kind == Kind::Constant) return node_->m;
  return std::nullopt;
}

namespace {

struct GridLeaf {
  std::int64_t d1 = 0, d2 = 0;
  Periodicity base;
};

std::optional<std::vector<GridLeaf>> grid_leaves(const MorphismFamily& f);

}  // namespace

std::optional<Periodicity> MorphismFamily::periodicity() const {
  const Node& n = *node_;
  if (!is_omega(n.J)) return std::nullopt;
  switch (n.kind) {
    case Kind::Constant: return Periodicity{0, 1};
    case Kind::Step: return Periodicity{n.pieces.back().threshold.c[0], 1};
    case Kind::Rule: return Periodicity{0, n.rule_period};
    case Kind::Periodic:
      return Periodicity{static_cast<std::int64_t>(n.prefix.size()), static_cast<std::int64_t>(n.cycle.size())};
    case Kind::Composite: {
      auto a = MorphismFamily(n.a).periodicity(), b = MorphismFamily(n.b).periodicity();
      if (!a || !b) return std::nullopt;
      const std::int64_t L = lcm64(a->period, b->period);
      if (L > kPeriodLimit) return std::nullopt;
      return Periodicity{std::max(a->start, b->start), L};
    }
    case Kind::Transferred: {
      const MorphismFamily base(n.a);
      auto p = base.periodicity();
      const auto& am = n.phi->affine_map();
      if (!p || !am || !is_omega(n.phi->domain()) || am->size() != 1) return std::nullopt;
      const auto& t = am->front();
      if (t.src != 0 || t.mul < 1) return std::nullopt;
      return Periodicity{std::max<std::int64_t>(0, t.mul * p->start + t.add), t.mul * p->period};
    }
    case Kind::PulledBack: {
      const MorphismFamily base(n.a);
      const auto& am = n.phi->affine_map();
      if (!am) return std::nullopt;
      if (is_omega(base.index())) {
        auto p = base.periodicity();
        if (!p) return std::nullopt;
        const auto& t = am->front();
        if (t.src < 0 || t.mul == 0) return Periodicity{0, 1};
        if (t.mul < 0) return std::nullopt;
        const std::int64_t diff = p->start - t.add;
        return Periodicity{diff <= 0 ? 0 : (diff + t.mul - 1) / t.mul, p->period};
      }
      if (is_omega2(base.index()) && is_unit_diagonal(*n.phi)) {
        auto leaves = grid_leaves(base);
        if (!leaves) return std::nullopt;
        Periodicity out{0, 1};
        for (const auto& l : *leaves) {
          const std::int64_t s = std::max((*am)[0].add - l.d1, (*am)[1].add - l.d2);
          out.start = std::max({out.start, -s, l.base.start - s});
          out.period = lcm64(out.period, l.base.period);
          if (out.period > kPeriodLimit) return std::nullopt;
        }
        return out;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

namespace {

std::optional<std::vector<GridLeaf>> grid_leaves(const MorphismFamily& f) {
  if (!is_omega2(f.index())) return std::nullopt;
  switch (f.kind()) {
    case MorphismFamily::Kind::Constant: return std::vector<GridLeaf>{};
    case MorphismFamily::Kind::Transferred: {
      const auto& phi = *f.index_map();
      if (!is_unit_diagonal(phi)) return std::nullopt;
      auto p = f.children().front().periodicity();
      if (!p) return std::nullopt;
      const auto& am = *phi.affine_map();
      return std::vector<GridLeaf>{{am[0].add, am[1].add, *p}};
    }
    case MorphismFamily::Kind::Composite: {
      auto ch = f.children();
      auto l = grid_leaves(ch[0]), r = grid_leaves(ch[1]);
      if (!l || !r) return std::nullopt;
      l->insert(l->end(), r->begin(), r->end());
      return l;
    }
    default: break;
  }
  return std::nullopt;
}

// Over an omega power: a point from which the family is constant, and the
// value.  A transferred family whose base is constant from s on takes the
// value base(s) at every k that is not below phi(s - 1), in particular from
// phi(s - 1) + (1, .., 1) on.
std::optional<std::pair<Elem, Morphism>> eventual_constant(const MorphismFamily& f) {
  const IndexPoset& J = f.index();
  if (!J.is_omega_power()) return std::nullopt;
  switch (f.kind()) {
    case MorphismFamily::Kind::Constant: return std::pair{*J.bottom(), *f.constant_value()};
    case MorphismFamily::Kind::Transferred: {
      const MorphismFamily base = f.children().front();
      auto p = base.periodicity();
      if (!p || p->period != 1) return std::nullopt;
      Elem from = *J.bottom();
      if (p->start > 0) {
        from = (*f.index_map())(Elem(p->start - 1));
        for (auto& x : from.c) x += 1;
      }
      return std::pair{from, base.at(Elem(p->start))};
    }
    case MorphismFamily::Kind::Composite: {
      auto ch = f.children();
      auto g = eventual_constant(ch[0]), h = eventual_constant(ch[1]);
      if (!g || !h) return std::nullopt;
      return std::pair{J.join(g->first, h->first), f.category().compose(g->second, h->second)};
    }
    default: break;
  }
  return std::nullopt;
}

// Bounds for the configuration argument over omega x omega: every point k with
// both coordinates >= base is (base+t+x, base+t) or its mirror, each leaf reads
// its base at base+t+offset(x), offsets stop depending on x beyond `spread`,
// and values are periodic in t from `t0` with period `period`.
struct Grid {
  std::int64_t base = 0, spread = 0, t0 = 0, period = 1;
};

std::optional<Grid> grid_for(const MorphismFamily& a, const MorphismFamily& b) {
  auto la = grid_leaves(a), lb = grid_leaves(b);
  if (!la || !lb) return std::nullopt;
  la->insert(la->end(), lb->begin(), lb->end());
  Grid g;
  for (const auto& l : *la) {
    g.base = std::max({g.base, l.d1, l.d2});
    g.spread = std::max(g.spread, l.d1 > l.d2 ? l.d1 - l.d2 : l.d2 - l.d1);
    g.t0 = std::max(g.t0, l.base.start);
    g.period = lcm64(g.period, l.base.period);
    if (g.period > kTabulateLimit) return std::nullopt;
  }
  return g;
}

Elem grid_point(const Grid& g, bool first_larger, std::int64_t x, std::int64_t t) {
  const std::int64_t lo = g.base + t;
  return first_larger ? Elem(std::vector<std::int64_t>{lo + x, lo}) : Elem(std::vector<std::int64_t>{lo, lo + x});
}

void check_compatible(const MorphismFamily& a, const MorphismFamily& b) {
  if (!a.category().same_as(b.category())) throw family_error("families live in different categories");
  if (!a.index().same_as(b.index())) throw Error("IndexPosetMismatch", "families are indexed by different posets");
  if (a.source() != b.source() || a.target() != b.target())
    throw family_error("families have different source or target");
}

Json offending(const IndexPoset& J, const Elem& j, const MorphismFamily& a, const MorphismFamily& b) {
  return {{"j", J.label(j)}, {"left", a.category().morphism_name(a.at(j))}, {"right", b.category().morphism_name(b.at(j))}};
}

}  // namespace

std::string MorphismFamily::describe() const {
  const Node& n = *node_;
  auto name = [&](const Morphism& m) { return n.cat.morphism_name(m); };
  switch (n.kind) {
    case Kind::Constant: return "const(" + name(n.m) + ")";
    case Kind::Step: {
      std::string s = "step[";
      for (std::size_t i = 0; i < n.pieces.size(); ++i)
        s += (i ? "," : "") + std::string("(") + n.J.label(n.pieces[i].threshold) + "," + name(n.pieces[i].value) + ")";
      return s + "]";
    }
    case Kind::Rule: return "rule(poly: " + describe_poly(n.poly) + ")";
    case Kind::Periodic: {
      std::string s;
      for (std::size_t i = 0; i < n.prefix.size(); ++i) s += (i ? "," : "") + name(n.prefix[i]);
      std::string c;
      for (std::size_t i = 0; i < n.cycle.size(); ++i) c += (i ? "," : "") + name(n.cycle[i]);
      if (n.prefix.empty()) return "cycle[" + c + "]";
      return "periodic[" + s + " | " + c + "]";
    }
    case Kind::Composite:
      return "(" + MorphismFamily(n.a).describe() + " . " + MorphismFamily(n.b).describe() + ")";
    case Kind::Transferred:
      return "transfer(" + MorphismFamily(n.a).describe() + ", " + n.phi->describe() + ")";
    case Kind::PulledBack:
      return "pullback(" + MorphismFamily(n.a).describe() + ", " + n.phi->describe() + ")";
  }
  return "?";
}

Json MorphismFamily::to_json() const { return describe(); }

Verdict eventually_equal(const MorphismFamily& a, const MorphismFamily& b, const Limits& limits) {
  check_compatible(a, b);
  const IndexPoset& J = a.index();
  if (J.is_finite()) {
    const auto& le = J.linear_extension();
    const Elem& top = le.back();
    if (!(a.at(top) == b.at(top))) return Verdict::fails(offending(J, top, a, b));
    for (const auto& j : le) {
      bool ok = true;
      for (const auto& u : J.ascent(j, 0)) {
        if (!(a.at(u) == b.at(u))) { ok = false; break; }
      }
      if (ok) return Verdict::holds({{"j", J.label(j)}});
    }
    return Verdict::holds({{"j", J.label(top)}});
  }
  if (is_omega(J)) {
    auto pa = a.periodicity(), pb = b.periodicity();
    if (pa && pb) {
      const std::int64_t T = std::max(pa->start, pb->start);
      const std::int64_t L = lcm64(pa->period, pb->period);
      if (L > limits.budget) throw Error("BudgetExceeded", "common period " + std::to_string(L) + " exceeds the budget");
      for (std::int64_t i = T; i < T + L; ++i)
        if (!(a.at(Elem(i)) == b.at(Elem(i)))) {
          Json ev = offending(J, Elem(i), a, b);
          ev["period"] = L;
          return Verdict::fails(ev);
        }
      std::int64_t w = T;
      while (w > 0 && a.at(Elem(w - 1)) == b.at(Elem(w - 1))) --w;
      return Verdict::holds({{"j", J.label(Elem(w))}, {"period", L}});
    }
  }
  if (is_omega2(J)) {
    if (auto g = grid_for(a, b)) {
      for (bool first : {true, false})
        for (std::int64_t x = 0; x <= g->spread; ++x)
          for (std::int64_t t = g->t0; t < g->t0 + g->period; ++t) {
            const Elem k = grid_point(*g, first, x, t);
            if (!(a.at(k) == b.at(k))) {
              Json ev = offending(J, k, a, b);
              ev["period"] = g->period;
              ev["direction"] = "(1,1)";
              return Verdict::fails(ev);
            }
          }
      return Verdict::holds({{"j", J.label(grid_point(*g, true, 0, g->t0))}, {"period", g->period}});
    }
  }
  if (J.is_omega_power()) {
    auto ca = eventual_constant(a), cb = eventual_constant(b);
    if (ca && cb) {
      const Elem from = J.join(ca->first, cb->first);
      if (!(ca->second == cb->second)) return Verdict::fails(offending(J, from, a, b));
      return Verdict::holds({{"j", J.label(from)}});
    }
  }
  // No exact certificate: report the scan only.
  std::optional<Elem> last_bad;
  for (const auto& j : J.sample(limits.horizon))
    if (!(a.at(j) == b.at(j))) last_bad = j;
  Json ev = {{"scanned", limits.horizon}};
  if (last_bad) ev["last_difference"] = J.label(*last_bad);
  return Verdict::inconclusive(limits.horizon, ev);
}

Verdict tail_equal_from(const MorphismFamily& a, const MorphismFamily& b, const Elem& j0, const Limits& limits) {
  check_compatible(a, b);
  const IndexPoset& J = a.index();
  if (!J.contains(j0)) throw family_error("tail start outside J");
  if (J.is_finite()) {
    for (const auto& u : J.ascent(j0, 0))
      if (!(a.at(u) == b.at(u))) return Verdict::fails(offending(J, u, a, b));
    return Verdict::holds({{"j", J.label(j0)}});
  }
  if (is_omega(J)) {
    auto pa = a.periodicity(), pb = b.periodicity();
    if (pa && pb) {
      const std::int64_t start = std::max({pa->start, pb->start, j0.c[0]});
      const std::int64_t L = lcm64(pa->period, pb->period);
      if (L > limits.budget) throw Error("BudgetExceeded", "common period exceeds the budget");
      for (std::int64_t i = j0.c[0]; i < start + L; ++i)
        if (!(a.at(Elem(i)) == b.at(Elem(i)))) return Verdict::fails(offending(J, Elem(i), a, b));
      return Verdict::holds({{"j", J.label(j0)}});
    }
  }
  if (is_omega2(J)) {
    if (auto g = grid_for(a, b)) {
      const std::int64_t side = g->base + g->spread + g->t0 + g->period + 1;
      const std::int64_t top = std::max(j0.c[0], j0.c[1]) + side;
      if ((top - j0.c[0]) * (top - j0.c[1]) > limits.budget) throw Error("BudgetExceeded", "tail box exceeds the budget");
      for (std::int64_t x = j0.c[0]; x < top; ++x)
        for (std::int64_t y = j0.c[1]; y < top; ++y) {
          const Elem k(std::vector<std::int64_t>{x, y});
          if (!(a.at(k) == b.at(k))) return Verdict::fails(offending(J, k, a, b));
        }
      return Verdict::holds({{"j", J.label(j0)}});
    }
  }
  if (J.is_omega_power()) {
    auto ca = eventual_constant(a), cb = eventual_constant(b);
    if (ca && cb) {
      const Elem from = J.join(ca->first, cb->first);
      if (J.leq(from, j0)) {
        if (!(ca->second == cb->second)) return Verdict::fails(offending(J, j0, a, b));
        return Verdict::holds({{"j", J.label(j0)}});
      }
    }
  }
  for (const auto& j : J.sample(limits.horizon))
    if (J.leq(j0, j) && !(a.at(j) == b.at(j))) return Verdict::fails(offending(J, j, a, b));
  return Verdict::inconclusive(limits.horizon, {{"scanned", limits.horizon}});
}

Verdict all_equal(const MorphismFamily& a, const MorphismFamily& b, const Limits& limits) {
  const IndexPoset& J = a.index();
  if (J.is_finite()) {
    check_compatible(a, b);
    for (const auto& j : J.elements())
      if (!(a.at(j) == b.at(j))) return Verdict::fails(offending(J, j, a, b));
    return Verdict::holds({{"j", J.label(J.linear_extension().front())}});
  }
  if (is_omega(J)) return tail_equal_from(a, b, Elem(0), limits);
  if (is_omega2(J)) return tail_equal_from(a, b, Elem(std::vector<std::int64_t>{0, 0}), limits);
  return tail_equal_from(a, b, *J.bottom(), limits);
}

}  // namespace procat
