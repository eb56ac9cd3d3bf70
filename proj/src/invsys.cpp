#include "procat/invsys.hpp"

#include <algorithm>

namespace procat {

namespace {

std::string join_details(const std::vector<SystemViolation>& v) {
  std::string s = "inverse system laws violated:";
  for (const auto& x : v) s += " [" + x.law + ": " + x.detail + "]";
  return s;
}

std::int64_t checked_power(std::int64_t base, std::int64_t e) {
  __int128 r = 1;
  for (std::int64_t i = 0; i < e; ++i) {
    r *= base;
    if (r > kMaxModulus) throw Error("Overflow", "tower stage exceeds the supported modulus range");
  }
  return static_cast<std::int64_t>(r);
}

}  // namespace

SystemError::SystemError(std::vector<SystemViolation> v)
    : Error(v.empty() ? "Malformed" : v.front().law, join_details(v)), violations_(std::move(v)) {}

struct InverseSystem::Impl {
  Rep rep = Rep::Constant;
  Category cat;
  IndexPoset index;
  // table
  std::vector<Obj> objects;
  std::vector<Morphism> bonds;  // lo * n + hi, defined when lo <= hi
  // tower
  std::int64_t base = 2, offset = 1;
  // constant
  Obj x = 1;
  // rule
  std::function<Obj(const Elem&)> obj_fn;
  std::function<Morphism(const Elem&, const Elem&)> bond_fn;
  std::string desc;
};

InverseSystem::InverseSystem() : InverseSystem(rudimentary(Category::cycgrp(), 1)) {}
InverseSystem::InverseSystem(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

InverseSystem InverseSystem::tower(std::int64_t base, std::int64_t offset) {
  if (base < 2 || offset < 0) throw Error("Malformed", "tower needs base >= 2 and offset >= 0");
  auto impl = std::make_shared<Impl>();
  impl->rep = Rep::Tower;
  impl->cat = Category::cycgrp();
  impl->index = IndexPoset::omega();
  impl->base = base;
  impl->offset = offset;
  return InverseSystem(impl);
}

InverseSystem InverseSystem::constant(Category c, IndexPoset index, Obj x) {
  if (!c.is_object(x)) throw Error("TypeMismatch", "constant system object is not an object of " + c.name());
  auto impl = std::make_shared<Impl>();
  impl->rep = Rep::Constant;
  impl->cat = std::move(c);
  impl->index = std::move(index);
  impl->x = x;
  return InverseSystem(impl);
}

InverseSystem InverseSystem::rule(Category c, IndexPoset index, std::function<Obj(const Elem&)> object,
                                  std::function<Morphism(const Elem&, const Elem&)> bond, std::string description) {
  auto impl = std::make_shared<Impl>();
  impl->rep = Rep::Rule;
  impl->cat = std::move(c);
  impl->index = std::move(index);
  impl->obj_fn = std::move(object);
  impl->bond_fn = std::move(bond);
  impl->desc = std::move(description);
  return InverseSystem(impl);
}

InverseSystem InverseSystem::rudimentary(Category c, Obj x) { return constant(std::move(c), IndexPoset::singleton(), x); }

InverseSystem InverseSystem::from_table(Category c, IndexPoset index, std::vector<Obj> objects,
                                        std::vector<Morphism> bonds) {
  if (!index.is_finite() || objects.size() != index.size() || bonds.size() != objects.size() * objects.size())
    throw Error("Malformed", "table system sizes do not match the index poset");
  auto impl = std::make_shared<Impl>();
  impl->rep = Rep::Table;
  impl->cat = std::move(c);
  impl->index = std::move(index);
  impl->objects = std::move(objects);
  impl->bonds = std::move(bonds);
  return InverseSystem(impl);
}

InverseSystem::Rep InverseSystem::rep() const { return impl_->rep; }
const Category& InverseSystem::category() const { return impl_->cat; }
const IndexPoset& InverseSystem::index() const { return impl_->index; }
bool InverseSystem::certified() const { return impl_->rep == Rep::Tower || impl_->rep == Rep::Constant; }

Obj InverseSystem::object(const Elem& l) const {
  switch (impl_->rep) {
    case Rep::Table: return impl_->objects[impl_->index.index_of(l)];
    case Rep::Tower: return checked_power(impl_->base, l.c.at(0) + impl_->offset);
    case Rep::Constant: return impl_->x;
    case Rep::Rule: return impl_->obj_fn(l);
  }
  return impl_->x;
}

Morphism InverseSystem::bond(const Elem& lo, const Elem& hi) const {
  if (!impl_->index.leq(lo, hi))
    throw Error("NotRelated", "no bond " + impl_->index.label(lo) + "<=" + impl_->index.label(hi));
  switch (impl_->rep) {
    case Rep::Table: {
      const std::size_t n = impl_->objects.size();
      return impl_->bonds[impl_->index.index_of(lo) * n + impl_->index.index_of(hi)];
    }
    case Rep::Tower: {
      const Obj a = object(hi), b = object(lo);
      return {a, b, 1 % b};
    }
    case Rep::Constant: return impl_->cat.identity(impl_->x);
    case Rep::Rule: return impl_->bond_fn(lo, hi);
  }
  return impl_->cat.identity(impl_->x);
}

std::string InverseSystem::describe() const {
  const auto& c = impl_->cat;
  switch (impl_->rep) {
    case Rep::Tower:
      return "tower Z/" + std::to_string(impl_->base) + "^(n+" + std::to_string(impl_->offset) + ") with bond residue 1";
    case Rep::Constant: return "constant " + c.object_name(impl_->x) + " over " + impl_->index.describe();
    case Rep::Rule: return impl_->desc;
    case Rep::Table: {
      std::string s = "system over " + impl_->index.describe() + ":";
      for (const auto& e : impl_->index.elements()) s += " " + impl_->index.label(e) + "=" + c.object_name(object(e));
      return s;
    }
  }
  return "?";
}

Json InverseSystem::to_json() const {
  Json j = {{"index", impl_->index.describe()}, {"description", describe()}, {"category", impl_->cat.name()}};
  if (impl_->index.is_finite()) {
    Json objs = Json::object();
    Json bonds = Json::object();
    for (const auto& a : impl_->index.elements()) {
      objs[impl_->index.label(a)] = impl_->cat.object_name(object(a));
      for (const auto& b : impl_->index.elements())
        if (impl_->index.less(a, b))
          bonds[impl_->index.label(a) + "<=" + impl_->index.label(b)] = impl_->cat.morphism_name(bond(a, b));
    }
    j["objects"] = objs;
    j["bonds"] = bonds;
  }
  return j;
}

InverseSystem InverseSystem::truncate(const std::vector<Elem>& subset) const { return procat::truncate(*this, subset); }

InverseSystem rudimentary(const Category& c, Obj x) { return InverseSystem::rudimentary(c, x); }

InverseSystem validate_system(const RawSystem& raw) {
  std::vector<SystemViolation> v;
  const IndexPoset& P = raw.index;
  const Category& c = raw.cat;
  if (!P.is_finite()) throw Error("Malformed", "table systems need a finite index poset");
  const std::size_t n = P.size();
  if (raw.objects.size() != n) throw SystemError(std::vector<SystemViolation>{{"Malformed", "one object per index element is required"}});
  for (std::size_t i = 0; i < n; ++i)
    if (!c.is_object(raw.objects[i]))
      v.push_back({"TypeMismatch", "object at " + P.label(P.elements()[i]) + " is not an object of " + c.name()});
  if (!v.empty()) throw SystemError(v);
  std::vector<std::optional<Morphism>> b(n * n);
  for (const auto& bd : raw.bonds) {
    if (!P.contains(bd.lo) || !P.contains(bd.hi) || !P.leq(bd.lo, bd.hi)) {
      v.push_back({"Malformed", "bond on unrelated pair " + P.label(bd.lo) + "<=" + P.label(bd.hi)});
      continue;
    }
    const std::size_t lo = P.index_of(bd.lo), hi = P.index_of(bd.hi);
    if (bd.m.src != raw.objects[hi] || bd.m.tgt != raw.objects[lo] || !c.is_morphism(bd.m)) {
      v.push_back({"TypeMismatch", "bond " + P.label(bd.lo) + "<=" + P.label(bd.hi) + " must be a morphism " +
                                       c.object_name(raw.objects[hi]) + "->" + c.object_name(raw.objects[lo])});
      continue;
    }
    if (b[lo * n + hi] && !(*b[lo * n + hi] == bd.m)) {
      v.push_back({"Malformed", "conflicting bonds for " + P.label(bd.lo) + "<=" + P.label(bd.hi)});
      continue;
    }
    b[lo * n + hi] = bd.m;
  }
  if (!v.empty()) throw SystemError(v);
  for (std::size_t i = 0; i < n; ++i)
    if (!b[i * n + i]) b[i * n + i] = c.identity(raw.objects[i]);
  // fill the remaining related pairs by interval size
  auto interval = [&](std::size_t lo, std::size_t hi) {
    std::size_t k = 0;
    for (std::size_t m = 0; m < n; ++m)
      if (P.leq(P.elements()[lo], P.elements()[m]) && P.leq(P.elements()[m], P.elements()[hi])) ++k;
    return k;
  };
  std::vector<std::pair<std::size_t, std::size_t>> missing;
  for (std::size_t lo = 0; lo < n; ++lo)
    for (std::size_t hi = 0; hi < n; ++hi)
      if (lo != hi && P.leq(P.elements()[lo], P.elements()[hi]) && !b[lo * n + hi]) missing.emplace_back(lo, hi);
  std::stable_sort(missing.begin(), missing.end(),
                   [&](auto x, auto y) { return interval(x.first, x.second) < interval(y.first, y.second); });
  for (auto [lo, hi] : missing) {
    for (std::size_t m = 0; m < n; ++m) {
      if (m == lo || m == hi) continue;
      if (P.leq(P.elements()[lo], P.elements()[m]) && P.leq(P.elements()[m], P.elements()[hi]) && b[lo * n + m] &&
          b[m * n + hi]) {
        b[lo * n + hi] = c.compose(*b[lo * n + m], *b[m * n + hi]);
        break;
      }
    }
    if (!b[lo * n + hi])
      v.push_back({"Malformed", "missing bond " + P.label(P.elements()[lo]) + "<=" + P.label(P.elements()[hi])});
  }
  if (!v.empty()) throw SystemError(v);
  std::vector<Morphism> bonds;
  for (const auto& x : b) bonds.push_back(x.value_or(Morphism{0, 0, -1}));
  auto sys = InverseSystem::from_table(c, P, raw.objects, std::move(bonds));
  auto laws = system_violations(sys);
  if (!laws.empty()) throw SystemError(laws);
  return sys;
}

std::vector<SystemViolation> system_violations(const InverseSystem& x, std::int64_t side) {
  std::vector<SystemViolation> v;
  if (x.certified()) return v;
  const auto& P = x.index();
  const auto& c = x.category();
  const auto elems = P.sample(side);
  for (const auto& l : elems) {
    const Morphism id = x.bond(l, l);
    if (!(id == c.identity(x.object(l)))) v.push_back({"IdentityBondViolation", P.label(l)});
  }
  for (const auto& a : elems)
    for (const auto& b : elems) {
      if (!P.leq(a, b)) continue;
      const Morphism ab = x.bond(a, b);
      if (ab.src != x.object(b) || ab.tgt != x.object(a) || !c.is_morphism(ab)) {
        v.push_back({"TypeMismatch", "bond " + P.label(a) + "<=" + P.label(b)});
        continue;
      }
      for (const auto& d : elems) {
        if (!P.leq(b, d)) continue;
        if (!(c.compose(ab, x.bond(b, d)) == x.bond(a, d)))
          v.push_back({"FunctorialityViolation", P.label(a) + "<=" + P.label(b) + "<=" + P.label(d)});
      }
    }
  return v;
}

Verdict check_system(const InverseSystem& x, const Limits& limits) {
  if (x.certified()) return Verdict::holds({{"certificate", x.rep() == InverseSystem::Rep::Tower ? "tower" : "constant"}});
  const auto side = std::min<std::int64_t>(limits.horizon, 16);
  auto v = system_violations(x, side);
  if (!v.empty()) {
    Json arr = Json::array();
    for (const auto& s : v) arr.push_back({{"law", s.law}, {"detail", s.detail}});
    return Verdict::fails({{"violations", arr}});
  }
  if (x.index().is_finite()) return Verdict::holds({{"certificate", "exhaustive scan"}});
  return Verdict::holds({{"certificate", "prefix scan"}, {"side", side}});
}

InverseSystem truncate(const InverseSystem& x, const std::vector<Elem>& subset) {
  const auto& P = x.index();
  if (subset.empty()) throw Error("NotDirected", "empty truncation");
  std::vector<Elem> s = subset;
  for (const auto& e : s)
    if (!P.contains(e)) throw Error("UnresolvedReference", "truncation element outside the index poset");
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  std::vector<std::string> labels;
  std::vector<std::pair<std::size_t, std::size_t>> rel;
  for (std::size_t i = 0; i < s.size(); ++i) {
    labels.push_back(P.label(s[i]));
    for (std::size_t j = 0; j < s.size(); ++j)
      if (P.leq(s[i], s[j])) rel.emplace_back(i, j);
  }
  IndexPoset Q = IndexPoset::finite(labels, rel);
  if (!poset_properties(Q).directed.is_holds()) throw Error("NotDirected", "truncation is not directed");
  std::vector<Obj> objs;
  for (const auto& e : s) objs.push_back(x.object(e));
  const std::size_t n = s.size();
  std::vector<Morphism> bonds(n * n, Morphism{0, 0, -1});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (P.leq(s[i], s[j])) bonds[i * n + j] = x.bond(s[i], s[j]);
  return InverseSystem::from_table(x.category(), Q, std::move(objs), std::move(bonds));
}

bool same_system_data(const InverseSystem& a, const InverseSystem& b) {
  const auto& P = a.index();
  const auto& Q = b.index();
  if (!P.is_finite() || !Q.is_finite() || P.size() != Q.size() || !a.category().same_as(b.category())) return false;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Elem& x = P.elements()[i];
    const Elem& y = Q.elements()[i];
    if (P.label(x) != Q.label(y) || a.object(x) != b.object(y)) return false;
    for (std::size_t j = 0; j < P.size(); ++j) {
      const bool r = P.leq(x, P.elements()[j]);
      if (r != Q.leq(y, Q.elements()[j])) return false;
      if (r && !(a.bond(x, P.elements()[j]) == b.bond(y, Q.elements()[j]))) return false;
    }
  }
  return true;
}

bool same_system(const InverseSystem& a, const InverseSystem& b) {
  if (!a.index().same_as(b.index()) || !a.category().same_as(b.category())) return false;
  if (a.rep() == InverseSystem::Rep::Tower && b.rep() == InverseSystem::Rep::Tower)
    return a.object(Elem(0)) == b.object(Elem(0)) && a.object(Elem(1)) == b.object(Elem(1));
  if (a.index().is_finite()) return same_system_data(a, b);
  if (a.rep() == InverseSystem::Rep::Constant && b.rep() == InverseSystem::Rep::Constant)
    return a.object(Elem(0)) == b.object(Elem(0));
  // rule-backed: compare over a prefix
  const auto elems = a.index().sample(8);
  for (const auto& x : elems) {
    if (a.object(x) != b.object(x)) return false;
    for (const auto& y : elems)
      if (a.index().leq(x, y) && !(a.bond(x, y) == b.bond(x, y))) return false;
  }
  return true;
}

}  // namespace procat
