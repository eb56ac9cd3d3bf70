#include "procat/cat.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>
#include <set>

namespace procat {

namespace {

std::string join_details(const std::vector<LawViolation>& v) {
  std::string s = "category laws violated:";
  for (const auto& x : v) s += " [" + x.law + ": " + x.detail + "]";
  return s;
}

using i128 = __int128;

// Inverse of a modulo m (gcd(a, m) == 1 required), m >= 1.
std::int64_t inverse_mod(std::int64_t a, std::int64_t m) {
  i128 old_r = mod64(a, m), r = m, old_s = 1, s = 0;
  while (r != 0) {
    i128 q = old_r / r;
    i128 t = old_r - q * r;
    old_r = r;
    r = t;
    t = old_s - q * s;
    old_s = s;
    s = t;
  }
  i128 res = old_s % m;
  if (res < 0) res += m;
  return static_cast<std::int64_t>(res);
}

struct Congruence {
  std::int64_t r = 0, m = 1;  // h == r (mod m)
};

// Solutions of x*h == y (mod n), as a congruence on h.
std::optional<Congruence> solve_linear(std::int64_t x, std::int64_t y, std::int64_t n) {
  x = mod64(x, n);
  y = mod64(y, n);
  const std::int64_t g = gcd64(x == 0 ? n : x, n);
  if (x == 0) {
    if (y != 0) return std::nullopt;
    return Congruence{0, 1};
  }
  if (y % g != 0) return std::nullopt;
  const std::int64_t m = n / g;
  if (m == 1) return Congruence{0, 1};
  const std::int64_t r = mulmod64(y / g, inverse_mod(x / g, m), m);
  return Congruence{r, m};
}

std::optional<Congruence> combine(const Congruence& a, const Congruence& b) {
  const std::int64_t g = gcd64(a.m, b.m);
  const i128 diff = static_cast<i128>(b.r) - a.r;
  if (diff % g != 0) return std::nullopt;
  const i128 l = static_cast<i128>(a.m / g) * b.m;
  if (l > kMaxModulus) throw Error("Overflow", "congruence modulus overflow");
  const std::int64_t m2 = b.m / g;
  std::int64_t k = 0;
  if (m2 > 1) {
    const std::int64_t d = static_cast<std::int64_t>(((diff / g) % m2 + m2) % m2);
    k = mulmod64(d, inverse_mod((a.m / g) % m2, m2), m2);
  }
  i128 r = (static_cast<i128>(a.r) + static_cast<i128>(a.m) * k) % l;
  if (r < 0) r += l;
  return Congruence{static_cast<std::int64_t>(r), static_cast<std::int64_t>(l)};
}

}  // namespace

CategoryError::CategoryError(std::vector<LawViolation> v)
    : Error(v.empty() ? "Malformed" : v.front().law, join_details(v)), violations_(std::move(v)) {}

struct Category::Impl {
  Backend backend = Backend::FinCat;
  std::string name;
  // FinCat
  std::vector<std::string> objects;
  std::vector<std::string> morphs;
  std::vector<Obj> src, tgt;
  std::vector<std::int64_t> ident;
  std::vector<std::int64_t> comp;  // g * M + f -> h or -1
  std::vector<std::vector<Morphism>> homs;
  // CycGrp hom cache
  mutable std::mutex mu;
  mutable std::map<std::pair<Obj, Obj>, std::vector<Morphism>> cache;

  std::size_t M() const { return morphs.size(); }
};

Category::Category() : Category(cycgrp()) {}
Category::Category(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Category Category::cycgrp() {
  static const Category c = [] {
    auto impl = std::make_shared<Impl>();
    impl->backend = Backend::CycGrp;
    impl->name = "cycgrp";
    return Category(impl);
  }();
  return c;
}

Category::Backend Category::backend() const { return impl_->backend; }
const std::string& Category::name() const { return impl_->name; }

Category Category::renamed(std::string name) const {
  auto impl = std::make_shared<Impl>();
  impl->backend = impl_->backend;
  impl->name = std::move(name);
  impl->objects = impl_->objects;
  impl->morphs = impl_->morphs;
  impl->src = impl_->src;
  impl->tgt = impl_->tgt;
  impl->ident = impl_->ident;
  impl->comp = impl_->comp;
  impl->homs = impl_->homs;
  return Category(impl);
}

std::size_t Category::object_count() const {
  if (!is_finite()) throw Error("Unsupported", "object_count of the cyclic-group category");
  return impl_->objects.size();
}

std::size_t Category::morphism_count() const {
  if (!is_finite()) throw Error("Unsupported", "morphism_count of the cyclic-group category");
  return impl_->morphs.size();
}

std::vector<Obj> Category::objects() const {
  std::vector<Obj> out;
  for (std::size_t i = 0; i < object_count(); ++i) out.push_back(static_cast<Obj>(i));
  return out;
}

Morphism Category::morphism_at(std::size_t index) const {
  if (!is_finite() || index >= impl_->morphs.size()) throw Error("Unsupported", "morphism_at");
  return {impl_->src[index], impl_->tgt[index], static_cast<std::int64_t>(index)};
}

bool Category::is_object(Obj a) const {
  if (is_finite()) return a >= 0 && static_cast<std::size_t>(a) < impl_->objects.size();
  return a >= 1 && a <= kMaxModulus;
}

bool Category::is_morphism(const Morphism& m) const {
  if (!is_object(m.src) || !is_object(m.tgt)) return false;
  if (is_finite()) {
    if (m.value < 0 || static_cast<std::size_t>(m.value) >= impl_->M()) return false;
    return impl_->src[static_cast<std::size_t>(m.value)] == m.src &&
           impl_->tgt[static_cast<std::size_t>(m.value)] == m.tgt;
  }
  return m.value >= 0 && m.value < m.tgt && mulmod64(m.value, m.src, m.tgt) == 0;
}

std::int64_t Category::hom_size(Obj a, Obj b) const {
  if (is_finite()) return static_cast<std::int64_t>(hom(a, b).size());
  return gcd64(a, b);
}

const std::vector<Morphism>& Category::hom(Obj a, Obj b) const {
  if (!is_object(a) || !is_object(b)) throw Error("TypeMismatch", "hom of unknown objects");
  if (is_finite()) return impl_->homs[static_cast<std::size_t>(a) * impl_->objects.size() + static_cast<std::size_t>(b)];
  const std::int64_t g = gcd64(a, b);
  if (g > (std::int64_t{1} << 16))
    throw Error("BudgetExceeded", "hom(" + object_name(a) + "," + object_name(b) + ") has " +
                                      std::to_string(g) + " elements");
  std::lock_guard<std::mutex> lock(impl_->mu);
  auto key = std::make_pair(a, b);
  auto it = impl_->cache.find(key);
  if (it != impl_->cache.end()) return it->second;
  std::vector<Morphism> out;
  const std::int64_t step = b / g;
  for (std::int64_t c = 0; c < b; c += step) out.push_back({a, b, c});
  return impl_->cache.emplace(key, std::move(out)).first->second;
}

Morphism Category::identity(Obj a) const {
  if (!is_object(a)) throw Error("TypeMismatch", "identity of unknown object");
  if (is_finite()) return {a, a, impl_->ident[static_cast<std::size_t>(a)]};
  return {a, a, 1 % a};
}

Morphism Category::compose(const Morphism& g, const Morphism& f) const {
  if (f.tgt != g.src)
    throw Error("NonComposable", "cannot compose " + morphism_name(g) + " after " + morphism_name(f));
  if (is_finite()) {
    const std::int64_t h = impl_->comp[static_cast<std::size_t>(g.value) * impl_->M() + static_cast<std::size_t>(f.value)];
    if (h < 0) throw Error("MissingComposite", "no composite " + morphism_name(g) + "." + morphism_name(f));
    return {f.src, g.tgt, h};
  }
  return {f.src, g.tgt, mulmod64(g.value, f.value, g.tgt)};
}

std::string Category::object_name(Obj a) const {
  if (is_finite()) {
    if (a >= 0 && static_cast<std::size_t>(a) < impl_->objects.size()) return impl_->objects[static_cast<std::size_t>(a)];
    return "?";
  }
  return "Z/" + std::to_string(a);
}

std::string Category::morphism_name(const Morphism& m) const {
  if (is_finite()) {
    if (m.value >= 0 && static_cast<std::size_t>(m.value) < impl_->M()) return impl_->morphs[static_cast<std::size_t>(m.value)];
    return "?";
  }
  return std::to_string(m.value);
}

namespace {

std::string strip(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::int64_t parse_int(const std::string& t) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw Error("UnresolvedReference", "expected an integer, got '" + t + "'");
  }
  if (used != t.size()) throw Error("UnresolvedReference", "expected an integer, got '" + t + "'");
  return static_cast<std::int64_t>(v);
}

std::int64_t checked_pow(std::int64_t b, std::int64_t e) {
  i128 r = 1;
  for (std::int64_t i = 0; i < e; ++i) {
    r *= b;
    if (r > kMaxModulus) throw Error("Overflow", "modulus exceeds the supported range");
  }
  return static_cast<std::int64_t>(r);
}

}  // namespace

Obj Category::parse_object(std::string_view text) const {
  const std::string t = strip(text);
  if (is_finite()) {
    for (std::size_t i = 0; i < impl_->objects.size(); ++i)
      if (impl_->objects[i] == t) return static_cast<Obj>(i);
    throw Error("UnresolvedReference", "unknown object '" + t + "' in category " + name());
  }
  std::string body = t;
  if (body.rfind("Z/", 0) == 0) body = body.substr(2);
  auto caret = body.find('^');
  std::int64_t m = 0;
  if (caret == std::string::npos) {
    m = parse_int(body);
  } else {
    std::string e = body.substr(caret + 1);
    if (!e.empty() && e.front() == '(' && e.back() == ')') e = e.substr(1, e.size() - 2);
    m = checked_pow(parse_int(body.substr(0, caret)), parse_int(e));
  }
  if (!is_object(m)) throw Error("UnresolvedReference", "invalid modulus '" + t + "'");
  return m;
}

Morphism Category::parse_morphism(std::string_view text, std::optional<Obj> src, std::optional<Obj> tgt) const {
  const std::string t = strip(text);
  if (is_finite()) {
    for (std::size_t i = 0; i < impl_->morphs.size(); ++i)
      if (impl_->morphs[i] == t) {
        Morphism m{impl_->src[i], impl_->tgt[i], static_cast<std::int64_t>(i)};
        if ((src && *src != m.src) || (tgt && *tgt != m.tgt))
          throw Error("TypeMismatch", "morphism '" + t + "' is " + object_name(m.src) + "->" +
                                          object_name(m.tgt) + ", expected " +
                                          (src ? object_name(*src) : "?") + "->" + (tgt ? object_name(*tgt) : "?"));
        return m;
      }
    throw Error("UnresolvedReference", "unknown morphism '" + t + "' in category " + name());
  }
  if (!src || !tgt) throw Error("TypeMismatch", "cyclic-group morphism '" + t + "' needs a source and target");
  if (t == "id" || t == "canonical") {
    Morphism m{*src, *tgt, 1 % *tgt};
    if (!is_morphism(m)) throw Error("TypeMismatch", "residue 1 is not a homomorphism " + object_name(*src) + "->" + object_name(*tgt));
    return m;
  }
  Morphism m{*src, *tgt, mod64(parse_int(t), *tgt)};
  if (!is_morphism(m))
    throw Error("TypeMismatch", "residue " + t + " is not a homomorphism " + object_name(*src) + "->" + object_name(*tgt));
  return m;
}

bool Category::same_as(const Category& other) const {
  if (impl_ == other.impl_) return true;
  if (impl_->backend != other.impl_->backend) return false;
  if (impl_->backend == Backend::CycGrp) return true;
  return impl_->objects == other.impl_->objects && impl_->morphs == other.impl_->morphs &&
         impl_->src == other.impl_->src && impl_->tgt == other.impl_->tgt && impl_->comp == other.impl_->comp;
}

std::optional<Morphism> Category::first_solution(Obj a, Obj b, const std::vector<Constraint>& cs) const {
  if (is_finite()) {
    for (const auto& h : hom(a, b)) {
      bool ok = true;
      for (const auto& c : cs) {
        Morphism x = h;
        if (c.pre) x = compose(x, *c.pre);
        if (c.post) x = compose(*c.post, x);
        if (!(x == c.rhs)) { ok = false; break; }
      }
      if (ok) return h;
    }
    return std::nullopt;
  }
  // h: Z/a -> Z/b is a residue modulo b with h*a == 0 (mod b).
  auto acc = solve_linear(a, 0, b);
  if (!acc) return std::nullopt;
  for (const auto& c : cs) {
    if (c.pre && (c.pre->tgt != a)) throw Error("NonComposable", "constraint does not compose");
    if (c.post && (c.post->src != b)) throw Error("NonComposable", "constraint does not compose");
    const std::int64_t n = c.rhs.tgt;
    std::int64_t x = 1 % n;
    if (c.post) x = mulmod64(x, c.post->value, n);
    if (c.pre) x = mulmod64(x, c.pre->value, n);
    auto s = solve_linear(x, c.rhs.value, n);
    if (!s) return std::nullopt;
    acc = combine(*acc, *s);
    if (!acc) return std::nullopt;
  }
  Morphism h{a, b, mod64(acc->r, b)};
  // the solution set is b-periodic, so the least residue is the first in hom order
  if (!is_morphism(h)) return std::nullopt;
  return h;
}

std::vector<LawViolation> category_violations(const RawCategory& raw) {
  std::vector<LawViolation> v;
  std::map<std::string, std::size_t> obj, mor;
  for (std::size_t i = 0; i < raw.objects.size(); ++i)
    if (!obj.emplace(raw.objects[i], i).second) v.push_back({"Malformed", "duplicate object " + raw.objects[i]});
  std::vector<std::int64_t> src, tgt;
  for (std::size_t i = 0; i < raw.morphisms.size(); ++i) {
    const auto& a = raw.morphisms[i];
    if (!mor.emplace(a.name, i).second) v.push_back({"Malformed", "duplicate morphism " + a.name});
    auto s = obj.find(a.src), t = obj.find(a.tgt);
    if (s == obj.end() || t == obj.end()) {
      v.push_back({"Malformed", "morphism " + a.name + " references an unknown object"});
      src.push_back(-1);
      tgt.push_back(-1);
    } else {
      src.push_back(static_cast<std::int64_t>(s->second));
      tgt.push_back(static_cast<std::int64_t>(t->second));
    }
  }
  if (!v.empty()) return v;
  const std::size_t n = raw.objects.size(), m = raw.morphisms.size();
  std::vector<std::int64_t> ident(n, -1);
  for (const auto& [o, f] : raw.identities) {
    auto oi = obj.find(o);
    auto fi = mor.find(f);
    if (oi == obj.end() || fi == mor.end()) {
      v.push_back({"Malformed", "identity entry " + o + "=" + f + " references an unknown name"});
      continue;
    }
    if (src[fi->second] != static_cast<std::int64_t>(oi->second) || tgt[fi->second] != static_cast<std::int64_t>(oi->second)) {
      v.push_back({"TypeMismatch", "identity " + f + " of " + o + " must be an endomorphism of " + o});
      continue;
    }
    if (ident[oi->second] >= 0 && ident[oi->second] != static_cast<std::int64_t>(fi->second))
      v.push_back({"Malformed", "conflicting identities for " + o});
    ident[oi->second] = static_cast<std::int64_t>(fi->second);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (ident[i] < 0) v.push_back({"IdentityViolation", "object " + raw.objects[i] + " has no identity"});

  std::vector<std::int64_t> comp(m * m, -1);
  for (const auto& e : raw.composites) {
    auto g = mor.find(e.g), f = mor.find(e.f), h = mor.find(e.h);
    if (g == mor.end() || f == mor.end() || h == mor.end()) {
      v.push_back({"Malformed", "composite " + e.g + "." + e.f + "=" + e.h + " references an unknown morphism"});
      continue;
    }
    if (tgt[f->second] != src[g->second]) {
      v.push_back({"TypeMismatch", e.g + "." + e.f + " is not composable"});
      continue;
    }
    if (src[h->second] != src[f->second] || tgt[h->second] != tgt[g->second]) {
      v.push_back({"TypeMismatch", e.g + "." + e.f + " = " + e.h + " must lie in hom(" +
                                       raw.objects[static_cast<std::size_t>(src[f->second])] + "," +
                                       raw.objects[static_cast<std::size_t>(tgt[g->second])] + ")"});
      continue;
    }
    auto& slot = comp[g->second * m + f->second];
    if (slot >= 0 && slot != static_cast<std::int64_t>(h->second)) {
      v.push_back({"Malformed", "conflicting composites for " + e.g + "." + e.f});
      continue;
    }
    slot = static_cast<std::int64_t>(h->second);
  }
  for (std::size_t g = 0; g < m; ++g)
    for (std::size_t f = 0; f < m; ++f)
      if (tgt[f] == src[g] && comp[g * m + f] < 0)
        v.push_back({"MissingComposite", raw.morphisms[g].name + "." + raw.morphisms[f].name});
  const bool ids_ok = std::all_of(ident.begin(), ident.end(), [](std::int64_t x) { return x >= 0; });
  if (ids_ok) {
    for (std::size_t f = 0; f < m; ++f) {
      const auto it = static_cast<std::size_t>(ident[static_cast<std::size_t>(tgt[f])]);
      const auto is = static_cast<std::size_t>(ident[static_cast<std::size_t>(src[f])]);
      const std::int64_t left = comp[it * m + f], right = comp[f * m + is];
      if ((left >= 0 && left != static_cast<std::int64_t>(f)) || (right >= 0 && right != static_cast<std::int64_t>(f)))
        v.push_back({"IdentityViolation", raw.morphisms[f].name});
    }
  }
  for (std::size_t h = 0; h < m; ++h)
    for (std::size_t g = 0; g < m; ++g) {
      if (tgt[g] != src[h]) continue;
      const std::int64_t hg = comp[h * m + g];
      for (std::size_t f = 0; f < m; ++f) {
        if (tgt[f] != src[g]) continue;
        const std::int64_t gf = comp[g * m + f];
        if (hg < 0 || gf < 0) continue;
        const std::int64_t a = comp[static_cast<std::size_t>(hg) * m + f];
        const std::int64_t b = comp[h * m + static_cast<std::size_t>(gf)];
        if (a >= 0 && b >= 0 && a != b)
          v.push_back({"AssociativityViolation",
                       "(" + raw.morphisms[h].name + "," + raw.morphisms[g].name + "," + raw.morphisms[f].name + ")"});
      }
    }
  return v;
}

Category validate_category(const RawCategory& raw, std::string name) {
  auto v = category_violations(raw);
  if (!v.empty()) throw CategoryError(std::move(v));
  auto impl = std::make_shared<Category::Impl>();
  impl->backend = Category::Backend::FinCat;
  impl->name = std::move(name);
  impl->objects = raw.objects;
  std::map<std::string, std::size_t> obj, mor;
  for (std::size_t i = 0; i < raw.objects.size(); ++i) obj[raw.objects[i]] = i;
  for (std::size_t i = 0; i < raw.morphisms.size(); ++i) {
    mor[raw.morphisms[i].name] = i;
    impl->morphs.push_back(raw.morphisms[i].name);
    impl->src.push_back(static_cast<Obj>(obj[raw.morphisms[i].src]));
    impl->tgt.push_back(static_cast<Obj>(obj[raw.morphisms[i].tgt]));
  }
  const std::size_t n = raw.objects.size(), m = raw.morphisms.size();
  impl->ident.assign(n, -1);
  for (const auto& [o, f] : raw.identities) impl->ident[obj[o]] = static_cast<std::int64_t>(mor[f]);
  impl->comp.assign(m * m, -1);
  for (const auto& e : raw.composites) impl->comp[mor[e.g] * m + mor[e.f]] = static_cast<std::int64_t>(mor[e.h]);
  impl->homs.assign(n * n, {});
  for (std::size_t i = 0; i < m; ++i)
    impl->homs[static_cast<std::size_t>(impl->src[i]) * n + static_cast<std::size_t>(impl->tgt[i])].push_back(
        {impl->src[i], impl->tgt[i], static_cast<std::int64_t>(i)});
  return Category(impl);
}

Morphism compose_morphisms(const Category& c, const Morphism& g, const Morphism& f) { return c.compose(g, f); }

std::optional<Morphism> find_inverse(const Category& c, const Morphism& f) {
  if (!c.is_morphism(f)) throw Error("TypeMismatch", "not a morphism of " + c.name());
  if (c.is_finite()) {
    for (const auto& g : c.hom(f.tgt, f.src))
      if (c.compose(g, f) == c.identity(f.src) && c.compose(f, g) == c.identity(f.tgt)) return g;
    return std::nullopt;
  }
  if (f.src != f.tgt) return std::nullopt;
  const std::int64_t n = f.tgt;
  if (n == 1) return c.identity(n);
  if (gcd64(f.value, n) != 1) return std::nullopt;
  return Morphism{n, n, inverse_mod(f.value, n)};
}

}  // namespace procat
