#include "procat/order.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

namespace procat {

namespace {

Error poset_error(const std::string& msg) { return Error("PosetError", msg); }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

struct IndexPoset::Impl {
  Kind kind = Kind::Finite;
  std::size_t arity = 1;
  // finite kinds (explicit finite and products of finite factors)
  bool finite = false;
  std::vector<std::string> labels;
  std::vector<Elem> elems;
  std::map<Elem, std::size_t> pos;
  std::vector<char> le;
  std::vector<Elem> linext;
  // product
  std::shared_ptr<const Impl> left, right;
  // rule
  RuleOps rule;

  bool leq_idx(std::size_t a, std::size_t b) const { return le[a * elems.size() + b] != 0; }
};

IndexPoset::IndexPoset() : IndexPoset(singleton()) {}
IndexPoset::IndexPoset(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

namespace {

void finish_finite(IndexPoset::Kind, std::vector<Elem>&, std::vector<Elem>& linext,
                   const std::vector<char>& le, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> preds(n, 0);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t a = 0; a < n; ++a)
      if (le[a * n + b]) ++preds[b];
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return preds[x] < preds[y]; });
  linext.clear();
  for (auto i : order) linext.push_back(Elem(static_cast<std::int64_t>(i)));
}

}  // namespace

IndexPoset IndexPoset::finite_raw(std::vector<std::string> labels,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& relation) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Finite;
  impl->finite = true;
  const std::size_t n = labels.size();
  if (n == 0) throw poset_error("a finite poset needs at least one element");
  {
    std::vector<std::string> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw poset_error("duplicate element label");
  }
  impl->labels = std::move(labels);
  impl->le.assign(n * n, 0);
  for (auto [a, b] : relation) {
    if (a >= n || b >= n) throw poset_error("relation pair references an unknown element");
    impl->le[a * n + b] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    impl->elems.push_back(Elem(static_cast<std::int64_t>(i)));
    impl->pos[impl->elems.back()] = i;
  }
  std::vector<Elem> unused;
  finish_finite(Kind::Finite, unused, impl->linext, impl->le, n);
  return IndexPoset(impl);
}

IndexPoset IndexPoset::finite(std::vector<std::string> labels,
                              const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const std::size_t n = labels.size();
  std::vector<char> le(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) le[i * n + i] = 1;
  for (auto [a, b] : pairs) {
    if (a >= n || b >= n) throw poset_error("relation pair references an unknown element");
    le[a * n + b] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (le[i * n + k])
        for (std::size_t j = 0; j < n; ++j)
          if (le[k * n + j]) le[i * n + j] = 1;
  std::vector<std::pair<std::size_t, std::size_t>> rel;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (le[i * n + j]) rel.emplace_back(i, j);
  return finite_raw(std::move(labels), rel);
}

IndexPoset IndexPoset::chain(std::size_t n) {
  std::vector<std::string> labels;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back(std::to_string(i + 1));
    if (i > 0) pairs.emplace_back(i - 1, i);
  }
  return finite(std::move(labels), pairs);
}

IndexPoset IndexPoset::singleton() {
  static const IndexPoset one = [] {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Finite;
    impl->finite = true;
    impl->labels = {"1"};
    impl->le = {1};
    impl->elems = {Elem(0)};
    impl->pos[Elem(0)] = 0;
    impl->linext = {Elem(0)};
    return IndexPoset(impl);
  }();
  return one;
}

IndexPoset IndexPoset::omega() {
  static const IndexPoset w = [] {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Omega;
    impl->finite = false;
    return IndexPoset(impl);
  }();
  return w;
}

IndexPoset IndexPoset::product(const IndexPoset& left, const IndexPoset& right) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Product;
  impl->left = left.impl_;
  impl->right = right.impl_;
  impl->arity = left.arity() + right.arity();
  impl->finite = left.is_finite() && right.is_finite();
  if (impl->finite) {
    for (const auto& l : left.elements())
      for (const auto& r : right.elements()) impl->elems.push_back(pair(l, r));
    const std::size_t n = impl->elems.size();
    impl->le.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      impl->pos[impl->elems[i]] = i;
      for (std::size_t j = 0; j < n; ++j) {
        const auto& a = impl->elems[i];
        const auto& b = impl->elems[j];
        Elem al(std::vector<std::int64_t>(a.c.begin(), a.c.begin() + left.arity()));
        Elem ar(std::vector<std::int64_t>(a.c.begin() + left.arity(), a.c.end()));
        Elem bl(std::vector<std::int64_t>(b.c.begin(), b.c.begin() + left.arity()));
        Elem br(std::vector<std::int64_t>(b.c.begin() + left.arity(), b.c.end()));
        impl->le[i * n + j] = (left.leq(al, bl) && right.leq(ar, br)) ? 1 : 0;
      }
    }
    std::vector<Elem> unused;
    finish_finite(Kind::Product, unused, impl->linext, impl->le, n);
    // linext holds positions; translate to elements
    for (auto& e : impl->linext) e = impl->elems[static_cast<std::size_t>(e.c[0])];
  }
  return IndexPoset(impl);
}

IndexPoset IndexPoset::rule(RuleOps ops) {
  if (!ops.leq || !ops.join || !ops.below) throw poset_error("rule-backed poset needs leq, join and below");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Rule;
  impl->rule = std::move(ops);
  return IndexPoset(impl);
}

IndexPoset::Kind IndexPoset::kind() const { return impl_->kind; }
bool IndexPoset::is_finite() const { return impl_->finite; }
std::size_t IndexPoset::arity() const { return impl_->arity; }

std::size_t IndexPoset::size() const {
  if (!impl_->finite) throw poset_error("size() of an infinite poset");
  return impl_->elems.size();
}

const std::vector<Elem>& IndexPoset::elements() const {
  if (!impl_->finite) throw poset_error("elements() of an infinite poset");
  return impl_->elems;
}

std::size_t IndexPoset::index_of(const Elem& e) const {
  auto it = impl_->pos.find(e);
  if (it == impl_->pos.end()) throw poset_error("element not in poset: " + label(e));
  return it->second;
}

bool IndexPoset::contains(const Elem& e) const {
  if (e.c.size() != impl_->arity) return false;
  switch (impl_->kind) {
    case Kind::Finite: return impl_->pos.count(e) > 0;
    case Kind::Omega: return e.c[0] >= 0;
    case Kind::Rule: return e.c[0] >= 0;
    case Kind::Product: {
      IndexPoset l(impl_->left), r(impl_->right);
      return l.contains(left_part(e)) && r.contains(right_part(e));
    }
  }
  return false;
}

bool IndexPoset::leq(const Elem& a, const Elem& b) const {
  switch (impl_->kind) {
    case Kind::Finite: return impl_->leq_idx(index_of(a), index_of(b));
    case Kind::Omega: return a.c[0] <= b.c[0];
    case Kind::Rule: return impl_->rule.leq(a.c[0], b.c[0]);
    case Kind::Product: {
      if (impl_->finite) return impl_->leq_idx(index_of(a), index_of(b));
      IndexPoset l(impl_->left), r(impl_->right);
      return l.leq(left_part(a), left_part(b)) && r.leq(right_part(a), right_part(b));
    }
  }
  return false;
}

Elem IndexPoset::upper_bound(std::span<const Elem> s) const {
  if (s.empty()) throw poset_error("upper_bound of an empty set");
  if (impl_->finite) {
    const std::size_t n = impl_->elems.size();
    std::vector<std::size_t> idx;
    for (const auto& e : s) idx.push_back(index_of(e));
    std::vector<std::size_t> ubs;
    for (std::size_t u = 0; u < n; ++u) {
      bool ok = true;
      for (auto i : idx)
        if (!impl_->leq_idx(i, u)) { ok = false; break; }
      if (ok) ubs.push_back(u);
    }
    if (ubs.empty()) throw Error("NotDirected", "no upper bound exists in " + describe());
    for (auto u : ubs) {
      bool minimal = true;
      for (auto v : ubs)
        if (v != u && impl_->leq_idx(v, u)) { minimal = false; break; }
      if (minimal) return impl_->elems[u];
    }
    return impl_->elems[ubs.front()];
  }
  switch (impl_->kind) {
    case Kind::Omega: {
      std::int64_t m = s[0].c[0];
      for (const auto& e : s) m = std::max(m, e.c[0]);
      return Elem(m);
    }
    case Kind::Rule: {
      std::int64_t m = s[0].c[0];
      for (const auto& e : s) m = impl_->rule.join(m, e.c[0]);
      return Elem(m);
    }
    case Kind::Product: {
      IndexPoset l(impl_->left), r(impl_->right);
      std::vector<Elem> ls, rs;
      for (const auto& e : s) {
        ls.push_back(left_part(e));
        rs.push_back(right_part(e));
      }
      return pair(l.upper_bound(ls), r.upper_bound(rs));
    }
    default: break;
  }
  throw poset_error("upper_bound: unsupported poset");
}

Elem IndexPoset::join(const Elem& a, const Elem& b) const {
  const Elem s[2] = {a, b};
  return upper_bound(s);
}

std::vector<Elem> IndexPoset::below(const Elem& e) const {
  std::vector<Elem> out;
  if (impl_->finite) {
    const std::size_t b = index_of(e);
    for (std::size_t a = 0; a < impl_->elems.size(); ++a)
      if (impl_->leq_idx(a, b)) out.push_back(impl_->elems[a]);
    return out;
  }
  switch (impl_->kind) {
    case Kind::Omega:
      for (std::int64_t i = 0; i <= e.c[0]; ++i) out.push_back(Elem(i));
      return out;
    case Kind::Rule:
      for (auto v : impl_->rule.below(e.c[0])) out.push_back(Elem(v));
      std::sort(out.begin(), out.end());
      return out;
    case Kind::Product: {
      IndexPoset l(impl_->left), r(impl_->right);
      auto lb = l.below(left_part(e));
      auto rb = r.below(right_part(e));
      for (const auto& x : lb)
        for (const auto& y : rb) out.push_back(pair(x, y));
      return out;
    }
    default: break;
  }
  return out;
}

std::vector<Elem> IndexPoset::ascent(const Elem& base, std::int64_t horizon) const {
  std::vector<Elem> out;
  if (impl_->finite) {
    for (const auto& u : impl_->linext)
      if (leq(base, u)) out.push_back(u);
    return out;
  }
  switch (impl_->kind) {
    case Kind::Omega:
      for (std::int64_t i = 0; i < horizon; ++i) out.push_back(Elem(base.c[0] + i));
      return out;
    case Kind::Rule: {
      Elem cur = base;
      for (std::int64_t i = 0; i < horizon; ++i) {
        if (out.empty() || !(out.back() == cur)) out.push_back(cur);
        cur = Elem(impl_->rule.join(cur.c[0], i));
      }
      return out;
    }
    case Kind::Product: {
      IndexPoset l(impl_->left), r(impl_->right);
      auto la = l.ascent(left_part(base), horizon);
      auto ra = r.ascent(right_part(base), horizon);
      for (std::int64_t i = 0; i < horizon; ++i) {
        const auto& x = la[std::min<std::size_t>(static_cast<std::size_t>(i), la.size() - 1)];
        const auto& y = ra[std::min<std::size_t>(static_cast<std::size_t>(i), ra.size() - 1)];
        Elem e = pair(x, y);
        if (out.empty() || !(out.back() == e)) out.push_back(e);
      }
      return out;
    }
    default: break;
  }
  return out;
}

const std::vector<Elem>& IndexPoset::linear_extension() const {
  if (!impl_->finite) throw poset_error("linear_extension() of an infinite poset");
  return impl_->linext;
}

std::vector<Elem> IndexPoset::sample(std::int64_t side) const {
  if (impl_->finite) return impl_->elems;
  std::vector<Elem> out;
  switch (impl_->kind) {
    case Kind::Omega:
    case Kind::Rule:
      for (std::int64_t i = 0; i < side; ++i) out.push_back(Elem(i));
      return out;
    case Kind::Product: {
      IndexPoset l(impl_->left), r(impl_->right);
      for (const auto& x : l.sample(side))
        for (const auto& y : r.sample(side)) out.push_back(pair(x, y));
      return out;
    }
    default: break;
  }
  return out;
}

std::optional<Elem> IndexPoset::bottom() const {
  if (impl_->finite) {
    for (const auto& b : impl_->elems) {
      bool ok = true;
      for (const auto& x : impl_->elems)
        if (!leq(b, x)) { ok = false; break; }
      if (ok) return b;
    }
    return std::nullopt;
  }
  switch (impl_->kind) {
    case Kind::Omega: return Elem(0);
    case Kind::Product: {
      auto l = left().bottom();
      auto r = right().bottom();
      if (l && r) return pair(*l, *r);
      return std::nullopt;
    }
    case Kind::Rule: {
      auto b = impl_->rule.below(0);
      if (b.size() == 1) {
        // 0 is minimal; it is the bottom iff 0 <= n for the sampled n
        for (std::int64_t i = 0; i < 16; ++i)
          if (!impl_->rule.leq(0, i)) return std::nullopt;
        return Elem(0);
      }
      return std::nullopt;
    }
    default: break;
  }
  return std::nullopt;
}

IndexPoset IndexPoset::left() const {
  if (impl_->kind != Kind::Product) throw poset_error("left() of a non-product poset");
  return IndexPoset(impl_->left);
}

IndexPoset IndexPoset::right() const {
  if (impl_->kind != Kind::Product) throw poset_error("right() of a non-product poset");
  return IndexPoset(impl_->right);
}

Elem IndexPoset::left_part(const Elem& e) const {
  const std::size_t la = impl_->left->arity;
  return Elem(std::vector<std::int64_t>(e.c.begin(), e.c.begin() + static_cast<std::ptrdiff_t>(la)));
}

Elem IndexPoset::right_part(const Elem& e) const {
  const std::size_t la = impl_->left->arity;
  return Elem(std::vector<std::int64_t>(e.c.begin() + static_cast<std::ptrdiff_t>(la), e.c.end()));
}

Elem IndexPoset::pair(const Elem& l, const Elem& r) {
  std::vector<std::int64_t> c = l.c;
  c.insert(c.end(), r.c.begin(), r.c.end());
  return Elem(std::move(c));
}

std::string IndexPoset::label(const Elem& e) const {
  switch (impl_->kind) {
    case Kind::Finite: {
      if (e.c.size() == 1 && e.c[0] >= 0 && static_cast<std::size_t>(e.c[0]) < impl_->labels.size())
        return impl_->labels[static_cast<std::size_t>(e.c[0])];
      return "?";
    }
    case Kind::Omega: return std::to_string(e.c.at(0));
    case Kind::Rule:
      return impl_->rule.label ? impl_->rule.label(e.c.at(0)) : std::to_string(e.c.at(0));
    case Kind::Product: {
      IndexPoset l(impl_->left), r(impl_->right);
      return "(" + l.label(left_part(e)) + "," + r.label(right_part(e)) + ")";
    }
  }
  return "?";
}

Elem IndexPoset::parse(std::string_view text) const {
  const std::string t = trim(text);
  switch (impl_->kind) {
    case Kind::Finite: {
      for (std::size_t i = 0; i < impl_->labels.size(); ++i)
        if (impl_->labels[i] == t) return Elem(static_cast<std::int64_t>(i));
      throw Error("UnresolvedReference", "unknown element '" + t + "' of " + describe());
    }
    case Kind::Omega:
    case Kind::Rule: {
      if (impl_->kind == Kind::Rule && impl_->rule.label) {
        for (std::int64_t i = 0; i < 4096; ++i)
          if (impl_->rule.label(i) == t) return Elem(i);
      }
      try {
        std::size_t used = 0;
        long long v = std::stoll(t, &used);
        if (used != t.size() || v < 0) throw std::invalid_argument("x");
        return Elem(static_cast<std::int64_t>(v));
      } catch (const std::exception&) {
        throw Error("UnresolvedReference", "expected a natural number, got '" + t + "'");
      }
    }
    case Kind::Product: {
      if (t.size() < 2 || t.front() != '(' || t.back() != ')')
        throw Error("UnresolvedReference", "expected a pair '(a,b)', got '" + t + "'");
      const std::string inner = t.substr(1, t.size() - 2);
      int depth = 0;
      for (std::size_t i = 0; i < inner.size(); ++i) {
        if (inner[i] == '(') ++depth;
        if (inner[i] == ')') --depth;
        if (inner[i] == ',' && depth == 0) {
          IndexPoset l(impl_->left), r(impl_->right);
          return pair(l.parse(inner.substr(0, i)), r.parse(inner.substr(i + 1)));
        }
      }
      throw Error("UnresolvedReference", "expected a pair '(a,b)', got '" + t + "'");
    }
  }
  throw Error("UnresolvedReference", "cannot parse element '" + t + "'");
}

std::string IndexPoset::describe() const {
  switch (impl_->kind) {
    case Kind::Finite: {
      std::string s = "{";
      for (std::size_t i = 0; i < impl_->labels.size(); ++i) s += (i ? "," : "") + impl_->labels[i];
      return s + "}";
    }
    case Kind::Omega: return "omega";
    case Kind::Rule: return "rule(" + impl_->rule.name + ")";
    case Kind::Product: {
      IndexPoset l(impl_->left), r(impl_->right);
      return "product(" + l.describe() + "," + r.describe() + ")";
    }
  }
  return "?";
}

bool IndexPoset::same_as(const IndexPoset& other) const {
  if (impl_ == other.impl_) return true;
  if (impl_->kind != other.impl_->kind) return false;
  switch (impl_->kind) {
    case Kind::Finite: return impl_->labels == other.impl_->labels && impl_->le == other.impl_->le;
    case Kind::Omega: return true;
    case Kind::Rule: return false;
    case Kind::Product:
      return IndexPoset(impl_->left).same_as(IndexPoset(other.impl_->left)) &&
             IndexPoset(impl_->right).same_as(IndexPoset(other.impl_->right));
  }
  return false;
}

bool IndexPoset::is_omega_power() const {
  if (impl_->kind == Kind::Omega) return true;
  if (impl_->kind == Kind::Product)
    return IndexPoset(impl_->left).is_omega_power() && IndexPoset(impl_->right).is_omega_power();
  return false;
}

// ---------------------------------------------------------------------------
// poset_properties

namespace {

PosetReport finite_report(const IndexPoset& p) {
  PosetReport r;
  const auto& el = p.elements();
  const std::size_t n = el.size();
  auto lab = [&](const Elem& e) { return p.label(e); };

  r.partial_order = Verdict::holds({{"certificate", "exhaustive scan"}});
  for (std::size_t a = 0; a < n && r.partial_order.is_holds(); ++a)
    if (!p.leq(el[a], el[a]))
      r.partial_order = Verdict::fails({{"law", "reflexivity"}, {"element", lab(el[a])}});
  for (std::size_t a = 0; a < n && r.partial_order.is_holds(); ++a)
    for (std::size_t b = a + 1; b < n && r.partial_order.is_holds(); ++b)
      if (p.leq(el[a], el[b]) && p.leq(el[b], el[a]))
        r.partial_order = Verdict::fails(
            {{"law", "antisymmetry"}, {"pair", Json::array({lab(el[a]), lab(el[b])})}});
  for (std::size_t a = 0; a < n && r.partial_order.is_holds(); ++a)
    for (std::size_t b = 0; b < n && r.partial_order.is_holds(); ++b)
      if (p.leq(el[a], el[b]))
        for (std::size_t c = 0; c < n; ++c)
          if (p.leq(el[b], el[c]) && !p.leq(el[a], el[c])) {
            r.partial_order = Verdict::fails(
                {{"law", "transitivity"},
                 {"triple", Json::array({lab(el[a]), lab(el[b]), lab(el[c])})}});
            break;
          }

  r.directed = Verdict::holds({{"certificate", "exhaustive pair scan"}});
  for (std::size_t a = 0; a < n && r.directed.is_holds(); ++a)
    for (std::size_t b = a + 1; b < n && r.directed.is_holds(); ++b) {
      bool found = false;
      for (std::size_t u = 0; u < n && !found; ++u)
        found = p.leq(el[a], el[u]) && p.leq(el[b], el[u]);
      if (!found)
        r.directed = Verdict::fails({{"pair", Json::array({lab(el[a]), lab(el[b])})},
                                     {"reason", "no upper bound"}});
    }

  r.cofinite = Verdict::holds({{"certificate", "finite"}});

  r.has_max = Verdict::fails({{"reason", "no element dominates every element"}});
  for (std::size_t m = 0; m < n; ++m) {
    bool top = true;
    for (std::size_t x = 0; x < n && top; ++x) top = p.leq(el[x], el[m]);
    if (top) {
      r.has_max = Verdict::holds({{"max", lab(el[m])}});
      break;
    }
  }

  if (!r.partial_order.is_holds()) {
    r.well_ordered = Verdict::fails({{"reason", "not a partial order"}});
  } else {
    r.well_ordered = Verdict::holds({{"certificate", "finite chain"}});
    for (std::size_t a = 0; a < n && r.well_ordered.is_holds(); ++a)
      for (std::size_t b = a + 1; b < n && r.well_ordered.is_holds(); ++b)
        if (!p.leq(el[a], el[b]) && !p.leq(el[b], el[a]))
          r.well_ordered = Verdict::fails({{"incomparable", Json::array({lab(el[a]), lab(el[b])})}});
  }
  return r;
}

}  // namespace

PosetReport poset_properties(const IndexPoset& p, const Limits& limits) {
  if (p.is_finite()) return finite_report(p);
  PosetReport r;
  switch (p.kind()) {
    case IndexPoset::Kind::Omega:
      r.partial_order = Verdict::holds({{"certificate", "axiomatic (omega)"}});
      r.directed = Verdict::holds({{"certificate", "axiomatic (omega)"}});
      r.cofinite = Verdict::holds({{"certificate", "axiomatic (omega)"}});
      r.has_max = Verdict::fails({{"reason", "n < n+1 for every n"}});
      r.well_ordered = Verdict::holds({{"certificate", "axiomatic (omega)"}});
      return r;
    case IndexPoset::Kind::Product: {
      auto l = poset_properties(p.left(), limits);
      auto rr = poset_properties(p.right(), limits);
      auto both = [](const Verdict& a, const Verdict& b, const char* what) {
        Outcome o = meet(a.outcome, b.outcome);
        Json ev = {{"left", a.evidence}, {"right", b.evidence}, {"rule", what}};
        if (o == Outcome::Holds) return Verdict::holds(ev);
        if (o == Outcome::Fails) return Verdict::fails(ev);
        return Verdict::inconclusive(std::max(a.horizon, b.horizon), ev);
      };
      r.partial_order = both(l.partial_order, rr.partial_order, "coordinatewise");
      r.directed = both(l.directed, rr.directed, "coordinatewise");
      r.cofinite = both(l.cofinite, rr.cofinite, "coordinatewise");
      r.has_max = both(l.has_max, rr.has_max, "coordinatewise");
      const bool ls = p.left().is_finite() && p.left().size() == 1;
      const bool rs = p.right().is_finite() && p.right().size() == 1;
      if (ls) r.well_ordered = rr.well_ordered;
      else if (rs) r.well_ordered = l.well_ordered;
      else
        r.well_ordered = Verdict::fails({{"reason", "product of two non-trivial posets is not total"}});
      return r;
    }
    case IndexPoset::Kind::Rule: {
      const std::int64_t side = std::min<std::int64_t>(limits.horizon, 16);
      auto s = p.sample(side);
      r.partial_order = Verdict::inconclusive(side, {{"checked", "laws on sampled prefix"}});
      for (const auto& a : s) {
        if (!p.leq(a, a)) {
          r.partial_order = Verdict::fails({{"law", "reflexivity"}, {"element", p.label(a)}});
          break;
        }
        for (const auto& b : s) {
          if (!(a == b) && p.leq(a, b) && p.leq(b, a)) {
            r.partial_order = Verdict::fails(
                {{"law", "antisymmetry"}, {"pair", Json::array({p.label(a), p.label(b)})}});
          }
        }
      }
      r.directed = Verdict::holds({{"certificate", "constructive join procedure"}});
      for (const auto& a : s)
        for (const auto& b : s) {
          Elem u = p.join(a, b);
          if (!p.leq(a, u) || !p.leq(b, u)) {
            r.directed = Verdict::fails(
                {{"pair", Json::array({p.label(a), p.label(b)})}, {"reason", "join is not an upper bound"}});
          }
        }
      r.cofinite = Verdict::holds({{"certificate", "predecessor enumerator"}});
      r.has_max = Verdict::inconclusive(side);
      r.well_ordered = Verdict::inconclusive(side);
      return r;
    }
    default: break;
  }
  return r;
}

Json to_json(const PosetReport& r) {
  return {{"partial_order", to_json(r.partial_order)},
          {"directed", to_json(r.directed)},
          {"cofinite", to_json(r.cofinite)},
          {"has_max", to_json(r.has_max)},
          {"well_ordered", to_json(r.well_ordered)}};
}

// ---------------------------------------------------------------------------
// IndexFunction

struct IndexFunction::Impl {
  IndexPoset dom, cod;
  std::vector<Elem> table;  // finite domain
  std::optional<AffineMap> affine;
  std::function<Elem(const Elem&)> fn;
  bool identity = false;
  std::string desc;
};

IndexFunction::IndexFunction() : IndexFunction(identity(IndexPoset::singleton())) {}
IndexFunction::IndexFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

namespace {

Elem apply_affine(const AffineMap& m, const Elem& x) {
  std::vector<std::int64_t> out;
  out.reserve(m.size());
  for (const auto& t : m) out.push_back(t.src < 0 ? t.add : t.mul * x.c.at(static_cast<std::size_t>(t.src)) + t.add);
  return Elem(std::move(out));
}

std::string describe_affine(const AffineMap& m, std::size_t dom_arity) {
  auto var = [&](int src) {
    return dom_arity == 1 ? std::string("n") : "n" + std::to_string(src);
  };
  std::vector<std::string> parts;
  for (const auto& t : m) {
    std::string s;
    if (t.src < 0 || t.mul == 0) {
      s = std::to_string(t.add);
    } else {
      s = (t.mul == 1 ? "" : std::to_string(t.mul)) + var(t.src);
      if (t.add > 0) s += "+" + std::to_string(t.add);
      if (t.add < 0) s += std::to_string(t.add);
    }
    parts.push_back(s);
  }
  if (parts.size() == 1) return parts[0];
  std::string s = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
  return s + ")";
}

}  // namespace

IndexFunction IndexFunction::table(IndexPoset dom, IndexPoset cod, std::vector<Elem> values) {
  if (!dom.is_finite()) throw Error("IndexFunctionError", "table index function needs a finite domain");
  if (values.size() != dom.size()) throw Error("IndexFunctionError", "index function is not total");
  for (const auto& v : values)
    if (!cod.contains(v)) throw Error("IndexFunctionError", "index function value outside codomain");
  auto impl = std::make_shared<Impl>();
  impl->dom = std::move(dom);
  impl->cod = std::move(cod);
  impl->table = std::move(values);
  bool ident = impl->dom.same_as(impl->cod);
  for (std::size_t i = 0; ident && i < impl->table.size(); ++i)
    ident = impl->table[i] == impl->dom.elements()[i];
  impl->identity = ident;
  return IndexFunction(impl);
}

IndexFunction IndexFunction::affine(IndexPoset dom, IndexPoset cod, AffineMap map) {
  if (map.size() != cod.arity()) throw Error("IndexFunctionError", "affine map arity mismatch");
  for (const auto& t : map)
    if (t.src >= static_cast<int>(dom.arity())) throw Error("IndexFunctionError", "affine map source coordinate out of range");
  if (dom.is_finite()) {
    std::vector<Elem> vals;
    for (const auto& e : dom.elements()) vals.push_back(apply_affine(map, e));
    return table(std::move(dom), std::move(cod), std::move(vals));
  }
  auto impl = std::make_shared<Impl>();
  impl->desc = describe_affine(map, dom.arity());
  bool ident = dom.same_as(cod) && map.size() == dom.arity();
  for (std::size_t i = 0; ident && i < map.size(); ++i)
    ident = map[i].src == static_cast<int>(i) && map[i].mul == 1 && map[i].add == 0;
  impl->identity = ident;
  impl->dom = std::move(dom);
  impl->cod = std::move(cod);
  impl->affine = std::move(map);
  return IndexFunction(impl);
}

IndexFunction IndexFunction::rule(IndexPoset dom, IndexPoset cod, std::function<Elem(const Elem&)> fn,
                                  std::string description) {
  if (dom.is_finite()) {
    std::vector<Elem> vals;
    for (const auto& e : dom.elements()) vals.push_back(fn(e));
    return table(std::move(dom), std::move(cod), std::move(vals));
  }
  auto impl = std::make_shared<Impl>();
  impl->dom = std::move(dom);
  impl->cod = std::move(cod);
  impl->fn = std::move(fn);
  impl->desc = std::move(description);
  return IndexFunction(impl);
}

IndexFunction IndexFunction::identity(IndexPoset p) {
  if (p.is_finite()) return table(p, p, p.elements());
  auto impl = std::make_shared<Impl>();
  impl->dom = p;
  impl->cod = p;
  impl->identity = true;
  impl->desc = "id";
  if (p.is_omega_power()) {
    AffineMap m;
    for (std::size_t i = 0; i < p.arity(); ++i) m.push_back({static_cast<int>(i), 1, 0});
    impl->affine = m;
  }
  return IndexFunction(impl);
}

Elem IndexFunction::operator()(const Elem& e) const {
  if (impl_->identity) return e;
  if (!impl_->table.empty()) return impl_->table[impl_->dom.index_of(e)];
  if (impl_->affine) return apply_affine(*impl_->affine, e);
  return impl_->fn(e);
}

const IndexPoset& IndexFunction::domain() const { return impl_->dom; }
const IndexPoset& IndexFunction::codomain() const { return impl_->cod; }
const std::optional<AffineMap>& IndexFunction::affine_map() const { return impl_->affine; }
bool IndexFunction::is_identity() const { return impl_->identity; }

std::string IndexFunction::describe() const {
  if (!impl_->table.empty()) {
    std::string s;
    const auto& el = impl_->dom.elements();
    for (std::size_t i = 0; i < el.size(); ++i)
      s += (i ? ", " : "") + impl_->dom.label(el[i]) + "->" + impl_->cod.label(impl_->table[i]);
    return s;
  }
  return impl_->desc;
}

Json IndexFunction::to_json() const {
  if (!impl_->table.empty()) {
    Json m = Json::object();
    const auto& el = impl_->dom.elements();
    for (std::size_t i = 0; i < el.size(); ++i) m[impl_->dom.label(el[i])] = impl_->cod.label(impl_->table[i]);
    return m;
  }
  return impl_->desc;
}

IndexFunction compose(const IndexFunction& f, const IndexFunction& g) {
  if (!g.codomain().same_as(f.domain())) throw Error("NonComposable", "index functions do not compose");
  if (g.is_identity()) return f;
  if (f.is_identity()) return g;
  if (f.affine_map() && g.affine_map() && !g.domain().is_finite()) {
    AffineMap out;
    for (const auto& t : *f.affine_map()) {
      if (t.src < 0) {
        out.push_back(t);
        continue;
      }
      const auto& s = (*g.affine_map())[static_cast<std::size_t>(t.src)];
      if (s.src < 0) out.push_back({-1, 0, t.mul * s.add + t.add});
      else out.push_back({s.src, t.mul * s.mul, t.mul * s.add + t.add});
    }
    return IndexFunction::affine(g.domain(), f.codomain(), out);
  }
  return IndexFunction::rule(
      g.domain(), f.codomain(), [f, g](const Elem& e) { return f(g(e)); },
      "(" + f.describe() + ") o (" + g.describe() + ")");
}

std::vector<std::pair<Elem, Elem>> covering_pairs(const IndexPoset& p, std::int64_t side) {
  std::vector<std::pair<Elem, Elem>> out;
  if (p.kind() == IndexPoset::Kind::Omega) {
    for (std::int64_t i = 0; i + 1 < side; ++i) out.emplace_back(Elem(i), Elem(i + 1));
    return out;
  }
  auto s = p.sample(side);
  for (const auto& a : s)
    for (const auto& b : s) {
      if (!p.less(a, b)) continue;
      bool cover = true;
      for (const auto& c : s)
        if (p.less(a, c) && p.less(c, b)) { cover = false; break; }
      if (cover) out.emplace_back(a, b);
    }
  return out;
}

Verdict check_increasing(const IndexFunction& f, const Limits& limits) {
  const auto& dom = f.domain();
  const auto& cod = f.codomain();
  auto counter = [&](const Elem& a, const Elem& b) {
    return Verdict::fails({{"pair", Json::array({dom.label(a), dom.label(b)})},
                           {"images", Json::array({cod.label(f(a)), cod.label(f(b))})}});
  };
  if (dom.is_finite()) {
    for (const auto& a : dom.elements())
      for (const auto& b : dom.elements())
        if (dom.leq(a, b) && !cod.leq(f(a), f(b))) return counter(a, b);
    return Verdict::holds({{"certificate", "exhaustive scan"}});
  }
  if (f.is_identity()) return Verdict::holds({{"certificate", "identity"}});
  const std::int64_t side = dom.arity() == 1 ? limits.horizon : 8;
  for (const auto& [a, b] : covering_pairs(dom, side))
    if (!cod.leq(f(a), f(b))) return counter(a, b);
  if (f.affine_map() && cod.is_omega_power() && dom.is_omega_power()) {
    bool nonneg = true;
    for (const auto& t : *f.affine_map()) nonneg = nonneg && (t.src < 0 || t.mul >= 0);
    if (nonneg) return Verdict::holds({{"certificate", "affine with nonnegative coefficients"}});
  }
  return Verdict::inconclusive(side, {{"checked", "covering pairs of the sampled prefix"}});
}

bool pointwise_leq(const IndexFunction& f, const IndexFunction& g, std::int64_t side) {
  for (const auto& e : f.domain().sample(side))
    if (!f.codomain().leq(f(e), g(e))) return false;
  return true;
}

IndexFunction increasing_majorant(const IndexFunction& f, const Limits& limits) {
  const auto& dom = f.domain();
  const auto& cod = f.codomain();
  if (dom.is_finite()) {
    std::map<Elem, Elem> out;
    for (const auto& mu : dom.linear_extension()) {
      std::vector<Elem> s{f(mu)};
      for (const auto& p : dom.below(mu))
        if (!(p == mu)) s.push_back(out.at(p));
      out[mu] = cod.upper_bound(s);
    }
    std::vector<Elem> vals;
    for (const auto& mu : dom.elements()) vals.push_back(out.at(mu));
    return IndexFunction::table(dom, cod, std::move(vals));
  }
  struct Memo {
    std::mutex m;
    std::map<Elem, Elem> values;
  };
  auto memo = std::make_shared<Memo>();
  const std::int64_t cap = std::max<std::int64_t>(limits.budget, 1);
  auto fn = [f, dom, cod, memo, cap](const Elem& mu) -> Elem {
    std::function<Elem(const Elem&)> rec = [&](const Elem& x) -> Elem {
      {
        std::lock_guard<std::mutex> lock(memo->m);
        auto it = memo->values.find(x);
        if (it != memo->values.end()) return it->second;
      }
      Elem result;
      if (dom.kind() == IndexPoset::Kind::Omega) {
        // iterative running bound
        Elem cur = f(Elem(0));
        std::int64_t start = 0;
        {
          std::lock_guard<std::mutex> lock(memo->m);
          for (std::int64_t i = x.c[0]; i >= 0; --i) {
            auto it = memo->values.find(Elem(i));
            if (it != memo->values.end()) {
              cur = it->second;
              start = i + 1;
              break;
            }
          }
          if (start == 0) memo->values[Elem(0)] = cur, start = 1;
        }
        for (std::int64_t i = start; i <= x.c[0]; ++i) {
          const Elem s[2] = {f(Elem(i)), cur};
          cur = cod.upper_bound(s);
          std::lock_guard<std::mutex> lock(memo->m);
          memo->values[Elem(i)] = cur;
        }
        return cur;
      }
      auto preds = dom.below(x);
      if (static_cast<std::int64_t>(preds.size()) > cap)
        throw Error("NotCofinite", "predecessor enumeration exceeds the budget");
      std::vector<Elem> s{f(x)};
      for (const auto& p : preds)
        if (!(p == x)) s.push_back(rec(p));
      result = cod.upper_bound(s);
      std::lock_guard<std::mutex> lock(memo->m);
      memo->values[x] = result;
      return result;
    };
    return rec(mu);
  };
  return IndexFunction::rule(dom, cod, fn, "majorant(" + f.describe() + ")");
}

Verdict check_cofinal_increasing(const IndexFunction& phi, const Limits& limits) {
  const auto& J = phi.domain();
  const auto& K = phi.codomain();
  auto props = poset_properties(J, limits);
  if (!props.well_ordered.is_holds())
    throw Error("PreconditionViolation", "the domain of phi must be well ordered");
  Verdict inc = check_increasing(phi, limits);
  if (inc.is_fails()) return Verdict::fails({{"reason", "not increasing"}, {"counterexample", inc.evidence}});

  Verdict cof = Verdict::inconclusive(limits.horizon);
  if (K.is_finite()) {
    Json wit = Json::object();
    const auto js = J.is_finite() ? J.elements() : J.sample(limits.horizon);
    bool all = true;
    for (const auto& k : K.elements()) {
      bool found = false;
      for (const auto& j : js)
        if (K.leq(k, phi(j))) {
          wit[K.label(k)] = J.label(j);
          found = true;
          break;
        }
      if (!found) {
        all = false;
        if (J.is_finite()) {
          cof = Verdict::fails({{"reason", "not cofinal"}, {"k", K.label(k)}});
        } else {
          cof = Verdict::inconclusive(limits.horizon, {{"k", K.label(k)}});
        }
        break;
      }
    }
    if (all) cof = Verdict::holds({{"witnesses", wit}});
  } else if (J.is_finite()) {
    // A finite image is bounded in an infinite directed poset of the supported kinds.
    std::vector<Elem> img;
    for (const auto& j : J.elements()) img.push_back(phi(j));
    Elem top = K.upper_bound(img);
    Elem k = top;
    if (K.is_omega_power()) k.c[0] += 1;
    else k = K.ascent(top, 2).back();
    bool dominated = false;
    for (const auto& y : img) dominated = dominated || K.leq(k, y);
    if (!dominated) cof = Verdict::fails({{"reason", "finite image is not cofinal"}, {"k", K.label(k)}});
  } else if (phi.affine_map() && K.is_omega_power() && J.is_omega_power()) {
    const auto& m = *phi.affine_map();
    std::optional<std::size_t> bad;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i].src < 0 || m[i].mul <= 0) {
        bad = i;
        break;
      }
    if (bad) {
      std::vector<std::int64_t> c(K.arity(), 0);
      c[*bad] = std::max<std::int64_t>(m[*bad].add + 1, 0);
      cof = Verdict::fails({{"reason", "not cofinal"}, {"k", K.label(Elem(c))}});
    } else {
      Json samples = Json::object();
      for (const auto& k : K.sample(3)) samples[K.label(k)] = J.label(min_threshold(phi, k, limits));
      cof = Verdict::holds({{"certificate", "every coordinate is an increasing affine function"},
                            {"witnesses", samples}});
    }
  } else {
    const auto ks = K.sample(K.arity() == 1 ? limits.horizon : 8);
    const auto js = J.sample(limits.horizon);
    for (const auto& k : ks) {
      bool found = false;
      for (const auto& j : js)
        if (K.leq(k, phi(j))) { found = true; break; }
      if (!found) return Verdict::inconclusive(limits.horizon, {{"k", K.label(k)}});
    }
    cof = Verdict::inconclusive(limits.horizon, {{"checked", "sampled prefix"}});
  }
  if (cof.is_fails()) return cof;
  if (inc.is_holds() && cof.is_holds())
    return Verdict::holds({{"increasing", inc.evidence}, {"cofinal", cof.evidence}});
  return Verdict::inconclusive(limits.horizon, {{"increasing", to_json(inc)}, {"cofinal", to_json(cof)}});
}

Elem min_threshold(const IndexFunction& phi, const Elem& k, const Limits& limits) {
  const auto& J = phi.domain();
  const auto& K = phi.codomain();
  if (J.kind() == IndexPoset::Kind::Omega && phi.affine_map() && K.is_omega_power()) {
    std::int64_t n = 0;
    for (std::size_t i = 0; i < phi.affine_map()->size(); ++i) {
      const auto& t = (*phi.affine_map())[i];
      const std::int64_t need = k.c.at(i);
      if (t.src < 0 || t.mul == 0) {
        if (t.add < need) throw Error("NotCofinal", "no j with k <= phi(j) for k=" + K.label(k));
        continue;
      }
      if (t.mul < 0) throw Error("NotCofinal", "phi is not increasing");
      const std::int64_t diff = need - t.add;
      const std::int64_t q = diff <= 0 ? 0 : (diff + t.mul - 1) / t.mul;
      n = std::max(n, q);
    }
    return Elem(n);
  }
  if (J.is_finite()) {
    for (const auto& j : J.linear_extension())
      if (K.leq(k, phi(j))) return j;
    throw Error("NotCofinal", "no j with k <= phi(j) for k=" + K.label(k));
  }
  for (const auto& j : J.sample(limits.horizon))
    if (K.leq(k, phi(j))) return j;
  throw Error("NotCofinal", "no j within the horizon with k <= phi(j) for k=" + K.label(k));
}

bool is_unit_diagonal(const IndexFunction& phi) {
  if (phi.domain().kind() != IndexPoset::Kind::Omega || !phi.affine_map()) return false;
  if (!phi.codomain().is_omega_power()) return false;
  for (const auto& t : *phi.affine_map())
    if (t.src != 0 || t.mul != 1 || t.add < 0) return false;
  return true;
}

bool is_strict_affine(const IndexFunction& phi) {
  if (phi.domain().kind() != IndexPoset::Kind::Omega || !phi.affine_map()) return false;
  if (!phi.codomain().is_omega_power()) return false;
  for (const auto& t : *phi.affine_map())
    if (t.src != 0 || t.mul < 1) return false;
  return true;
}

}  // namespace procat
