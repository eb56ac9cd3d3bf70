#include "procat/workspace.hpp"

#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace procat {

WorkspaceError::WorkspaceError(std::string kind, const std::string& file, int line, int column, const std::string& message)
    : Error(std::move(kind), file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      file_(file), line_(line), column_(column), detail_(message) {}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

// Splits at top-level occurrences of `sep` (outside (), [] and {}).
std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (ch == '(' || ch == '[' || ch == '{') ++depth;
    if (ch == ')' || ch == ']' || ch == '}') --depth;
    if (ch == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw Error("ParseError", "expected an integer, got '" + s + "'");
  }
  if (used != s.size()) throw Error("ParseError", "expected an integer, got '" + s + "'");
  return v;
}

struct Line {
  std::string file;
  int number = 0;
  std::string text;  // comment stripped, columns preserved
};

std::vector<Line> split_lines(std::string_view text, const std::string& file, int first_line) {
  std::vector<Line> out;
  std::istringstream in{std::string(text)};
  std::string s;
  int n = first_line;
  while (std::getline(in, s)) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) {
        s.resize(i);
        break;
      }
    }
    if (!s.empty() && s.back() == '\r') s.pop_back();
    out.push_back({file, n++, s});
  }
  return out;
}

// Splits a line at top-level ';' into statements; columns are preserved by
// blanking the other statements.
std::vector<Line> split_statements(const Line& l, std::size_t from = 0, std::size_t to = std::string::npos) {
  std::vector<Line> out;
  const std::size_t end = std::min(to, l.text.size());
  int depth = 0;
  std::size_t start = from;
  auto emit = [&](std::size_t a, std::size_t b) {
    std::string t(a, ' ');
    t += l.text.substr(a, b - a);
    if (!trim(t).empty()) out.push_back({l.file, l.number, t});
  };
  for (std::size_t i = from; i < end; ++i) {
    const char ch = l.text[i];
    if (ch == '(' || ch == '[' || ch == '{') ++depth;
    if (ch == ')' || ch == ']' || ch == '}') --depth;
    if (ch == ';' && depth == 0) {
      emit(start, i);
      start = i + 1;
    }
  }
  emit(start, end);
  return out;
}

[[noreturn]] void fail(const Line& l, std::size_t col, const std::string& msg, const std::string& kind = "ParseError") {
  throw WorkspaceError(kind, l.file, l.number, static_cast<int>(col) + 1, msg);
}

// Cursor over one line.
struct Cur {
  const Line& line;
  std::size_t pos = 0;

  explicit Cur(const Line& l) : line(l) {}
  void ws() {
    while (pos < line.text.size() && std::isspace(static_cast<unsigned char>(line.text[pos]))) ++pos;
  }
  bool done() {
    ws();
    return pos >= line.text.size();
  }
  bool eat(std::string_view tok) {
    ws();
    if (line.text.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    if (!eat(tok)) fail(line, pos, "expected '" + std::string(tok) + "'");
  }
  // Identifier-like token: letters, digits and _ ' / ^ .
  std::string word() {
    ws();
    const std::size_t start = pos;
    while (pos < line.text.size()) {
      const char ch = line.text[pos];
      if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'' || ch == '/' || ch == '^' || ch == '.')
        ++pos;
      else
        break;
    }
    if (pos == start) fail(line, start, "expected a name");
    return line.text.substr(start, pos - start);
  }
  // Element label: a word or a parenthesized pair.
  std::string label() {
    ws();
    if (pos < line.text.size() && line.text[pos] == '(') {
      const std::size_t start = pos;
      int depth = 0;
      while (pos < line.text.size()) {
        if (line.text[pos] == '(') ++depth;
        if (line.text[pos] == ')' && --depth == 0) {
          ++pos;
          return line.text.substr(start, pos - start);
        }
        ++pos;
      }
      fail(line, start, "unbalanced parenthesis");
    }
    return word();
  }
  std::string quoted() {
    ws();
    if (pos >= line.text.size() || line.text[pos] != '"') fail(line, pos, "expected a quoted path");
    const std::size_t end = line.text.find('"', pos + 1);
    if (end == std::string::npos) fail(line, pos, "unterminated string");
    std::string s = line.text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    return s;
  }
  std::string rest() {
    ws();
    std::string s = trim(std::string_view(line.text).substr(pos));
    pos = line.text.size();
    return s;
  }
  // Text up to the next top-level occurrence of `tok` (consumed).
  std::string until(std::string_view tok) {
    ws();
    const std::size_t start = pos;
    int depth = 0;
    for (std::size_t i = pos; i < line.text.size(); ++i) {
      if (depth == 0 && line.text.compare(i, tok.size(), tok) == 0) {
        pos = i + tok.size();
        return trim(std::string_view(line.text).substr(start, i - start));
      }
      const char ch = line.text[i];
      if (ch == '(' || ch == '[' || ch == '{') ++depth;
      if (ch == ')' || ch == ']' || ch == '}') --depth;
    }
    fail(line, start, "expected '" + std::string(tok) + "'");
  }
  void end() {
    if (!done()) fail(line, pos, "unexpected trailing text");
  }
};

bool is_blank(const Line& l) { return trim(l.text).empty(); }

}  // namespace

// ---------------------------------------------------------------------------
// Category files

namespace {

CategoryFile parse_category_statements(const std::vector<Line>& stmts) {
  CategoryFile out;
  std::set<std::pair<std::string, std::string>> given;
  for (const auto& l : stmts) {
    Cur c(l);
    const std::size_t at = (c.ws(), c.pos);
    const std::string kw = c.word();
    c.eat(":");
    // Every statement but `backend` takes a comma-separated list.
    auto each = [&](auto&& item) {
      do item();
      while (c.eat(","));
      c.end();
    };
    if (kw == "backend") {
      const std::string b = c.word();
      if (b != "cycgrp" && b != "fincat") fail(l, at, "unknown backend '" + b + "'");
      out.cycgrp = b == "cycgrp";
      c.end();
    } else if (kw == "objects") {
      while (!c.done()) {
        out.raw.objects.push_back(c.word());
        c.eat(",");
      }
    } else if (kw == "morphism" || kw == "morphisms") {
      each([&] {
        RawCategory::Arrow a;
        a.name = c.word();
        c.expect(":");
        a.src = c.word();
        c.expect("->");
        a.tgt = c.word();
        out.raw.morphisms.push_back(a);
      });
    } else if (kw == "identity" || kw == "identities") {
      each([&] {
        const std::string obj = c.word();
        c.expect("=");
        out.raw.identities.emplace_back(obj, c.word());
      });
    } else if (kw == "compose") {
      each([&] {
        const std::string lhs = c.until("=");
        const std::string h = c.word();
        const auto dot = lhs.find('.');
        if (dot == std::string::npos) fail(l, at, "expected 'compose g . f = h'");
        RawCategory::Entry e{trim(lhs.substr(0, dot)), trim(lhs.substr(dot + 1)), h};
        given.emplace(e.g, e.f);
        out.raw.composites.push_back(e);
      });
    } else {
      fail(l, at, "unknown category statement '" + kw + "'");
    }
  }
  // Identity composites implied by the declared identities.
  std::map<std::string, std::string> id_of;
  for (const auto& [obj, m] : out.raw.identities) id_of[obj] = m;
  for (const auto& a : out.raw.morphisms) {
    auto add = [&](const std::string& g, const std::string& f) {
      if (given.insert({g, f}).second) out.raw.composites.push_back({g, f, a.name});
    };
    if (auto it = id_of.find(a.src); it != id_of.end()) add(a.name, it->second);
    if (auto it = id_of.find(a.tgt); it != id_of.end()) add(it->second, a.name);
  }
  return out;
}

}  // namespace

CategoryFile parse_category_text(std::string_view text, const std::string& file, int first_line) {
  std::vector<Line> stmts;
  for (const auto& l : split_lines(text, file, first_line))
    for (auto& st : split_statements(l)) stmts.push_back(std::move(st));
  return parse_category_statements(stmts);
}

Category load_category_file(const std::filesystem::path& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw Error("UnresolvedReference", "cannot read category file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const CategoryFile cf = parse_category_text(ss.str(), path.string());
  if (cf.cycgrp) return Category::cycgrp();
  return validate_category(cf.raw, name.empty() ? path.stem().string() : name);
}

// ---------------------------------------------------------------------------
// Expressions

namespace {

MorphismFamily::Polynomial parse_poly(const std::string& text) {
  MorphismFamily::Polynomial p;
  std::string body = text;
  const auto m = body.find(" mod ");
  if (m != std::string::npos) {
    p.modulus = parse_int(trim(body.substr(m + 5)));
    if (p.modulus <= 0) throw Error("ParseError", "modulus must be positive");
    body = body.substr(0, m);
  }
  std::string s;
  for (char ch : body)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw Error("ParseError", "empty polynomial");
  std::size_t i = 0;
  while (i < s.size()) {
    std::int64_t sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      if (s[i] == '-') sign = -1;
      ++i;
    }
    std::size_t j = i;
    while (j < s.size() && s[j] != '+' && s[j] != '-') ++j;
    const std::string term = s.substr(i, j - i);
    if (term.empty()) throw Error("ParseError", "malformed polynomial '" + text + "'");
    std::int64_t coeff = 1, deg = 0;
    const auto jpos = term.find('j');
    if (jpos == std::string::npos) {
      coeff = parse_int(term);
    } else {
      std::string c = term.substr(0, jpos);
      if (!c.empty()) {
        if (c.back() != '*') throw Error("ParseError", "malformed term '" + term + "'");
        c.pop_back();
        coeff = parse_int(c);
      }
      const std::string tail = term.substr(jpos + 1);
      if (tail.empty()) deg = 1;
      else if (tail[0] == '^') deg = parse_int(tail.substr(1));
      else throw Error("ParseError", "malformed term '" + term + "'");
      if (deg < 0 || deg > 16) throw Error("ParseError", "unsupported degree in '" + term + "'");
    }
    if (p.coeffs.size() <= static_cast<std::size_t>(deg)) p.coeffs.resize(static_cast<std::size_t>(deg) + 1, 0);
    p.coeffs[static_cast<std::size_t>(deg)] += sign * coeff;
    i = j;
  }
  return p;
}

std::string inside(const std::string& s, std::size_t open, char close) {
  if (s.back() != close) throw Error("ParseError", "expected '" + std::string(1, close) + "' at the end of '" + s + "'");
  return s.substr(open, s.size() - open - 1);
}

AffineTerm parse_affine_term(const std::string& text, const IndexPoset& dom) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  AffineTerm t;
  std::size_t var = std::string::npos;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::isalpha(static_cast<unsigned char>(s[i]))) { var = i; break; }
  if (var == std::string::npos) {
    t.src = -1;
    t.add = parse_int(s);
    return t;
  }
  std::size_t vend = var;
  while (vend < s.size() && std::isalnum(static_cast<unsigned char>(s[vend]))) ++vend;
  const std::string name = s.substr(var, vend - var);
  if (dom.arity() == 1) {
    t.src = 0;
  } else {
    if (name.size() < 2 || name[0] != 'n') throw Error("ParseError", "use n0, n1, ... for product coordinates");
    t.src = static_cast<int>(parse_int(name.substr(1)));
  }
  std::string coeff = s.substr(0, var);
  t.mul = 1;
  if (!coeff.empty()) {
    if (coeff.back() != '*') throw Error("ParseError", "malformed affine term '" + text + "'");
    coeff.pop_back();
    t.mul = parse_int(coeff);
  }
  const std::string tail = s.substr(vend);
  if (!tail.empty()) {
    if (tail[0] != '+' && tail[0] != '-') throw Error("ParseError", "malformed affine term '" + text + "'");
    t.add = parse_int(tail[0] == '+' ? tail.substr(1) : tail);
  }
  return t;
}

}  // namespace

MorphismFamily parse_family(std::string_view text, const Category& c, const IndexPoset& j, Obj src, Obj tgt) {
  const std::string s = trim(text);
  auto morph = [&](const std::string& name) { return c.parse_morphism(trim(name), src, tgt); };
  auto morph_list = [&](const std::string& body) {
    std::vector<Morphism> out;
    if (trim(body).empty()) return out;
    for (const auto& part : split_top(body, ',')) out.push_back(morph(part));
    return out;
  };
  auto typed = [&](const MorphismFamily& f) {
    if (f.source() != src || f.target() != tgt)
      throw Error("TypeMismatch", "family '" + s + "' must map " + c.object_name(src) + " -> " + c.object_name(tgt));
    return f;
  };
  if (s.rfind("const(", 0) == 0) return typed(MorphismFamily::constant(c, j, morph(inside(s, 6, ')'))));
  if (s.rfind("step[", 0) == 0) {
    std::vector<MorphismFamily::Piece> pieces;
    for (const auto& part : split_top(inside(s, 5, ']'), ',')) {
      if (part.size() < 2 || part.front() != '(' || part.back() != ')') throw Error("ParseError", "expected '(j,m)' in '" + s + "'");
      const auto kv = split_top(part.substr(1, part.size() - 2), ',');
      if (kv.size() != 2) throw Error("ParseError", "expected '(j,m)' in '" + s + "'");
      pieces.push_back({j.parse(kv[0]), morph(kv[1])});
    }
    return typed(MorphismFamily::step(c, j, pieces));
  }
  if (s.rfind("table[", 0) == 0) return typed(MorphismFamily::table(c, j, morph_list(inside(s, 6, ']'))));
  if (s.rfind("cycle[", 0) == 0) return typed(MorphismFamily::periodic(c, j, {}, morph_list(inside(s, 6, ']'))));
  if (s.rfind("periodic[", 0) == 0) {
    const std::string body = inside(s, 9, ']');
    const auto bar = body.find('|');
    if (bar == std::string::npos) throw Error("ParseError", "expected 'periodic[prefix | cycle]'");
    return typed(MorphismFamily::periodic(c, j, morph_list(body.substr(0, bar)), morph_list(body.substr(bar + 1))));
  }
  if (s.rfind("rule(", 0) == 0) {
    std::string body = trim(inside(s, 5, ')'));
    if (body.rfind("poly:", 0) != 0) throw Error("ParseError", "expected 'rule(poly: ...)'");
    return MorphismFamily::rule(c, j, src, tgt, parse_poly(trim(body.substr(5))));
  }
  throw Error("ParseError", "unknown family expression '" + s + "'");
}

IndexFunction parse_affine(std::string_view text, const IndexPoset& dom, const IndexPoset& cod) {
  if (!dom.is_omega_power() || !cod.is_omega_power()) throw Error("ParseError", "affine maps need omega powers");
  std::string s = trim(text);
  std::vector<std::string> parts;
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')' && cod.arity() > 1) parts = split_top(s.substr(1, s.size() - 2), ',');
  else parts = {s};
  if (parts.size() != cod.arity()) throw Error("ParseError", "affine map needs " + std::to_string(cod.arity()) + " coordinates");
  AffineMap m;
  for (const auto& p : parts) m.push_back(parse_affine_term(p, dom));
  return IndexFunction::affine(dom, cod, m);
}

// ---------------------------------------------------------------------------

class WorkspaceParser {
 public:
  explicit WorkspaceParser(Workspace& ws) : ws_(ws) {}

  void parse_file(const std::filesystem::path& path, const Line* from) {
    std::error_code ec;
    const auto canon = std::filesystem::weakly_canonical(path, ec);
    const std::string key = ec ? path.string() : canon.string();
    if (stack_.count(key)) {
      if (from) fail(*from, 0, "include cycle through " + path.string(), "UnresolvedReference");
      throw Error("UnresolvedReference", "include cycle through " + path.string());
    }
    std::ifstream in(path);
    if (!in) {
      if (from) fail(*from, 0, "cannot read " + path.string(), "UnresolvedReference");
      throw Error("UnresolvedReference", "cannot read workspace " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    stack_.insert(key);
    parse_text(ss.str(), path.parent_path(), path.string());
    stack_.erase(key);
  }

  void parse_text(std::string_view text, const std::filesystem::path& dir, const std::string& file) {
    const auto lines = split_lines(text, file, 1);
    std::size_t i = 0;
    while (i < lines.size()) {
      const Line& head = lines[i];
      if (is_blank(head)) {
        ++i;
        continue;
      }
      std::vector<Line> body;
      const std::string t = trim(head.text);
      std::size_t next = i + 1;
      Line header = head;
      if (!t.empty() && t.back() == '{') {
        for (; next < lines.size(); ++next) {
          if (trim(lines[next].text) == "}") break;
          for (auto& st : split_statements(lines[next])) body.push_back(std::move(st));
        }
        if (next == lines.size()) fail(head, 0, "unterminated block");
        ++next;
      } else if (inline_block(t)) {
        const std::size_t open = head.text.find('{');
        const std::size_t close = head.text.rfind('}');
        header.text = head.text.substr(0, open + 1);
        body = split_statements(head, open + 1, close);
      }
      try {
        statement(header, body, dir);
      } catch (const WorkspaceError&) {
        throw;
      } catch (const Error& e) {
        fail(head, 0, e.what(), e.kind());
      }
      i = next;
    }
  }

 private:
  Workspace& ws_;
  std::set<std::string> stack_;

  // `poset J { elements a b; a <= b }` written on one line.
  static bool inline_block(const std::string& t) {
    if (t.empty() || t.back() != '}' || t.find('{') == std::string::npos) return false;
    const std::string kw = t.substr(0, t.find_first_of(" \t"));
    return kw == "category" || kw == "poset" || kw == "system" || kw == "jmorphism" || kw == "pair" || kw == "cone";
  }

  void declare(const Line& l, const std::string& kind, const std::string& name) {
    if (!ws_.kind_of(name).empty()) fail(l, 0, "duplicate declaration of '" + name + "'", "Malformed");
    ws_.order_.emplace_back(kind, name);
  }

  template <class Map>
  const typename Map::mapped_type& lookup(const Map& m, const std::string& name, const Line& l, std::size_t col,
                                          const std::string& what) {
    auto it = m.find(name);
    if (it == m.end()) fail(l, col, "unknown " + what + " '" + name + "'", "UnresolvedReference");
    return it->second;
  }

  const Category& cat_ref(Cur& c) {
    c.ws();
    const std::size_t col = c.pos;
    return lookup(ws_.cats_, c.word(), c.line, col, "category");
  }
  const IndexPoset& poset_ref(Cur& c) {
    c.ws();
    const std::size_t col = c.pos;
    const std::string n = c.word();
    if (n == "omega") return omega_;
    if (n == "singleton") return one_;
    return lookup(ws_.posets_, n, c.line, col, "poset");
  }
  const InverseSystem& system_ref(Cur& c) {
    c.ws();
    const std::size_t col = c.pos;
    return lookup(ws_.systems_, c.word(), c.line, col, "system");
  }
  Obj object_ref(Cur& c, const Category& cat) {
    c.ws();
    const std::size_t col = c.pos;
    const std::string n = c.word();
    try {
      return cat.parse_object(n);
    } catch (const Error& e) {
      fail(c.line, col, e.what(), "UnresolvedReference");
    }
  }
  Elem elem_ref(Cur& c, const IndexPoset& p) {
    c.ws();
    const std::size_t col = c.pos;
    const std::string n = c.label();
    try {
      return p.parse(n);
    } catch (const Error& e) {
      fail(c.line, col, e.what(), "UnresolvedReference");
    }
  }

  const IndexPoset omega_ = IndexPoset::omega();
  const IndexPoset one_ = IndexPoset::singleton();

  void statement(const Line& head, const std::vector<Line>& body, const std::filesystem::path& dir) {
    Cur c(head);
    const std::string kw = c.word();
    if (kw == "include") {
      const std::string p = c.quoted();
      c.end();
      parse_file(dir / p, &head);
    } else if (kw == "category") {
      category(c, body, dir);
    } else if (kw == "poset") {
      poset(c, body);
    } else if (kw == "system") {
      system(c, body);
    } else if (kw == "jmorphism") {
      jmorphism(c, body);
    } else if (kw == "map") {
      map(c);
    } else if (kw == "pair") {
      pair(c, body);
    } else if (kw == "cone") {
      cone(c, body);
    } else {
      fail(head, head.text.find_first_not_of(" \t"), "unknown declaration '" + kw + "'");
    }
  }

  void category(Cur& c, const std::vector<Line>& body, const std::filesystem::path& dir) {
    const std::string name = c.word();
    declare(c.line, "category", name);
    if (c.eat("=")) {
      c.ws();
      if (c.pos < c.line.text.size() && c.line.text[c.pos] == '"') {
        const std::string p = c.quoted();
        c.end();
        ws_.cats_.emplace(name, load_category_file(dir / p, name));
      } else {
        const std::string b = c.word();
        c.end();
        if (b != "cycgrp") fail(c.line, 0, "expected a quoted path or 'cycgrp'");
        ws_.cats_.emplace(name, Category::cycgrp());
      }
      return;
    }
    c.expect("{");
    const CategoryFile cf = parse_category_statements(body);
    ws_.cats_.emplace(name, cf.cycgrp ? Category::cycgrp() : validate_category(cf.raw, name));
  }

  void poset(Cur& c, const std::vector<Line>& body) {
    const std::string name = c.word();
    declare(c.line, "poset", name);
    IndexPoset p;
    if (c.eat("=")) {
      c.ws();
      const std::size_t col = c.pos;
      const std::string rest = c.rest();
      if (rest == "omega") p = IndexPoset::omega();
      else if (rest == "singleton") p = IndexPoset::singleton();
      else if (rest.rfind("chain", 0) == 0) p = IndexPoset::chain(static_cast<std::size_t>(parse_int(trim(rest.substr(5)))));
      else {
        std::vector<std::string> parts;
        if (rest.rfind("product(", 0) == 0) parts = split_top(inside(rest, 8, ')'), ',');
        else {
          const auto x = rest.find(" x ");
          if (x == std::string::npos) fail(c.line, col, "unknown poset expression '" + rest + "'");
          parts = {trim(rest.substr(0, x)), trim(rest.substr(x + 3))};
        }
        if (parts.size() != 2) fail(c.line, col, "product needs two factors");
        auto factor = [&](const std::string& n) -> IndexPoset {
          if (n == "omega") return IndexPoset::omega();
          if (n == "singleton") return IndexPoset::singleton();
          return lookup(ws_.posets_, n, c.line, col, "poset");
        };
        p = IndexPoset::product(factor(parts[0]), factor(parts[1]));
      }
    } else {
      c.expect("{");
      std::vector<std::string> labels;
      std::vector<std::pair<std::size_t, std::size_t>> rel;
      auto pos_of = [&](const std::string& lab, const Line& l, std::size_t col) {
        auto it = std::find(labels.begin(), labels.end(), lab);
        if (it == labels.end()) fail(l, col, "unknown element '" + lab + "'", "UnresolvedReference");
        return static_cast<std::size_t>(it - labels.begin());
      };
      for (const auto& l : body) {
        Cur b(l);
        if (b.eat("elements")) {
          b.eat(":");
          while (!b.done()) {
            labels.push_back(b.word());
            b.eat(",");
          }
          continue;
        }
        b.eat("le:");
        do {
          b.ws();
          std::size_t col = b.pos;
          std::size_t prev = pos_of(b.word(), l, col);
          b.expect("<=");
          do {
            b.ws();
            col = b.pos;
            const std::size_t nx = pos_of(b.word(), l, col);
            rel.emplace_back(prev, nx);
            prev = nx;
          } while (b.eat("<="));
        } while (b.eat(","));
        b.end();
      }
      if (labels.empty()) fail(c.line, 0, "poset needs at least one element");
      p = IndexPoset::finite(labels, rel);
    }
    const PosetReport r = poset_properties(p);
    if (r.partial_order.is_fails() || r.directed.is_fails())
      fail(c.line, 0, "poset '" + name + "' is not a directed partial order: " + to_json(r).dump(), "ValidationError");
    ws_.posets_.emplace(name, p);
  }

  static std::optional<std::pair<std::int64_t, std::int64_t>> tower_expr(const std::string& s) {
    static const std::regex re(R"(Z/(\d+)\^\(?n(?:\+(\d+))?\)?)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) return std::nullopt;
    return std::pair<std::int64_t, std::int64_t>{parse_int(m[1]), m[2].matched ? parse_int(m[2]) : 0};
  }

  void system(Cur& c, const std::vector<Line>& body) {
    const std::string name = c.word();
    declare(c.line, "system", name);
    c.expect("in");
    const Category cat = cat_ref(c);
    std::optional<IndexPoset> over;
    if (c.eat("over")) over = poset_ref(c);
    if (c.eat("=")) {
      c.ws();
      const std::string form = c.word();
      InverseSystem x;
      if (form == "tower") {
        const std::int64_t base = parse_int(c.word());
        const std::int64_t off = c.done() ? 0 : parse_int(c.word());
        x = InverseSystem::tower(base, off);
      } else if (form == "rudimentary") {
        x = InverseSystem::rudimentary(cat, object_ref(c, cat));
      } else if (form == "constant") {
        if (!over) fail(c.line, c.pos, "constant systems need 'over POSET'");
        x = InverseSystem::constant(cat, *over, object_ref(c, cat));
      } else {
        fail(c.line, 0, "unknown system form '" + form + "'");
      }
      c.end();
      ws_.systems_.emplace(name, x);
      return;
    }
    c.expect("{");
    if (!over) fail(c.line, c.pos, "system block needs 'over POSET'");
    const IndexPoset P = *over;
    if (!P.is_finite()) {
      std::string obj, bond = "canonical";
      for (const auto& l : body) {
        Cur b(l);
        if (b.eat("object")) {
          b.word();
          b.expect("=");
          obj = b.rest();
        } else if (b.eat("bond")) {
          b.expect("=");
          bond = b.word();
          b.end();
        } else {
          fail(l, 0, "expected 'object' or 'bond'");
        }
      }
      if (auto t = tower_expr(obj)) {
        if (bond != "canonical") fail(c.line, 0, "tower systems use canonical bonds");
        ws_.systems_.emplace(name, InverseSystem::tower(t->first, t->second));
        return;
      }
      if (bond != "identity" && bond != "canonical") fail(c.line, 0, "unknown bond form '" + bond + "'");
      ws_.systems_.emplace(name, InverseSystem::constant(cat, P, cat.parse_object(obj)));
      return;
    }
    RawSystem raw{cat, P, std::vector<Obj>(P.size(), 0), {}};
    std::vector<bool> seen(P.size(), false);
    for (const auto& l : body) {
      Cur b(l);
      if (b.eat("object")) {
        const Elem e = elem_ref(b, P);
        b.expect("=");
        b.ws();
        const std::size_t col = b.pos;
        const std::string o = b.rest();
        try {
          raw.objects[P.index_of(e)] = cat.parse_object(o);
        } catch (const Error& err) {
          fail(l, col, err.what(), "UnresolvedReference");
        }
        seen[P.index_of(e)] = true;
      } else if (b.eat("bond")) {
        const Elem lo = elem_ref(b, P);
        b.eat("<=");
        const Elem hi = elem_ref(b, P);
        b.expect("=");
        b.ws();
        const std::size_t col = b.pos;
        const std::string m = b.rest();
        raw.bonds.push_back({lo, hi, Morphism{}});
        try {
          raw.bonds.back().m =
              cat.parse_morphism(m, raw.objects[P.index_of(hi)], raw.objects[P.index_of(lo)]);
        } catch (const Error& err) {
          fail(l, col, err.what(), "UnresolvedReference");
        }
      } else {
        fail(l, 0, "expected 'object' or 'bond'");
      }
    }
    for (std::size_t k = 0; k < seen.size(); ++k)
      if (!seen[k]) fail(c.line, 0, "missing object for index " + P.label(P.elements()[k]), "Malformed");
    try {
      ws_.systems_.emplace(name, validate_system(raw));
    } catch (const SystemError& e) {
      std::string msg = "system '" + name + "' violates its laws:";
      for (const auto& v : e.violations()) msg += " [" + v.law + ": " + v.detail + "]";
      fail(c.line, 0, msg, "ValidationError");
    }
  }

  void jmorphism(Cur& c, const std::vector<Line>& body) {
    const std::string name = c.word();
    declare(c.line, "jmorphism", name);
    c.expect(":");
    const InverseSystem X = system_ref(c);
    c.expect("->");
    const InverseSystem Y = system_ref(c);
    c.expect("over");
    const IndexPoset J = poset_ref(c);
    c.expect("{");
    const auto& L = X.index();
    const auto& M = Y.index();
    const Category& C = X.category();
    std::optional<IndexFunction> idx;
    std::map<Elem, std::pair<std::string, const Line*>> fams;
    std::string default_family;
    for (const auto& l : body) {
      Cur b(l);
      if (b.eat("index")) {
        if (b.eat("=")) {
          b.ws();
          const std::size_t col = b.pos;
          const std::string e = b.rest();
          try {
            if (e == "id") {
              if (!L.same_as(M)) throw Error("IndexPosetMismatch", "identity index needs a common index poset");
              idx = IndexFunction::identity(M);
            } else {
              idx = parse_affine(e, M, L);
            }
          } catch (const Error& err) {
            fail(l, col, err.what(), err.kind());
          }
        } else {
          b.eat(":");
          if (!M.is_finite()) fail(l, b.pos, "tabulated index functions need a finite index poset");
          std::vector<std::optional<Elem>> vals(M.size());
          while (!b.done()) {
            const Elem mu = elem_ref(b, M);
            b.expect("->");
            vals[M.index_of(mu)] = elem_ref(b, L);
            b.eat(",");
          }
          std::vector<Elem> v;
          for (std::size_t k = 0; k < vals.size(); ++k) {
            if (!vals[k]) fail(l, 0, "index function misses " + M.label(M.elements()[k]), "Malformed");
            v.push_back(*vals[k]);
          }
          idx = IndexFunction::table(M, L, v);
        }
      } else if (b.eat("family")) {
        b.ws();
        const std::size_t col = b.pos;
        const std::string key = b.label();
        b.expect("=");
        const std::string expr = b.rest();
        if (!M.is_finite() && key == "n") {
          default_family = expr;
          continue;
        }
        Elem mu;
        try {
          mu = M.parse(key);
        } catch (const Error& err) {
          fail(l, col, err.what(), "UnresolvedReference");
        }
        fams[mu] = {expr, &l};
      } else {
        fail(l, 0, "expected 'index' or 'family'");
      }
    }
    if (!idx) {
      if (L.same_as(M)) idx = IndexFunction::identity(M);
      else if (L.is_finite() && L.size() == 1 && M.is_finite())
        idx = IndexFunction::table(M, L, std::vector<Elem>(M.size(), L.elements().front()));
      else fail(c.line, 0, "index function required", "Malformed");
    }
    const IndexFunction fn = *idx;
    FamilyMap fm;
    if (M.is_finite()) {
      std::vector<MorphismFamily> fs;
      for (const auto& mu : M.elements()) {
        auto it = fams.find(mu);
        if (it == fams.end()) fail(c.line, 0, "missing family for index " + M.label(mu), "Malformed");
        try {
          fs.push_back(parse_family(it->second.first, C, J, X.object(fn(mu)), Y.object(mu)));
        } catch (const Error& err) {
          fail(*it->second.second, 0, err.what(), err.kind());
        }
      }
      fm = FamilyMap::table(M, fs);
    } else {
      if (default_family.empty()) fail(c.line, 0, "missing 'family n = ...'", "Malformed");
      std::map<Elem, std::string> overrides;
      for (const auto& [k, v] : fams) overrides[k] = v.first;
      const std::string def = default_family;
      fm = FamilyMap::generator(
          M,
          [C, J, X, Y, fn, def, overrides](const Elem& mu) {
            auto it = overrides.find(mu);
            return parse_family(it == overrides.end() ? def : it->second, C, J, X.object(fn(mu)), Y.object(mu));
          },
          def);
    }
    ws_.jmors_.emplace(name, make_jmorphism(X, Y, J, fn, fm));
  }

  void map(Cur& c) {
    const std::string name = c.word();
    declare(c.line, "map", name);
    c.expect(":");
    const IndexPoset A = poset_ref(c);
    c.expect("->");
    const IndexPoset B = poset_ref(c);
    c.expect("=");
    c.ws();
    const std::size_t col = c.pos;
    const std::string e = c.rest();
    if (!e.empty() && e.front() == '{') {
      if (!A.is_finite()) fail(c.line, col, "tabulated maps need a finite domain");
      std::vector<std::optional<Elem>> vals(A.size());
      for (const auto& part : split_top(inside(e, 1, '}'), ',')) {
        const auto arrow = part.find("->");
        if (arrow == std::string::npos) fail(c.line, col, "expected 'a -> b'");
        vals[A.index_of(A.parse(trim(part.substr(0, arrow))))] = B.parse(trim(part.substr(arrow + 2)));
      }
      std::vector<Elem> v;
      for (std::size_t k = 0; k < vals.size(); ++k) {
        if (!vals[k]) fail(c.line, col, "map misses " + A.label(A.elements()[k]), "Malformed");
        v.push_back(*vals[k]);
      }
      ws_.maps_.emplace(name, IndexFunction::table(A, B, v));
      return;
    }
    try {
      ws_.maps_.emplace(name, parse_affine(e, A, B));
    } catch (const Error& err) {
      fail(c.line, col, err.what(), err.kind());
    }
  }

  void pair(Cur& c, const std::vector<Line>& body) {
    const std::string name = c.word();
    declare(c.line, "pair", name);
    c.expect("in");
    const Category cat = cat_ref(c);
    c.expect("{");
    std::vector<Obj> d;
    std::map<Obj, Expansion> exps;
    for (const auto& l : body) {
      Cur b(l);
      if (b.eat("D")) {
        if (!b.eat(":")) b.expect("=");
        while (!b.done()) {
          d.push_back(object_ref(b, cat));
          b.eat(",");
        }
      } else if (b.eat("expansion")) {
        const Obj x = object_ref(b, cat);
        b.expect("=");
        b.expect("{");
        const std::string inner = b.until("}");
        b.expect("into");
        const InverseSystem sys = system_ref(b);
        b.end();
        const auto& L = sys.index();
        if (!L.is_finite()) fail(l, 0, "expansions need finite index posets", "Unsupported");
        std::vector<std::optional<Morphism>> ps(L.size());
        for (const auto& part : split_top(inner, ',')) {
          const auto colon = part.rfind(':');
          if (colon == std::string::npos) fail(l, 0, "expected 'lambda: morphism'");
          const Elem e = L.parse(trim(part.substr(0, colon)));
          ps[L.index_of(e)] = cat.parse_morphism(trim(part.substr(colon + 1)), x, sys.object(e));
        }
        Expansion ex{x, sys, {}};
        for (std::size_t k = 0; k < ps.size(); ++k) {
          if (!ps[k]) fail(l, 0, "expansion misses index " + L.label(L.elements()[k]), "Malformed");
          ex.p.push_back(*ps[k]);
        }
        exps.emplace(x, ex);
      } else {
        fail(l, 0, "expected 'D:' or 'expansion'");
      }
    }
    ProReflectivePair p(cat, d, exps);
    const Verdict v = check_pair(p);
    if (!v.is_holds()) fail(c.line, 0, "pair '" + name + "' is not pro-reflective: " + v.evidence.dump(), "ValidationError");
    ws_.pairs_.emplace(name, p);
  }

  void cone(Cur& c, const std::vector<Line>& body) {
    const std::string name = c.word();
    declare(c.line, "cone", name);
    c.expect("in");
    c.ws();
    const std::size_t pcol = c.pos;
    const std::string pname = c.word();
    const ProReflectivePair& P = lookup(ws_.pairs_, pname, c.line, pcol, "pair");
    const Category& cat = P.category();
    c.expect(":");
    const Obj x = object_ref(c, cat);
    c.expect("->");
    const Obj y = object_ref(c, cat);
    c.expect("over");
    const IndexPoset J = poset_ref(c);
    c.expect("{");
    const Expansion& ex = P.expansion(x);
    const Expansion& ey = P.expansion(y);
    const auto& M = ey.system.index();
    const auto& L = ex.system.index();
    std::vector<std::optional<JShapeMorphism>> comps(M.size());
    for (const auto& l : body) {
      Cur b(l);
      const Elem mu = elem_ref(b, M);
      b.expect("=");
      const Elem lam = elem_ref(b, L);
      b.expect(":");
      const std::string expr = b.rest();
      const Obj ym = ey.system.object(mu);
      const Expansion tgt = rudimentary_expansion(cat, ym);
      MorphismFamily fam;
      try {
        fam = parse_family(expr, cat, J, ex.system.object(lam), ym);
      } catch (const Error& err) {
        fail(l, 0, err.what(), err.kind());
      }
      const auto& one = tgt.system.index();
      JMorphism rep(ex.system, tgt.system, J, IndexFunction::table(one, L, {lam}), FamilyMap::table(one, {fam}));
      comps[M.index_of(mu)] = JShapeMorphism{x, ym, ex, tgt, rep};
    }
    Cone out{pname, x, y, J, {}};
    for (std::size_t k = 0; k < comps.size(); ++k) {
      if (!comps[k]) fail(c.line, 0, "cone misses index " + M.label(M.elements()[k]), "Malformed");
      out.components.push_back(*comps[k]);
    }
    ws_.cones_.emplace(name, out);
  }
};

Workspace Workspace::load(const std::filesystem::path& path) {
  Workspace ws;
  WorkspaceParser p(ws);
  p.parse_file(path, nullptr);
  return ws;
}

Workspace Workspace::parse(std::string_view text, const std::filesystem::path& base_dir, const std::string& file) {
  Workspace ws;
  WorkspaceParser p(ws);
  p.parse_text(text, base_dir, file);
  return ws;
}

namespace {

template <class Map>
const typename Map::mapped_type& find_or_throw(const Map& m, const std::string& name, const std::string& what) {
  auto it = m.find(name);
  if (it == m.end()) throw Error("UnresolvedReference", "unknown " + what + " '" + name + "'");
  return it->second;
}

}  // namespace

const Category& Workspace::category(const std::string& n) const { return find_or_throw(cats_, n, "category"); }
const IndexPoset& Workspace::poset(const std::string& n) const {
  static const IndexPoset omega = IndexPoset::omega();
  static const IndexPoset one = IndexPoset::singleton();
  if (n == "omega" && !posets_.count(n)) return omega;
  if (n == "singleton" && !posets_.count(n)) return one;
  return find_or_throw(posets_, n, "poset");
}
const InverseSystem& Workspace::system(const std::string& n) const { return find_or_throw(systems_, n, "system"); }
const JMorphism& Workspace::jmorphism(const std::string& n) const { return find_or_throw(jmors_, n, "jmorphism"); }
const IndexFunction& Workspace::map(const std::string& n) const { return find_or_throw(maps_, n, "map"); }
const ProReflectivePair& Workspace::pair(const std::string& n) const { return find_or_throw(pairs_, n, "pair"); }
const Cone& Workspace::cone(const std::string& n) const { return find_or_throw(cones_, n, "cone"); }

std::string Workspace::kind_of(const std::string& name) const {
  for (const auto& [k, n] : order_)
    if (n == name) return k;
  return "";
}

const ProReflectivePair& Workspace::sole_pair(std::string* name) const {
  if (pairs_.size() != 1) throw Error("UnresolvedReference", "workspace declares " + std::to_string(pairs_.size()) + " pairs; name one with --pair");
  if (name) *name = pairs_.begin()->first;
  return pairs_.begin()->second;
}

}  // namespace procat
