#include <doctest.h>

#include "support.hpp"

using namespace procat;

namespace {

const char* kConeWorkspace = R"(# objects X, Y over P
category C {
  objects: X, Y, P
  morphisms: idX: X->X, idY: Y->Y, e: P->P, s: P->P, rX: X->P, tX: X->P, rY: Y->P, tY: Y->P
  identities: X=idX, Y=idY, P=e
  compose: s.s = e, s.rX = tX, s.tX = rX, s.rY = tY, s.tY = rY
}
poset L2 = chain 2
poset V { elements: a, b, c; le: a<=c, b<=c }
system PX in C over L2 = constant P
system EY in C over L2 = constant P
system PV in C over V { object a = P; object b = P; object c = P; bond a<=c = s; bond b<=c = s }
jmorphism flip : PX -> PX over omega { family 1 = const(s); family 2 = const(s) }
jmorphism fold : PV -> PX over L2 { index: 1 -> c, 2 -> c; family 1 = const(e); family 2 = table[e,s] }
poset one = chain 1
system PR in C over one = constant P
pair CP in C {
  D: P
  expansion X = { 1: rX } into PR
  expansion Y = { 1: rY, 2: rY } into EY
}
)";

Workspace cone_workspace() { return Workspace::parse(kConeWorkspace, tsupport::fixtures()); }

WorkspaceError parse_error(const std::string& text) {
  try {
    Workspace::parse(text, tsupport::fixtures(), "bad.ws");
  } catch (const WorkspaceError& e) {
    return e;
  }
  FAIL("expected a workspace error");
  return WorkspaceError("none", "", 0, 0, "");
}

}  // namespace

TEST_SUITE("workspace") {
  TEST_CASE("fixture workspace") {
    const Workspace ws = Workspace::load(tsupport::fixtures() / "demo.ws");
    CHECK(ws.kind_of("Arrow") == "category");
    CHECK(ws.kind_of("V") == "poset");
    CHECK(ws.kind_of("T") == "system");
    CHECK(ws.kind_of("fu") == "jmorphism");
    CHECK(ws.kind_of("diag") == "map");
    CHECK(ws.kind_of("P") == "pair");
    CHECK(ws.kind_of("H") == "cone");
    CHECK(ws.kind_of("nothing").empty());
    CHECK(ws.declarations().front() == std::pair<std::string, std::string>{"category", "Arrow"});
    CHECK(ws.category("Cyc").backend() == Category::Backend::CycGrp);
    CHECK(ws.system("T").object(Elem(2)) == 8);
    CHECK(ws.jmorphism("tshift").index_fn()(Elem(4)) == Elem(5));
    CHECK(ws.jmorphism("gu").index_fn()(ws.poset("L2").parse("1")) == ws.poset("L2").parse("2"));
    CHECK(ws.map("diag")(Elem(3)) == Elem(std::vector<std::int64_t>{3, 3}));
    CHECK(ws.cone("H").components.size() == 1);
    std::string name;
    ws.sole_pair(&name);
    CHECK(name == "P");
    CHECK_THROWS_AS(ws.jmorphism("nothing"), Error);
  }

  TEST_CASE("list syntax, one-line blocks and expansions") {
    const Workspace ws = cone_workspace();
    const Category& c = ws.category("C");
    CHECK(c.object_count() == 3);
    CHECK(c.compose(c.parse_morphism("s"), c.parse_morphism("rY")) == c.parse_morphism("tY"));
    const IndexPoset& V = ws.poset("V");
    CHECK(V.leq(V.parse("a"), V.parse("c")));
    CHECK_FALSE(V.leq(V.parse("a"), V.parse("b")));
    CHECK(ws.system("PV").bond(V.parse("b"), V.parse("c")) == c.parse_morphism("s"));
    const JMorphism& fold = ws.jmorphism("fold");
    CHECK(fold.index_fn()(ws.poset("L2").parse("2")) == V.parse("c"));
    CHECK(fold.family(ws.poset("L2").parse("2")).at(ws.poset("L2").parse("2")) == c.parse_morphism("s"));
    CHECK(check_jmorphism(ws.jmorphism("flip")).verdict.is_holds());
    const ProReflectivePair& cp = ws.pair("CP");
    CHECK(cp.expansion(c.parse_object("Y")).system.index().size() == 2);
    CHECK(check_pair(cp).is_holds());
  }

  TEST_CASE("positions of parse errors") {
    const WorkspaceError unknown = parse_error("poset L = chain 2\nsystem S in Nope over L = constant A\n");
    CHECK(unknown.kind() == "UnresolvedReference");
    CHECK(unknown.file() == "bad.ws");
    CHECK(unknown.line() == 2);
    CHECK(unknown.column() == 13);

    const WorkspaceError dup = parse_error("poset L = chain 2\nposet L = chain 3\n");
    CHECK(dup.line() == 2);

    const WorkspaceError junk = parse_error("poset L = chain 2\n\n  frobnicate L\n");
    CHECK(junk.kind() == "ParseError");
    CHECK(junk.line() == 3);
    CHECK(junk.column() == 3);

    const WorkspaceError open = parse_error("category C {\n  objects A\n");
    CHECK(open.kind() == "ParseError");
    CHECK(open.line() == 1);

    const WorkspaceError obj = parse_error("category Arrow = \"arrow.cat\"\nposet L = chain 2\nsystem S in Arrow over L = constant Q\n");
    CHECK(obj.kind() == "UnresolvedReference");
    CHECK(obj.line() == 3);
    CHECK(obj.column() == 37);
  }

  TEST_CASE("declared values are validated") {
    const WorkspaceError cyc = parse_error("poset W { elements a b; a <= b; b <= a }\n");
    CHECK(cyc.kind() == "ValidationError");
    const WorkspaceError split = parse_error("poset W { elements a b }\n");
    CHECK(split.kind() == "ValidationError");
    const WorkspaceError laws = parse_error(
        "category Z2 = \"z2.cat\"\nposet L3 = chain 3\n"
        "system S in Z2 over L3 { object 1 = O; object 2 = O; object 3 = O; bond 1 2 = s; bond 2 3 = s; bond 1 3 = s }\n");
    CHECK(laws.kind() == "ValidationError");
    CHECK(laws.line() == 3);
    CHECK(std::string(laws.what()).find("FunctorialityViolation") != std::string::npos);
    const WorkspaceError pair = parse_error(
        "category C { objects X P; morphism idX : X -> X; morphism idP : P -> P; morphism r : X -> P; morphism t : X -> P;"
        " identity X = idX; identity P = idP }\n"
        "poset one = chain 1\nsystem R in C over one = constant P\n"
        "pair Q in C { D: P; expansion X = { 1: r } into R }\n");
    CHECK(pair.kind() == "ValidationError");
    CHECK(std::string(pair.what()).find("E1") != std::string::npos);
    const WorkspaceError typed = parse_error(
        "category Arrow = \"arrow.cat\"\nposet L = chain 1\nsystem A1 in Arrow over L = constant A\n"
        "jmorphism bad : A1 -> A1 over omega { family 1 = const(u) }\n");
    CHECK(typed.line() == 4);
  }

  TEST_CASE("category files") {
    CHECK(load_category_file(tsupport::fixtures() / "cyc.cat").backend() == Category::Backend::CycGrp);
    const CategoryFile f = parse_category_text("objects A B; morphism idA : A -> A; morphism idB : B -> B; identity A = idA; identity B = idB");
    CHECK(f.raw.objects.size() == 2);
    CHECK_FALSE(f.cycgrp);
    try {
      parse_category_text("objects A\nmorphism f : A -> \n", "x.cat");
      FAIL("expected a parse error");
    } catch (const WorkspaceError& e) {
      CHECK(e.file() == "x.cat");
      CHECK(e.line() == 2);
    }
  }

  TEST_CASE("family and affine expressions") {
    const Category z = tsupport::z2();
    const IndexPoset w = IndexPoset::omega();
    const Morphism e = z.parse_morphism("e"), s = z.parse_morphism("s");
    CHECK(parse_family("const(s)", z, w, 0, 0).at(Elem(9)) == s);
    const MorphismFamily st = parse_family("step[(0,e),(3,s)]", z, w, 0, 0);
    CHECK(st.at(Elem(2)) == e);
    CHECK(st.at(Elem(3)) == s);
    CHECK(st.describe() == "step[(0,e),(3,s)]");
    const MorphismFamily per = parse_family("periodic[s | e,s]", z, w, 0, 0);
    CHECK(per.at(Elem(0)) == s);
    CHECK(per.at(Elem(1)) == e);
    CHECK(per.at(Elem(4)) == s);
    CHECK(per.describe() == "periodic[s | e,s]");
    CHECK(parse_family("cycle[e,s]", z, w, 0, 0).at(Elem(3)) == s);
    CHECK(parse_family("table[s,e]", z, IndexPoset::chain(2), 0, 0).at(IndexPoset::chain(2).parse("2")) == e);

    const Category cyc = Category::cycgrp();
    const MorphismFamily r = parse_family("rule(poly: 3*j^2 + j + 1 mod 4)", cyc, w, 8, 8);
    CHECK(r.at(Elem(2)).value == (3 * 4 + 2 + 1) % 4);
    CHECK_THROWS_AS(parse_family("const(q)", z, w, 0, 0), Error);
    CHECK_THROWS_AS(parse_family("step[(0,e)", z, w, 0, 0), Error);

    const IndexPoset K = IndexPoset::product(w, w);
    CHECK(parse_affine("(n, 2*n+1)", w, K)(Elem(3)) == Elem(std::vector<std::int64_t>{3, 7}));
    CHECK(parse_affine("n+1", w, w)(Elem(3)) == Elem(4));
    CHECK(parse_affine("5", w, w)(Elem(3)) == Elem(5));
  }
}
