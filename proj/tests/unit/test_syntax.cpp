#include <doctest.h>

#include "corpus.hpp"
#include "generators.hpp"
#include "ptsc/parse.hpp"
#include "ptsc/spec.hpp"
#include "ptsc/syntax.hpp"

using namespace ptsc;
using namespace ptsc::testing;

TEST_CASE("parse and print basic forms") {
  CHECK(print(parse_term("\\x:A. x")) == "\\x:A. x");
  Term t = parse_term("(x : *) -> x -> x");
  REQUIRE(t.is(Kind::Pi));
  CHECK(t.name() == "x");
  CHECK(t.body().is(Kind::Pi));
  CHECK(t.body().domain().is(Kind::VarApp));
  CHECK(t.body().domain().args().is(Kind::Nil));

  Term c = parse_term("[x := a : A] f{x :: nil}");
  REQUIRE(c.is(Kind::Cut));
  CHECK(c.name() == "x");
  CHECK(print(c.domain()) == "A");
  CHECK(print(c.payload()) == "a");

  ListTerm l = parse_list("a :: nil ++ b :: nil");
  REQUIRE(l.is(Kind::Concat));
  CHECK(l.left().is(Kind::Cons));

  ListTerm cl = parse_list("[y := a : A] y :: nil");
  REQUIRE(cl.is(Kind::CutL));
  CHECK(cl.body().is(Kind::Cons));

  Term ap = parse_term("(\\x:A. x){a :: nil}{nil}");
  REQUIRE(ap.is(Kind::App));
  CHECK(ap.head().is(Kind::App));
}

TEST_CASE("parse errors carry a position") {
  CHECK_THROWS_AS(parse_term("\\x:A x"), ParseError);
  CHECK_THROWS_AS(parse_term("f{a ::}"), ParseError);
  CHECK_THROWS_AS(parse_term("?a()"), ParseError);  // no registry
  try {
    parse_term("(x : A) ->");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() >= 10);
  }
}

TEST_CASE("meta-variables are checked against the registry") {
  MetaVarRegistry reg;
  reg.declare("a", MetaKind::Term, 1);
  ParseContext ctx{nullptr, &reg, false};
  Term t = parse_term("?a(x)", ctx);
  CHECK(t.is(Kind::Meta));
  CHECK_FALSE(t.is_ground());
  CHECK_THROWS_AS(parse_term("?a(x, y)", ctx), ParseError);
  CHECK_THROWS_AS(parse_term("?b()", ctx), ParseError);
  ParseContext open{nullptr, &reg, true};
  parse_list("??b(x)", open);
  REQUIRE(reg.find("b"));
  CHECK(reg.find("b")->kind == MetaKind::List);
  CHECK_THROWS(reg.declare("a", MetaKind::Term, 2));
  CHECK_THROWS(reg.make("a", {}));
}

TEST_CASE("alpha equivalence") {
  CHECK(alpha_eq(parse_term("\\x:A. x"), parse_term("\\y:A. y")));
  CHECK_FALSE(alpha_eq(parse_term("\\x:A. x"), parse_term("\\y:A. x")));
  CHECK(alpha_eq(parse_term("[x := a : A] x"), parse_term("[z := a : A] z")));
  CHECK_FALSE(alpha_eq(parse_term("[x := a : A] x"), parse_term("[x := b : A] x")));
  CHECK(alpha_hash(parse_term("(x : A) -> x")) == alpha_hash(parse_term("(y : A) -> y")));
}

TEST_CASE("free variables and renaming avoid capture") {
  Term t = parse_term("\\y:A. x{y :: nil}");
  CHECK(free_vars(t) == std::set<std::string>{"A", "x"});
  Term r = rename_free(t, "x", "y");
  CHECK(r.has_free("y"));
  CHECK_FALSE(r.has_free("x"));
  CHECK(r.name() != "y");
  CHECK(fresh_name("x3", [](std::string_view s) { return s == "x" || s == "x1"; }) == "x2");
}

TEST_CASE("environments") {
  Environment env = parse_env("A : *, x : A");
  CHECK(env.size() == 2);
  CHECK(env.binds("x"));
  CHECK(env.distinct());
  CHECK(print(*env.lookup("x")) == "A");
  CHECK(env.domain_args().size() == 2);
  CHECK(print(env) == "A : *, x : A");
  CHECK(parse_env("").empty());
  CHECK_FALSE(parse_env("x : *, x : *").distinct());
}

TEST_CASE("specs: presets, json and validation") {
  for (const std::string& n : preset_names()) {
    PtsSpec s = preset(n);
    CHECK_NOTHROW(s.validate());
    CHECK(spec_from_json(spec_to_json(s)) == s);
  }
  PtsSpec f = preset("systemF");
  CHECK(f.has_axiom("*", "#"));
  CHECK(f.has_rule("#", "*", "*"));
  CHECK_FALSE(f.has_rule("*", "#", "#"));
  CHECK(preset("lambda-arrow") == preset("stlc"));
  // Two-entry rules abbreviate (s1, s2, s2).
  auto j = nlohmann::json::parse(R"({"sorts":["*","#"],"axioms":[["*","#"]],"rules":[["#","*"]]})");
  CHECK(spec_from_json(j).has_rule("#", "*", "*"));
  auto bad = nlohmann::json::parse(R"({"sorts":["*"],"axioms":[["*","#"]],"rules":[]})");
  CHECK_THROWS(spec_from_json(bad).validate());
}

TEST_CASE("preset files match the built-in presets") {
  for (const char* n : {"stlc", "systemF", "fomega", "lambdaPi", "coc"}) {
    CAPTURE(n);
    CHECK(load_spec(data_path(std::string("../../presets/") + n + ".json")) == preset(n));
  }
}

// Seed 0x5eed0001: printing then parsing gives back an alpha-equal term.
TEST_CASE("print/parse round trip on random terms") {
  MetaVarRegistry reg;
  declare_test_metas(reg);
  ParseContext ctx{nullptr, &reg, false};
  TermGen gen(0x5eed0001);
  for (int i = 0; i < 300; ++i) {
    Term t = gen.term();
    std::string s = print(t);
    CAPTURE(s);
    CHECK(alpha_eq(parse_term(s, ctx), t));
    ListTerm l = gen.list();
    CHECK(alpha_eq(parse_list(print(l), ctx), l));
  }
}
