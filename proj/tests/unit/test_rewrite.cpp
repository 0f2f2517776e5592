#include <doctest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "ptsc/foe.hpp"
#include "ptsc/parse.hpp"
#include "ptsc/rewrite.hpp"

using namespace ptsc;
using namespace ptsc::testing;

namespace {

Term T(const char* s) { return parse_term(s); }

bool same(const Expr& a, const Expr& b) { return alpha_eq(a, b); }

}  // namespace

TEST_CASE("rule names round trip") {
  for (std::size_t i = 0; i < kRuleCount; ++i) {
    Rule r = static_cast<Rule>(i);
    CHECK(rule_from_name(rule_name(r)) == r);
  }
  CHECK_FALSE(rule_from_name("Z9"));
  CHECK(x_rules().count() == kRuleCount - 1);
  CHECK_FALSE(x_rules().test(static_cast<std::size_t>(Rule::B)));
}

TEST_CASE("x' normal forms of small terms") {
  CHECK(same(normalize_x(T("[x := a : A] \\y:B. x")), T("\\y:B. a")));
  CHECK(same(normalize_x(T("(f{a :: nil}){b :: nil}")), T("f{a :: b :: nil}")));
  CHECK(same(normalize_x(T("f{a :: nil ++ b :: nil}")), T("f{a :: b :: nil}")));
  CHECK(same(normalize_x(T("(f{a :: nil}){nil}")), T("f{a :: nil}")));
  CHECK(same(normalize_x(T("[x := g{c :: nil} : A] x{b :: nil}")), T("g{c :: b :: nil}")));
  CHECK(same(normalize_x(T("[x := a : A] y")), T("y")));
  CHECK(same(normalize_x(T("[x := a : A] (z : x) -> x")), T("(z : a) -> a")));
  // A cut under a binder of the same name is blocked by the binder.
  CHECK(same(normalize_x(T("[x := a : A] \\x:x. x")), T("\\x:a. x")));
}

TEST_CASE("B steps and full normalisation") {
  Normalized n = normalize_bx(T("(\\x:A. x){a :: nil}"));
  CHECK(same(n.term, T("a")));
  CHECK(n.b_steps == 1);
  CHECK_FALSE(n.exhausted);
  Normalized k = normalize_bx(T("(\\x:A. \\y:B. x){a :: b :: nil}"));
  CHECK(same(k.term, T("a")));
  CHECK(k.b_steps == 2);
  // Omega-like term: fuel runs out.
  Term w = T("\\x:A. x{x :: nil}");
  Term omega = app(w, cons(w, nil()));
  Normalized o = normalize_bx(omega, 50);
  CHECK(o.exhausted);
  CHECK(convertible(omega, omega, 50) == Conv::Yes);  // alpha fast path
  CHECK(convertible(omega, T("a"), 50) == Conv::Undecided);
}

TEST_CASE("convertibility") {
  CHECK(convertible(T("(\\x:*. x){A :: nil}"), T("A")) == Conv::Yes);
  CHECK(convertible(T("[x := A : *] x -> x"), T("A -> A")) == Conv::Yes);
  CHECK(convertible(T("A -> B"), T("B -> A")) == Conv::No);
}

TEST_CASE("redex positions and stale redexes") {
  Term t = T("f{(\\x:A. x){a :: nil} :: nil}");
  auto rs = find_redexes(t, all_rules());
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].rule == Rule::B);
  CHECK(path_string(rs[0].position) == "0.0");
  CHECK(path_string({}) == "root");
  CHECK_THROWS_AS(step(t, Redex{{}, Rule::B}), StaleRedex);
}

TEST_CASE("head normalisation exposes the head and keeps inner cuts") {
  Term t = T("[x := a : A] \\y:x. [z := y : x] z");
  CHECK(head_redex(t).has_value());
  Normalized h = head_normalize(t);
  REQUIRE(h.term.is(Kind::Lam));
  CHECK_FALSE(head_redex(h.term));
  CHECK(convertible(h.term, t) == Conv::Yes);
  CHECK_FALSE(head_redex(T("\\y:A. (\\x:A. x){y :: nil}")));
}

// Seed 0x5eed0101: the big-step normaliser agrees with an exhaustive search
// of all x' reducts, which also has a single normal form.
TEST_CASE("normalize_x matches exhaustive search") {
  GenConfig cfg;
  cfg.max_depth = 5;
  TermGen gen(0x5eed0101, cfg);
  std::mt19937_64 rng(0x5eed0102);
  for (int i = 0; i < 150; ++i) {
    Term t = gen.term();
    BfsResult r = bfs_normalize(t, x_rules(), 4000, rng);
    CAPTURE(print(t));
    if (r.exhaustive) CHECK(r.distinct_normal_forms == 1);
    CHECK(alpha_eq(normalize_x(t), r.normal_form));
  }
}

// Seed 0x5eed0201: every x' step decreases the first-order encoding, except
// steps inside a cut annotation, which the encoding does not see.
TEST_CASE("x' steps decrease in the path ordering") {
  TermGen gen(0x5eed0201);
  std::mt19937_64 rng(0x5eed0202);
  auto in_annotation = [](const Expr& t, const Path& p) {
    const Expr* cur = &t;
    for (std::uint32_t i : p) {
      if ((cur->is(Kind::Cut) || cur->is(Kind::CutL)) && i == 0) return true;
      cur = &(*cur)[i];
    }
    return false;
  };
  for (int i = 0; i < 150; ++i) {
    Term t = gen.term();
    for (int k = 0; k < 40; ++k) {
      auto rs = find_redexes(t, x_rules());
      if (rs.empty()) break;
      Redex r = choose(rng, rs);
      Term u = step(t, r);
      CAPTURE(print(t));
      CAPTURE(print(u));
      if (in_annotation(t, r.position))
        CHECK(foe(t) == foe(u));
      else
        CHECK(lpo_gt(foe(t), foe(u)));
      t = u;
    }
  }
}

// Seed 0x5eed0301: the traced normaliser replays its own trace.
TEST_CASE("traced normalisation replays") {
  TermGen gen(0x5eed0301);
  for (int i = 0; i < 100; ++i) {
    Term t = gen.term();
    std::vector<Redex> trace;
    Term n = normalize_x_traced(t, &trace);
    CHECK(alpha_eq(n, normalize_x(t)));
    CHECK(find_redexes(n, x_rules()).empty());
    Term cur = t;
    for (const Redex& r : trace) cur = step(cur, r);
    CHECK(alpha_eq(cur, n));
  }
}

TEST_CASE("lpo basics") {
  FoTerm b{FoSym::Bullet, {}};
  FoTerm un{FoSym::Un, {b}};
  CHECK(lpo_gt(un, b));
  CHECK_FALSE(lpo_gt(b, un));
  CHECK_FALSE(lpo_gt(un, un));
  FoTerm sub{FoSym::Sub, {b, b}};
  FoTerm tup{FoSym::Tuple, {un, un, un}};
  CHECK(lpo_gt(sub, tup));
  CHECK_FALSE(lpo_gt(tup, sub));
  CHECK(lpo_gt(FoTerm{FoSym::Sub, {un, b}}, FoTerm{FoSym::Tuple, {b, b}}));
}
