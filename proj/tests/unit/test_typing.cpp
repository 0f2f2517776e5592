#include <doctest.h>

#include "corpus.hpp"
#include "ptsc/parse.hpp"
#include "ptsc/pts.hpp"
#include "ptsc/typing.hpp"

using namespace ptsc;
using namespace ptsc::testing;

namespace {

struct J {
  PtsSpec spec;
  Environment env;
  Term m, a;
};

J judgment(const char* preset_name, const char* env, const char* m, const char* a) {
  PtsSpec s = preset(preset_name);
  ParseContext ctx{&s, nullptr, false};
  return {s, parse_env(env, ctx), parse_term(m, ctx), parse_term(a, ctx)};
}

Verdict verdict(const J& j) { return check_term(j.spec, j.env, j.m, j.a).verdict; }

}  // namespace

TEST_CASE("sorts") {
  CHECK(verdict(judgment("systemF", "", "*", "#")) == Verdict::Accept);
  CHECK(verdict(judgment("systemF", "", "#", "*")) == Verdict::Reject);
  CHECK(verdict(judgment("systemF", "", "#", "#")) == Verdict::Reject);
}

TEST_CASE("rejections") {
  CHECK(verdict(judgment("stlc", "A : *", "\\x:A. x", "A")) == Verdict::Reject);
  CHECK(verdict(judgment("stlc", "", "\\A:*. \\x:A. x", "(A : *) -> A -> A")) == Verdict::Reject);
  CHECK(verdict(judgment("stlc", "A : *, a : A", "a{a :: nil}", "A")) == Verdict::Reject);
  CHECK(verdict(judgment("stlc", "A : *, x : A, x : A", "x", "A")) == Verdict::Reject);
  CHECK(verdict(judgment("stlc", "A : *, B : *, a : A", "a", "B")) == Verdict::Reject);
  CHECK(verdict(judgment("systemF", "A : *", "[x := A : *] \\y:x. y", "A -> A")) == Verdict::Accept);
  MetaVarRegistry reg;
  reg.declare("a", MetaKind::Term, 0);
  PtsSpec f = preset("systemF");
  ParseContext ctx{&f, &reg, false};
  CheckResult r = check_term(f, parse_env("A : *", ctx), parse_term("?a()", ctx), parse_term("A", ctx));
  CHECK(r.verdict == Verdict::Reject);
}

TEST_CASE("conversion inside a type") {
  J j = judgment("coc", "A : *, a : A",
                 "a", "(\\F:*. A){(\\x:*. x){A :: nil} :: nil}");
  CHECK(verdict(j) == Verdict::Accept);
}

TEST_CASE("inference and environments") {
  J j = judgment("systemF", "A : *", "\\x:A. x", "A -> A");
  InferResult r = infer_term(j.spec, j.env, j.m);
  REQUIRE(r.verdict == Verdict::Accept);
  CHECK(convertible(r.type, j.a) == Conv::Yes);
  CHECK(infer_sort(j.spec, j.env, j.a).verdict == Verdict::Accept);
  CHECK(check_env(j.spec, parse_env("A : *, B : A -> *")).verdict == Verdict::Reject);
  CHECK(check_env(preset("lambdaPi"), parse_env("A : *, B : A -> *")).verdict == Verdict::Accept);
}

TEST_CASE("derivations validate and tampering is caught") {
  J j = judgment("systemF", "A : *, B : *",
                 "\\x:(Q : *) -> (A -> B -> Q) -> Q. x{A :: (\\u:A. \\v:B. u) :: nil}",
                 "((Q : *) -> (A -> B -> Q) -> Q) -> A");
  CheckResult r = check_term(j.spec, j.env, j.m, j.a);
  REQUIRE(r.accepted());
  Validation v = validate_derivation(j.spec, *r.derivation);
  CHECK_MESSAGE(v.ok, v.diagnostic);
  Derivation bad = *r.derivation;
  bad.conclusion.type = parse_term("A");
  Validation w = validate_derivation(j.spec, bad);
  CHECK_FALSE(w.ok);
  CHECK(w.diagnostic.rfind("root", 0) == 0);
  // A rule the spec lacks makes the same tree invalid.
  PtsSpec stlc = preset("stlc");
  CHECK_FALSE(validate_derivation(stlc, *r.derivation).ok);
}

TEST_CASE("the conjunction commutation term") {
  J j = judgment("systemF", "A : *, B : *",
                 "\\x:(Q : *) -> (A -> B -> Q) -> Q. \\Q:*. \\y:B -> A -> Q. "
                 "y{x{B :: (\\x':A. \\y':B. y') :: nil} :: x{A :: (\\x':A. \\y':B. x') :: nil} :: nil}",
                 "((Q : *) -> (A -> B -> Q) -> Q) -> (Q : *) -> (B -> A -> Q) -> Q");
  CHECK(verdict(j) == Verdict::Accept);
}

TEST_CASE("every corpus judgment is accepted with a valid derivation") {
  auto corpus = load_corpus();
  CHECK(corpus.size() >= 50);
  for (const auto& e : corpus) {
    PtsSpec s = preset(e.preset);
    CheckResult r = check_term(s, e.env, e.term, e.type);
    CAPTURE(e.line);
    CHECK_MESSAGE(r.accepted(), r.reason);
    if (!r.accepted()) continue;
    Validation v = validate_derivation(s, *r.derivation);
    CHECK_MESSAGE(v.ok, v.diagnostic);
  }
}

TEST_CASE("subject reduction on the corpus") {
  for (const auto& e : load_corpus()) {
    PtsSpec s = preset(e.preset);
    for (const Redex& rx : find_redexes(e.term, all_rules())) {
      Term n = step(e.term, rx);
      CheckResult r = check_term(s, e.env, n, e.type);
      CAPTURE(e.line);
      CAPTURE(print(n));
      CHECK_MESSAGE(r.accepted(), r.reason);
    }
  }
}

TEST_CASE("typing is preserved by the translations") {
  for (const auto& e : load_corpus()) {
    PtsSpec s = preset(e.preset);
    CAPTURE(e.line);
    CheckResult r = check_pts(s, encode(e.env), encode(e.term), encode(e.type));
    CHECK_MESSAGE(r.accepted(), r.reason);
  }
  for (const auto& e : load_pts_corpus()) {
    PtsSpec s = preset(e.preset);
    CAPTURE(e.line);
    REQUIRE(check_pts(s, e.env, e.term, e.type).accepted());
    CheckResult r = check_term(s, decode(e.env), decode(e.term), decode(e.type));
    CHECK_MESSAGE(r.accepted(), r.reason);
  }
}
