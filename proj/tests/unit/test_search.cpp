#include <doctest.h>

#include <array>
#include <random>
#include <set>

#include "corpus.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "ptsc/parse.hpp"
#include "ptsc/search.hpp"
#include "ptsc/typing.hpp"

using namespace ptsc;
using namespace ptsc::testing;

namespace {

struct Goal {
  PtsSpec spec;
  Environment env;
  Term type;
};

Goal goal(const char* preset_name, const char* env, const char* type) {
  PtsSpec s = preset(preset_name);
  ParseContext ctx{&s, nullptr, false};
  return {s, parse_env(env, ctx), parse_term(type, ctx)};
}

Term term_in(const Goal& g, const char* text) {
  ParseContext ctx{&g.spec, nullptr, false};
  return parse_term(text, ctx);
}

std::vector<Term> search(const Goal& g, std::size_t depth, std::size_t max_results = 1000) {
  SearchConfig cfg;
  cfg.max_depth = depth;
  cfg.max_results = max_results;
  return ps_search_all(g.spec, g.env, g.type, cfg);
}

const char* kSection8Type = "((Q : *) -> (A -> B -> Q) -> Q) -> (Q : *) -> (B -> A -> Q) -> Q";
const char* kSection8Term =
    "\\x:(Q : *) -> (A -> B -> Q) -> Q. \\Q:*. \\y:B -> A -> Q. "
    "y{x{B :: (\\x1:A. \\y1:B. y1) :: nil} :: x{A :: (\\x1:A. \\y1:B. x1) :: nil} :: nil}";

}  // namespace

TEST_CASE("quasi-normal forms") {
  Goal g = goal("systemF", "A : *, f : A -> A", "A");
  CHECK(is_quasi_normal(term_in(g, "\\x:A. f{x :: nil}")));
  CHECK(is_quasi_normal(term_in(g, "\\x:(\\X:*. X){A :: nil}. x")));
  CHECK_FALSE(is_quasi_normal(term_in(g, "(\\x:A. x){nil}")));
  CHECK_FALSE(is_quasi_normal(term_in(g, "[x := f : A -> A] x")));
  CHECK_FALSE(is_quasi_normal(term_in(g, "(A -> (\\X:*. X){A :: nil})")));
  auto w = quasi_normal_witness(term_in(g, "\\x:(\\X:*. X){A :: nil}. x"));
  REQUIRE(w.has_value());
  CHECK(w->annotation_redexes.size() == 1);
  CHECK_FALSE(quasi_normal_witness(term_in(g, "(\\x:A. x){nil}")).has_value());
}

TEST_CASE("search derivation checking") {
  Goal s8 = goal("systemF", "A : *, B : *", kSection8Type);
  PsVerdict v = ps_check(s8.spec, s8.env, term_in(s8, kSection8Term), s8.type);
  REQUIRE(v.accepted());
  CHECK(v.height == 12);

  Goal sorts = goal("systemF", "", "#");
  CHECK(ps_check(sorts.spec, sorts.env, term_in(sorts, "*"), sorts.type).accepted());
  CHECK(ps_check(sorts.spec, sorts.env, term_in(sorts, "#"), term_in(sorts, "*")).verdict ==
        Verdict::Reject);

  Goal g = goal("stlc", "A : *", "A -> A");
  CHECK(ps_check(g.spec, g.env, term_in(g, "\\x:A. x"), g.type).height == 2);
  // A lambda never inhabits a sort, and a redex is never a search result.
  CHECK(ps_check(g.spec, g.env, term_in(g, "\\x:A. x"), term_in(g, "*")).verdict == Verdict::Reject);
  CHECK(ps_check(g.spec, g.env, term_in(g, "\\x:A. (\\y:A. y){x :: nil}"), g.type).verdict ==
        Verdict::Reject);
  // The annotation only has to be convertible to the domain.
  Goal f = goal("systemF", "A : *", "A -> A");
  CHECK(ps_check(f.spec, f.env, term_in(f, "\\x:(\\X:*. X){A :: nil}. x"), f.type).accepted());
}

TEST_CASE("first results") {
  Goal g = goal("stlc", "A : *", "A -> A");
  std::vector<Term> r = search(g, 8, 1);
  REQUIRE(r.size() == 1);
  CHECK(alpha_eq(r[0], term_in(g, "\\x:A. x{nil}")));

  Goal h = goal("systemF", "", "#");
  SearchConfig cfg;
  cfg.max_depth = 1;
  std::vector<Term> sorts = ps_search_all(h.spec, h.env, h.type, cfg);
  REQUIRE(sorts.size() == 1);
  CHECK(alpha_eq(sorts[0], term_in(h, "*")));
}

TEST_CASE("preconditions") {
  Goal bad_env = goal("stlc", "x : A", "A");
  CHECK_THROWS_AS(search(bad_env, 3), SearchPrecondition);
  Goal bad_goal = goal("stlc", "A : *", "\\x:A. x");
  CHECK_THROWS_AS(search(bad_goal, 3), SearchPrecondition);
}

TEST_CASE("cancellation") {
  Goal g = goal("systemF", "A : *, B : *", kSection8Type);
  SearchConfig cfg;
  cfg.max_depth = 30;
  std::stop_source src;
  src.request_stop();
  SearchStats st = ps_search(g.spec, g.env, g.type, cfg, [](const Term&, std::size_t) { return true; },
                             src.get_token());
  CHECK(st.cancelled);
}

TEST_CASE("spines") {
  Goal g = goal("systemF", "A : *", "A");
  Spine s = spine(term_in(g, "(X : *) -> X -> X"));
  CHECK(s.products == 2);
  CHECK(s.head == Spine::Head::Bound);
  Spine a = spine(term_in(g, "A -> A"));
  CHECK(a.head == Spine::Head::Free);
  CHECK(spine_compatible(a, spine(term_in(g, "A"))));
  CHECK_FALSE(spine_compatible(spine(term_in(g, "A")), spine(term_in(g, "A -> A"))));
  CHECK_FALSE(spine_compatible(spine(term_in(g, "*")), spine(term_in(g, "A"))));
}

namespace {

std::vector<Goal> small_goals(std::size_t n) {
  std::vector<Goal> out;
  for (const GoalCase& c : load_goals()) {
    if (out.size() == n) break;
    out.push_back({c.spec, c.env, c.type});
  }
  return out;
}

std::string show(const Goal& g) { return print(g.env) + " |- " + print(g.type); }

}  // namespace

TEST_CASE("search agrees with brute force on small goals") {
  const std::size_t depth = 4;
  std::vector<Goal> goals = small_goals(10);
  REQUIRE(goals.size() == 10);
  for (const Goal& g : goals) {
    CAPTURE(show(g));
    std::vector<Term> found = search(g, depth);

    std::vector<Term> expected = naive_ps_search(g.spec, g.env, g.type, depth);

    std::set<std::string> want, got;
    auto key = [](const Term& m) { return std::to_string(alpha_hash(erase_lambda_annotations(m))); };
    for (const Term& m : expected) want.insert(key(m));
    for (const Term& m : found) got.insert(key(m));
    CHECK(got == want);
    CHECK(found.size() == got.size());
  }
}

TEST_CASE("search results are sound, quasi-normal and distinct") {
  for (const Goal& g : small_goals(20)) {
    CAPTURE(show(g));
    std::vector<Term> found = search(g, 6, 200);
    for (std::size_t i = 0; i < found.size(); ++i) {
      CHECK(is_quasi_normal(found[i]));
      CHECK(ps_check(g.spec, g.env, found[i], g.type).accepted());
      CHECK(check_term(g.spec, g.env, found[i], g.type).verdict == Verdict::Accept);
      for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(alpha_eq(found[i], found[j]));
    }
  }
}

// If M inhabits A by search and A reduces to A', M inhabits A' by search too.
TEST_CASE("search derivations are stable under reduction of the type") {
  const std::vector<std::array<const char*, 3>> goals = {{
      {"coc", "A : *", "(\\X:*. X -> X){A :: nil}"},
      {"coc", "A : *, B : *", "[Y := A : *] Y -> (\\Z:*. Z){B :: nil} -> Y"},
      {"coc", "A : *, a : A", "(\\X:*. (\\W:*. W){X :: nil}){A :: nil}"},
      {"systemF", "", "[Y := (X : *) -> X : *] Y -> Y"},
  }};
  std::mt19937_64 rng(0x5eed0501);
  for (const auto& [p, e, t] : goals) {
    Goal g = goal(p, e, t);
    CAPTURE(std::string(e) + " |- " + t);
    std::vector<Term> found = search(g, 5, 20);
    REQUIRE_FALSE(found.empty());
    for (const Term& m : found) {
      for (int walk = 0; walk < 4; ++walk) {
        Term a = g.type;
        for (;;) {
          std::vector<Redex> next = find_redexes(a, all_rules());
          if (next.empty()) break;
          a = step(a, choose(rng, next));
          CHECK(ps_check(g.spec, g.env, m, a).accepted());
        }
      }
    }
  }
}

TEST_CASE("deterministic order") {
  Goal g = goal("systemF", "A : *, B : *", "(A -> B) -> A -> B");
  std::vector<Term> a = search(g, 6, 50), b = search(g, 6, 50);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(alpha_eq(a[i], b[i]));
}
