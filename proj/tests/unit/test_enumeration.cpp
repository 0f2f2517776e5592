#include <doctest.h>

#include <random>
#include <set>

#include "corpus.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "ptsc/enumeration.hpp"
#include "ptsc/parse.hpp"
#include "ptsc/typing.hpp"

using namespace ptsc;
using namespace ptsc::testing;

namespace {

struct Problem {
  PtsSpec spec;
  MetaVarRegistry reg;
  Environment env;
  Term type;
  GoalEnvironment sigma;
};

Problem problem(const char* preset_name, const char* env, const char* type) {
  Problem p;
  p.spec = preset(preset_name);
  ParseContext ctx{&p.spec, nullptr, false};
  p.env = parse_env(env, ctx);
  p.type = parse_term(type, ctx);
  p.sigma = initial_goals(p.reg, p.env, p.type);
  return p;
}

Term parse_in(const Problem& p, const char* text) {
  ParseContext ctx{&p.spec, const_cast<MetaVarRegistry*>(&p.reg), false};
  return parse_term(text, ctx);
}

// The root goal's term under s.
Term root_term(const Problem& p, const Substitution& s) {
  const auto& g = std::get<TermGoal>(p.sigma.front());
  return apply_subst(s, meta(g.meta, g.env.domain_args()));
}

const char* kSection8Type = "((Q : *) -> (A -> B -> Q) -> Q) -> (Q : *) -> (B -> A -> Q) -> Q";
const char* kSection8Term =
    "\\x:(Q : *) -> (A -> B -> Q) -> Q. \\Q:*. \\y:B -> A -> Q. "
    "y{x{B :: (\\x1:A. \\y1:B. y1) :: nil} :: x{A :: (\\x1:A. \\y1:B. x1) :: nil} :: nil}";

}  // namespace

TEST_CASE("substitution application") {
  Problem p = problem("systemF", "A : *, f : A -> A -> A", "A");
  p.reg.declare("m", MetaKind::Term, 2);
  p.reg.declare("l", MetaKind::List, 1);
  Term occ = parse_in(p, "?m(u, v)");
  Substitution s{{"m", {{"x", "y"}, parse_in(p, "f{x :: y :: nil}")}}};
  CHECK(alpha_eq(apply_subst(s, occ), parse_in(p, "f{u :: v :: nil}")));
  CHECK(alpha_eq(apply_subst({}, occ), occ));

  // Arguments that reuse the binder names are not captured.
  Term swapped = parse_in(p, "?m(y, x)");
  CHECK(alpha_eq(apply_subst(s, swapped), parse_in(p, "f{y :: x :: nil}")));

  // Arguments land under binders of the body without capture.
  Substitution t{{"m", {{"x", "y"}, parse_in(p, "\\y1:A. x{y1 :: y :: nil}")}}};
  CHECK(alpha_eq(apply_subst(t, parse_in(p, "?m(f, y1)")), parse_in(p, "\\z:A. f{z :: y1 :: nil}")));

  // List bindings, and bindings that mention other bound meta-variables.
  p.reg.declare("l2", MetaKind::List, 0);
  Substitution u{{"l", {{"x"}, cons(var("x"), meta_list("l2", {}))}}, {"l2", {{}, nil()}}};
  CHECK(alpha_eq(apply_subst(u, parse_in(p, "f{??l(A)}")), parse_in(p, "f{A :: nil}")));
  CHECK_THROWS_AS(apply_subst(Substitution{{"m", {{"x"}, var("x")}}}, occ), std::invalid_argument);

  // Environments and constraints are mapped pointwise.
  GoalEntry c = Constraint{p.env, occ, parse_in(p, "?m(v, u)")};
  auto mapped = std::get<Constraint>(apply_subst(s, c));
  CHECK(alpha_eq(mapped.lhs, parse_in(p, "f{u :: v :: nil}")));
  CHECK(alpha_eq(mapped.rhs, parse_in(p, "f{v :: u :: nil}")));
}

// Binding a meta-variable to Dom(G).M and instantiating its identity
// occurrence gives back M.
TEST_CASE("claim round trip") {
  GenConfig cfg;
  cfg.metas = false;
  TermGen gen(0x5eed0601, cfg);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    Term m = normalize_x(gen.term());
    std::vector<std::string> dom(m.fv().begin(), m.fv().end());
    std::vector<Term> args;
    for (const std::string& x : dom) args.push_back(var(x));
    Substitution s{{"r", {dom, m}}};
    Term back = apply_subst(s, meta("r", args));
    CAPTURE(print(m));
    CHECK(alpha_eq(back, m));
    CHECK(alpha_eq(normalize_x(back), back));
    ++checked;
  }
  CHECK(checked == 300);
}

// If M reduces to N then the instances of M and N under a ground
// substitution are joinable.
TEST_CASE("substitution commutes with reduction") {
  MetaVarRegistry reg;
  declare_test_metas(reg);
  GenConfig cfg;
  cfg.max_depth = 5;
  TermGen gen(0x5eed0602, cfg);
  GenConfig ground = cfg;
  ground.metas = false;
  ground.max_depth = 3;
  TermGen bodies(0x5eed0603, ground);
  std::mt19937_64 rng(0x5eed0604);
  int compared = 0;
  for (int i = 0; i < 400; ++i) {
    Substitution s;
    for (std::size_t k = 0; k < 4; ++k) {
      std::vector<std::string> binders(cfg.vars.begin(), cfg.vars.begin() + static_cast<long>(k));
      auto closed = [&](Expr body) {
        for (const std::string& x : std::vector<std::string>(body.fv().begin(), body.fv().end()))
          if (std::find(binders.begin(), binders.end(), x) == binders.end())
            body = body.is_list() ? cut_list(sort("*"), sort("*"), x, body) : cut(sort("*"), sort("*"), x, body);
        return body;
      };
      s["a" + std::to_string(k)] = {binders, normalize_x(closed(bodies.term()))};
      s["b" + std::to_string(k)] = {binders, normalize_x(closed(bodies.list()))};
    }
    Term m = gen.term();
    std::vector<Redex> rs = find_redexes(m, all_rules());
    if (rs.empty()) continue;
    Term n = step(m, choose(rng, rs));
    Normalized lm = normalize_bx(apply_subst(s, m), 2000);
    Normalized ln = normalize_bx(apply_subst(s, n), 2000);
    if (lm.exhausted || ln.exhausted) continue;
    CAPTURE(print(m));
    CAPTURE(print(n));
    CHECK(alpha_eq(lm.term, ln.term));
    ++compared;
  }
  CHECK(compared >= 150);
}

TEST_CASE("solved constraints") {
  Problem p = problem("systemF", "A : *, Q : *", "A");
  p.reg.declare("c", MetaKind::Term, 0);
  CHECK(is_solved(Constraint{p.env, parse_in(p, "Q"), parse_in(p, "Q")}) == Conv::Yes);
  CHECK(is_solved(Constraint{p.env, parse_in(p, "?c()"), parse_in(p, "A")}) == Conv::No);
  CHECK(is_solved(Constraint{p.env, parse_in(p, "*"), parse_in(p, "#")}) == Conv::No);
  CHECK(is_solved(GoalEnvironment{}) == Conv::Yes);
  CHECK(is_solved(p.sigma) == Conv::No);

  GoalEnvironment sigma = {Constraint{p.env, parse_in(p, "Q"), parse_in(p, "Q")},
                           Constraint{p.env, parse_in(p, "?c()"), parse_in(p, "A")}};
  Simplified s = simplify_constraints(sigma);
  REQUIRE_FALSE(s.failed);
  CHECK(s.discharged == 1);
  CHECK(s.sigma.size() == 1);
  CHECK(simplify_constraints({Constraint{p.env, parse_in(p, "*"), parse_in(p, "#")}}).failed);
  CHECK(simplify_constraints({Constraint{p.env, parse_in(p, "A -> ?c()"), parse_in(p, "Q -> A")}}).failed);
  CHECK(simplify_constraints({Constraint{p.env, parse_in(p, "A -> ?c()"), parse_in(p, "*")}}).failed);
  CHECK_FALSE(simplify_constraints({Constraint{p.env, parse_in(p, "A -> ?c()"), parse_in(p, "A -> Q")}}).failed);
  CHECK_FALSE(rigid_clash(parse_in(p, "(\\X:*. X){?c() :: nil}"), parse_in(p, "A")).has_value());
  CHECK(rigid_clash(parse_in(p, "(\\X:*. A){?c() :: nil}"), parse_in(p, "Q")).has_value());
}

TEST_CASE("goal environments are validated") {
  Problem p = problem("stlc", "A : *", "A");
  CHECK_NOTHROW(validate_goals(p.sigma, p.reg));
  GoalEnvironment twice = {p.sigma[0], p.sigma[0]};
  CHECK_THROWS_AS(validate_goals(twice, p.reg), MalformedGoals);
  p.reg.declare("w", MetaKind::Term, 3);
  CHECK_THROWS_AS(validate_goals({TermGoal{p.env, "w", p.type}}, p.reg), MalformedGoals);
  CHECK_THROWS_AS(validate_goals({ListGoal{p.env, p.type, "w", p.type}}, p.reg), MalformedGoals);
}

TEST_CASE("single rule applications") {
  Problem p = problem("systemF", "A : *, B : *", kSection8Type);
  const TermGoal& root = std::get<TermGoal>(p.sigma[0]);

  PeStep claim = pe_enum_term(p.spec, p.reg, root.env, root.type, {PeRule::Claim});
  REQUIRE(claim.goals.size() == 1);
  CHECK(claim.term.is(Kind::Meta));
  CHECK(claim.term.children().size() == 2);

  CHECK_THROWS_AS(pe_enum_term(p.spec, p.reg, root.env, root.type, {PeRule::Sorted, "", "*", {}}),
                  SideCondition);
  std::vector<RuleChoice> at_root = pe_choices(p.spec, p.sigma[0]);
  REQUIRE_FALSE(at_root.empty());
  CHECK(at_root[0].rule == PeRule::PiR);

  // Three Pi-R steps, then Contr(y) and two Pi-L steps and an axiom give the
  // partial term and goals of the first enumeration derivation.
  GoalEnvironment sigma = p.sigma;
  Substitution bound;
  for (int i = 0; i < 3; ++i)
    sigma = splice(sigma, 0, pe_enum(p.spec, p.reg, sigma[0], {PeRule::PiR}), &bound);
  const auto& inner = std::get<TermGoal>(sigma[0]);
  CHECK(inner.env.size() == 5);
  std::string y = inner.env[4].var;
  sigma = splice(sigma, 0, pe_enum(p.spec, p.reg, sigma[0], {PeRule::Contr, y, "", {}}), &bound);
  sigma = splice(sigma, 0, pe_enum(p.spec, p.reg, sigma[0], {PeRule::PiL}), &bound);
  sigma = splice(sigma, 1, pe_enum(p.spec, p.reg, sigma[1], {PeRule::PiL}), &bound);
  sigma = splice(sigma, 2, pe_enum(p.spec, p.reg, sigma[2], {PeRule::Axiom}), &bound);
  REQUIRE(sigma.size() == 3);
  const auto& gb = std::get<TermGoal>(sigma[0]);
  const auto& ga = std::get<TermGoal>(sigma[1]);
  const auto& q = std::get<Constraint>(sigma[2]);
  CHECK(print(gb.type) == "B");
  CHECK(print(ga.type) == "A");
  CHECK(is_solved(q) == Conv::Yes);
  CHECK(print(q.lhs) == "Q");

  Term partial = apply_subst(bound, meta(root.meta, root.env.domain_args()));
  CHECK(print(partial, {.compact = true}) ==
        "\\x Q x1. x1{?" + gb.meta + "(A, B, x, Q, x1) :: ?" + ga.meta + "(A, B, x, Q, x1) :: nil}");
  Simplified s = simplify_constraints(sigma);
  CHECK(s.discharged == 1);
  CHECK(s.sigma.size() == 2);
}

TEST_CASE("solutions are checked") {
  Problem p = problem("systemF", "A : *, B : *", kSection8Type);
  PeOptions opts;
  PeOutcome r = pe_solve(p.spec, p.reg, p.sigma, opts);
  REQUIRE(r.status == PeStatus::Solved);
  CHECK(check_solution(p.spec, r.sigma, p.sigma) == Conv::Yes);
  CHECK(check_solution(p.spec, {}, GoalEnvironment{}) == Conv::Yes);
  CHECK(check_solution(p.spec, {}, p.sigma) == Conv::No);

  // Binding the two arguments of y the other way round is rejected.
  Problem q = problem("systemF", "A : *, B : *, x : (Q : *) -> (A -> B -> Q) -> Q, Q : *, y : B -> A -> Q", "B");
  GoalEnvironment two = q.sigma;
  std::string other = q.reg.fresh(MetaKind::Term, 5, "a");
  two.push_back(TermGoal{q.env, other, parse_in(q, "A")});
  Term nb = parse_in(q, "x{B :: (\\u:A. \\v:B. v) :: nil}");
  Term na = parse_in(q, "x{A :: (\\u:A. \\v:B. u) :: nil}");
  std::vector<std::string> dom = q.env.domain();
  std::string first = std::get<TermGoal>(two[0]).meta;
  CHECK(check_solution(q.spec, {{first, {dom, nb}}, {other, {dom, na}}}, two) == Conv::Yes);
  CHECK(check_solution(q.spec, {{first, {dom, na}}, {other, {dom, nb}}}, two) == Conv::No);
}

TEST_CASE("conjunction swap by lazy enumeration") {
  Problem p = problem("systemF", "A : *, B : *", kSection8Type);
  PeOptions opts;
  opts.strategy = Strategy::Lazy;
  opts.trace = true;
  PeOutcome r = pe_solve(p.spec, p.reg, p.sigma, opts);
  REQUIRE(r.status == PeStatus::Solved);
  CHECK(r.nodes <= 50'000);
  Term found = root_term(p, r.sigma);
  CHECK(alpha_eq(erase_lambda_annotations(found), erase_lambda_annotations(parse_in(p, kSection8Term))));
  CHECK(alpha_eq(found, parse_in(p, kSection8Term)));
  CHECK_FALSE(r.trace.empty());
}

TEST_CASE("lazy binds a type from its constraint") {
  Problem p = problem("systemF", "A : *", "*");
  std::string a = std::get<TermGoal>(p.sigma[0]).meta;
  GoalEnvironment sigma = p.sigma;
  sigma.push_back(Constraint{p.env, meta(a, p.env.domain_args()), parse_in(p, "A")});
  PeOptions opts;
  opts.trace = true;
  PeOutcome r = pe_solve(p.spec, p.reg, sigma, opts);
  REQUIRE(r.status == PeStatus::Solved);
  CHECK(print(r.sigma.at(a).body) == "A");
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[0].find("Contr(A)") != std::string::npos);
  CHECK(r.trace[1].find("axiom") != std::string::npos);
}

TEST_CASE("outcomes") {
  Problem empty = problem("stlc", "A : *", "A");
  PeOptions opts;
  PeOutcome solved = pe_solve(empty.spec, empty.reg, {}, opts);
  CHECK(solved.status == PeStatus::Solved);
  CHECK(solved.sigma.empty());

  // No closed inhabitant and no way to go deeper.
  PeOutcome none = pe_solve(empty.spec, empty.reg, empty.sigma, opts);
  CHECK(none.status == PeStatus::Failure);

  // Uninhabited, and the search proves it.
  Problem bottom = problem("systemF", "", "(X : *) -> X");
  CHECK(pe_solve(bottom.spec, bottom.reg, bottom.sigma, opts).status == PeStatus::Failure);

  // Uninhabited, but f can be applied forever.
  Problem f = problem("stlc", "A : *, B : *, f : A -> A, g : A -> B", "B");
  opts.budget = 100;
  PeOutcome out = pe_solve(f.spec, f.reg, f.sigma, opts);
  CHECK(out.status == PeStatus::Exhausted);
  CHECK(out.nodes > 100);
  CHECK_FALSE(out.residual.empty());

  std::stop_source src;
  src.request_stop();
  opts.budget = 50'000;
  PeOutcome c = pe_solve(f.spec, f.reg, f.sigma, opts, src.get_token());
  CHECK(c.status == PeStatus::Cancelled);

  Problem bad = problem("systemF", "", "(X : *) -> X");
  Constraint clash{bad.env, parse_in(bad, "*"), parse_in(bad, "#")};
  GoalEnvironment failing = bad.sigma;
  failing.push_back(clash);
  opts.budget = 2000;
  CHECK(pe_solve(bad.spec, bad.reg, failing, opts).status == PeStatus::Failure);
}

TEST_CASE("interactive strategy follows the chooser") {
  Problem p = problem("stlc", "A : *, B : *, a : A, b : B", "A -> A");
  PeOptions opts;
  opts.strategy = Strategy::Interactive;
  opts.max_depth = 6;
  std::vector<std::string> asked;
  opts.chooser = [&](const GoalEnvironment&, std::size_t, const std::vector<RuleChoice>& cs)
      -> std::optional<std::size_t> {
    for (const RuleChoice& c : cs) asked.push_back(to_string(c));
    for (std::size_t i = 0; i < cs.size(); ++i)
      if (cs[i].rule == PeRule::Contr && cs[i].var == "a") return i;
    return 0;
  };
  PeOutcome r = pe_solve(p.spec, p.reg, p.sigma, opts);
  REQUIRE(r.status == PeStatus::Solved);
  CHECK(print(root_term(p, r.sigma), {.compact = true}) == "\\x. a");
  CHECK(std::find(asked.begin(), asked.end(), "Pi-R") != asked.end());
}

// Eager enumeration solves claimed goals as soon as they appear and so
// yields the same inhabitants as search; lazy results are sound.
TEST_CASE("enumeration agrees with search on small goals") {
  const std::size_t depth = 4;
  std::vector<GoalCase> goals = load_goals();
  REQUIRE(goals.size() == 20);
  for (const GoalCase& g : goals) {
    CAPTURE(g.line);
    MetaVarRegistry reg;
    GoalEnvironment sigma = initial_goals(reg, g.env, g.type);
    const auto& root = std::get<TermGoal>(sigma[0]);

    SearchConfig cfg;
    cfg.max_depth = depth;
    cfg.max_results = 100000;
    std::set<std::string> ps, pe;
    auto key = [](const Term& m) { return std::to_string(alpha_hash(erase_lambda_annotations(m))); };
    for (const Term& m : ps_search_all(g.spec, g.env, g.type, cfg)) ps.insert(key(m));

    PeOptions opts;
    opts.strategy = Strategy::Eager;
    opts.budget = 10'000'000;
    std::size_t n = pe_solve_all(g.spec, reg, sigma, opts, depth, [&](const Substitution& s) {
      CHECK(check_solution(g.spec, s, sigma) == Conv::Yes);
      pe.insert(key(apply_subst(s, meta(root.meta, root.env.domain_args()))));
      return true;
    });
    CHECK(n == pe.size());
    CHECK(pe == ps);

    opts.strategy = Strategy::Lazy;
    pe_solve_all(g.spec, reg, sigma, opts, depth, [&](const Substitution& s) {
      CHECK(check_solution(g.spec, s, sigma) == Conv::Yes);
      return true;
    });
    PeOutcome r = pe_solve(g.spec, reg, sigma, PeOptions{});
    if (r.status == PeStatus::Solved) CHECK(check_solution(g.spec, r.sigma, sigma) == Conv::Yes);
  }
}
