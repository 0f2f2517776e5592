#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "generators.hpp"

namespace ptsc::testing {

BfsResult bfs_normalize(const Expr& t, RuleSet rules, std::size_t state_cap, std::mt19937_64& rng) {
  BfsResult out;
  std::unordered_set<Expr, AlphaHash, AlphaEq> seen{t};
  std::deque<Expr> queue{t};
  std::vector<Expr> normals;
  while (!queue.empty()) {
    Expr cur = queue.front();
    queue.pop_front();
    auto redexes = find_redexes(cur, rules);
    if (redexes.empty()) {
      bool fresh = true;
      for (const Expr& n : normals) fresh = fresh && !alpha_eq(n, cur);
      if (fresh) normals.push_back(cur);
      continue;
    }
    for (const Redex& r : redexes) {
      Expr next = step(cur, r);
      if (seen.insert(next).second) queue.push_back(next);
    }
    if (seen.size() > state_cap) break;
  }
  out.states = seen.size();
  out.exhaustive = queue.empty();
  out.distinct_normal_forms = normals.size();
  if (out.exhaustive) {
    if (!normals.empty()) out.normal_form = normals.front();
  } else {
    out.normal_form = random_walk(queue.front(), rules, std::size_t{1} << 20, rng);
  }
  return out;
}

Expr random_walk(const Expr& t, RuleSet rules, std::size_t max_steps, std::mt19937_64& rng,
                 std::size_t* taken) {
  Expr cur = t;
  std::size_t n = 0;
  for (; n < max_steps; ++n) {
    auto redexes = find_redexes(cur, rules);
    if (redexes.empty()) break;
    cur = step(cur, choose(rng, redexes));
  }
  if (taken) *taken = n;
  return cur;
}

namespace {

void canon(const PtsTerm& t, std::vector<std::string>& scope, std::string& out) {
  switch (t.kind()) {
    case PKind::Var: {
      for (std::size_t i = scope.size(); i-- > 0;) {
        if (scope[i] == t.name()) {
          out += "#" + std::to_string(scope.size() - 1 - i);
          return;
        }
      }
      out += "v:" + t.name();
      return;
    }
    case PKind::Sort:
      out += "s:" + t.name();
      return;
    case PKind::Reserved:
      out += "r:" + t.name();
      return;
    case PKind::App:
      out += "(@ ";
      canon(t.fun(), scope, out);
      out += ' ';
      canon(t.arg(), scope, out);
      out += ')';
      return;
    case PKind::Pi:
    case PKind::Lam:
      out += t.is(PKind::Pi) ? "(P " : "(L ";
      canon(t.domain(), scope, out);
      out += ' ';
      scope.push_back(t.name());
      canon(t.body(), scope, out);
      scope.pop_back();
      out += ')';
      return;
  }
}

}  // namespace

std::string canonical(const PtsTerm& t) {
  std::vector<std::string> scope;
  std::string out;
  canon(t, scope, out);
  return out;
}

std::optional<std::size_t> beta_distance(const PtsTerm& from, const PtsTerm& to, std::size_t max_steps,
                                         std::size_t state_cap) {
  const std::string goal = canonical(to);
  std::unordered_set<std::string> seen{canonical(from)};
  std::vector<PtsTerm> level{from};
  if (canonical(from) == goal) return 0;
  for (std::size_t d = 1; d <= max_steps && !level.empty(); ++d) {
    std::vector<PtsTerm> next;
    for (const PtsTerm& t : level) {
      for (PtsTerm& r : beta_step(t)) {
        std::string key = canonical(r);
        if (key == goal) return d;
        if (seen.insert(key).second) next.push_back(std::move(r));
      }
    }
    if (seen.size() > state_cap) return std::nullopt;
    level = std::move(next);
  }
  return std::nullopt;
}

}  // namespace ptsc::testing

namespace ptsc::testing {

namespace {

// Straight transcription of the search rules into list-returning functions.
// No pruning, no memo, no iterative deepening.
class NaiveSearch {
 public:
  explicit NaiveSearch(const PtsSpec& spec) : spec_(spec) {}

  std::vector<Term> terms(const Environment& g, const Term& c, int d) {
    std::vector<Term> out;
    if (d < 0) return out;
    Term hc = head_normalize(c).term;
    std::string x = "v" + std::to_string(g.size());
    if (hc.is(Kind::Sort)) {
      for (const auto& ax : spec_.axioms)
        if (ax.second == hc.name()) out.push_back(sort(ax.first));
      if (d >= 1)
        for (const auto& r : spec_.rules) {
          if (r[2] != hc.name()) continue;
          for (const Term& a : terms(g, sort(r[0]), d - 1))
            for (const Term& b : terms(g.extended(x, a), sort(r[1]), d - 1)) out.push_back(pi(x, a, b));
        }
    }
    if (hc.is(Kind::Pi) && d >= 1) {
      Term body = rename_free(hc.body(), hc.name(), x);
      for (const Term& m : terms(g.extended(x, hc.domain()), body, d - 1))
        out.push_back(lam(x, hc.domain(), m));
    }
    if (d >= 1)
      for (const Decl& decl : g.decls())
        for (const ListTerm& l : lists(g, decl.type, c, d - 1)) out.push_back(var_app(decl.var, l));
    return out;
  }

  std::vector<ListTerm> lists(const Environment& g, const Term& stoup, const Term& c, int d) {
    std::vector<ListTerm> out;
    if (d < 0) return out;
    if (convertible(stoup, c) == Conv::Yes) out.push_back(nil());
    if (d < 1) return out;
    Term hd = head_normalize(stoup).term;
    if (!hd.is(Kind::Pi)) return out;
    for (const Term& m : terms(g, hd.domain(), d - 1))
      for (const ListTerm& l : lists(g, cut(hd.domain(), m, hd.name(), hd.body()), c, d - 1))
        out.push_back(cons(m, l));
    return out;
  }

 private:
  const PtsSpec& spec_;
};

}  // namespace

std::vector<Term> naive_ps_search(const PtsSpec& spec, const Environment& env, const Term& goal,
                                  int depth) {
  return NaiveSearch(spec).terms(env, goal, depth);
}

Term erase_lambda_annotations(const Term& t) {
  if (t.children().empty()) return t;
  std::vector<Expr> kids;
  for (const Expr& k : t.children()) kids.push_back(erase_lambda_annotations(k));
  if (t.is(Kind::Lam)) kids[0] = sort("*");
  return rebuild(t, std::move(kids));
}

}  // namespace ptsc::testing
