#include "ptsc/enumeration.hpp"

#include <algorithm>
#include <set>

#include "ptsc/parse.hpp"

namespace ptsc {

const std::string* goal_meta(const GoalEntry& e) {
  if (auto* t = std::get_if<TermGoal>(&e)) return &t->meta;
  if (auto* l = std::get_if<ListGoal>(&e)) return &l->meta;
  return nullptr;
}

const Environment& entry_env(const GoalEntry& e) {
  return std::visit([](const auto& g) -> const Environment& { return g.env; }, e);
}

bool is_ground(const GoalEntry& e) {
  if (auto* t = std::get_if<TermGoal>(&e)) return t->env.is_ground() && t->type.is_ground();
  if (auto* l = std::get_if<ListGoal>(&e))
    return l->env.is_ground() && l->stoup.is_ground() && l->type.is_ground();
  const auto& c = std::get<Constraint>(e);
  return c.env.is_ground() && c.lhs.is_ground() && c.rhs.is_ground();
}

void validate_goals(const GoalEnvironment& sigma, const MetaVarRegistry& reg) {
  std::set<std::string> seen;
  for (const GoalEntry& e : sigma) {
    const std::string* m = goal_meta(e);
    if (!m) continue;
    if (!seen.insert(*m).second) throw MalformedGoals("meta-variable " + *m + " is declared twice");
    auto info = reg.find(*m);
    if (!info) throw MalformedGoals("meta-variable " + *m + " is not registered");
    MetaKind want = std::holds_alternative<TermGoal>(e) ? MetaKind::Term : MetaKind::List;
    if (info->kind != want) throw MalformedGoals("meta-variable " + *m + " has the wrong kind");
    if (info->arity != entry_env(e).size())
      throw MalformedGoals("meta-variable " + *m + " has arity " + std::to_string(info->arity) +
                           " but its environment has " + std::to_string(entry_env(e).size()) +
                           " declarations");
  }
}

// --- substitution ---------------------------------------------------------------

Expr apply_subst(const Substitution& s, const Expr& t) {
  if (s.empty() || t.is_ground()) return t;
  std::vector<Expr> kids;
  kids.reserve(t.children().size());
  for (const Expr& k : t.children()) kids.push_back(apply_subst(s, k));
  if (!t.is(Kind::Meta) && !t.is(Kind::MetaList)) return rebuild(t, std::move(kids));
  auto it = s.find(t.name());
  if (it == s.end()) return rebuild(t, std::move(kids));
  const MetaBinding& b = it->second;
  if (b.binders.size() != kids.size())
    throw std::invalid_argument("binding for " + t.name() + " expects " +
                                std::to_string(b.binders.size()) + " arguments, got " +
                                std::to_string(kids.size()));
  // Binders are renamed apart first: the arguments may mention the names
  // the binding happens to use.
  Expr body = b.body;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < kids.size(); ++i) {
    names.push_back("%s" + std::to_string(i));
    body = rename_free(body, b.binders[i], names.back());
  }
  Term adm = sort(kAdminSort);
  for (std::size_t i = kids.size(); i-- > 0;)
    body = body.is_list() ? cut_list(adm, kids[i], names[i], body) : cut(adm, kids[i], names[i], body);
  // The binding body may still hold meta-variables bound in s.
  return apply_subst(s, normalize_x(body));
}

Environment apply_subst(const Substitution& s, const Environment& env) {
  if (s.empty() || env.is_ground()) return env;
  std::vector<Decl> out;
  for (const Decl& d : env.decls()) out.push_back({d.var, apply_subst(s, d.type)});
  return Environment(std::move(out));
}

GoalEntry apply_subst(const Substitution& s, const GoalEntry& e) {
  if (auto* t = std::get_if<TermGoal>(&e)) return TermGoal{apply_subst(s, t->env), t->meta, apply_subst(s, t->type)};
  if (auto* l = std::get_if<ListGoal>(&e))
    return ListGoal{apply_subst(s, l->env), apply_subst(s, l->stoup), l->meta, apply_subst(s, l->type)};
  const auto& c = std::get<Constraint>(e);
  return Constraint{apply_subst(s, c.env), apply_subst(s, c.lhs), apply_subst(s, c.rhs)};
}

GoalEnvironment apply_subst(const Substitution& s, const GoalEnvironment& sigma) {
  GoalEnvironment out;
  out.reserve(sigma.size());
  for (const GoalEntry& e : sigma) out.push_back(apply_subst(s, e));
  return out;
}

// --- constraints ----------------------------------------------------------------

Conv is_solved(const Constraint& c, std::size_t fuel) {
  if (!c.lhs.is_ground() || !c.rhs.is_ground()) return Conv::No;
  return convertible(c.lhs, c.rhs, fuel);
}

Conv is_solved(const GoalEnvironment& sigma, std::size_t fuel) {
  bool undecided = false;
  for (const GoalEntry& e : sigma) {
    const auto* c = std::get_if<Constraint>(&e);
    if (!c) return Conv::No;
    Conv v = is_solved(*c, fuel);
    if (v == Conv::No) return Conv::No;
    undecided |= v == Conv::Undecided;
  }
  return undecided ? Conv::Undecided : Conv::Yes;
}

namespace {

bool flexible(const Expr& t) {
  switch (t.kind()) {
    case Kind::Meta:
    case Kind::MetaList:
    case Kind::App:
    case Kind::Cut:
    case Kind::CutL:
    case Kind::Concat:
      return true;
    default:
      return false;
  }
}

std::string clash_text(const Expr& a, const Expr& b) {
  return "rigid mismatch: " + print(a) + " against " + print(b);
}

std::optional<std::string> list_clash(const ListTerm& a, const ListTerm& b, std::size_t fuel) {
  ListTerm l = normalize_x(a), r = normalize_x(b);
  for (;;) {
    if (flexible(l) || flexible(r)) return std::nullopt;
    if (l.is(Kind::Nil) && r.is(Kind::Nil)) return std::nullopt;
    if (l.kind() != r.kind()) return "argument lists of different lengths: " + print(a) + " against " + print(b);
    if (auto c = rigid_clash(l.head(), r.head(), fuel)) return c;
    l = l.tail();
    r = r.tail();
  }
}

std::string common_name(const Expr& a, const Expr& b, const std::string& base) {
  return fresh_name(base, [&](std::string_view c) { return a.has_free(c) || b.has_free(c); });
}

}  // namespace

std::optional<std::string> rigid_clash(const Term& a, const Term& b, std::size_t fuel) {
  Normalized ha = head_normalize(a, fuel), hb = head_normalize(b, fuel);
  if (ha.exhausted || hb.exhausted) return std::nullopt;
  const Term& x = ha.term;
  const Term& y = hb.term;
  if (flexible(x) || flexible(y)) return std::nullopt;
  if (x.kind() != y.kind()) return clash_text(x, y);
  switch (x.kind()) {
    case Kind::Sort:
      if (x.name() != y.name()) return clash_text(x, y);
      return std::nullopt;
    case Kind::Pi:
    case Kind::Lam: {
      if (x.is(Kind::Pi))
        if (auto c = rigid_clash(x.domain(), y.domain(), fuel)) return c;
      std::string z = common_name(x.body(), y.body(), x.name());
      return rigid_clash(rename_free(x.body(), x.name(), z), rename_free(y.body(), y.name(), z), fuel);
    }
    case Kind::VarApp:
      if (x.name() != y.name()) return clash_text(x, y);
      return list_clash(x.args(), y.args(), fuel);
    default:
      return std::nullopt;
  }
}

Simplified simplify_constraints(const GoalEnvironment& sigma, std::size_t fuel) {
  Simplified out;
  for (const GoalEntry& e : sigma) {
    const auto* c = std::get_if<Constraint>(&e);
    if (!c) {
      out.sigma.push_back(e);
      continue;
    }
    Term l = c->lhs, r = c->rhs;
    if (Normalized n = normalize_bx(l, fuel); !n.exhausted) l = n.term;
    if (Normalized n = normalize_bx(r, fuel); !n.exhausted) r = n.term;
    if (l.is_ground() && r.is_ground()) {
      Conv v = convertible(l, r, fuel);
      if (v == Conv::Yes) {
        ++out.discharged;
        continue;
      }
      if (v == Conv::No) {
        out.failed = true;
        out.reason = "unsolvable constraint: " + print(l) + " = " + print(r);
        return out;
      }
    } else if (auto why = rigid_clash(l, r, fuel)) {
      out.failed = true;
      out.reason = "unsolvable constraint " + print(c->lhs) + " = " + print(c->rhs) + ", " + *why;
      return out;
    }
    out.sigma.push_back(Constraint{c->env, l, r});
  }
  return out;
}

// --- rules ----------------------------------------------------------------------

namespace {

constexpr std::pair<PeRule, std::string_view> kPeRuleNames[] = {
    {PeRule::Claim, "Claim"}, {PeRule::ClaimList, "Claim-list"}, {PeRule::Axiom, "axiom"},
    {PeRule::PiL, "Pi-L"},    {PeRule::Sorted, "sorted"},        {PeRule::PiWf, "Pi-wf"},
    {PeRule::Contr, "Contr"}, {PeRule::PiR, "Pi-R"},
};

std::string fresh_for(const Environment& g, const std::string& base) {
  if (!g.binds(base)) return base;
  return fresh_name(base, [&](std::string_view c) { return g.binds(c); });
}

struct Claimed {
  std::string id;
  Expr expr;
};

Claimed claim(MetaVarRegistry& reg, const Environment& env, MetaKind kind) {
  std::string id = reg.fresh(kind, env.size(), kind == MetaKind::Term ? "a" : "b");
  return {id, reg.make(id, env.domain_args())};
}

Term head_nf(const Term& t, std::size_t fuel) {
  Normalized h = head_normalize(t, fuel);
  if (h.exhausted) throw SideCondition("fuel exhausted reducing " + print(t));
  return h.term;
}

}  // namespace

std::string_view pe_rule_name(PeRule r) noexcept {
  for (const auto& [k, n] : kPeRuleNames)
    if (k == r) return n;
  return "?";
}

std::optional<PeRule> pe_rule_from_name(std::string_view s) noexcept {
  for (const auto& [k, n] : kPeRuleNames)
    if (n == s) return k;
  return std::nullopt;
}

std::string to_string(const RuleChoice& c) {
  std::string out(pe_rule_name(c.rule));
  if (c.rule == PeRule::Contr) out += "(" + c.var + ")";
  if (c.rule == PeRule::Sorted) out += "(" + c.sort + ")";
  if (c.rule == PeRule::PiWf && c.triple.size() == 3)
    out += "(" + c.triple[0] + "," + c.triple[1] + "," + c.triple[2] + ")";
  return out;
}

PeStep pe_enum_term(const PtsSpec& spec, MetaVarRegistry& reg, const Environment& env, const Term& c,
                    const RuleChoice& choice, std::size_t fuel) {
  switch (choice.rule) {
    case PeRule::Claim: {
      Claimed a = claim(reg, env, MetaKind::Term);
      return {a.expr, {TermGoal{env, a.id, c}}, {}};
    }
    case PeRule::Sorted: {
      Term hc = head_nf(c, fuel);
      if (!hc.is(Kind::Sort) || !spec.has_axiom(choice.sort, hc.name()))
        throw SideCondition("sorted: " + print(c) + " does not reduce to a sort typing " + choice.sort);
      return {sort(choice.sort), {}, {}};
    }
    case PeRule::PiWf: {
      Term hc = head_nf(c, fuel);
      if (choice.triple.size() != 3) throw SideCondition("Pi-wf needs a rule (s1, s2, s3)");
      const auto& r = choice.triple;
      if (!hc.is(Kind::Sort) || hc.name() != r[2])
        throw SideCondition("Pi-wf: " + print(c) + " does not reduce to " + r[2]);
      if (!spec.has_rule(r[0], r[1], r[2]))
        throw SideCondition("Pi-wf: (" + r[0] + ", " + r[1] + ", " + r[2] + ") is not a rule");
      bool kind_level = !spec.inhabitants_of(r[0]).empty() && spec.sorts_of(r[0]).empty();
      std::string x = fresh_for(env, kind_level ? "X" : "x");
      Claimed a = claim(reg, env, MetaKind::Term);
      Environment ext = env.extended(x, a.expr);
      Claimed b = claim(reg, ext, MetaKind::Term);
      return {pi(x, a.expr, b.expr), {TermGoal{env, a.id, sort(r[0])}, TermGoal{ext, b.id, sort(r[1])}}, {}};
    }
    case PeRule::PiR: {
      Term hc = head_nf(c, fuel);
      if (!hc.is(Kind::Pi)) throw SideCondition("Pi-R: " + print(c) + " does not reduce to a product");
      std::string x = fresh_for(env, hc.name());
      Term b = x == hc.name() ? hc.body() : rename_free(hc.body(), hc.name(), x);
      Normalized ann = normalize_bx(hc.domain(), fuel);
      Term a = ann.exhausted ? hc.domain() : ann.term;
      Environment ext = env.extended(x, a);
      Claimed m = claim(reg, ext, MetaKind::Term);
      return {lam(x, a, m.expr), {TermGoal{ext, m.id, b}}, {}};
    }
    case PeRule::Contr: {
      const Term* d = env.lookup(choice.var);
      if (!d) throw SideCondition("Contr: " + choice.var + " is not declared");
      Claimed l = claim(reg, env, MetaKind::List);
      return {var_app(choice.var, l.expr), {ListGoal{env, *d, l.id, c}}, {}};
    }
    default:
      throw SideCondition(std::string(pe_rule_name(choice.rule)) + " does not apply to a term goal");
  }
}

PeStep pe_enum_list(const PtsSpec&, MetaVarRegistry& reg, const Environment& env, const Term& stoup,
                    const Term& c, const RuleChoice& choice, std::size_t fuel) {
  switch (choice.rule) {
    case PeRule::ClaimList: {
      Claimed l = claim(reg, env, MetaKind::List);
      return {l.expr, {ListGoal{env, stoup, l.id, c}}, {}};
    }
    case PeRule::Axiom:
      return {nil(), {Constraint{env, stoup, c}}, {}};
    case PeRule::PiL: {
      Term hd = head_nf(stoup, fuel);
      if (!hd.is(Kind::Pi)) throw SideCondition("Pi-L: " + print(stoup) + " does not reduce to a product");
      Claimed a = claim(reg, env, MetaKind::Term);
      Claimed l = claim(reg, env, MetaKind::List);
      Term next = normalize_x(cut(hd.domain(), a.expr, hd.name(), hd.body()));
      return {cons(a.expr, l.expr), {TermGoal{env, a.id, hd.domain()}, ListGoal{env, next, l.id, c}}, {a.id}};
    }
    default:
      throw SideCondition(std::string(pe_rule_name(choice.rule)) + " does not apply to a list goal");
  }
}

PeStep pe_enum(const PtsSpec& spec, MetaVarRegistry& reg, const GoalEntry& goal, const RuleChoice& choice,
               std::size_t fuel) {
  if (auto* t = std::get_if<TermGoal>(&goal)) return pe_enum_term(spec, reg, t->env, t->type, choice, fuel);
  if (auto* l = std::get_if<ListGoal>(&goal))
    return pe_enum_list(spec, reg, l->env, l->stoup, l->type, choice, fuel);
  throw SideCondition("a constraint is not a goal");
}

std::vector<RuleChoice> pe_choices(const PtsSpec& spec, const GoalEntry& goal, HeadOrder order,
                                   std::size_t fuel) {
  std::vector<RuleChoice> out;
  if (auto* t = std::get_if<TermGoal>(&goal)) {
    Normalized h = head_normalize(t->type, fuel);
    if (h.exhausted) return out;
    const Term& hc = h.term;
    if (hc.is(Kind::Sort)) {
      for (const std::string& s : spec.inhabitants_of(hc.name())) out.push_back({PeRule::Sorted, "", s, {}});
      for (const auto& r : spec.rules)
        if (r[2] == hc.name()) out.push_back({PeRule::PiWf, "", "", {r[0], r[1], r[2]}});
    }
    if (hc.is(Kind::Pi)) out.push_back({PeRule::PiR, "", "", {}});
    bool ground = hc.is_ground();
    Spine cs = spine(hc, fuel);
    const Environment& env = t->env;
    std::size_t n = env.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = order == HeadOrder::LastBoundFirst ? n - 1 - i : i;
      const Decl& d = env[j];
      if (env.lookup(d.var) != &d.type) continue;  // shadowed
      if (ground && d.type.is_ground() && !spine_compatible(spine(d.type, fuel), cs)) continue;
      out.push_back({PeRule::Contr, d.var, "", {}});
    }
    return out;
  }
  if (auto* l = std::get_if<ListGoal>(&goal)) {
    bool axiom = true;
    if (l->stoup.is_ground() && l->type.is_ground())
      axiom = convertible(l->stoup, l->type, fuel) != Conv::No;
    else
      axiom = !rigid_clash(l->stoup, l->type, fuel);
    if (axiom) out.push_back({PeRule::Axiom, "", "", {}});
    Normalized h = head_normalize(l->stoup, fuel);
    if (!h.exhausted && h.term.is(Kind::Pi)) out.push_back({PeRule::PiL, "", "", {}});
  }
  return out;
}

GoalEnvironment splice(const GoalEnvironment& sigma, std::size_t index, const PeStep& step,
                       Substitution* bindings) {
  const GoalEntry& goal = sigma.at(index);
  const std::string* meta = goal_meta(goal);
  if (!meta) throw SideCondition("a constraint is not a goal");
  Substitution one{{*meta, MetaBinding{entry_env(goal).domain(), step.term}}};
  GoalEnvironment out(sigma.begin(), sigma.begin() + static_cast<std::ptrdiff_t>(index));
  out.insert(out.end(), step.goals.begin(), step.goals.end());
  out.insert(out.end(), sigma.begin() + static_cast<std::ptrdiff_t>(index) + 1, sigma.end());
  if (bindings) bindings->insert_or_assign(*meta, one.begin()->second);
  return apply_subst(one, out);
}

// --- solving --------------------------------------------------------------------

namespace {

constexpr std::pair<Strategy, std::string_view> kStrategyNames[] = {
    {Strategy::Eager, "eager"}, {Strategy::Lazy, "lazy"}, {Strategy::Interactive, "interactive"}};
constexpr std::pair<PeStatus, std::string_view> kStatusNames[] = {
    {PeStatus::Solved, "solved"},
    {PeStatus::Failure, "failure"},
    {PeStatus::Exhausted, "exhausted"},
    {PeStatus::Cancelled, "cancelled"}};

struct State {
  GoalEnvironment sigma;
  Substitution bindings;
  std::map<std::string, std::size_t> depth;  // remaining height per pending goal
  std::set<std::string> deferred;
  std::vector<std::string> trace;
};

struct OutOfBudget {
  GoalEnvironment residual;
};
struct Cancelled {
  GoalEnvironment residual;
};
struct Finished {};

// Term goals wait for a ground type; list goals go ahead with an open stoup,
// the rules for lists only ever look at its head.
bool ready(const GoalEntry& e) {
  if (auto* l = std::get_if<ListGoal>(&e)) return l->env.is_ground() && l->type.is_ground();
  return is_ground(e);
}

Substitution instantiate(const Substitution& s) {
  Substitution out;
  for (const auto& [k, b] : s) out.emplace(k, MetaBinding{b.binders, apply_subst(s, b.body)});
  return out;
}

class Solver {
 public:
  using Sink = std::function<bool(const Substitution&, const State&)>;

  Solver(const PtsSpec& spec, MetaVarRegistry& reg, const PeOptions& opts, std::stop_token stop)
      : spec_(spec), reg_(reg), opts_(opts), stop_(std::move(stop)) {}

  std::size_t nodes = 0;
  bool cut_off = false;

  void run(const GoalEnvironment& sigma, std::size_t depth, const Sink& sink) {
    State st;
    st.sigma = sigma;
    for (const GoalEntry& e : sigma)
      if (const std::string* m = goal_meta(e)) st.depth[*m] = depth;
    cut_off = false;
    try {
      dfs(st, sink);
    } catch (const Finished&) {
    }
  }

 private:
  std::optional<std::size_t> select(const State& st) const {
    std::optional<std::size_t> postponed;
    for (std::size_t i = 0; i < st.sigma.size(); ++i) {
      const std::string* m = goal_meta(st.sigma[i]);
      if (!m || !ready(st.sigma[i])) continue;
      if (opts_.strategy == Strategy::Lazy && st.deferred.count(*m)) {
        if (!postponed) postponed = i;
        continue;
      }
      return i;
    }
    return postponed;
  }

  void dfs(const State& st, const Sink& sink) {
    if (stop_.stop_requested()) throw Cancelled{st.sigma};
    std::optional<std::size_t> idx = select(st);
    if (!idx) {
      if (is_solved(st.sigma, opts_.fuel) != Conv::Yes) return;
      if (sink(instantiate(st.bindings), st)) throw Finished{};
      return;
    }
    const GoalEntry& goal = st.sigma[*idx];
    const std::string meta = *goal_meta(goal);
    const std::size_t left = st.depth.at(meta);
    std::vector<RuleChoice> choices = pe_choices(spec_, goal, opts_.head_order, opts_.fuel);

    std::vector<bool> tried(choices.size(), false);
    for (std::size_t round = 0; round < choices.size(); ++round) {
      std::size_t pick = round;
      if (opts_.strategy == Strategy::Interactive && opts_.chooser) {
        std::vector<RuleChoice> rest;
        std::vector<std::size_t> map;
        for (std::size_t i = 0; i < choices.size(); ++i)
          if (!tried[i]) {
            rest.push_back(choices[i]);
            map.push_back(i);
          }
        std::optional<std::size_t> c = opts_.chooser(st.sigma, *idx, rest);
        if (!c || *c >= rest.size()) return;
        pick = map[*c];
      }
      tried[pick] = true;
      const RuleChoice& choice = choices[pick];
      bool leaf = choice.rule == PeRule::Sorted || choice.rule == PeRule::Axiom;
      if (!leaf && left == 0) {
        cut_off = true;
        continue;
      }
      if (++nodes > opts_.budget) throw OutOfBudget{st.sigma};
      PeStep step;
      try {
        step = pe_enum(spec_, reg_, goal, choice, opts_.fuel);
      } catch (const SideCondition&) {
        continue;
      }
      State next;
      next.bindings = st.bindings;
      next.sigma = splice(st.sigma, *idx, step, &next.bindings);
      next.depth = st.depth;
      next.depth.erase(meta);
      for (const GoalEntry& e : step.goals)
        if (const std::string* m = goal_meta(e)) next.depth[*m] = left - 1;
      next.deferred = st.deferred;
      next.deferred.erase(meta);
      if (opts_.strategy == Strategy::Lazy) next.deferred.insert(step.arguments.begin(), step.arguments.end());
      Simplified simp = simplify_constraints(next.sigma, opts_.fuel);
      if (simp.failed) continue;
      next.sigma = std::move(simp.sigma);
      if (opts_.trace) {
        next.trace = st.trace;
        next.trace.push_back("goal " + std::to_string(*idx) + " ?" + meta + ": " + to_string(choice) +
                             " -> " + print(step.term));
      }
      dfs(next, sink);
    }
  }

  const PtsSpec& spec_;
  MetaVarRegistry& reg_;
  const PeOptions& opts_;
  std::stop_token stop_;
};

}  // namespace

std::string_view strategy_name(Strategy s) noexcept {
  for (const auto& [k, n] : kStrategyNames)
    if (k == s) return n;
  return "?";
}

std::optional<Strategy> strategy_from_name(std::string_view s) noexcept {
  for (const auto& [k, n] : kStrategyNames)
    if (n == s) return k;
  return std::nullopt;
}

std::string_view pe_status_name(PeStatus s) noexcept {
  for (const auto& [k, n] : kStatusNames)
    if (k == s) return n;
  return "?";
}

PeOutcome pe_solve(const PtsSpec& spec, MetaVarRegistry& reg, const GoalEnvironment& sigma,
                   const PeOptions& opts, std::stop_token stop) {
  validate_goals(sigma, reg);
  PeOutcome out;
  Solver solver(spec, reg, opts, stop);
  bool found = false;
  auto sink = [&](const Substitution& s, const State& st) {
    Conv ok = check_solution(spec, s, sigma, opts.fuel);
    if (ok != Conv::Yes) {
      out.reason = "a candidate solution failed check_solution";
      return false;
    }
    out.sigma = s;
    out.trace = st.trace;
    found = true;
    return true;
  };
  std::size_t first = opts.strategy == Strategy::Interactive ? opts.max_depth : 0;
  try {
    for (std::size_t d = first; d <= opts.max_depth; ++d) {
      out.depth = d;
      solver.run(sigma, d, sink);
      if (found) {
        out.status = PeStatus::Solved;
        break;
      }
      if (!solver.cut_off) {
        out.status = PeStatus::Failure;
        if (out.reason.empty()) out.reason = "every branch fails";
        break;
      }
    }
    if (!found && solver.cut_off) {
      out.status = PeStatus::Failure;
      out.reason = "no solution within height " + std::to_string(opts.max_depth);
    }
  } catch (const OutOfBudget& e) {
    out.status = PeStatus::Exhausted;
    out.residual = e.residual;
    out.reason = "budget of " + std::to_string(opts.budget) + " rule applications spent";
  } catch (const Cancelled& e) {
    out.status = PeStatus::Cancelled;
    out.residual = e.residual;
    out.reason = "cancelled";
  }
  out.nodes = solver.nodes;
  return out;
}

std::size_t pe_solve_all(const PtsSpec& spec, MetaVarRegistry& reg, const GoalEnvironment& sigma,
                         const PeOptions& opts, std::size_t depth, const SolutionSink& sink) {
  validate_goals(sigma, reg);
  Solver solver(spec, reg, opts, {});
  std::size_t count = 0;
  try {
    solver.run(sigma, depth, [&](const Substitution& s, const State&) {
      ++count;
      return !sink(s);
    });
  } catch (const OutOfBudget&) {
  }
  return count;
}

Conv check_solution(const PtsSpec& spec, const Substitution& s, const GoalEnvironment& sigma,
                    std::size_t fuel) {
  bool undecided = false;
  auto verdict = [&](Verdict v) {
    if (v == Verdict::Undecided) undecided = true;
    return v != Verdict::Reject;
  };
  for (const GoalEntry& e : sigma) {
    const std::string* m = goal_meta(e);
    if (m && !s.count(*m)) return Conv::No;
    if (auto* t = std::get_if<TermGoal>(&e)) {
      Term inst = apply_subst(s, meta(t->meta, t->env.domain_args()));
      if (!verdict(ps_check(spec, apply_subst(s, t->env), inst, apply_subst(s, t->type), fuel).verdict))
        return Conv::No;
    } else if (auto* l = std::get_if<ListGoal>(&e)) {
      ListTerm inst = apply_subst(s, meta_list(l->meta, l->env.domain_args()));
      if (!verdict(ps_check_list(spec, apply_subst(s, l->env), apply_subst(s, l->stoup), inst,
                                 apply_subst(s, l->type), fuel)
                       .verdict))
        return Conv::No;
    } else {
      const auto& c = std::get<Constraint>(e);
      Constraint inst{c.env, apply_subst(s, c.lhs), apply_subst(s, c.rhs)};
      Conv v = is_solved(inst, fuel);
      if (v == Conv::No) return Conv::No;
      undecided |= v == Conv::Undecided;
    }
  }
  return undecided ? Conv::Undecided : Conv::Yes;
}

GoalEnvironment initial_goals(MetaVarRegistry& reg, const Environment& env, const Term& goal,
                              std::string_view base) {
  std::string id = reg.fresh(MetaKind::Term, env.size(), base);
  return {TermGoal{env, id, goal}};
}

}  // namespace ptsc
