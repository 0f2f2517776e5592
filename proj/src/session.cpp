#include "ptsc/session.hpp"

#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "ptsc/parse.hpp"
#include "ptsc/search.hpp"
#include "ptsc/typing.hpp"

namespace ptsc {

using nlohmann::json;

json SessionError::to_json() const {
  json j{{"code", code}, {"message", what()}, {"detail", detail}};
  if (goal_index) j["goal_index"] = *goal_index;
  if (!rule.empty()) j["rule"] = rule;
  return j;
}

namespace {

constexpr std::pair<ActionKind, std::string_view> kActionNames[] = {
    {ActionKind::ApplyRule, "apply_rule"}, {ActionKind::Claim, "claim"},
    {ActionKind::ProvideTerm, "provide_term"}, {ActionKind::Auto, "auto"},
    {ActionKind::Simplify, "simplify"},     {ActionKind::Undo, "undo"}};

constexpr std::pair<SessionStatus, std::string_view> kStatusNames[] = {
    {SessionStatus::Open, "open"}, {SessionStatus::Solved, "solved"}, {SessionStatus::Failed, "failed"}};

// FNV-1a, 64 bit. Digests identify states, they are not a security measure.
std::string fnv_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string canonical(const SessionState& st) {
  std::ostringstream out;
  for (const auto& [id, info] : st.registry.entries())
    out << "m " << id << ' ' << (info.kind == MetaKind::Term ? 't' : 'l') << info.arity << '\n';
  for (const GoalEntry& e : st.sigma) {
    if (auto* t = std::get_if<TermGoal>(&e))
      out << "g " << print(t->env) << " |- ?" << t->meta << " : " << print(t->type) << '\n';
    else if (auto* l = std::get_if<ListGoal>(&e))
      out << "l " << print(l->env) << " ; " << print(l->stoup) << " |- ??" << l->meta << " : " << print(l->type)
          << '\n';
    else {
      const auto& c = std::get<Constraint>(e);
      out << "c " << print(c.env) << " |- " << print(c.lhs) << " = " << print(c.rhs) << '\n';
    }
  }
  for (const auto& [id, b] : st.bindings) out << "b " << id << " := " << print_binding(b) << '\n';
  out << "s " << session_status_name(st.status) << '\n' << "d " << st.diagnostic << '\n';
  return out.str();
}

std::string random_token() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return std::string(buf, 8);
}

const GoalEntry& goal_at(const GoalEnvironment& sigma, std::size_t i) {
  if (i >= sigma.size())
    throw SessionError("bad-index", "no entry " + std::to_string(i) + " in a goal environment of size " +
                                        std::to_string(sigma.size()),
                       i);
  if (!goal_meta(sigma[i])) throw SessionError("bad-index", "entry " + std::to_string(i) + " is a constraint", i);
  return sigma[i];
}

bool is_pi(const Term& t, std::size_t fuel = kDefaultFuel) {
  Normalized h = head_normalize(t, fuel);
  return !h.exhausted && h.term.is(Kind::Pi);
}

// A ready goal no rule applies to; the diagnostic names it.
std::optional<std::string> dead_goal(const PtsSpec& spec, const GoalEnvironment& sigma, std::size_t i) {
  const GoalEntry& e = sigma[i];
  if (auto* l = std::get_if<ListGoal>(&e)) {
    if (!l->env.is_ground() || !l->type.is_ground()) return std::nullopt;
    if (!pe_choices(spec, e).empty()) return std::nullopt;
    std::string why = rigid_clash(l->stoup, l->type).value_or("no rule applies");
    return "goal " + std::to_string(i) + " (??" + l->meta + "): " + why;
  }
  if (auto* t = std::get_if<TermGoal>(&e)) {
    if (!is_ground(e) || !pe_choices(spec, e).empty()) return std::nullopt;
    return "goal " + std::to_string(i) + " (?" + t->meta + "): no rule applies to " + print(t->type);
  }
  return std::nullopt;
}

std::size_t index_of(const GoalEnvironment& sigma, const std::string& meta) {
  for (std::size_t i = 0; i < sigma.size(); ++i)
    if (const std::string* m = goal_meta(sigma[i]); m && *m == meta) return i;
  return sigma.size();
}

std::string constraint_verdict(const Constraint& c) {
  Conv v = is_solved(c);
  if (v == Conv::Yes) return "solved";
  if (c.lhs.is_ground() && c.rhs.is_ground() && v == Conv::No) return "failed";
  if (rigid_clash(c.lhs, c.rhs)) return "failed";
  return "pending";
}

RuleChoice rule_only(PeRule r) {
  RuleChoice c;
  c.rule = r;
  return c;
}

json choice_json(const RuleChoice& c) {
  json j{{"rule", std::string(pe_rule_name(c.rule))}};
  if (c.rule == PeRule::Contr) j["var"] = c.var;
  if (c.rule == PeRule::Sorted) j["sort"] = c.sort;
  if (c.rule == PeRule::PiWf) j["triple"] = c.triple;
  return j;
}

}  // namespace

std::string_view action_kind_name(ActionKind k) noexcept {
  for (const auto& [a, n] : kActionNames)
    if (a == k) return n;
  return "?";
}

std::string_view session_status_name(SessionStatus s) noexcept {
  for (const auto& [a, n] : kStatusNames)
    if (a == s) return n;
  return "?";
}

std::string print_binding(const MetaBinding& b, PrintOptions opts) {
  std::string out = "<";
  for (std::size_t i = 0; i < b.binders.size(); ++i) out += (i ? " " : "") + b.binders[i];
  return out + ">. " + print(b.body, opts);
}

json action_to_json(const Action& a) {
  json j{{"type", std::string(action_kind_name(a.kind))}};
  switch (a.kind) {
    case ActionKind::ApplyRule:
      j.update(choice_json(a.choice));
      j["goal_index"] = a.goal_index;
      break;
    case ActionKind::Claim:
      j["goal_index"] = a.goal_index;
      break;
    case ActionKind::ProvideTerm:
      j["goal_index"] = a.goal_index;
      j["term"] = a.term;
      break;
    case ActionKind::Auto:
      j["strategy"] = std::string(strategy_name(a.strategy));
      j["budget"] = a.budget;
      break;
    default:
      break;
  }
  return j;
}

Action action_from_json(const json& j) {
  try {
    if (!j.is_object()) throw SessionError("bad-action", "an action is a JSON object");
    std::string type = j.at("type").get<std::string>();
    Action a;
    bool known = false;
    for (const auto& [k, n] : kActionNames)
      if (n == type) {
        a.kind = k;
        known = true;
      }
    if (!known) throw SessionError("bad-action", "unknown action type " + type);
    switch (a.kind) {
      case ActionKind::ApplyRule: {
        a.goal_index = j.at("goal_index").get<std::size_t>();
        std::string rule = j.at("rule").get<std::string>();
        auto r = pe_rule_from_name(rule);
        if (!r) throw SessionError("bad-action", "unknown rule " + rule, a.goal_index, rule);
        a.choice.rule = *r;
        a.choice.var = j.value("var", "");
        a.choice.sort = j.value("sort", "");
        if (j.contains("triple")) a.choice.triple = j.at("triple").get<std::vector<std::string>>();
        if (a.choice.triple.size() == 2) a.choice.triple.push_back(a.choice.triple[1]);
        break;
      }
      case ActionKind::Claim:
        a.goal_index = j.at("goal_index").get<std::size_t>();
        break;
      case ActionKind::ProvideTerm:
        a.goal_index = j.at("goal_index").get<std::size_t>();
        a.term = j.at("term").get<std::string>();
        break;
      case ActionKind::Auto: {
        std::string s = j.value("strategy", "lazy");
        auto st = strategy_from_name(s);
        if (!st || *st == Strategy::Interactive)
          throw SessionError("bad-action", "Auto takes the strategy eager or lazy, not " + s);
        a.strategy = *st;
        a.budget = j.value("budget", std::size_t{50'000});
        break;
      }
      default:
        break;
    }
    return a;
  } catch (const json::exception& e) {
    throw SessionError("bad-action", std::string("malformed action: ") + e.what());
  }
}

ProofSession ProofSession::create(const PtsSpec& spec, const std::string& env_text, const std::string& goal_text) {
  ProofSession s;
  s.spec_ = spec;
  s.env_text_ = env_text;
  s.goal_text_ = goal_text;
  ParseContext ctx{&s.spec_, nullptr, false};
  try {
    s.env_ = parse_env(env_text, ctx);
  } catch (const ParseError& e) {
    throw SessionError("parse", std::string("environment: ") + e.what(), {}, {}, "env");
  }
  try {
    s.goal_ = parse_term(goal_text, ctx);
  } catch (const ParseError& e) {
    throw SessionError("parse", std::string("goal: ") + e.what(), {}, {}, "goal");
  }
  if (CheckResult r = check_env(spec, s.env_); !r.accepted())
    throw SessionError("type", "environment is not well formed: " + r.reason, {}, {},
                       std::string(verdict_name(r.verdict)));
  if (InferResult r = infer_sort(spec, s.env_, s.goal_); r.verdict != Verdict::Accept)
    throw SessionError("type", "goal is not typed by a sort: " + r.reason, {}, {},
                       std::string(verdict_name(r.verdict)));
  s.state_.sigma = initial_goals(s.state_.registry, s.env_, s.goal_, "a");
  s.root_ = *goal_meta(s.state_.sigma.front());
  s.id_ = s.digest().substr(0, 8) + "-" + random_token();
  return s;
}

Term ProofSession::partial_term() const {
  return apply_subst(state_.bindings, meta(root_, env_.domain_args()));
}

std::optional<Term> ProofSession::final_term() const {
  if (state_.status != SessionStatus::Solved) return std::nullopt;
  return partial_term();
}

std::string ProofSession::digest() const {
  return fnv_hex(spec_to_json(spec_).dump() + "\n" + env_text_ + "\n" + goal_text_ + "\n" + canonical(state_));
}

SessionState ProofSession::step(const SessionState& from, const Action& a, std::stop_token stop,
                                std::optional<PeOutcome>* outcome) const {
  if (from.status == SessionStatus::Failed)
    throw SessionError("failed-branch", "this branch has failed (" + from.diagnostic + "); undo first");
  if (from.status == SessionStatus::Solved) throw SessionError("solved", "the session is already solved");

  SessionState next = from;
  next.diagnostic.clear();
  std::vector<std::string> created;  // goals produced by this action

  auto run = [&](std::size_t idx, const RuleChoice& choice) {
    const GoalEntry& g = goal_at(next.sigma, idx);
    PeStep st;
    try {
      st = pe_enum(spec_, next.registry, g, choice);
    } catch (const SideCondition& e) {
      throw SessionError("side-condition", e.what(), idx, to_string(choice));
    }
    for (const GoalEntry& e : st.goals)
      if (const std::string* m = goal_meta(e)) created.push_back(*m);
    next.sigma = splice(next.sigma, idx, st, &next.bindings);
  };

  switch (a.kind) {
    case ActionKind::ApplyRule:
      run(a.goal_index, a.choice);
      break;
    case ActionKind::Claim: {
      const GoalEntry& g = goal_at(next.sigma, a.goal_index);
      if (std::holds_alternative<TermGoal>(g)) {
        run(a.goal_index, rule_only(PeRule::Claim));
        break;
      }
      // On a list goal: claim the next argument, and close the list once
      // the stoup is no longer a product.
      const auto& l = std::get<ListGoal>(g);
      if (!is_pi(l.stoup)) {
        run(a.goal_index, rule_only(PeRule::Axiom));
        break;
      }
      run(a.goal_index, rule_only(PeRule::PiL));
      std::size_t tail = index_of(next.sigma, created.back());
      if (!is_pi(std::get<ListGoal>(next.sigma[tail]).stoup)) run(tail, rule_only(PeRule::Axiom));
      break;
    }
    case ActionKind::ProvideTerm: {
      const GoalEntry& g = goal_at(next.sigma, a.goal_index);
      if (!is_ground(g))
        throw SessionError("not-ready", "the goal still mentions meta-variables", a.goal_index, "ProvideTerm");
      ParseContext ctx{&spec_, nullptr, false};
      PeStep st;
      try {
        if (auto* t = std::get_if<TermGoal>(&g)) {
          st.term = parse_term(a.term, ctx);
          PsVerdict v = ps_check(spec_, t->env, st.term, t->type);
          if (!v.accepted())
            throw SessionError("type", "the term does not inhabit the goal: " + v.reason, a.goal_index,
                               "ProvideTerm", std::string(verdict_name(v.verdict)));
        } else {
          const auto& l = std::get<ListGoal>(g);
          st.term = parse_list(a.term, ctx);
          PsVerdict v = ps_check_list(spec_, l.env, l.stoup, st.term, l.type);
          if (!v.accepted())
            throw SessionError("type", "the list does not fit the goal: " + v.reason, a.goal_index,
                               "ProvideTerm", std::string(verdict_name(v.verdict)));
        }
      } catch (const ParseError& e) {
        throw SessionError("parse", e.what(), a.goal_index, "ProvideTerm");
      }
      next.sigma = splice(next.sigma, a.goal_index, st, &next.bindings);
      break;
    }
    case ActionKind::Auto: {
      PeOptions opts;
      opts.strategy = a.strategy;
      opts.budget = a.budget;
      MetaVarRegistry reg = next.registry;
      PeOutcome out = pe_solve(spec_, reg, next.sigma, opts, stop);
      if (outcome) *outcome = out;
      if (out.status != PeStatus::Solved) return from;
      next.registry = reg;
      GoalEnvironment rest;
      for (const GoalEntry& e : next.sigma)
        if (!goal_meta(e)) rest.push_back(apply_subst(out.sigma, e));
      next.sigma = std::move(rest);
      for (const auto& [k, b] : out.sigma) next.bindings.insert_or_assign(k, b);
      next.diagnostic = "auto: solved in " + std::to_string(out.nodes) + " rule applications";
      break;
    }
    case ActionKind::Simplify: {
      Simplified s = simplify_constraints(next.sigma);
      if (s.failed) {
        next.status = SessionStatus::Failed;
        next.diagnostic = s.reason;
        return next;
      }
      next.sigma = std::move(s.sigma);
      break;
    }
    case ActionKind::Undo:
      throw SessionError("bad-action", "undo is not a state transition");
  }

  for (const std::string& m : created) {
    std::size_t i = index_of(next.sigma, m);
    if (i == next.sigma.size()) continue;
    if (auto why = dead_goal(spec_, next.sigma, i)) {
      next.status = SessionStatus::Failed;
      next.diagnostic = *why;
      return next;
    }
  }

  if (is_solved(next.sigma) == Conv::Yes) {
    next.sigma.clear();
    next.status = SessionStatus::Solved;
    Term done = apply_subst(next.bindings, meta(root_, env_.domain_args()));
    PsVerdict v = ps_check(spec_, env_, done, goal_);
    if (!v.accepted())
      throw std::logic_error("solved session produced a term the checker rejects: " + print(done) + ": " + v.reason);
  }
  return next;
}

ProofSession::Report ProofSession::apply(const Action& a, std::stop_token stop) {
  Report r;
  if (a.kind == ActionKind::Undo) {
    if (history_.empty()) throw SessionError("empty-history", "nothing to undo");
    state_ = std::move(undo_.back());
    undo_.pop_back();
    history_.pop_back();
    r.changed = true;
    return r;
  }
  std::optional<PeOutcome> outcome;
  SessionState next = step(state_, a, stop, &outcome);
  r.auto_outcome = outcome;
  if (a.kind == ActionKind::Auto && (!outcome || outcome->status != PeStatus::Solved)) return r;
  std::string prior = digest();
  undo_.push_back(std::move(state_));
  history_.push_back({a, prior});
  state_ = std::move(next);
  r.changed = true;
  return r;
}

std::vector<std::pair<std::size_t, RuleChoice>> ProofSession::applicable() const {
  std::vector<std::pair<std::size_t, RuleChoice>> out;
  if (state_.status != SessionStatus::Open) return out;
  for (std::size_t i = 0; i < state_.sigma.size(); ++i) {
    const GoalEntry& e = state_.sigma[i];
    if (!goal_meta(e)) continue;
    for (RuleChoice& c : pe_choices(spec_, e)) out.emplace_back(i, std::move(c));
    out.emplace_back(i, rule_only(PeRule::Claim));
  }
  return out;
}

json ProofSession::view() const {
  json goals = json::array(), constraints = json::array(), bindings = json::object(), appl = json::array();
  for (std::size_t i = 0; i < state_.sigma.size(); ++i) {
    const GoalEntry& e = state_.sigma[i];
    if (auto* t = std::get_if<TermGoal>(&e)) {
      goals.push_back({{"index", i}, {"kind", "term"}, {"env", print(t->env)}, {"type", print(t->type)},
                       {"metavar", t->meta}, {"ready", is_ground(e)}});
    } else if (auto* l = std::get_if<ListGoal>(&e)) {
      goals.push_back({{"index", i}, {"kind", "list"}, {"env", print(l->env)}, {"stoup", print(l->stoup)},
                       {"type", print(l->type)}, {"metavar", l->meta}, {"ready", is_ground(e)}});
    } else {
      const auto& c = std::get<Constraint>(e);
      constraints.push_back({{"index", i}, {"env", print(c.env)}, {"lhs", print(c.lhs)}, {"rhs", print(c.rhs)},
                             {"solved", constraint_verdict(c)}});
    }
  }
  for (const auto& [k, b] : state_.bindings) bindings[k] = print_binding(b);
  for (const auto& [i, c] : applicable()) {
    json item = choice_json(c);
    item["goal_index"] = i;
    item["action"] = c.rule == PeRule::Claim ? action_to_json(Action::claim(i)) : action_to_json(Action::apply(i, c));
    appl.push_back(std::move(item));
  }
  Term partial = partial_term();
  std::set<std::string> metas;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (x.is_ground()) return;
    if (x.is(Kind::Meta) || x.is(Kind::MetaList)) metas.insert(x.name());
    for (const Expr& k : x.children()) walk(k);
  };
  walk(partial);
  json history = json::array();
  for (const HistoryEntry& h : history_)
    history.push_back({{"action", action_to_json(h.action)}, {"prior_digest", h.prior_digest}});
  json j{{"id", id_},
         {"spec", spec_to_json(spec_)},
         {"env", print(env_)},
         {"root_goal", print(goal_)},
         {"root_metavar", root_},
         {"status", std::string(session_status_name(state_.status))},
         {"diagnostic", state_.diagnostic},
         {"digest", digest()},
         {"goals", goals},
         {"constraints", constraints},
         {"partial_term", print(partial)},
         {"partial_term_compact", print(partial, {.compact = true})},
         {"metavars", metas},
         {"bindings", bindings},
         {"applicable", appl},
         {"history", history}};
  if (auto f = final_term()) {
    j["final_term"] = print(*f);
    j["final_term_compact"] = print(*f, {.compact = true});
  }
  return j;
}

json ProofSession::export_document() const {
  json history = json::array();
  for (const HistoryEntry& h : history_)
    history.push_back({{"action", action_to_json(h.action)}, {"prior_digest", h.prior_digest}});
  json doc{{"format", "ptsc-session"},
           {"version", 1},
           {"id", id_},
           {"spec", spec_to_json(spec_)},
           {"env", env_text_},
           {"goal", goal_text_},
           {"history", history},
           {"status", std::string(session_status_name(state_.status))},
           {"digest", digest()}};
  if (auto f = final_term()) {
    doc["final_term"] = print(*f);
    doc["final_term_compact"] = print(*f, {.compact = true});
  }
  return doc;
}

ProofSession ProofSession::import_document(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != "ptsc-session")
      throw SessionError("format", "not a session document");
    if (doc.at("version").get<int>() != 1)
      throw SessionError("format", "unsupported session document version " + doc.at("version").dump());
    PtsSpec spec = spec_from_json(doc.at("spec"));
    ProofSession s = create(spec, doc.at("env").get<std::string>(), doc.at("goal").get<std::string>());
    s.id_ = doc.at("id").get<std::string>();
    for (const json& h : doc.at("history")) {
      std::string prior = h.at("prior_digest").get<std::string>();
      if (prior != s.digest()) throw SessionError("format", "history does not replay: digest mismatch");
      Report r = s.apply(action_from_json(h.at("action")));
      if (!r.changed) throw SessionError("format", "history does not replay: an action had no effect");
    }
    if (s.digest() != doc.at("digest").get<std::string>())
      throw SessionError("format", "replayed state does not match the recorded digest");
    return s;
  } catch (const SessionError& e) {
    if (e.code == "format") throw;
    throw SessionError("format", std::string("session document does not replay: ") + e.what(), e.goal_index,
                       e.rule, e.code);
  } catch (const json::exception& e) {
    throw SessionError("format", std::string("malformed session document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SessionError("format", std::string("malformed session document: ") + e.what());
  }
}

}  // namespace ptsc
