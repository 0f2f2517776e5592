// Proof sessions: a root goal, the goal environment built so far, committed
// bindings, and the history of actions that produced them.
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptsc/enumeration.hpp"
#include "ptsc/spec.hpp"
#include "ptsc/syntax.hpp"

namespace ptsc {

// code is a short machine-readable tag ("parse", "type", "side-condition",
// "bad-index", "failed-branch", "format", ...).
class SessionError : public std::runtime_error {
 public:
  SessionError(std::string code, const std::string& message, std::optional<std::size_t> goal_index = {},
               std::string rule = {}, std::string detail = {})
      : std::runtime_error(message),
        code(std::move(code)),
        goal_index(goal_index),
        rule(std::move(rule)),
        detail(std::move(detail)) {}

  std::string code;
  std::optional<std::size_t> goal_index;
  std::string rule;
  std::string detail;

  nlohmann::json to_json() const;
};

enum class ActionKind { ApplyRule, Claim, ProvideTerm, Auto, Simplify, Undo };
std::string_view action_kind_name(ActionKind k) noexcept;

struct Action {
  ActionKind kind = ActionKind::Simplify;
  std::size_t goal_index = 0;             // ApplyRule, Claim, ProvideTerm
  RuleChoice choice;                      // ApplyRule
  std::string term;                       // ProvideTerm, in the goal's environment
  Strategy strategy = Strategy::Lazy;     // Auto
  std::size_t budget = 50'000;            // Auto

  static Action of(ActionKind k, std::size_t goal = 0) {
    Action a;
    a.kind = k;
    a.goal_index = goal;
    return a;
  }
  static Action apply(std::size_t goal, RuleChoice c) {
    Action a = of(ActionKind::ApplyRule, goal);
    a.choice = std::move(c);
    return a;
  }
  static Action claim(std::size_t goal) { return of(ActionKind::Claim, goal); }
  static Action provide(std::size_t goal, std::string text) {
    Action a = of(ActionKind::ProvideTerm, goal);
    a.term = std::move(text);
    return a;
  }
  static Action automatic(Strategy s, std::size_t budget) {
    Action a = of(ActionKind::Auto);
    a.strategy = s;
    a.budget = budget;
    return a;
  }
  static Action simplify() { return of(ActionKind::Simplify); }
  static Action undo() { return of(ActionKind::Undo); }
};

nlohmann::json action_to_json(const Action& a);
// Throws SessionError("bad-action") on unknown or malformed fields.
Action action_from_json(const nlohmann::json& j);

enum class SessionStatus { Open, Solved, Failed };
std::string_view session_status_name(SessionStatus s) noexcept;

struct SessionState {
  MetaVarRegistry registry;
  GoalEnvironment sigma;
  Substitution bindings;
  SessionStatus status = SessionStatus::Open;
  std::string diagnostic;  // why the branch failed, or the last Auto verdict
};

struct HistoryEntry {
  Action action;
  std::string prior_digest;
};

class ProofSession {
 public:
  // Parses and checks the root goal (env well formed, goal typed by a sort).
  // Throws SessionError with code "parse" or "type".
  static ProofSession create(const PtsSpec& spec, const std::string& env_text, const std::string& goal_text);

  const std::string& id() const noexcept { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }
  const PtsSpec& spec() const noexcept { return spec_; }
  const Environment& env() const noexcept { return env_; }
  const Term& goal() const noexcept { return goal_; }
  const std::string& root_meta() const noexcept { return root_; }
  const SessionState& state() const noexcept { return state_; }
  const std::vector<HistoryEntry>& history() const noexcept { return history_; }

  // Root meta-variable with every committed binding applied.
  Term partial_term() const;
  // The proof term once solved.
  std::optional<Term> final_term() const;
  std::string digest() const;

  struct Report {
    bool changed = false;
    std::optional<PeOutcome> auto_outcome;
  };

  // Applies a to the current state. Errors leave the session untouched. An
  // Auto that does not solve is reported but not recorded.
  Report apply(const Action& a, std::stop_token stop = {});

  // Σ-indexed rule choices for every goal; Claim is always offered.
  std::vector<std::pair<std::size_t, RuleChoice>> applicable() const;

  nlohmann::json view() const;
  nlohmann::json export_document() const;
  // Rebuilds by replaying the history; throws SessionError("format") on a
  // malformed document or a digest that does not match.
  static ProofSession import_document(const nlohmann::json& doc);

 private:
  SessionState step(const SessionState& from, const Action& a, std::stop_token stop,
                    std::optional<PeOutcome>* outcome) const;

  std::string id_;
  PtsSpec spec_;
  Environment env_;
  Term goal_;
  std::string env_text_, goal_text_;
  std::string root_;
  SessionState state_;
  std::vector<SessionState> undo_;  // state before each history entry
  std::vector<HistoryEntry> history_;
};

// `<x1 ... xn>. body`
std::string print_binding(const MetaBinding& b, PrintOptions opts = {});

}  // namespace ptsc
