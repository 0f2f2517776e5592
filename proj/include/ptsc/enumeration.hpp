// Proof-term enumeration with meta-variables: goal environments,
// substitutions, one-step rule application and the Solve loop.
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <variant>
#include <vector>

#include "ptsc/rewrite.hpp"
#include "ptsc/search.hpp"
#include "ptsc/spec.hpp"
#include "ptsc/syntax.hpp"

namespace ptsc {

struct TermGoal {
  Environment env;
  std::string meta;
  Term type;
};

struct ListGoal {
  Environment env;
  Term stoup;
  std::string meta;
  Term type;
};

struct Constraint {
  Environment env;
  Term lhs;
  Term rhs;
};

using GoalEntry = std::variant<TermGoal, ListGoal, Constraint>;
using GoalEnvironment = std::vector<GoalEntry>;

// Meta-variable declared by a goal entry, or nullptr for a constraint.
const std::string* goal_meta(const GoalEntry& e);
const Environment& entry_env(const GoalEntry& e);
bool is_ground(const GoalEntry& e);

class MalformedGoals : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Goals declare pairwise distinct meta-variables whose arity is the length
// of their environment; throws MalformedGoals otherwise.
void validate_goals(const GoalEnvironment& sigma, const MetaVarRegistry& reg);

struct MetaBinding {
  std::vector<std::string> binders;
  Expr body;  // term or list, free variables among binders
};
using Substitution = std::map<std::string, MetaBinding>;

// Name of the sort used to annotate the cuts that instantiate a binding.
// Never part of a spec; such cuts are gone once apply_subst returns.
inline constexpr const char* kAdminSort = "%adm";

Expr apply_subst(const Substitution& s, const Expr& t);
Environment apply_subst(const Substitution& s, const Environment& env);
GoalEntry apply_subst(const Substitution& s, const GoalEntry& e);
GoalEnvironment apply_subst(const Substitution& s, const GoalEnvironment& sigma);

// Yes iff both sides are ground and convertible; No when they are not both
// ground or are ground and not convertible.
Conv is_solved(const Constraint& c, std::size_t fuel = kDefaultFuel);
// Yes iff sigma holds no goals and only solved constraints.
Conv is_solved(const GoalEnvironment& sigma, std::size_t fuel = kDefaultFuel);

// Reason the two sides can never be made convertible, by looking only at
// rigid structure; nullopt when they still might be.
std::optional<std::string> rigid_clash(const Term& a, const Term& b, std::size_t fuel = kDefaultFuel);

struct Simplified {
  bool failed = false;
  std::string reason;
  GoalEnvironment sigma;
  std::size_t discharged = 0;
};
Simplified simplify_constraints(const GoalEnvironment& sigma, std::size_t fuel = kDefaultFuel);

enum class PeRule { Claim, ClaimList, Axiom, PiL, Sorted, PiWf, Contr, PiR };
std::string_view pe_rule_name(PeRule r) noexcept;
std::optional<PeRule> pe_rule_from_name(std::string_view s) noexcept;

struct RuleChoice {
  PeRule rule = PeRule::Claim;
  std::string var;                  // Contr
  std::string sort;                 // Sorted: the inhabiting sort
  std::vector<std::string> triple;  // PiWf: (s1, s2, s3)
};
std::string to_string(const RuleChoice& c);

class SideCondition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One rule application. Every premise is claimed: `term` holds a fresh
// meta-variable per premise and `goals` declares them in premise order.
struct PeStep {
  Expr term;
  GoalEnvironment goals;
  // Goals claimed for the first premise of Pi-L.
  std::vector<std::string> arguments;
};

PeStep pe_enum_term(const PtsSpec& spec, MetaVarRegistry& reg, const Environment& env, const Term& c,
                    const RuleChoice& choice, std::size_t fuel = kDefaultFuel);
PeStep pe_enum_list(const PtsSpec& spec, MetaVarRegistry& reg, const Environment& env,
                    const Term& stoup, const Term& c, const RuleChoice& choice,
                    std::size_t fuel = kDefaultFuel);
PeStep pe_enum(const PtsSpec& spec, MetaVarRegistry& reg, const GoalEntry& goal,
               const RuleChoice& choice, std::size_t fuel = kDefaultFuel);

// Rule choices whose side conditions hold at a goal, in the order the
// solver tries them: sorted, Pi-wf, Pi-R, Contr for term goals; axiom then
// Pi-L for list goals. Claims are not listed. Contr skips heads whose
// spine cannot meet a ground goal.
std::vector<RuleChoice> pe_choices(const PtsSpec& spec, const GoalEntry& goal,
                                   HeadOrder order = HeadOrder::LastBoundFirst,
                                   std::size_t fuel = kDefaultFuel);

// Binds the goal's meta-variable to its environment's domain over `term`,
// splices `goals` in place of the goal and substitutes the binding through
// the rest of sigma.
GoalEnvironment splice(const GoalEnvironment& sigma, std::size_t index, const PeStep& step,
                       Substitution* bindings);

enum class Strategy { Eager, Lazy, Interactive };
std::string_view strategy_name(Strategy s) noexcept;
std::optional<Strategy> strategy_from_name(std::string_view s) noexcept;

// Interactive strategy: given the state, the selected goal and the
// applicable choices, returns the index of the choice to try next, or
// nullopt to give up on this branch.
using Chooser = std::function<std::optional<std::size_t>(
    const GoalEnvironment&, std::size_t, const std::vector<RuleChoice>&)>;

struct PeOptions {
  Strategy strategy = Strategy::Lazy;
  std::size_t budget = 50'000;  // rule applications over the whole solve
  std::size_t max_depth = 64;   // derivation height bound for deepening
  HeadOrder head_order = HeadOrder::LastBoundFirst;
  std::size_t fuel = kDefaultFuel;
  Chooser chooser;
  bool trace = false;
};

enum class PeStatus { Solved, Failure, Exhausted, Cancelled };
std::string_view pe_status_name(PeStatus s) noexcept;

struct PeOutcome {
  PeStatus status = PeStatus::Failure;
  Substitution sigma;        // on Solved: every binding fully instantiated
  GoalEnvironment residual;  // on Exhausted/Cancelled: the state being expanded last
  std::size_t nodes = 0;
  std::size_t depth = 0;
  std::vector<std::string> trace;
  std::string reason;
};

// Selection picks the leftmost goal whose environment and type are ground
// (the stoup of a list goal may be open); the lazy strategy postpones
// claimed Pi-L arguments behind every other ready goal. Iterative deepening
// on derivation height up to max_depth.
PeOutcome pe_solve(const PtsSpec& spec, MetaVarRegistry& reg, const GoalEnvironment& sigma,
                   const PeOptions& opts, std::stop_token stop = {});

// Every solution with derivation height at most `depth` for each root goal,
// in search order. The sink returns false to stop.
using SolutionSink = std::function<bool(const Substitution&)>;
std::size_t pe_solve_all(const PtsSpec& spec, MetaVarRegistry& reg, const GoalEnvironment& sigma,
                         const PeOptions& opts, std::size_t depth, const SolutionSink& sink);

// Each goal instantiated by s passes the search checker; constraints become
// convertible.
Conv check_solution(const PtsSpec& spec, const Substitution& s, const GoalEnvironment& sigma,
                    std::size_t fuel = kDefaultFuel);

// A single-goal environment for `goal` over env, declared in reg.
GoalEnvironment initial_goals(MetaVarRegistry& reg, const Environment& env, const Term& goal,
                              std::string_view base = "a");

}  // namespace ptsc
