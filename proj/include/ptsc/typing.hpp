// Typing for the sequent calculus (well-formed environments, term typing,
// list typing with a stoup) and for natural-deduction PTS terms.
//
// Two views of the same rules: validate_derivation checks an explicit
// derivation tree node by node, and the algorithmic checker builds such a
// tree by synthesis, so every Accept carries a derivation that validates.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ptsc/pts.hpp"
#include "ptsc/rewrite.hpp"
#include "ptsc/spec.hpp"
#include "ptsc/syntax.hpp"

namespace ptsc {

enum class JKind { EnvWf, TermTy, ListTy };

// EnvWf: env wf.  TermTy: env |- subject : type.
// ListTy: env ; stoup |- subject : type.
struct Judgment {
  JKind kind = JKind::EnvWf;
  Environment env;
  Expr subject;
  Term type;
  Term stoup;

  static Judgment wf(Environment env);
  static Judgment term(Environment env, Term m, Term a);
  static Judgment list(Environment env, Term stoup, ListTerm l, Term c);
};

std::string to_string(const Judgment& j);

enum class TRule {
  Empty, Extend, Sorted, PiWf, PiR, Contr, Axiom,
  ConvR, ConvRList, ConvL, PiL, Cut1, Cut2, Cut3, Cut4
};
std::string_view trule_name(TRule r) noexcept;

struct Derivation;
using DerivationPtr = std::shared_ptr<const Derivation>;

// Premise order per rule:
//   extend: A:s | sorted: wf | Pi-wf: A:s1, B:s2 | Pi-R: Pi:s, M:B
//   Contr: list | axiom: A:s | convR, convR', convL: judgment, B:s
//   Pi-L: Pi:s, M:A, list | Cut1: l', l | Cut3: M:A, list
//   Cut2, Cut4: P:A, body judgment, Delta' wf
struct Derivation {
  TRule rule;
  Judgment conclusion;
  std::vector<DerivationPtr> premises;

  std::size_t size() const;
};

DerivationPtr make_derivation(TRule rule, Judgment conclusion, std::vector<DerivationPtr> premises);

struct Validation {
  bool ok = true;
  std::string diagnostic;  // names the node path and the violated condition
  explicit operator bool() const noexcept { return ok; }
};

Validation validate_derivation(const PtsSpec& spec, const Derivation& d,
                               std::size_t fuel = kDefaultFuel);

enum class Verdict { Accept, Reject, Undecided };
std::string_view verdict_name(Verdict v) noexcept;

struct CheckResult {
  Verdict verdict = Verdict::Reject;
  std::string reason;
  DerivationPtr derivation;  // set on Accept (PTSC judgments only)
  bool accepted() const noexcept { return verdict == Verdict::Accept; }
};

// Gamma included in Delta: every (x:A) of Gamma has (x:B) in Delta, A <-> B.
Conv env_included(const Environment& gamma, const Environment& delta,
                  std::size_t fuel = kDefaultFuel);

CheckResult check_env(const PtsSpec& spec, const Environment& env,
                      std::size_t fuel = kDefaultFuel);
CheckResult check_term(const PtsSpec& spec, const Environment& env, const Term& m,
                       const Term& a, std::size_t fuel = kDefaultFuel);
CheckResult check_list(const PtsSpec& spec, const Environment& env, const Term& stoup,
                       const ListTerm& l, const Term& c, std::size_t fuel = kDefaultFuel);

struct InferResult {
  Verdict verdict = Verdict::Reject;
  std::string reason;
  Term type;
  DerivationPtr derivation;
};
// Some A with env |- m : A. The environment is checked first.
InferResult infer_term(const PtsSpec& spec, const Environment& env, const Term& m,
                       std::size_t fuel = kDefaultFuel);
// Some sort s with env |- a : s.
InferResult infer_sort(const PtsSpec& spec, const Environment& env, const Term& a,
                       std::size_t fuel = kDefaultFuel);

// --- natural deduction ------------------------------------------------------

CheckResult check_pts_env(const PtsSpec& spec, const PtsEnv& env,
                          std::size_t fuel = kDefaultFuel);
CheckResult check_pts(const PtsSpec& spec, const PtsEnv& env, const PtsTerm& t,
                      const PtsTerm& type, std::size_t fuel = kDefaultFuel);

}  // namespace ptsc
