// Reduction rules B and x' (B1-B3, A1-A4, C1-C6, Calpha, D1-D3, Dbeta),
// normalisation and convertibility.
#pragma once

#include <bitset>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ptsc/syntax.hpp"

namespace ptsc {

enum class Rule : std::uint8_t {
  B, B1, B2, B3, A1, A2, A3, A4,
  C1, C2, C3, C4, C5, C6, Calpha, D1, D2, D3, Dbeta
};
inline constexpr std::size_t kRuleCount = 19;

std::string_view rule_name(Rule r) noexcept;
std::optional<Rule> rule_from_name(std::string_view s) noexcept;

using RuleSet = std::bitset<kRuleCount>;
RuleSet all_rules() noexcept;
RuleSet x_rules() noexcept;  // everything but B
RuleSet rule_set(std::initializer_list<Rule> rs) noexcept;

// Child indices from the root; see Kind for the child order of each node.
using Path = std::vector<std::uint32_t>;
std::string path_string(const Path& p);  // "root" for the empty path

struct Redex {
  Path position;
  Rule rule;
};

class StaleRedex : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when an internal invariant of the normaliser is broken.
class DefectError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

const Expr& subterm_at(const Expr& t, const Path& p);
Expr replace_at(const Expr& t, const Path& p, std::size_t depth, const Expr& with);
inline Expr replace_at(const Expr& t, const Path& p, const Expr& with) {
  return replace_at(t, p, 0, with);
}

// Rules of `rules` whose left-hand side matches e at the root, in enum order.
std::vector<Rule> rules_at(const Expr& e, RuleSet rules);
// Preorder: a position precedes its children, children left to right.
std::vector<Redex> find_redexes(const Expr& t, RuleSet rules);
Expr contract(const Expr& e, Rule r);
Expr step(const Expr& t, const Redex& r);

// x'-normal form. Structural, so always terminates.
Expr normalize_x(const Expr& t);
// Same normal form, reached by repeated leftmost-outermost steps, each
// appended to trace.
Expr normalize_x_traced(const Expr& t, std::vector<Redex>* trace);

inline constexpr std::size_t kDefaultFuel = 10000;

struct Normalized {
  Expr term;
  bool exhausted = false;
  std::size_t b_steps = 0;
};

// Fuel bounds the number of B steps; x' steps are free since x' terminates.
Normalized normalize_bx(const Expr& t, std::size_t fuel = kDefaultFuel);
Normalized normalize_bx_traced(const Expr& t, std::size_t fuel, std::vector<Redex>* trace);

// The redex that must be contracted before the head constructor of t is
// known (a Pi, Lam, sort, variable application or meta-variable for terms;
// nil, cons or a list meta-variable for lists), if any.
std::optional<Redex> head_redex(const Expr& t);
// Contracts head redexes until none is left. Cuts below the head survive.
Normalized head_normalize(const Expr& t, std::size_t fuel = kDefaultFuel);

enum class Conv { Yes, No, Undecided };
std::string_view conv_name(Conv c) noexcept;
Conv convertible(const Expr& a, const Expr& b, std::size_t fuel = kDefaultFuel);

}  // namespace ptsc
