// Syntax-directed proof search: a checker for search derivations and a
// backtracking enumerator of quasi-normal inhabitants.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

#include "ptsc/rewrite.hpp"
#include "ptsc/spec.hpp"
#include "ptsc/syntax.hpp"
#include "ptsc/typing.hpp"

namespace ptsc {

// Quasi-normal: every redex sits inside the annotation of a lambda.
struct QuasiNormalWitness {
  Expr term;
  std::vector<Path> annotation_redexes;
};
std::optional<QuasiNormalWitness> quasi_normal_witness(const Expr& m);
bool is_quasi_normal(const Expr& m);

struct PsVerdict {
  Verdict verdict = Verdict::Reject;
  // Of the shortest search derivation, on Accept: rule applications along
  // the longest branch, not counting the leaf rules sorted and axiom.
  std::size_t height = 0;
  std::string reason;
  bool accepted() const noexcept { return verdict == Verdict::Accept; }
};

PsVerdict ps_check(const PtsSpec& spec, const Environment& env, const Term& m, const Term& a,
                   std::size_t fuel = kDefaultFuel);
PsVerdict ps_check_list(const PtsSpec& spec, const Environment& env, const Term& stoup,
                        const ListTerm& l, const Term& c, std::size_t fuel = kDefaultFuel);

enum class HeadOrder { LastBoundFirst, FirstBoundFirst };

struct SearchConfig {
  std::size_t max_depth = 8;  // derivation height, as in PsVerdict
  HeadOrder head_order = HeadOrder::LastBoundFirst;
  std::size_t conv_fuel = kDefaultFuel;
  std::size_t max_results = 10;
  // Try Pi-R first and skip Contr whenever the goal reduces to a product.
  bool eta_long_bias = false;
};

struct SearchStats {
  std::size_t found = 0;
  std::size_t explored = 0;   // goals expanded
  std::size_t undecided = 0;  // branches dropped because fuel ran out
  std::size_t depth = 0;      // last depth bound completed or in progress
  bool cancelled = false;
};

class SearchPrecondition : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Called once per new inhabitant with the depth bound it was found at.
// Returning false ends the search.
using SearchSink = std::function<bool(const Term&, std::size_t)>;

// Iterative deepening on derivation height. Results are quasi-normal,
// pairwise distinct up to alpha, and come in a deterministic order. Throws
// SearchPrecondition unless env is well formed and goal is typed by a sort.
SearchStats ps_search(const PtsSpec& spec, const Environment& env, const Term& goal,
                      const SearchConfig& cfg, const SearchSink& sink, std::stop_token stop = {});
std::vector<Term> ps_search_all(const PtsSpec& spec, const Environment& env, const Term& goal,
                                const SearchConfig& cfg, SearchStats* stats = nullptr);

// Shape of a type once every head redex is gone: the number of leading
// products and what is left at the end.
struct Spine {
  enum class Head { Sort, Free, Bound, Unknown };
  std::size_t products = 0;
  Head head = Head::Unknown;
  std::string name;  // sort or variable name
};
Spine spine(const Term& t, std::size_t fuel = kDefaultFuel);
// False only when no list can take stoup type `stoup` to goal type `goal`.
bool spine_compatible(const Spine& stoup, const Spine& goal);

}  // namespace ptsc
