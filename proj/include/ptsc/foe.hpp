// First-order encoding of terms and the lexicographic path ordering used as
// the termination measure for x'.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptsc/syntax.hpp"

namespace ptsc {

enum class FoSym : std::uint8_t { Bullet, Un, Deux, Tuple, CutS, Sub };

struct FoTerm {
  FoSym sym = FoSym::Bullet;
  std::vector<FoTerm> args;  // a tuple's arity is args.size()

  friend bool operator==(const FoTerm&, const FoTerm&) = default;
};

FoTerm foe(const Expr& e);

// Strict lpo over the precedence
//   bullet < un < deux < tuple_0 < tuple_1 < ... < cut < sub.
bool lpo_gt(const FoTerm& a, const FoTerm& b);

std::string to_string(const FoTerm& t);

}  // namespace ptsc
