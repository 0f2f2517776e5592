// Concrete syntax for terms, lists and environments.
//
//   Term  := SORT | (x : A) -> B | A -> B | \x:A. M | x | x{l} | (M){l}
//          | [x := P : A] M | ?a(M, ...) | ?a()
//   List  := nil | M :: l | l ++ l' | [x := P : A] l | ??b(M, ...) | ??b()
//
// In list position `[` always starts a list cut; a term cut at the head of
// a cons cell must be parenthesised. Postfix `{l}` may be chained.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "ptsc/spec.hpp"
#include "ptsc/syntax.hpp"

namespace ptsc {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return col_; }

 private:
  int line_, col_;
};

struct ParseContext {
  const PtsSpec* spec = nullptr;          // null: sorts are `*` and `#`
  MetaVarRegistry* registry = nullptr;    // null: meta-variables are rejected
  bool declare_metas = false;             // register unknown ids on first use
};

Term parse_term(std::string_view text, const ParseContext& ctx = {});
ListTerm parse_list(std::string_view text, const ParseContext& ctx = {});
// Term if the whole text is a term, otherwise a list.
Expr parse(std::string_view text, const ParseContext& ctx = {});
// `x : A, y : B`; the empty string is the empty environment.
Environment parse_env(std::string_view text, const ParseContext& ctx = {});

struct PrintOptions {
  // Omit λ annotations (merging consecutive binders) and cut annotations.
  // Compact output is for display and is not meant to be parsed back.
  bool compact = false;
};

std::string print(const Expr& e, PrintOptions opts = {});
std::string print(const Environment& env, PrintOptions opts = {});

}  // namespace ptsc
