// Natural-deduction pure type system terms, beta reduction, and the two
// translations between them and the sequent-calculus syntax.
//
// A meta-variable of arity k is represented on the PTS side by a reserved
// variable (kind Reserved) that no binder can capture. Term meta-variables
// are applied to at least k arguments, list meta-variables to at least k+1
// (the extra first argument is the head the list is applied to).
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptsc/parse.hpp"
#include "ptsc/rewrite.hpp"
#include "ptsc/syntax.hpp"

namespace ptsc {

enum class PKind : std::uint8_t { Var, Sort, Pi, Lam, App, Reserved };

class PtsTerm {
 public:
  PtsTerm() = default;

  PKind kind() const noexcept { return node_->kind; }
  bool is(PKind k) const noexcept { return node_ && node_->kind == k; }
  const std::string& name() const noexcept { return node_->name; }
  std::span<const PtsTerm> children() const noexcept { return node_->kids; }
  const PtsTerm& operator[](std::size_t i) const { return node_->kids.at(i); }
  // Pi/Lam: domain is [0], body is [1]. App: function [0], argument [1].
  const PtsTerm& domain() const { return (*this)[0]; }
  const PtsTerm& body() const { return (*this)[1]; }
  const PtsTerm& fun() const { return (*this)[0]; }
  const PtsTerm& arg() const { return (*this)[1]; }

  MetaKind reserved_kind() const noexcept { return node_->rkind; }
  std::size_t reserved_arity() const noexcept { return node_->arity; }

  std::size_t size() const noexcept { return node_->size; }
  const std::vector<std::string>& fv() const noexcept { return node_->fv; }
  bool has_free(std::string_view x) const noexcept;
  bool has_reserved() const noexcept { return node_->has_reserved; }
  explicit operator bool() const noexcept { return node_ != nullptr; }
  const void* identity() const noexcept { return node_.get(); }

  struct Node {
    PKind kind;
    std::string name;
    std::vector<PtsTerm> kids;
    std::vector<std::string> fv;
    std::size_t size = 1;
    MetaKind rkind = MetaKind::Term;
    std::size_t arity = 0;
    bool has_reserved = false;
  };

 private:
  explicit PtsTerm(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  friend PtsTerm make_pts(PKind, std::string, std::vector<PtsTerm>, MetaKind, std::size_t);
  std::shared_ptr<const Node> node_;
};

PtsTerm make_pts(PKind k, std::string name, std::vector<PtsTerm> kids,
                 MetaKind rkind = MetaKind::Term, std::size_t arity = 0);
PtsTerm pvar(std::string x);
PtsTerm psort(std::string s);
PtsTerm ppi(std::string x, PtsTerm a, PtsTerm b);
PtsTerm plam(std::string x, PtsTerm a, PtsTerm t);
PtsTerm papp(PtsTerm f, PtsTerm a);
PtsTerm preserved(std::string id, MetaKind kind, std::size_t arity);

bool alpha_eq(const PtsTerm& a, const PtsTerm& b);
PtsTerm rename_free(const PtsTerm& t, const std::string& from, const std::string& to);
// Capture-avoiding t{x := u}.
PtsTerm subst_pts(const PtsTerm& t, const std::string& x, const PtsTerm& u);

// Every one-step beta reduct, in preorder of the contracted redex.
std::vector<PtsTerm> beta_step(const PtsTerm& t);

struct PtsNormalized {
  PtsTerm term;
  bool exhausted = false;
  std::size_t steps = 0;
};
// Normal-order reduction; fuel bounds the number of beta steps.
PtsNormalized normalize_beta(const PtsTerm& t, std::size_t fuel = kDefaultFuel);
Conv pts_convertible(const PtsTerm& a, const PtsTerm& b, std::size_t fuel = kDefaultFuel);

// Grammar: x | SORT | (x : T) -> U | T -> U | \x:T. t | t u | ?a | ??b
// Reserved variables take kind and arity from the registry.
PtsTerm parse_pts(std::string_view text, const ParseContext& ctx = {});
std::string print(const PtsTerm& t);

struct PtsDecl {
  std::string var;
  PtsTerm type;
};
using PtsEnv = std::vector<PtsDecl>;
PtsEnv parse_pts_env(std::string_view text, const ParseContext& ctx = {});
std::string print(const PtsEnv& env);

// --- translations ----------------------------------------------------------

class FragmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Names of the form %yN are private to the translation.
PtsTerm encode(const Term& m);
PtsTerm encode_list(const std::string& y, const ListTerm& l);
PtsEnv encode(const Environment& env);

bool needs_list(const PtsTerm& t, const ListTerm& l);
Term decode(const PtsTerm& t);
Term decode_with(const ListTerm& l, const PtsTerm& t);
Environment decode(const PtsEnv& env);

}  // namespace ptsc
