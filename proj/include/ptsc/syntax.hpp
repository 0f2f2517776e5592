// Terms and lists of the sequent calculus, with meta-variables.
//
// Both syntactic categories share one node type; the category is fixed by
// the node kind and checked when nodes are built. Nodes are immutable and
// shared, so copying an Expr is cheap and values can cross threads freely.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ptsc {

enum class Kind : std::uint8_t {
  // terms
  Pi,      // (x : A) -> B          children: A, B
  Lam,     // \x:A. M               children: A, M
  Sort,    // s
  VarApp,  // x{l}                  children: l
  App,     // (M){l}                children: M, l
  Cut,     // [x := P : A] M        children: A, P, M
  Meta,    // ?a(M1, ..., Mn)       children: M1..Mn
  // lists
  Nil,
  Cons,     // M :: l               children: M, l
  Concat,   // l ++ l'              children: l, l'
  CutL,     // [x := P : A] l       children: A, P, l
  MetaList  // ??b(M1, ..., Mn)     children: M1..Mn
};

constexpr bool is_list_kind(Kind k) noexcept { return k >= Kind::Nil; }
std::string_view kind_name(Kind k) noexcept;

class Expr {
 public:
  Expr() = default;

  Kind kind() const noexcept { return node_->kind; }
  bool is_term() const noexcept { return !is_list_kind(kind()); }
  bool is_list() const noexcept { return is_list_kind(kind()); }
  bool is(Kind k) const noexcept { return node_ && node_->kind == k; }

  // Binder of Pi/Lam/Cut/CutL, variable of VarApp, sort name, meta id.
  const std::string& name() const noexcept { return node_->name; }
  std::span<const Expr> children() const noexcept { return node_->kids; }
  const Expr& operator[](std::size_t i) const { return node_->kids.at(i); }

  // Named views on children; each asserts the kind it makes sense for.
  const Expr& domain() const;   // Pi, Lam, Cut, CutL annotation
  const Expr& body() const;     // Pi, Lam, Cut, CutL
  const Expr& payload() const;  // Cut, CutL
  const Expr& args() const;     // VarApp, App list argument
  const Expr& head() const;     // App head, Cons head
  const Expr& tail() const;     // Cons tail
  const Expr& left() const;     // Concat
  const Expr& right() const;    // Concat
  bool binds() const noexcept;  // Pi, Lam, Cut, CutL

  std::size_t size() const noexcept { return node_->size; }
  bool is_ground() const noexcept { return !node_->has_meta; }
  const std::vector<std::string>& fv() const noexcept { return node_->fv; }
  bool has_free(std::string_view x) const noexcept;

  explicit operator bool() const noexcept { return node_ != nullptr; }
  const void* identity() const noexcept { return node_.get(); }

  struct Node {
    Kind kind;
    std::string name;
    std::vector<Expr> kids;
    std::vector<std::string> fv;  // sorted, unique
    std::size_t size = 1;
    bool has_meta = false;
  };

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  friend Expr make_node(Kind, std::string, std::vector<Expr>);
  std::shared_ptr<const Node> node_;
};

using Term = Expr;
using ListTerm = Expr;

// Raw constructor; validates child categories and counts but not meta
// arities (see MetaVarRegistry::make).
Expr make_node(Kind k, std::string name, std::vector<Expr> kids);

Term pi(std::string x, Term a, Term b);
Term lam(std::string x, Term a, Term m);
Term sort(std::string s);
Term var(std::string x);
Term var_app(std::string x, ListTerm l);
Term app(Term m, ListTerm l);
Term cut(Term annot, Term payload, std::string x, Term body);
Term meta(std::string id, std::vector<Term> args);
ListTerm nil();
ListTerm cons(Term m, ListTerm l);
ListTerm concat(ListTerm l, ListTerm r);
ListTerm cut_list(Term annot, Term payload, std::string x, ListTerm body);
ListTerm meta_list(std::string id, std::vector<Term> args);
ListTerm list_of(const std::vector<Term>& items);

// Same kind and name, new children. Returns e itself when nothing changed.
Expr rebuild(const Expr& e, std::vector<Expr> kids);
Expr rebuild(const Expr& e, std::string name, std::vector<Expr> kids);

std::set<std::string> free_vars(const Expr& e);
bool is_ground(const Expr& e);
bool alpha_eq(const Expr& a, const Expr& b);
std::size_t alpha_hash(const Expr& e);

struct AlphaHash {
  std::size_t operator()(const Expr& e) const { return alpha_hash(e); }
};
struct AlphaEq {
  bool operator()(const Expr& a, const Expr& b) const { return alpha_eq(a, b); }
};

// Every variable name occurring in e, bound or free.
void collect_names(const Expr& e, std::set<std::string>& out);

// base, base1, base2, ... : the first candidate `taken` rejects is skipped.
// Trailing digits of base are dropped before counting.
std::string fresh_name(std::string_view base,
                       const std::function<bool(std::string_view)>& taken);

// Capture-avoiding renaming of the free variable `from` to `to`.
Expr rename_free(const Expr& e, const std::string& from, const std::string& to);

// --- meta-variables -------------------------------------------------------

enum class MetaKind : std::uint8_t { Term, List };

struct MetaInfo {
  MetaKind kind = MetaKind::Term;
  std::size_t arity = 0;
  std::string display;
};

class MetaVarRegistry {
 public:
  MetaVarRegistry() = default;
  MetaVarRegistry(const MetaVarRegistry& o);
  MetaVarRegistry& operator=(const MetaVarRegistry& o);

  // Throws if id exists with a different kind or arity.
  void declare(const std::string& id, MetaKind kind, std::size_t arity);
  std::string fresh(MetaKind kind, std::size_t arity, std::string_view base);
  std::optional<MetaInfo> find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id).has_value(); }
  std::vector<std::pair<std::string, MetaInfo>> entries() const;

  // Checked construction: kind and arity must match the declaration.
  Expr make(const std::string& id, std::vector<Term> args) const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, MetaInfo, std::less<>> entries_;
  std::map<std::string, std::size_t, std::less<>> counters_;  // next suffix per stem
};

// --- environments --------------------------------------------------------

struct Decl {
  std::string var;
  Term type;
};

class Environment {
 public:
  Environment() = default;
  explicit Environment(std::vector<Decl> decls) : decls_(std::move(decls)) {}

  const std::vector<Decl>& decls() const noexcept { return decls_; }
  std::size_t size() const noexcept { return decls_.size(); }
  bool empty() const noexcept { return decls_.empty(); }
  const Decl& operator[](std::size_t i) const { return decls_.at(i); }

  // Type of the rightmost binding of x, or nullptr.
  const Term* lookup(std::string_view x) const noexcept;
  bool binds(std::string_view x) const noexcept { return lookup(x) != nullptr; }
  std::vector<std::string> domain() const;
  // x1{nil}, ..., xn{nil}: the arguments of a meta-variable claimed here.
  std::vector<Term> domain_args() const;
  bool distinct() const;
  bool is_ground() const;

  Environment extended(std::string x, Term type) const;
  Environment prefix(std::size_t n) const;

 private:
  std::vector<Decl> decls_;
};

bool alpha_eq(const Environment& a, const Environment& b);

}  // namespace ptsc
