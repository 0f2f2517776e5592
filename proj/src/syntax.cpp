#include "ptsc/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>

namespace ptsc {

std::string_view kind_name(Kind k) noexcept {
  switch (k) {
    case Kind::Pi: return "Pi";
    case Kind::Lam: return "Lam";
    case Kind::Sort: return "Sort";
    case Kind::VarApp: return "VarApp";
    case Kind::App: return "App";
    case Kind::Cut: return "Cut";
    case Kind::Meta: return "Meta";
    case Kind::Nil: return "Nil";
    case Kind::Cons: return "Cons";
    case Kind::Concat: return "Concat";
    case Kind::CutL: return "CutL";
    case Kind::MetaList: return "MetaList";
  }
  return "?";
}

namespace {

void require(bool ok, Kind k, const char* what) {
  if (!ok)
    throw std::invalid_argument(std::string(kind_name(k)) + ": " + what);
}

void merge_into(std::vector<std::string>& acc, const std::vector<std::string>& more) {
  if (more.empty()) return;
  if (acc.empty()) {
    acc = more;
    return;
  }
  std::vector<std::string> out;
  out.reserve(acc.size() + more.size());
  std::set_union(acc.begin(), acc.end(), more.begin(), more.end(),
                 std::back_inserter(out));
  acc = std::move(out);
}

}  // namespace

Expr make_node(Kind k, std::string name, std::vector<Expr> kids) {
  for (const Expr& c : kids) require(static_cast<bool>(c), k, "null child");
  auto terms = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i)
      require(kids[i].is_term(), k, "expected a term child");
  };
  switch (k) {
    case Kind::Pi:
    case Kind::Lam:
      require(kids.size() == 2, k, "two children");
      terms(0, 2);
      require(!name.empty(), k, "binder name");
      break;
    case Kind::Sort:
      require(kids.empty() && !name.empty(), k, "sort name");
      break;
    case Kind::VarApp:
      require(kids.size() == 1 && kids[0].is_list() && !name.empty(), k,
              "variable and list");
      break;
    case Kind::App:
      require(kids.size() == 2 && kids[0].is_term() && kids[1].is_list(), k,
              "head and list");
      break;
    case Kind::Cut:
      require(kids.size() == 3 && !name.empty(), k, "three children");
      terms(0, 3);
      break;
    case Kind::CutL:
      require(kids.size() == 3 && !name.empty() && kids[2].is_list(), k,
              "annotation, payload, list body");
      terms(0, 2);
      break;
    case Kind::Meta:
    case Kind::MetaList:
      require(!name.empty(), k, "meta identifier");
      terms(0, kids.size());
      break;
    case Kind::Nil:
      require(kids.empty(), k, "no children");
      break;
    case Kind::Cons:
      require(kids.size() == 2 && kids[0].is_term() && kids[1].is_list(), k,
              "head and tail");
      break;
    case Kind::Concat:
      require(kids.size() == 2 && kids[0].is_list() && kids[1].is_list(), k,
              "two lists");
      break;
  }

  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->has_meta = (k == Kind::Meta || k == Kind::MetaList);
  for (const Expr& c : kids) {
    n->size += c.size();
    n->has_meta = n->has_meta || !c.is_ground();
  }
  switch (k) {
    case Kind::Pi:
    case Kind::Lam: {
      // Only the body's occurrences of the binder are bound.
      std::vector<std::string> body = kids[1].fv();
      auto it = std::lower_bound(body.begin(), body.end(), name);
      if (it != body.end() && *it == name) body.erase(it);
      n->fv = kids[0].fv();
      merge_into(n->fv, body);
      break;
    }
    case Kind::Cut:
    case Kind::CutL: {
      std::vector<std::string> body = kids[2].fv();
      auto it = std::lower_bound(body.begin(), body.end(), name);
      if (it != body.end() && *it == name) body.erase(it);
      n->fv = kids[0].fv();
      merge_into(n->fv, kids[1].fv());
      merge_into(n->fv, body);
      break;
    }
    case Kind::VarApp:
      n->fv = kids[0].fv();
      merge_into(n->fv, {name});
      break;
    default:
      for (const Expr& c : kids) merge_into(n->fv, c.fv());
      break;
  }
  n->name = std::move(name);
  n->kids = std::move(kids);
  return Expr(std::move(n));
}

const Expr& Expr::domain() const {
  require(is(Kind::Pi) || is(Kind::Lam) || is(Kind::Cut) || is(Kind::CutL), kind(),
          "no annotation");
  return node_->kids[0];
}
const Expr& Expr::body() const {
  if (is(Kind::Pi) || is(Kind::Lam)) return node_->kids[1];
  require(is(Kind::Cut) || is(Kind::CutL), kind(), "no body");
  return node_->kids[2];
}
const Expr& Expr::payload() const {
  require(is(Kind::Cut) || is(Kind::CutL), kind(), "no payload");
  return node_->kids[1];
}
const Expr& Expr::args() const {
  if (is(Kind::VarApp)) return node_->kids[0];
  require(is(Kind::App), kind(), "no argument list");
  return node_->kids[1];
}
const Expr& Expr::head() const {
  require(is(Kind::App) || is(Kind::Cons), kind(), "no head");
  return node_->kids[0];
}
const Expr& Expr::tail() const {
  require(is(Kind::Cons), kind(), "no tail");
  return node_->kids[1];
}
const Expr& Expr::left() const {
  require(is(Kind::Concat), kind(), "not a concatenation");
  return node_->kids[0];
}
const Expr& Expr::right() const {
  require(is(Kind::Concat), kind(), "not a concatenation");
  return node_->kids[1];
}
bool Expr::binds() const noexcept {
  switch (kind()) {
    case Kind::Pi:
    case Kind::Lam:
    case Kind::Cut:
    case Kind::CutL: return true;
    default: return false;
  }
}
bool Expr::has_free(std::string_view x) const noexcept {
  const auto& v = node_->fv;
  auto it = std::lower_bound(v.begin(), v.end(), x,
                             [](const std::string& a, std::string_view b) { return a < b; });
  return it != v.end() && *it == x;
}

Term pi(std::string x, Term a, Term b) {
  return make_node(Kind::Pi, std::move(x), {std::move(a), std::move(b)});
}
Term lam(std::string x, Term a, Term m) {
  return make_node(Kind::Lam, std::move(x), {std::move(a), std::move(m)});
}
Term sort(std::string s) { return make_node(Kind::Sort, std::move(s), {}); }
Term var(std::string x) { return var_app(std::move(x), nil()); }
Term var_app(std::string x, ListTerm l) {
  return make_node(Kind::VarApp, std::move(x), {std::move(l)});
}
Term app(Term m, ListTerm l) { return make_node(Kind::App, "", {std::move(m), std::move(l)}); }
Term cut(Term annot, Term payload, std::string x, Term body) {
  return make_node(Kind::Cut, std::move(x),
                   {std::move(annot), std::move(payload), std::move(body)});
}
Term meta(std::string id, std::vector<Term> args) {
  return make_node(Kind::Meta, std::move(id), std::move(args));
}
ListTerm nil() {
  static const ListTerm empty = make_node(Kind::Nil, "", {});
  return empty;
}
ListTerm cons(Term m, ListTerm l) {
  return make_node(Kind::Cons, "", {std::move(m), std::move(l)});
}
ListTerm concat(ListTerm l, ListTerm r) {
  return make_node(Kind::Concat, "", {std::move(l), std::move(r)});
}
ListTerm cut_list(Term annot, Term payload, std::string x, ListTerm body) {
  return make_node(Kind::CutL, std::move(x),
                   {std::move(annot), std::move(payload), std::move(body)});
}
ListTerm meta_list(std::string id, std::vector<Term> args) {
  return make_node(Kind::MetaList, std::move(id), std::move(args));
}
ListTerm list_of(const std::vector<Term>& items) {
  ListTerm l = nil();
  for (auto it = items.rbegin(); it != items.rend(); ++it) l = cons(*it, l);
  return l;
}

Expr rebuild(const Expr& e, std::vector<Expr> kids) {
  return rebuild(e, e.name(), std::move(kids));
}

Expr rebuild(const Expr& e, std::string name, std::vector<Expr> kids) {
  bool same = name == e.name() && kids.size() == e.children().size();
  for (std::size_t i = 0; same && i < kids.size(); ++i)
    same = kids[i].identity() == e.children()[i].identity();
  if (same) return e;
  return make_node(e.kind(), std::move(name), std::move(kids));
}

std::set<std::string> free_vars(const Expr& e) {
  return {e.fv().begin(), e.fv().end()};
}

bool is_ground(const Expr& e) { return e.is_ground(); }

namespace {

// Binder stack for the nameless view: position counted from the innermost.
struct Scope {
  std::vector<const std::string*> names;
  long find(const std::string& x) const {
    for (std::size_t i = names.size(); i-- > 0;)
      if (*names[i] == x) return static_cast<long>(names.size() - 1 - i);
    return -1;
  }
};

bool aeq(const Expr& a, const Expr& b, Scope& sa, Scope& sb) {
  if (a.identity() == b.identity()) {
    for (const auto& x : a.fv())
      if (sa.find(x) != sb.find(x)) return false;
    return true;
  }
  if (a.kind() != b.kind() || a.size() != b.size()) return false;
  switch (a.kind()) {
    case Kind::Sort:
      return a.name() == b.name();
    case Kind::Meta:
    case Kind::MetaList:
      if (a.name() != b.name() || a.children().size() != b.children().size())
        return false;
      break;
    case Kind::VarApp: {
      long ia = sa.find(a.name()), ib = sb.find(b.name());
      if (ia != ib || (ia < 0 && a.name() != b.name())) return false;
      break;
    }
    case Kind::Pi:
    case Kind::Lam:
    case Kind::Cut:
    case Kind::CutL: {
      const auto n = a.children().size();
      for (std::size_t i = 0; i + 1 < n; ++i)
        if (!aeq(a[i], b[i], sa, sb)) return false;
      sa.names.push_back(&a.name());
      sb.names.push_back(&b.name());
      bool ok = aeq(a[n - 1], b[n - 1], sa, sb);
      sa.names.pop_back();
      sb.names.pop_back();
      return ok;
    }
    default:
      break;
  }
  for (std::size_t i = 0; i < a.children().size(); ++i)
    if (!aeq(a[i], b[i], sa, sb)) return false;
  return true;
}

inline void mix(std::size_t& h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

void ahash(const Expr& e, Scope& s, std::size_t& h) {
  mix(h, static_cast<std::size_t>(e.kind()) * 131 + 7);
  switch (e.kind()) {
    case Kind::Sort:
    case Kind::Meta:
    case Kind::MetaList:
      mix(h, std::hash<std::string>{}(e.name()));
      break;
    case Kind::VarApp: {
      long i = s.find(e.name());
      mix(h, i >= 0 ? static_cast<std::size_t>(i) * 2654435761ULL
                    : std::hash<std::string>{}(e.name()));
      break;
    }
    case Kind::Pi:
    case Kind::Lam:
    case Kind::Cut:
    case Kind::CutL: {
      const auto n = e.children().size();
      for (std::size_t i = 0; i + 1 < n; ++i) ahash(e[i], s, h);
      s.names.push_back(&e.name());
      ahash(e[n - 1], s, h);
      s.names.pop_back();
      return;
    }
    default:
      break;
  }
  for (const Expr& c : e.children()) ahash(c, s, h);
}

}  // namespace

bool alpha_eq(const Expr& a, const Expr& b) {
  if (a.identity() == b.identity()) return true;
  if (!a || !b) return false;
  if (a.fv() != b.fv()) return false;
  Scope sa, sb;
  return aeq(a, b, sa, sb);
}

std::size_t alpha_hash(const Expr& e) {
  Scope s;
  std::size_t h = 0;
  ahash(e, s, h);
  return h;
}

void collect_names(const Expr& e, std::set<std::string>& out) {
  if (e.binds() || e.is(Kind::VarApp)) out.insert(e.name());
  for (const Expr& c : e.children()) collect_names(c, out);
}

std::string fresh_name(std::string_view base,
                       const std::function<bool(std::string_view)>& taken) {
  std::string stem(base);
  while (!stem.empty() && std::isdigit(static_cast<unsigned char>(stem.back())))
    stem.pop_back();
  if (stem.empty() || stem == "_") stem = "x";
  if (!taken(stem)) return stem;
  for (std::size_t i = 1;; ++i) {
    std::string cand = stem + std::to_string(i);
    if (!taken(cand)) return cand;
  }
}

Expr rename_free(const Expr& e, const std::string& from, const std::string& to) {
  if (from == to || !e.has_free(from)) return e;
  if (e.is(Kind::VarApp)) {
    std::string x = e.name() == from ? to : e.name();
    return rebuild(e, std::move(x), {rename_free(e.args(), from, to)});
  }
  if (e.binds()) {
    const auto n = e.children().size();
    std::vector<Expr> kids(e.children().begin(), e.children().end());
    for (std::size_t i = 0; i + 1 < n; ++i) kids[i] = rename_free(kids[i], from, to);
    std::string binder = e.name();
    if (binder != from && kids[n - 1].has_free(from)) {
      if (binder == to) {
        std::set<std::string> used;
        collect_names(kids[n - 1], used);
        std::string z = fresh_name(binder, [&](std::string_view c) {
          return used.count(std::string(c)) || c == from || c == to;
        });
        kids[n - 1] = rename_free(kids[n - 1], binder, z);
        binder = z;
      }
      kids[n - 1] = rename_free(kids[n - 1], from, to);
    }
    return rebuild(e, std::move(binder), std::move(kids));
  }
  std::vector<Expr> kids;
  kids.reserve(e.children().size());
  for (const Expr& c : e.children()) kids.push_back(rename_free(c, from, to));
  return rebuild(e, std::move(kids));
}

// --- registry -------------------------------------------------------------

MetaVarRegistry::MetaVarRegistry(const MetaVarRegistry& o) {
  std::shared_lock lock(o.mu_);
  entries_ = o.entries_;
  counters_ = o.counters_;
}

MetaVarRegistry& MetaVarRegistry::operator=(const MetaVarRegistry& o) {
  if (this == &o) return *this;
  decltype(entries_) copy;
  decltype(counters_) counters;
  {
    std::shared_lock lock(o.mu_);
    copy = o.entries_;
    counters = o.counters_;
  }
  std::unique_lock lock(mu_);
  entries_ = std::move(copy);
  counters_ = std::move(counters);
  return *this;
}

void MetaVarRegistry::declare(const std::string& id, MetaKind kind, std::size_t arity) {
  std::unique_lock lock(mu_);
  auto it = entries_.find(id);
  if (it != entries_.end()) {
    if (it->second.kind != kind || it->second.arity != arity)
      throw std::invalid_argument("meta-variable " + id + " redeclared with another signature");
    return;
  }
  entries_.emplace(id, MetaInfo{kind, arity, id});
}

std::string MetaVarRegistry::fresh(MetaKind kind, std::size_t arity, std::string_view base) {
  std::unique_lock lock(mu_);
  std::string stem(base.empty() ? "a" : base);
  while (stem.size() > 1 && std::isdigit(static_cast<unsigned char>(stem.back()))) stem.pop_back();
  std::string id = stem;
  std::size_t& next = counters_[stem];
  while (entries_.find(id) != entries_.end()) id = stem + std::to_string(++next);
  entries_.emplace(id, MetaInfo{kind, arity, id});
  return id;
}

std::optional<MetaInfo> MetaVarRegistry::find(std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, MetaInfo>> MetaVarRegistry::entries() const {
  std::shared_lock lock(mu_);
  return {entries_.begin(), entries_.end()};
}

Expr MetaVarRegistry::make(const std::string& id, std::vector<Term> args) const {
  auto info = find(id);
  if (!info) throw std::invalid_argument("unknown meta-variable " + id);
  if (info->arity != args.size())
    throw std::invalid_argument("meta-variable " + id + " expects " +
                                std::to_string(info->arity) + " arguments, got " +
                                std::to_string(args.size()));
  return info->kind == MetaKind::Term ? meta(id, std::move(args))
                                      : meta_list(id, std::move(args));
}

// --- environments ---------------------------------------------------------

const Term* Environment::lookup(std::string_view x) const noexcept {
  for (auto it = decls_.rbegin(); it != decls_.rend(); ++it)
    if (it->var == x) return &it->type;
  return nullptr;
}

std::vector<std::string> Environment::domain() const {
  std::vector<std::string> out;
  out.reserve(decls_.size());
  for (const auto& d : decls_) out.push_back(d.var);
  return out;
}

std::vector<Term> Environment::domain_args() const {
  std::vector<Term> out;
  out.reserve(decls_.size());
  for (const auto& d : decls_) out.push_back(var(d.var));
  return out;
}

bool Environment::distinct() const {
  std::set<std::string_view> seen;
  for (const auto& d : decls_)
    if (!seen.insert(d.var).second) return false;
  return true;
}

bool Environment::is_ground() const {
  return std::all_of(decls_.begin(), decls_.end(),
                     [](const Decl& d) { return d.type.is_ground(); });
}

Environment Environment::extended(std::string x, Term type) const {
  std::vector<Decl> d = decls_;
  d.push_back({std::move(x), std::move(type)});
  return Environment(std::move(d));
}

Environment Environment::prefix(std::size_t n) const {
  return Environment({decls_.begin(), decls_.begin() + static_cast<long>(std::min(n, decls_.size()))});
}

bool alpha_eq(const Environment& a, const Environment& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].var != b[i].var || !alpha_eq(a[i].type, b[i].type)) return false;
  return true;
}

}  // namespace ptsc
