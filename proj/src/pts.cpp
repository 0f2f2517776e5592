#include "ptsc/pts.hpp"

#include <algorithm>
#include <atomic>

#include "lexer.hpp"

namespace ptsc {

namespace {

void merge_into(std::vector<std::string>& acc, const std::vector<std::string>& more) {
  if (more.empty()) return;
  std::vector<std::string> out;
  std::set_union(acc.begin(), acc.end(), more.begin(), more.end(), std::back_inserter(out));
  acc = std::move(out);
}

void erase_name(std::vector<std::string>& v, const std::string& x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it != v.end() && *it == x) v.erase(it);
}

}  // namespace

PtsTerm make_pts(PKind k, std::string name, std::vector<PtsTerm> kids, MetaKind rkind,
                 std::size_t arity) {
  std::size_t want = (k == PKind::Pi || k == PKind::Lam || k == PKind::App) ? 2 : 0;
  if (kids.size() != want) throw std::invalid_argument("PTS node with wrong child count");
  for (const PtsTerm& c : kids)
    if (!c) throw std::invalid_argument("PTS node with null child");
  auto n = std::make_shared<PtsTerm::Node>();
  n->kind = k;
  n->rkind = rkind;
  n->arity = arity;
  n->has_reserved = k == PKind::Reserved;
  for (const PtsTerm& c : kids) {
    n->size += c.size();
    n->has_reserved = n->has_reserved || c.has_reserved();
  }
  switch (k) {
    case PKind::Var:
      n->fv = {name};
      break;
    case PKind::Pi:
    case PKind::Lam: {
      std::vector<std::string> body = kids[1].fv();
      erase_name(body, name);
      n->fv = kids[0].fv();
      merge_into(n->fv, body);
      break;
    }
    case PKind::App:
      n->fv = kids[0].fv();
      merge_into(n->fv, kids[1].fv());
      break;
    default:
      break;
  }
  n->name = std::move(name);
  n->kids = std::move(kids);
  return PtsTerm(std::move(n));
}

bool PtsTerm::has_free(std::string_view x) const noexcept {
  const auto& v = node_->fv;
  auto it = std::lower_bound(v.begin(), v.end(), x,
                             [](const std::string& a, std::string_view b) { return a < b; });
  return it != v.end() && *it == x;
}

PtsTerm pvar(std::string x) { return make_pts(PKind::Var, std::move(x), {}); }
PtsTerm psort(std::string s) { return make_pts(PKind::Sort, std::move(s), {}); }
PtsTerm ppi(std::string x, PtsTerm a, PtsTerm b) {
  return make_pts(PKind::Pi, std::move(x), {std::move(a), std::move(b)});
}
PtsTerm plam(std::string x, PtsTerm a, PtsTerm t) {
  return make_pts(PKind::Lam, std::move(x), {std::move(a), std::move(t)});
}
PtsTerm papp(PtsTerm f, PtsTerm a) {
  return make_pts(PKind::App, "", {std::move(f), std::move(a)});
}
PtsTerm preserved(std::string id, MetaKind kind, std::size_t arity) {
  return make_pts(PKind::Reserved, std::move(id), {}, kind, arity);
}

namespace {

PtsTerm rebuild(const PtsTerm& t, std::string name, std::vector<PtsTerm> kids) {
  bool same = name == t.name();
  for (std::size_t i = 0; same && i < kids.size(); ++i)
    same = kids[i].identity() == t[i].identity();
  if (same) return t;
  return make_pts(t.kind(), std::move(name), std::move(kids), t.reserved_kind(),
                  t.reserved_arity());
}

struct Scope {
  std::vector<const std::string*> names;
  long find(const std::string& x) const {
    for (std::size_t i = names.size(); i-- > 0;)
      if (*names[i] == x) return static_cast<long>(names.size() - 1 - i);
    return -1;
  }
};

bool aeq(const PtsTerm& a, const PtsTerm& b, Scope& sa, Scope& sb) {
  if (a.kind() != b.kind() || a.size() != b.size()) return false;
  switch (a.kind()) {
    case PKind::Var: {
      long ia = sa.find(a.name()), ib = sb.find(b.name());
      return ia == ib && (ia >= 0 || a.name() == b.name());
    }
    case PKind::Sort:
      return a.name() == b.name();
    case PKind::Reserved:
      return a.name() == b.name() && a.reserved_kind() == b.reserved_kind() &&
             a.reserved_arity() == b.reserved_arity();
    case PKind::App:
      return aeq(a[0], b[0], sa, sb) && aeq(a[1], b[1], sa, sb);
    case PKind::Pi:
    case PKind::Lam: {
      if (!aeq(a[0], b[0], sa, sb)) return false;
      sa.names.push_back(&a.name());
      sb.names.push_back(&b.name());
      bool ok = aeq(a[1], b[1], sa, sb);
      sa.names.pop_back();
      sb.names.pop_back();
      return ok;
    }
  }
  return false;
}

std::string fresh_for(const std::string& base, const std::vector<const PtsTerm*>& avoid,
                      const std::vector<std::string>& also) {
  return fresh_name(base, [&](std::string_view c) {
    for (const PtsTerm* t : avoid)
      if (t->has_free(c)) return true;
    return std::find(also.begin(), also.end(), c) != also.end();
  });
}

}  // namespace

bool alpha_eq(const PtsTerm& a, const PtsTerm& b) {
  if (a.identity() == b.identity()) return true;
  if (!a || !b || a.fv() != b.fv()) return false;
  Scope sa, sb;
  return aeq(a, b, sa, sb);
}

PtsTerm rename_free(const PtsTerm& t, const std::string& from, const std::string& to) {
  return subst_pts(t, from, pvar(to));
}

PtsTerm subst_pts(const PtsTerm& t, const std::string& x, const PtsTerm& u) {
  if (!t.has_free(x)) return t;
  switch (t.kind()) {
    case PKind::Var:
      return u;
    case PKind::App:
      return rebuild(t, "", {subst_pts(t[0], x, u), subst_pts(t[1], x, u)});
    case PKind::Pi:
    case PKind::Lam: {
      PtsTerm a = subst_pts(t[0], x, u);
      std::string y = t.name();
      PtsTerm body = t[1];
      if (y == x) return rebuild(t, y, {a, body});
      if (u.has_free(y) && body.has_free(x)) {
        std::string z = fresh_for(y, {&u, &body}, {x});
        body = subst_pts(body, y, pvar(z));
        y = z;
      }
      return rebuild(t, std::move(y), {a, subst_pts(body, x, u)});
    }
    default:
      return t;
  }
}

std::vector<PtsTerm> beta_step(const PtsTerm& t) {
  std::vector<PtsTerm> out;
  if (t.is(PKind::App) && t.fun().is(PKind::Lam))
    out.push_back(subst_pts(t.fun().body(), t.fun().name(), t.arg()));
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    for (PtsTerm& r : beta_step(t[i])) {
      std::vector<PtsTerm> kids(t.children().begin(), t.children().end());
      kids[i] = std::move(r);
      out.push_back(make_pts(t.kind(), t.name(), std::move(kids)));
    }
  }
  return out;
}

namespace {

// One normal-order step, or nullopt-equivalent (empty term) at normal form.
PtsTerm leftmost_step(const PtsTerm& t) {
  if (t.is(PKind::App) && t.fun().is(PKind::Lam))
    return subst_pts(t.fun().body(), t.fun().name(), t.arg());
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    PtsTerm r = leftmost_step(t[i]);
    if (r) {
      std::vector<PtsTerm> kids(t.children().begin(), t.children().end());
      kids[i] = std::move(r);
      return make_pts(t.kind(), t.name(), std::move(kids));
    }
  }
  return {};
}

}  // namespace

PtsNormalized normalize_beta(const PtsTerm& t, std::size_t fuel) {
  PtsNormalized out{t, false, 0};
  for (;;) {
    bool has_redex = false;
    // Cheap scan before allocating.
    std::vector<const PtsTerm*> stack{&out.term};
    while (!stack.empty() && !has_redex) {
      const PtsTerm* c = stack.back();
      stack.pop_back();
      if (c->is(PKind::App) && c->fun().is(PKind::Lam)) has_redex = true;
      for (const PtsTerm& k : c->children()) stack.push_back(&k);
    }
    if (!has_redex) return out;
    if (out.steps >= fuel) {
      out.exhausted = true;
      return out;
    }
    out.term = leftmost_step(out.term);
    ++out.steps;
  }
}

Conv pts_convertible(const PtsTerm& a, const PtsTerm& b, std::size_t fuel) {
  if (alpha_eq(a, b)) return Conv::Yes;
  auto na = normalize_beta(a, fuel);
  if (na.exhausted) return Conv::Undecided;
  auto nb = normalize_beta(b, fuel);
  if (nb.exhausted) return Conv::Undecided;
  return alpha_eq(na.term, nb.term) ? Conv::Yes : Conv::No;
}

// --- concrete syntax -------------------------------------------------------

namespace {

using detail::Tok;
using detail::Token;

class PtsParser {
 public:
  PtsParser(std::string_view text, const ParseContext& ctx) : toks_(detail::lex(text)), ctx_(ctx) {}

  PtsTerm whole() {
    PtsTerm t = term();
    expect_end();
    return t;
  }
  PtsEnv env() {
    PtsEnv out;
    if (peek().kind != Tok::End) {
      for (;;) {
        std::string x = variable();
        expect(":");
        out.push_back({x, term()});
        if (!accept(",")) break;
      }
    }
    expect_end();
    return out;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool is_sym(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  bool accept(std::string_view s) {
    if (!is_sym(s)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(msg + (t.kind == Tok::End ? " at end of input" : " near '" + t.text + "'"),
                     t.line, t.col);
  }
  void expect(std::string_view s) {
    if (!accept(s)) fail("expected '" + std::string(s) + "'");
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail("unexpected trailing input");
  }
  bool is_sort_token(std::size_t k = 0) const {
    const Token& t = peek(k);
    if (t.kind == Tok::End) return false;
    if (ctx_.spec) return ctx_.spec->is_sort(t.text);
    return t.kind == Tok::Sym && (t.text == "*" || t.text == "#");
  }
  bool is_var_token(std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && !is_sort_token(k);
  }
  std::string variable() {
    if (!is_var_token()) fail("expected a variable");
    return toks_[pos_++].text;
  }
  bool atom_start() const {
    return is_sort_token() || is_var_token() || is_sym("(") || is_sym("?") || is_sym("??");
  }

  PtsTerm term() {
    if (is_sym("(") && is_var_token(1) && is_sym(":", 2)) {
      ++pos_;
      std::string x = variable();
      expect(":");
      PtsTerm a = term();
      expect(")");
      expect("->");
      return ppi(std::move(x), std::move(a), term());
    }
    if (accept("\\")) {
      std::string x = variable();
      expect(":");
      PtsTerm a = term();
      expect(".");
      return plam(std::move(x), std::move(a), term());
    }
    PtsTerm lhs = application();
    if (accept("->")) {
      PtsTerm rhs = term();
      std::string x = fresh_name("x", [&](std::string_view c) { return rhs.has_free(c); });
      return ppi(std::move(x), std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  PtsTerm application() {
    PtsTerm t = atom();
    while (atom_start()) t = papp(std::move(t), atom());
    return t;
  }

  PtsTerm atom() {
    if (is_sort_token()) return psort(toks_[pos_++].text);
    if (is_var_token()) return pvar(toks_[pos_++].text);
    bool list = is_sym("??");
    if (accept("??") || accept("?")) {
      if (peek().kind != Tok::Ident) fail("expected a meta-variable name");
      const Token& tok = toks_[pos_++];
      if (!ctx_.registry) throw ParseError("reserved variable not allowed here", tok.line, tok.col);
      auto info = ctx_.registry->find(tok.text);
      if (!info) throw ParseError("unknown meta-identifier " + tok.text, tok.line, tok.col);
      if ((info->kind == MetaKind::List) != list)
        throw ParseError("meta-variable " + tok.text + " belongs to the other category",
                         tok.line, tok.col);
      return preserved(tok.text, info->kind, info->arity);
    }
    if (accept("(")) {
      PtsTerm t = term();
      expect(")");
      return t;
    }
    fail("expected a term");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ParseContext& ctx_;
};

enum class PCtx { Top, ArrowLeft, Fun, Arg };

void print_pts(const PtsTerm& t, PCtx c, std::string& out) {
  switch (t.kind()) {
    case PKind::Var:
    case PKind::Sort:
      out += t.name();
      return;
    case PKind::Reserved:
      out += (t.reserved_kind() == MetaKind::List ? "??" : "?") + t.name();
      return;
    case PKind::App: {
      bool open = c == PCtx::Arg;
      if (open) out += '(';
      print_pts(t.fun(), PCtx::Fun, out);
      out += ' ';
      print_pts(t.arg(), PCtx::Arg, out);
      if (open) out += ')';
      return;
    }
    case PKind::Lam: {
      bool open = c != PCtx::Top;
      if (open) out += '(';
      out += "\\" + t.name() + ":";
      print_pts(t.domain(), PCtx::Top, out);
      out += ". ";
      print_pts(t.body(), PCtx::Top, out);
      if (open) out += ')';
      return;
    }
    case PKind::Pi: {
      bool open = c != PCtx::Top;
      if (open) out += '(';
      if (t.body().has_free(t.name())) {
        out += "(" + t.name() + " : ";
        print_pts(t.domain(), PCtx::Top, out);
        out += ") -> ";
      } else {
        print_pts(t.domain(), PCtx::ArrowLeft, out);
        out += " -> ";
      }
      print_pts(t.body(), PCtx::Top, out);
      if (open) out += ')';
      return;
    }
  }
}

}  // namespace

PtsTerm parse_pts(std::string_view text, const ParseContext& ctx) {
  return PtsParser(text, ctx).whole();
}

std::string print(const PtsTerm& t) {
  std::string out;
  print_pts(t, PCtx::Top, out);
  return out;
}

PtsEnv parse_pts_env(std::string_view text, const ParseContext& ctx) {
  return PtsParser(text, ctx).env();
}

std::string print(const PtsEnv& env) {
  std::string out;
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (i) out += ", ";
    out += env[i].var + " : " + print(env[i].type);
  }
  return out;
}

// --- sequent calculus to natural deduction ---------------------------------

namespace {

std::string translation_local() {
  static std::atomic<std::uint64_t> counter{0};
  return "%y" + std::to_string(counter.fetch_add(1, std::memory_order_relaxed));
}

// <l>_z{z := h}: the list l applied to head h.
PtsTerm apply_list(PtsTerm h, const ListTerm& l) {
  switch (l.kind()) {
    case Kind::Nil:
      return h;
    case Kind::Cons:
      return apply_list(papp(std::move(h), encode(l.head())), l.tail());
    case Kind::Concat:
      return apply_list(apply_list(std::move(h), l.left()), l.right());
    case Kind::CutL: {
      std::string y = translation_local();
      PtsTerm inner = subst_pts(apply_list(pvar(y), l.body()), l.name(), encode(l.payload()));
      return subst_pts(inner, y, h);
    }
    case Kind::MetaList: {
      PtsTerm t = papp(preserved(l.name(), MetaKind::List, l.children().size()), std::move(h));
      for (const Expr& m : l.children()) t = papp(std::move(t), encode(m));
      return t;
    }
    default:
      throw std::invalid_argument("encode_list: not a list");
  }
}

}  // namespace

PtsTerm encode(const Term& m) {
  switch (m.kind()) {
    case Kind::Pi:
      return ppi(m.name(), encode(m.domain()), encode(m.body()));
    case Kind::Lam:
      return plam(m.name(), encode(m.domain()), encode(m.body()));
    case Kind::Sort:
      return psort(m.name());
    case Kind::VarApp:
      return apply_list(pvar(m.name()), m.args());
    case Kind::App:
      return apply_list(encode(m.head()), m.args());
    case Kind::Cut:
      return subst_pts(encode(m.body()), m.name(), encode(m.payload()));
    case Kind::Meta: {
      PtsTerm t = preserved(m.name(), MetaKind::Term, m.children().size());
      for (const Expr& a : m.children()) t = papp(std::move(t), encode(a));
      return t;
    }
    default:
      throw std::invalid_argument("encode: not a term");
  }
}

PtsTerm encode_list(const std::string& y, const ListTerm& l) { return apply_list(pvar(y), l); }

PtsEnv encode(const Environment& env) {
  PtsEnv out;
  for (const Decl& d : env.decls()) out.push_back({d.var, encode(d.type)});
  return out;
}

// --- natural deduction to sequent calculus ---------------------------------

namespace {

struct Spine {
  PtsTerm head;
  std::vector<PtsTerm> args;
};

Spine spine_of(const PtsTerm& t) {
  Spine s;
  const PtsTerm* cur = &t;
  while (cur->is(PKind::App)) {
    s.args.push_back(cur->arg());
    cur = &cur->fun();
  }
  std::reverse(s.args.begin(), s.args.end());
  s.head = *cur;
  return s;
}

// Number of arguments a reserved head takes; term: k, list: k + 1.
std::size_t saturation(const PtsTerm& r) {
  return r.reserved_arity() + (r.reserved_kind() == MetaKind::List ? 1 : 0);
}

void check_saturated(const Spine& s) {
  if (s.head.is(PKind::Reserved) && s.args.size() < saturation(s.head))
    throw FragmentError("reserved variable " + s.head.name() + " applied to " +
                        std::to_string(s.args.size()) + " arguments, needs " +
                        std::to_string(saturation(s.head)));
}

std::vector<Term> decode_all(const std::vector<PtsTerm>& ts, std::size_t from) {
  std::vector<Term> out;
  for (std::size_t i = from; i < ts.size(); ++i) out.push_back(decode(ts[i]));
  return out;
}

}  // namespace

bool needs_list(const PtsTerm& t, const ListTerm& l) {
  if (!l.is(Kind::Nil)) return true;
  if (t.is(PKind::Var)) return true;
  if (t.is(PKind::Reserved))
    return !(t.reserved_kind() == MetaKind::Term && t.reserved_arity() == 0);
  if (!t.is(PKind::App)) return false;
  Spine s = spine_of(t);
  return !(s.head.is(PKind::Reserved) && s.head.reserved_kind() == MetaKind::Term &&
           s.args.size() == s.head.reserved_arity());
}

Term decode(const PtsTerm& t) {
  switch (t.kind()) {
    case PKind::Sort:
      return sort(t.name());
    case PKind::Pi:
      return pi(t.name(), decode(t.domain()), decode(t.body()));
    case PKind::Lam:
      return lam(t.name(), decode(t.domain()), decode(t.body()));
    default:
      break;
  }
  Spine s = spine_of(t);
  check_saturated(s);
  if (s.head.is(PKind::Reserved) && s.args.size() == saturation(s.head)) {
    if (s.head.reserved_kind() == MetaKind::Term)
      return meta(s.head.name(), decode_all(s.args, 0));
    return decode_with(meta_list(s.head.name(), decode_all(s.args, 1)), s.args[0]);
  }
  return decode_with(nil(), t);
}

Term decode_with(const ListTerm& l, const PtsTerm& t) {
  Spine s = spine_of(t);
  check_saturated(s);
  if (s.head.is(PKind::Reserved) && s.args.size() == saturation(s.head)) {
    if (s.head.reserved_kind() == MetaKind::Term)
      return app(meta(s.head.name(), decode_all(s.args, 0)), l);
    return decode_with(concat(meta_list(s.head.name(), decode_all(s.args, 1)), l), s.args[0]);
  }
  if (t.is(PKind::App)) return decode_with(cons(decode(t.arg()), l), t.fun());
  if (t.is(PKind::Var)) return var_app(t.name(), l);
  return app(decode(t), l);
}

Environment decode(const PtsEnv& env) {
  std::vector<Decl> out;
  for (const PtsDecl& d : env) out.push_back({d.var, decode(d.type)});
  return Environment(std::move(out));
}

}  // namespace ptsc
