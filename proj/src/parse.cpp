#include "ptsc/parse.hpp"

#include "lexer.hpp"

#include <cctype>
#include <vector>

namespace ptsc {

namespace {

using detail::Tok;
using detail::Token;
using detail::lex;

class Parser {
 public:
  Parser(std::string_view text, const ParseContext& ctx) : toks_(lex(text)), ctx_(ctx) {}

  Term whole_term() {
    Term t = term();
    expect_end();
    return t;
  }
  ListTerm whole_list() {
    ListTerm l = list();
    expect_end();
    return l;
  }
  Environment whole_env() {
    std::vector<Decl> decls;
    if (!at_end()) {
      for (;;) {
        std::string x = variable();
        expect(":");
        decls.push_back({x, term()});
        if (!accept(",")) break;
      }
    }
    expect_end();
    return Environment(std::move(decls));
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at_end() const { return peek().kind == Tok::End; }
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
    throw ParseError(msg + (t.kind == Tok::End ? " at end of input"
                                               : " near '" + t.text + "'"),
                     t.line, t.col);
  }
  void expect(std::string_view s) {
    if (!accept(s)) fail("expected '" + std::string(s) + "'");
  }
  void expect_end() {
    if (!at_end()) fail("unexpected trailing input");
  }

  bool is_sort_token(std::size_t k = 0) const {
    const Token& t = peek(k);
    if (t.kind == Tok::End) return false;
    if (ctx_.spec) return ctx_.spec->is_sort(t.text);
    return t.kind == Tok::Sym && (t.text == "*" || t.text == "#");
  }
  bool is_var_token(std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text != "nil" && !is_sort_token(k);
  }
  std::string variable() {
    if (!is_var_token()) fail("expected a variable");
    return toks_[pos_++].text;
  }

  Term term() {
    // (x : A) -> B
    if (is_sym("(") && is_var_token(1) && is_sym(":", 2)) {
      ++pos_;
      std::string x = variable();
      expect(":");
      Term a = term();
      expect(")");
      expect("->");
      Term b = term();
      return pi(std::move(x), std::move(a), std::move(b));
    }
    Term lhs = prefix();
    if (accept("->")) {
      Term rhs = term();
      std::string x = fresh_name("x", [&](std::string_view c) { return rhs.has_free(c); });
      return pi(std::move(x), std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Term prefix() {
    if (accept("\\")) {
      std::string x = variable();
      expect(":");
      Term a = term();
      expect(".");
      Term m = term();
      return lam(std::move(x), std::move(a), std::move(m));
    }
    if (accept("[")) {
      auto [x, p, a] = cut_header();
      Term body = term();
      return cut(std::move(a), std::move(p), std::move(x), std::move(body));
    }
    return postfix();
  }

  std::tuple<std::string, Term, Term> cut_header() {
    std::string x = variable();
    expect(":=");
    Term p = term();
    expect(":");
    Term a = term();
    expect("]");
    return {std::move(x), std::move(p), std::move(a)};
  }

  Term postfix() {
    Term t;
    bool bare_var = false;
    if (is_sort_token()) {
      t = sort(toks_[pos_++].text);
    } else if (is_var_token()) {
      t = var(toks_[pos_++].text);
      bare_var = true;
    } else if (accept("?")) {
      t = meta_node(MetaKind::Term);
    } else if (accept("(")) {
      t = term();
      expect(")");
    } else {
      fail("expected a term");
    }
    while (accept("{")) {
      ListTerm l = list();
      expect("}");
      if (bare_var) {
        t = var_app(t.name(), std::move(l));
        bare_var = false;
      } else {
        t = app(std::move(t), std::move(l));
      }
    }
    return t;
  }

  Expr meta_node(MetaKind kind) {
    if (peek().kind != Tok::Ident) fail("expected a meta-variable name");
    const Token& id_tok = toks_[pos_++];
    std::string id = id_tok.text;
    expect("(");
    std::vector<Term> args;
    if (!accept(")")) {
      for (;;) {
        args.push_back(term());
        if (accept(")")) break;
        expect(",");
      }
    }
    if (!ctx_.registry)
      throw ParseError("meta-variable ?" + id + " not allowed here", id_tok.line, id_tok.col);
    auto info = ctx_.registry->find(id);
    if (!info) {
      if (!ctx_.declare_metas)
        throw ParseError("unknown meta-identifier " + id, id_tok.line, id_tok.col);
      ctx_.registry->declare(id, kind, args.size());
      info = ctx_.registry->find(id);
    }
    if (info->kind != kind)
      throw ParseError("meta-variable " + id + " belongs to the other category", id_tok.line,
                       id_tok.col);
    if (info->arity != args.size())
      throw ParseError("meta-variable " + id + " expects " + std::to_string(info->arity) +
                           " arguments, got " + std::to_string(args.size()),
                       id_tok.line, id_tok.col);
    return ctx_.registry->make(id, std::move(args));
  }

  ListTerm list() {
    ListTerm l = list_item();
    if (accept("++")) return concat(std::move(l), list());
    return l;
  }

  ListTerm list_item() {
    if (peek().kind == Tok::Ident && peek().text == "nil") {
      ++pos_;
      return nil();
    }
    if (accept("??")) return meta_node(MetaKind::List);
    if (accept("[")) {
      auto [x, p, a] = cut_header();
      ListTerm body = list_item();
      return cut_list(std::move(a), std::move(p), std::move(x), std::move(body));
    }
    if (is_sym("(")) {
      std::size_t save = pos_;
      try {
        return cons_cell();
      } catch (const ParseError& first) {
        pos_ = save;
        try {
          expect("(");
          ListTerm l = list();
          expect(")");
          return l;
        } catch (const ParseError& second) {
          throw later_of(first, second);
        }
      }
    }
    return cons_cell();
  }

  ListTerm cons_cell() {
    Term m = term();
    expect("::");
    ListTerm tail = list_item();
    return cons(std::move(m), std::move(tail));
  }

  static const ParseError& later_of(const ParseError& a, const ParseError& b) {
    if (a.line() != b.line()) return a.line() > b.line() ? a : b;
    return a.column() >= b.column() ? a : b;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ParseContext& ctx_;
};

// --- printing -------------------------------------------------------------

enum class Ctx { Top, ArrowLeft, Atom };
enum class LCtx { Top, Nested };

struct Printer {
  PrintOptions opts;
  std::string out;

  void term(const Expr& e, Ctx c) {
    switch (e.kind()) {
      case Kind::Sort:
        out += e.name();
        return;
      case Kind::VarApp:
        out += e.name();
        if (!e.args().is(Kind::Nil)) braces(e.args());
        return;
      case Kind::App:
        app_head(e.head());
        braces(e.args());
        return;
      case Kind::Meta:
        meta_call("?", e);
        return;
      case Kind::Pi: {
        bool open = c != Ctx::Top;
        if (open) out += '(';
        if (e.body().has_free(e.name())) {
          out += "(" + e.name() + " : ";
          term(e.domain(), Ctx::Top);
          out += ") -> ";
        } else {
          term(e.domain(), Ctx::ArrowLeft);
          out += " -> ";
        }
        term(e.body(), Ctx::Top);
        if (open) out += ')';
        return;
      }
      case Kind::Lam: {
        bool open = c != Ctx::Top;
        if (open) out += '(';
        out += '\\';
        if (opts.compact) {
          Expr cur = e;
          out += cur.name();
          while (cur.body().is(Kind::Lam)) {
            cur = cur.body();
            out += ' ' + cur.name();
          }
          out += ". ";
          term(cur.body(), Ctx::Top);
        } else {
          out += e.name() + ":";
          term(e.domain(), Ctx::Top);
          out += ". ";
          term(e.body(), Ctx::Top);
        }
        if (open) out += ')';
        return;
      }
      case Kind::Cut: {
        bool open = c != Ctx::Top;
        if (open) out += '(';
        cut_header(e);
        term(e.body(), Ctx::Top);
        if (open) out += ')';
        return;
      }
      default:
        list(e, LCtx::Top);
    }
  }

  void app_head(const Expr& h) {
    switch (h.kind()) {
      case Kind::VarApp:
        if (h.args().is(Kind::Nil)) {
          out += "(" + h.name() + ")";
          return;
        }
        term(h, Ctx::Atom);
        return;
      case Kind::App:
      case Kind::Sort:
      case Kind::Meta:
        term(h, Ctx::Atom);
        return;
      default:
        out += '(';
        term(h, Ctx::Top);
        out += ')';
    }
  }

  void cut_header(const Expr& e) {
    out += "[" + e.name() + " := ";
    term(e.payload(), Ctx::Top);
    if (!opts.compact) {
      out += " : ";
      term(e.domain(), Ctx::Top);
    }
    out += "] ";
  }

  void braces(const Expr& l) {
    out += '{';
    list(l, LCtx::Top);
    out += '}';
  }

  void meta_call(const char* sigil, const Expr& e) {
    out += sigil + e.name() + "(";
    bool first = true;
    for (const Expr& a : e.children()) {
      if (!first) out += ", ";
      first = false;
      term(a, Ctx::Top);
    }
    out += ')';
  }

  void list(const Expr& l, LCtx c) {
    switch (l.kind()) {
      case Kind::Nil:
        out += "nil";
        return;
      case Kind::MetaList:
        meta_call("??", l);
        return;
      case Kind::Cons: {
        const Expr& h = l.head();
        bool wrap = h.is(Kind::Lam) || h.is(Kind::Cut);
        if (wrap) out += '(';
        term(h, Ctx::Top);
        if (wrap) out += ')';
        out += " :: ";
        list(l.tail(), LCtx::Nested);
        return;
      }
      case Kind::Concat: {
        bool open = c == LCtx::Nested;
        if (open) out += '(';
        bool left_open = l.left().is(Kind::Concat);
        if (left_open) out += '(';
        list(l.left(), LCtx::Top);
        if (left_open) out += ')';
        out += " ++ ";
        list(l.right(), LCtx::Top);
        if (open) out += ')';
        return;
      }
      case Kind::CutL:
        cut_header(l);
        list(l.body(), LCtx::Nested);
        return;
      default:
        term(l, Ctx::Top);
    }
  }
};

}  // namespace

Term parse_term(std::string_view text, const ParseContext& ctx) {
  return Parser(text, ctx).whole_term();
}

ListTerm parse_list(std::string_view text, const ParseContext& ctx) {
  return Parser(text, ctx).whole_list();
}

Expr parse(std::string_view text, const ParseContext& ctx) {
  try {
    return parse_term(text, ctx);
  } catch (const ParseError& as_term) {
    try {
      return parse_list(text, ctx);
    } catch (const ParseError&) {
      throw as_term;
    }
  }
}

Environment parse_env(std::string_view text, const ParseContext& ctx) {
  return Parser(text, ctx).whole_env();
}

std::string print(const Expr& e, PrintOptions opts) {
  Printer p{opts, {}};
  if (e.is_term())
    p.term(e, Ctx::Top);
  else
    p.list(e, LCtx::Top);
  return p.out;
}

std::string print(const Environment& env, PrintOptions opts) {
  std::string out;
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (i) out += ", ";
    out += env[i].var + " : " + print(env[i].type, opts);
  }
  return out;
}

}  // namespace ptsc
