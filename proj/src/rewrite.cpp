#include "ptsc/rewrite.hpp"

#include <array>

namespace ptsc {

namespace {

constexpr std::array<std::string_view, kRuleCount> kRuleNames = {
    "B",  "B1", "B2", "B3", "A1",     "A2", "A3", "A4", "C1",   "C2",
    "C3", "C4", "C5", "C6", "Calpha", "D1", "D2", "D3", "Dbeta"};

}  // namespace

std::string_view rule_name(Rule r) noexcept { return kRuleNames[static_cast<std::size_t>(r)]; }

std::optional<Rule> rule_from_name(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kRuleCount; ++i)
    if (kRuleNames[i] == s) return static_cast<Rule>(i);
  return std::nullopt;
}

RuleSet all_rules() noexcept { return RuleSet().set(); }
RuleSet x_rules() noexcept { return all_rules().reset(static_cast<std::size_t>(Rule::B)); }
RuleSet rule_set(std::initializer_list<Rule> rs) noexcept {
  RuleSet s;
  for (Rule r : rs) s.set(static_cast<std::size_t>(r));
  return s;
}

std::string path_string(const Path& p) {
  if (p.empty()) return "root";
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(p[i]);
  }
  return out;
}

const Expr& subterm_at(const Expr& t, const Path& p) {
  const Expr* cur = &t;
  for (auto i : p) {
    if (i >= cur->children().size()) throw StaleRedex("position " + path_string(p) + " out of range");
    cur = &(*cur)[i];
  }
  return *cur;
}

Expr replace_at(const Expr& t, const Path& p, std::size_t depth, const Expr& with) {
  if (depth == p.size()) return with;
  auto i = p[depth];
  if (i >= t.children().size()) throw StaleRedex("position " + path_string(p) + " out of range");
  std::vector<Expr> kids(t.children().begin(), t.children().end());
  kids[i] = replace_at(kids[i], p, depth + 1, with);
  return make_node(t.kind(), t.name(), std::move(kids));
}

std::vector<Rule> rules_at(const Expr& e, RuleSet rules) {
  std::vector<Rule> out;
  auto add = [&](Rule r) {
    if (rules.test(static_cast<std::size_t>(r))) out.push_back(r);
  };
  switch (e.kind()) {
    case Kind::App: {
      const Expr& h = e.head();
      const Expr& l = e.args();
      if (h.is(Kind::Lam) && l.is(Kind::Cons)) add(Rule::B);
      if (l.is(Kind::Nil)) add(Rule::B1);
      if (h.is(Kind::VarApp)) add(Rule::B2);
      if (h.is(Kind::App)) add(Rule::B3);
      break;
    }
    case Kind::Concat: {
      const Expr& l = e.left();
      if (l.is(Kind::Cons)) add(Rule::A1);
      if (l.is(Kind::Nil)) add(Rule::A2);
      if (l.is(Kind::Concat)) add(Rule::A3);
      if (e.right().is(Kind::Nil)) add(Rule::A4);
      break;
    }
    case Kind::Cut:
      switch (e.body().kind()) {
        case Kind::Lam: add(Rule::C1); break;
        case Kind::VarApp: add(e.body().name() == e.name() ? Rule::C2 : Rule::C3); break;
        case Kind::App: add(Rule::C4); break;
        case Kind::Pi: add(Rule::C5); break;
        case Kind::Sort: add(Rule::C6); break;
        case Kind::Meta: add(Rule::Calpha); break;
        default: break;
      }
      break;
    case Kind::CutL:
      switch (e.body().kind()) {
        case Kind::Nil: add(Rule::D1); break;
        case Kind::Cons: add(Rule::D2); break;
        case Kind::Concat: add(Rule::D3); break;
        case Kind::MetaList: add(Rule::Dbeta); break;
        default: break;
      }
      break;
    default:
      break;
  }
  return out;
}

namespace {

void collect(const Expr& t, RuleSet rules, Path& here, std::vector<Redex>& out) {
  for (Rule r : rules_at(t, rules)) out.push_back({here, r});
  for (std::uint32_t i = 0; i < t.children().size(); ++i) {
    here.push_back(i);
    collect(t[i], rules, here, out);
    here.pop_back();
  }
}

bool first_redex(const Expr& t, RuleSet rules, Path& here, Redex& out) {
  auto rs = rules_at(t, rules);
  if (!rs.empty()) {
    out = {here, rs.front()};
    return true;
  }
  for (std::uint32_t i = 0; i < t.children().size(); ++i) {
    here.push_back(i);
    if (first_redex(t[i], rules, here, out)) return true;
    here.pop_back();
  }
  return false;
}

// Push the cut [y := p : g] under the binder of b (a Pi or Lam), renaming
// the binder when it would capture or shadow.
Expr push_under_binder(const Expr& g, const Expr& p, const std::string& y, const Expr& b) {
  std::string x = b.name();
  Expr body = b.body();
  if (x == y || p.has_free(x) || g.has_free(x)) {
    std::string z = fresh_name(x, [&](std::string_view c) {
      return c == y || p.has_free(c) || g.has_free(c) || body.has_free(c);
    });
    body = rename_free(body, x, z);
    x = z;
  }
  return make_node(b.kind(), x, {cut(g, p, y, b.domain()), cut(g, p, y, body)});
}

}  // namespace

std::vector<Redex> find_redexes(const Expr& t, RuleSet rules) {
  std::vector<Redex> out;
  Path here;
  collect(t, rules, here, out);
  return out;
}

Expr contract(const Expr& e, Rule r) {
  auto rs = rules_at(e, rule_set({r}));
  if (rs.empty())
    throw StaleRedex(std::string("rule ") + std::string(rule_name(r)) + " does not apply to " +
                     std::string(kind_name(e.kind())));
  switch (r) {
    case Rule::B: {
      const Expr& f = e.head();
      const Expr& l = e.args();
      return app(cut(f.domain(), l.head(), f.name(), f.body()), l.tail());
    }
    case Rule::B1:
      return e.head();
    case Rule::B2:
      return var_app(e.head().name(), concat(e.head().args(), e.args()));
    case Rule::B3:
      return app(e.head().head(), concat(e.head().args(), e.args()));
    case Rule::A1:
      return cons(e.left().head(), concat(e.left().tail(), e.right()));
    case Rule::A2:
      return e.right();
    case Rule::A3:
      return concat(e.left().left(), concat(e.left().right(), e.right()));
    case Rule::A4:
      return e.left();
    default:
      break;
  }
  const Expr& g = e.domain();
  const Expr& p = e.payload();
  const std::string& y = e.name();
  const Expr& b = e.body();
  auto under = [&](const Expr& m) { return cut(g, p, y, m); };
  auto under_list = [&](const Expr& l) { return cut_list(g, p, y, l); };
  switch (r) {
    case Rule::C1:
    case Rule::C5:
      return push_under_binder(g, p, y, b);
    case Rule::C2:
      return app(p, under_list(b.args()));
    case Rule::C3:
      return var_app(b.name(), under_list(b.args()));
    case Rule::C4:
      return app(under(b.head()), under_list(b.args()));
    case Rule::C6:
      return b;
    case Rule::Calpha:
    case Rule::Dbeta: {
      std::vector<Expr> args;
      for (const Expr& m : b.children()) args.push_back(under(m));
      return make_node(b.kind(), b.name(), std::move(args));
    }
    case Rule::D1:
      return b;
    case Rule::D2:
      return cons(under(b.head()), under_list(b.tail()));
    case Rule::D3:
      return concat(under_list(b.left()), under_list(b.right()));
    default:
      break;
  }
  throw DefectError("unhandled rule");
}

Expr step(const Expr& t, const Redex& r) {
  return replace_at(t, r.position, contract(subterm_at(t, r.position), r.rule));
}

// --- big-step x' normalisation --------------------------------------------
//
// nf works bottom-up: children are normalised first, then the node is
// rebuilt with helpers that assume normal arguments. A cut over normal
// payload p and normal body n is resolved by substituting p for y in n,
// which is exactly what exhaustive C/D propagation followed by the B1-B3 and
// A1-A4 clean-up produces.

namespace {

Expr concat_nf(const Expr& a, const Expr& b) {
  if (b.is(Kind::Nil)) return a;
  switch (a.kind()) {
    case Kind::Nil: return b;
    case Kind::Cons: return cons(a.head(), concat_nf(a.tail(), b));
    case Kind::Concat: return concat(a.left(), concat_nf(a.right(), b));
    default: return concat(a, b);
  }
}

Expr app_nf(const Expr& m, const Expr& k) {
  if (k.is(Kind::Nil)) return m;
  switch (m.kind()) {
    case Kind::VarApp: return var_app(m.name(), concat_nf(m.args(), k));
    case Kind::App: return app(m.head(), concat_nf(m.args(), k));
    default: return app(m, k);
  }
}

Expr sub(const Expr& n, const std::string& y, const Expr& p) {
  if (!n.has_free(y)) return n;
  switch (n.kind()) {
    case Kind::VarApp: {
      Expr l = sub(n.args(), y, p);
      if (n.name() == y) return app_nf(p, l);
      return rebuild(n, {l});
    }
    case Kind::App:
      return app_nf(sub(n.head(), y, p), sub(n.args(), y, p));
    case Kind::Concat:
      return concat_nf(sub(n.left(), y, p), sub(n.right(), y, p));
    case Kind::Pi:
    case Kind::Lam: {
      Expr a = sub(n.domain(), y, p);
      std::string x = n.name();
      Expr body = n.body();
      if (x == y) return rebuild(n, {a, body});
      if (p.has_free(x) && body.has_free(y)) {
        std::string z = fresh_name(x, [&](std::string_view c) {
          return c == y || p.has_free(c) || body.has_free(c);
        });
        body = rename_free(body, x, z);
        x = z;
      }
      return rebuild(n, std::move(x), {a, sub(body, y, p)});
    }
    case Kind::Cut:
    case Kind::CutL:
      throw DefectError("cut inside a term assumed x'-normal");
    default: {
      std::vector<Expr> kids;
      kids.reserve(n.children().size());
      for (const Expr& c : n.children()) kids.push_back(sub(c, y, p));
      return rebuild(n, std::move(kids));
    }
  }
}

Expr nf(const Expr& e) {
  switch (e.kind()) {
    case Kind::Sort:
    case Kind::Nil:
      return e;
    case Kind::App:
      return app_nf(nf(e.head()), nf(e.args()));
    case Kind::Concat:
      return concat_nf(nf(e.left()), nf(e.right()));
    case Kind::Cut:
    case Kind::CutL:
      return sub(nf(e.body()), e.name(), nf(e.payload()));
    default: {
      std::vector<Expr> kids;
      kids.reserve(e.children().size());
      for (const Expr& c : e.children()) kids.push_back(nf(c));
      return rebuild(e, std::move(kids));
    }
  }
}

bool first_b_redex(const Expr& t, Path& here) {
  if (t.is(Kind::App) && t.head().is(Kind::Lam) && t.args().is(Kind::Cons)) return true;
  for (std::uint32_t i = 0; i < t.children().size(); ++i) {
    here.push_back(i);
    if (first_b_redex(t[i], here)) return true;
    here.pop_back();
  }
  return false;
}

constexpr std::size_t kStepCap = std::size_t{1} << 22;

}  // namespace

Expr normalize_x(const Expr& t) { return nf(t); }

Expr normalize_x_traced(const Expr& t, std::vector<Redex>* trace) {
  Expr cur = t;
  for (std::size_t n = 0;; ++n) {
    if (n > kStepCap) throw DefectError("x' normalisation exceeded its step cap");
    Path here;
    Redex r;
    if (!first_redex(cur, x_rules(), here, r)) return cur;
    cur = step(cur, r);
    if (trace) trace->push_back(std::move(r));
  }
}

Normalized normalize_bx(const Expr& t, std::size_t fuel) {
  Normalized out{nf(t), false, 0};
  for (;;) {
    Path here;
    if (!first_b_redex(out.term, here)) return out;
    if (out.b_steps >= fuel) {
      out.exhausted = true;
      return out;
    }
    const Expr& r = subterm_at(out.term, here);
    out.term = nf(replace_at(out.term, here, contract(r, Rule::B)));
    ++out.b_steps;
  }
}

Normalized normalize_bx_traced(const Expr& t, std::size_t fuel, std::vector<Redex>* trace) {
  Normalized out{t, false, 0};
  for (std::size_t n = 0;; ++n) {
    if (n > kStepCap) throw DefectError("normalisation exceeded its step cap");
    Path here;
    Redex r;
    if (!first_redex(out.term, all_rules(), here, r)) return out;
    if (r.rule == Rule::B) {
      if (out.b_steps >= fuel) {
        out.exhausted = true;
        return out;
      }
      ++out.b_steps;
    }
    out.term = step(out.term, r);
    if (trace) trace->push_back(std::move(r));
  }
}

namespace {

bool head_path(const Expr& t, Path& here, Rule& rule) {
  auto at_root = [&](Rule r) {
    rule = r;
    return true;
  };
  auto inside = [&](std::uint32_t i) {
    here.push_back(i);
    if (head_path(t[i], here, rule)) return true;
    here.pop_back();
    return false;
  };
  switch (t.kind()) {
    case Kind::App: {
      const Expr& h = t.head();
      const Expr& l = t.args();
      if (l.is(Kind::Nil)) return at_root(Rule::B1);
      if (h.is(Kind::VarApp)) return at_root(Rule::B2);
      if (h.is(Kind::App)) return at_root(Rule::B3);
      if (h.is(Kind::Lam)) return l.is(Kind::Cons) ? at_root(Rule::B) : inside(1);
      if (h.is(Kind::Cut)) return inside(0);
      return false;
    }
    case Kind::Cut: {
      auto rs = rules_at(t, x_rules());
      if (!rs.empty()) return at_root(rs.front());
      return inside(2);
    }
    case Kind::Concat: {
      auto rs = rules_at(t, x_rules());
      if (!rs.empty()) return at_root(rs.front());
      return inside(0);
    }
    case Kind::CutL: {
      auto rs = rules_at(t, x_rules());
      if (!rs.empty()) return at_root(rs.front());
      return inside(2);
    }
    default:
      return false;
  }
}

}  // namespace

std::optional<Redex> head_redex(const Expr& t) {
  Path here;
  Rule r = Rule::B;
  if (!head_path(t, here, r)) return std::nullopt;
  return Redex{std::move(here), r};
}

Normalized head_normalize(const Expr& t, std::size_t fuel) {
  Normalized out{t, false, 0};
  for (std::size_t n = 0;; ++n) {
    if (n > kStepCap) throw DefectError("head normalisation exceeded its step cap");
    auto r = head_redex(out.term);
    if (!r) return out;
    if (r->rule == Rule::B) {
      if (out.b_steps >= fuel) {
        out.exhausted = true;
        return out;
      }
      ++out.b_steps;
    }
    out.term = step(out.term, *r);
  }
}

std::string_view conv_name(Conv c) noexcept {
  switch (c) {
    case Conv::Yes: return "yes";
    case Conv::No: return "no";
    case Conv::Undecided: return "undecided";
  }
  return "?";
}

Conv convertible(const Expr& a, const Expr& b, std::size_t fuel) {
  if (alpha_eq(a, b)) return Conv::Yes;
  Normalized na = normalize_bx(a, fuel);
  if (na.exhausted) return Conv::Undecided;
  Normalized nb = normalize_bx(b, fuel);
  if (nb.exhausted) return Conv::Undecided;
  return alpha_eq(na.term, nb.term) ? Conv::Yes : Conv::No;
}

}  // namespace ptsc
