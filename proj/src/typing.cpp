#include "ptsc/typing.hpp"

#include <unordered_set>

#include "ptsc/parse.hpp"

namespace ptsc {

// --- judgments and derivations ----------------------------------------------

Judgment Judgment::wf(Environment env) {
  Judgment j;
  j.kind = JKind::EnvWf;
  j.env = std::move(env);
  return j;
}

Judgment Judgment::term(Environment env, Term m, Term a) {
  Judgment j;
  j.kind = JKind::TermTy;
  j.env = std::move(env);
  j.subject = std::move(m);
  j.type = std::move(a);
  return j;
}

Judgment Judgment::list(Environment env, Term stoup, ListTerm l, Term c) {
  Judgment j;
  j.kind = JKind::ListTy;
  j.env = std::move(env);
  j.stoup = std::move(stoup);
  j.subject = std::move(l);
  j.type = std::move(c);
  return j;
}

std::string to_string(const Judgment& j) {
  std::string env = print(j.env);
  switch (j.kind) {
    case JKind::EnvWf:
      return env + " wf";
    case JKind::TermTy:
      return env + " |- " + print(j.subject) + " : " + print(j.type);
    case JKind::ListTy:
      return env + " ; " + print(j.stoup) + " |- " + print(j.subject) + " : " + print(j.type);
  }
  return {};
}

std::string_view trule_name(TRule r) noexcept {
  switch (r) {
    case TRule::Empty: return "empty";
    case TRule::Extend: return "extend";
    case TRule::Sorted: return "sorted";
    case TRule::PiWf: return "Pi-wf";
    case TRule::PiR: return "Pi-R";
    case TRule::Contr: return "Contr";
    case TRule::Axiom: return "axiom";
    case TRule::ConvR: return "convR";
    case TRule::ConvRList: return "convR'";
    case TRule::ConvL: return "convL";
    case TRule::PiL: return "Pi-L";
    case TRule::Cut1: return "Cut1";
    case TRule::Cut2: return "Cut2";
    case TRule::Cut3: return "Cut3";
    case TRule::Cut4: return "Cut4";
  }
  return "?";
}

std::size_t Derivation::size() const {
  std::size_t n = 1;
  for (const auto& p : premises) n += p->size();
  return n;
}

DerivationPtr make_derivation(TRule rule, Judgment conclusion, std::vector<DerivationPtr> premises) {
  return std::make_shared<const Derivation>(
      Derivation{rule, std::move(conclusion), std::move(premises)});
}

std::string_view verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::Accept: return "accept";
    case Verdict::Reject: return "reject";
    case Verdict::Undecided: return "undecided";
  }
  return "?";
}

Conv env_included(const Environment& gamma, const Environment& delta, std::size_t fuel) {
  bool undecided = false;
  for (const Decl& d : gamma.decls()) {
    const Term* b = delta.lookup(d.var);
    if (!b) return Conv::No;
    Conv c = convertible(d.type, *b, fuel);
    if (c == Conv::No) return Conv::No;
    undecided = undecided || c == Conv::Undecided;
  }
  return undecided ? Conv::Undecided : Conv::Yes;
}

// --- validation ---------------------------------------------------------------

namespace {

struct Invalid {
  std::string msg;
};

class Validator {
 public:
  Validator(const PtsSpec& spec, std::size_t fuel) : spec_(spec), fuel_(fuel) {}

  void run(const Derivation& d, const std::string& path) {
    if (done_.count(&d)) return;
    node(d, path);
    for (std::size_t i = 0; i < d.premises.size(); ++i) {
      if (!d.premises[i]) fail(path, "missing premise " + std::to_string(i));
      run(*d.premises[i], path + "." + std::to_string(i));
    }
    done_.insert(&d);
  }

 private:
  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw Invalid{path + ": " + msg};
  }

  void node(const Derivation& d, const std::string& path) {
    const Judgment& c = d.conclusion;
    auto want = [&](bool cond, const std::string& msg) {
      if (!cond) fail(path + " (" + std::string(trule_name(d.rule)) + ")", msg);
    };
    auto arity = [&](std::size_t n) {
      want(d.premises.size() == n, "expects " + std::to_string(n) + " premises");
      for (const auto& p : d.premises) want(p != nullptr, "null premise");
    };
    auto prem = [&](std::size_t i) -> const Judgment& { return d.premises[i]->conclusion; };
    auto is_kind = [](const Judgment& j, JKind k) { return j.kind == k; };
    auto same_env = [](const Judgment& j, const Environment& e) { return alpha_eq(j.env, e); };
    auto sorted_by = [&](const Judgment& j, const Environment& e, const Term& a) {
      return is_kind(j, JKind::TermTy) && same_env(j, e) && alpha_eq(j.subject, a) &&
             j.type.is(Kind::Sort) && spec_.is_sort(j.type.name());
    };
    auto conv_yes = [&](const Term& a, const Term& b) {
      Conv r = convertible(a, b, fuel_);
      want(r != Conv::Undecided, "conversion undecided within fuel");
      return r == Conv::Yes;
    };
    auto term_shape = [&](Kind k) {
      want(is_kind(c, JKind::TermTy) && c.subject && c.subject.is(k) && c.type,
           "conclusion has the wrong shape");
    };
    auto list_shape = [&](Kind k) {
      want(is_kind(c, JKind::ListTy) && c.subject && c.subject.is(k) && c.type && c.stoup,
           "conclusion has the wrong shape");
    };

    switch (d.rule) {
      case TRule::Empty:
        arity(0);
        want(is_kind(c, JKind::EnvWf) && c.env.empty(), "conclusion must be the empty environment");
        return;
      case TRule::Extend: {
        arity(1);
        want(is_kind(c, JKind::EnvWf) && !c.env.empty(), "conclusion must extend an environment");
        Environment g = c.env.prefix(c.env.size() - 1);
        const Decl& last = c.env[c.env.size() - 1];
        want(!g.binds(last.var), last.var + " already in the domain");
        want(sorted_by(prem(0), g, last.type), "premise must type " + print(last.type) + " by a sort");
        return;
      }
      case TRule::Sorted:
        arity(1);
        term_shape(Kind::Sort);
        want(c.type.is(Kind::Sort), "type must be a sort");
        want(spec_.has_axiom(c.subject.name(), c.type.name()),
             "(" + c.subject.name() + ", " + c.type.name() + ") is not an axiom");
        want(is_kind(prem(0), JKind::EnvWf) && same_env(prem(0), c.env), "premise must be env wf");
        return;
      case TRule::PiWf: {
        arity(2);
        term_shape(Kind::Pi);
        want(c.type.is(Kind::Sort), "type must be a sort");
        const Term& pi_t = c.subject;
        Environment ext = c.env.extended(pi_t.name(), pi_t.domain());
        want(sorted_by(prem(0), c.env, pi_t.domain()), "first premise must sort the domain");
        want(sorted_by(prem(1), ext, pi_t.body()), "second premise must sort the body");
        want(spec_.has_rule(prem(0).type.name(), prem(1).type.name(), c.type.name()),
             "(" + prem(0).type.name() + ", " + prem(1).type.name() + ", " + c.type.name() +
                 ") is not a rule");
        return;
      }
      case TRule::PiR: {
        arity(2);
        term_shape(Kind::Lam);
        const Term& lm = c.subject;
        Environment ext = c.env.extended(lm.name(), lm.domain());
        const Judgment& body = prem(1);
        want(is_kind(body, JKind::TermTy) && same_env(body, ext) && alpha_eq(body.subject, lm.body()),
             "second premise must type the body under the extended environment");
        Term expected = pi(lm.name(), lm.domain(), body.type);
        want(alpha_eq(c.type, expected), "type must be " + print(expected));
        want(sorted_by(prem(0), c.env, expected), "first premise must sort the product");
        return;
      }
      case TRule::Contr: {
        arity(1);
        term_shape(Kind::VarApp);
        const Term* a = c.env.lookup(c.subject.name());
        want(a != nullptr, c.subject.name() + " is not declared");
        const Judgment& l = prem(0);
        want(is_kind(l, JKind::ListTy) && same_env(l, c.env) && alpha_eq(l.stoup, *a) &&
                 alpha_eq(l.subject, c.subject.args()) && alpha_eq(l.type, c.type),
             "premise must type the arguments with the declared type in the stoup");
        return;
      }
      case TRule::Axiom:
        arity(1);
        list_shape(Kind::Nil);
        want(alpha_eq(c.stoup, c.type), "stoup and type must coincide");
        want(sorted_by(prem(0), c.env, c.stoup), "premise must sort the stoup");
        return;
      case TRule::ConvR:
      case TRule::ConvRList:
      case TRule::ConvL: {
        arity(2);
        JKind k = d.rule == TRule::ConvR ? JKind::TermTy : JKind::ListTy;
        want(is_kind(c, k) && c.subject && c.type, "conclusion has the wrong shape");
        const Judgment& j = prem(0);
        want(is_kind(j, k) && same_env(j, c.env) && alpha_eq(j.subject, c.subject),
             "first premise must be about the same subject");
        Term from, to;
        if (d.rule == TRule::ConvL) {
          want(alpha_eq(j.type, c.type), "types must coincide");
          from = j.stoup;
          to = c.stoup;
        } else {
          if (k == JKind::ListTy) want(alpha_eq(j.stoup, c.stoup), "stoups must coincide");
          from = j.type;
          to = c.type;
        }
        want(sorted_by(prem(1), c.env, to), "second premise must sort " + print(to));
        want(conv_yes(from, to), print(from) + " and " + print(to) + " are not convertible");
        return;
      }
      case TRule::PiL: {
        arity(3);
        list_shape(Kind::Cons);
        want(c.stoup.is(Kind::Pi), "stoup must be a product");
        const Term& d_t = c.stoup;
        want(sorted_by(prem(0), c.env, d_t), "first premise must sort the stoup");
        const Judgment& m = prem(1);
        want(is_kind(m, JKind::TermTy) && same_env(m, c.env) &&
                 alpha_eq(m.subject, c.subject.head()) && alpha_eq(m.type, d_t.domain()),
             "second premise must type the head with the domain");
        const Judgment& l = prem(2);
        Term next = cut(d_t.domain(), c.subject.head(), d_t.name(), d_t.body());
        want(is_kind(l, JKind::ListTy) && same_env(l, c.env) && alpha_eq(l.stoup, next) &&
                 alpha_eq(l.subject, c.subject.tail()) && alpha_eq(l.type, c.type),
             "third premise must type the tail with stoup " + print(next));
        return;
      }
      case TRule::Cut1: {
        arity(2);
        list_shape(Kind::Concat);
        const Judgment& a = prem(0);
        const Judgment& b = prem(1);
        want(is_kind(a, JKind::ListTy) && same_env(a, c.env) && alpha_eq(a.stoup, c.stoup) &&
                 alpha_eq(a.subject, c.subject.left()),
             "first premise must type the left list");
        want(is_kind(b, JKind::ListTy) && same_env(b, c.env) && alpha_eq(b.stoup, a.type) &&
                 alpha_eq(b.subject, c.subject.right()) && alpha_eq(b.type, c.type),
             "second premise must continue from the first");
        return;
      }
      case TRule::Cut3: {
        arity(2);
        term_shape(Kind::App);
        const Judgment& m = prem(0);
        const Judgment& l = prem(1);
        want(is_kind(m, JKind::TermTy) && same_env(m, c.env) && alpha_eq(m.subject, c.subject.head()),
             "first premise must type the head");
        want(is_kind(l, JKind::ListTy) && same_env(l, c.env) && alpha_eq(l.stoup, m.type) &&
                 alpha_eq(l.subject, c.subject.args()) && alpha_eq(l.type, c.type),
             "second premise must type the arguments");
        return;
      }
      case TRule::Cut2:
      case TRule::Cut4: {
        arity(3);
        bool list = d.rule == TRule::Cut2;
        if (list)
          list_shape(Kind::CutL);
        else
          term_shape(Kind::Cut);
        const Term& a = c.subject.domain();
        const Term& p = c.subject.payload();
        const std::string& x = c.subject.name();
        const Judgment& pj = prem(0);
        want(is_kind(pj, JKind::TermTy) && alpha_eq(pj.subject, p) && alpha_eq(pj.type, a),
             "first premise must type the payload with the annotation");
        const Environment& g = pj.env;
        const Judgment& bj = prem(1);
        want(bj.kind == (list ? JKind::ListTy : JKind::TermTy) && alpha_eq(bj.subject, c.subject.body()),
             "second premise must be about the body");
        want(bj.env.size() > g.size() && alpha_eq(bj.env.prefix(g.size()), g) &&
                 bj.env[g.size()].var == x && alpha_eq(bj.env[g.size()].type, a),
             "second premise environment must be " + print(g.extended(x, a)) + ", ...");
        const Judgment& dw = prem(2);
        want(is_kind(dw, JKind::EnvWf) && same_env(dw, c.env), "third premise must be the conclusion env wf");
        std::vector<Decl> img = g.decls();
        for (std::size_t i = g.size() + 1; i < bj.env.size(); ++i)
          img.push_back({bj.env[i].var, cut(a, p, x, bj.env[i].type)});
        Conv inc = env_included(Environment(std::move(img)), c.env, fuel_);
        want(inc != Conv::Undecided, "inclusion undecided within fuel");
        want(inc == Conv::Yes, "substituted environment not included in the conclusion environment");
        if (list) {
          want(alpha_eq(c.stoup, cut(a, p, x, bj.stoup)), "stoup must be the substituted stoup");
          want(alpha_eq(c.type, cut(a, p, x, bj.type)), "type must be the substituted type");
        } else if (bj.type.is(Kind::Sort) && spec_.is_sort(bj.type.name())) {
          want(alpha_eq(c.type, bj.type), "body typed by a sort: type must be that sort");
        } else {
          want(alpha_eq(c.type, cut(a, p, x, bj.type)), "type must be the substituted type");
        }
        return;
      }
    }
    fail(path, "unknown rule");
  }

  const PtsSpec& spec_;
  std::size_t fuel_;
  std::unordered_set<const Derivation*> done_;
};

}  // namespace

Validation validate_derivation(const PtsSpec& spec, const Derivation& d, std::size_t fuel) {
  try {
    Validator(spec, fuel).run(d, "root");
    return {};
  } catch (const Invalid& e) {
    return {false, e.msg};
  }
}

// --- algorithmic checker ------------------------------------------------------

namespace {

struct Rejected {
  std::string msg;
};
struct Undecided {
  std::string msg;
};

// An environment with the well-formedness derivation of each prefix.
struct Ctx {
  Environment env;
  std::vector<DerivationPtr> wfs;
  const DerivationPtr& wf() const { return wfs.back(); }
  Ctx prefix(std::size_t k) const {
    return {env.prefix(k), std::vector<DerivationPtr>(wfs.begin(), wfs.begin() + k + 1)};
  }
};

struct Typed {
  Term type;
  DerivationPtr d;
};

struct Sorted {
  std::string sort;
  DerivationPtr d;
};

class Checker {
 public:
  Checker(const PtsSpec& spec, std::size_t fuel) : spec_(spec), fuel_(fuel) {}

  Ctx root(const Environment& env) {
    Ctx ctx{Environment(), {make_derivation(TRule::Empty, Judgment::wf({}), {})}};
    for (const Decl& d : env.decls()) {
      if (!d.type.is_ground()) reject("environment is not ground");
      if (ctx.env.binds(d.var)) reject(d.var + " is declared twice");
      Sorted s = infer_sort(ctx, d.type);
      ctx = extend(ctx, d.var, d.type, s.d);
    }
    return ctx;
  }

  Typed infer(const Ctx& ctx, const Term& m) {
    switch (m.kind()) {
      case Kind::Sort: {
        auto tops = spec_.sorts_of(m.name());
        if (!spec_.is_sort(m.name())) reject(m.name() + " is not a sort");
        if (tops.empty()) reject("sort " + m.name() + " has no type");
        return sorted(ctx, m.name(), tops.front());
      }
      case Kind::Pi: {
        Term t = freshen(ctx, m);
        Sorted a = infer_sort(ctx, t.domain());
        Ctx inner = extend(ctx, t.name(), t.domain(), a.d);
        Sorted b = infer_sort(inner, t.body());
        return pi_wf(ctx, t, a, b);
      }
      case Kind::Lam: {
        Term t = freshen(ctx, m);
        Sorted a = infer_sort(ctx, t.domain());
        Ctx inner = extend(ctx, t.name(), t.domain(), a.d);
        Typed body = infer(inner, t.body());
        Sorted b = infer_sort(inner, body.type);
        Term prod = pi(t.name(), t.domain(), body.type);
        Typed pw = pi_wf(ctx, prod, a, b);
        return {prod, make_derivation(TRule::PiR, Judgment::term(ctx.env, t, prod), {pw.d, body.d})};
      }
      case Kind::VarApp: {
        const Term* a = ctx.env.lookup(m.name());
        if (!a) reject(m.name() + " is not declared");
        Typed l = infer_list(ctx, *a, m.args());
        return {l.type, make_derivation(TRule::Contr, Judgment::term(ctx.env, m, l.type), {l.d})};
      }
      case Kind::App: {
        Typed h = infer(ctx, m.head());
        Typed l = infer_list(ctx, h.type, m.args());
        return {l.type, make_derivation(TRule::Cut3, Judgment::term(ctx.env, m, l.type), {h.d, l.d})};
      }
      case Kind::Cut: {
        Term t = freshen(ctx, m);
        return under_cut(ctx, t, [&](const Ctx& inner, const DerivationPtr& p) -> Typed {
          Typed body = infer(inner, t.body());
          Term c = is_sort(body.type) ? body.type : cut(t.domain(), t.payload(), t.name(), body.type);
          return {c, make_derivation(TRule::Cut4, Judgment::term(ctx.env, t, c), {p, body.d, ctx.wf()})};
        });
      }
      default:
        reject("meta-variable " + m.name() + " in a judgment that must be ground");
    }
  }

  Typed infer_list(const Ctx& ctx, const Term& b, const ListTerm& l) {
    switch (l.kind()) {
      case Kind::Nil: {
        Sorted s = infer_sort(ctx, b);
        return {b, make_derivation(TRule::Axiom, Judgment::list(ctx.env, b, l, b), {s.d})};
      }
      case Kind::Cons: {
        Term prod = expose_pi(b);
        Sorted ps = infer_sort(ctx, prod);
        DerivationPtr m = check(ctx, l.head(), prod.domain());
        Term next = cut(prod.domain(), l.head(), prod.name(), prod.body());
        Typed rest = infer_list(ctx, next, l.tail());
        DerivationPtr d = make_derivation(TRule::PiL, Judgment::list(ctx.env, prod, l, rest.type),
                                          {ps.d, m, rest.d});
        return {rest.type, conv_stoup(ctx, d, b)};
      }
      case Kind::Concat: {
        Typed left = infer_list(ctx, b, l.left());
        Typed right = infer_list(ctx, left.type, l.right());
        return {right.type, make_derivation(TRule::Cut1, Judgment::list(ctx.env, b, l, right.type),
                                            {left.d, right.d})};
      }
      case Kind::CutL: {
        Term t = freshen(ctx, l);
        return under_cut(ctx, t, [&](const Ctx& inner, const DerivationPtr& p) -> Typed {
          std::string last;
          for (const Term& b0 : stoup_candidates(b, t)) {
            try {
              Typed body = infer_list(inner, b0, t.body());
              Term stoup = cut(t.domain(), t.payload(), t.name(), b0);
              Term c = cut(t.domain(), t.payload(), t.name(), body.type);
              DerivationPtr d = make_derivation(
                  TRule::Cut2, Judgment::list(ctx.env, stoup, t, c), {p, body.d, ctx.wf()});
              return {c, conv_stoup(ctx, d, b)};
            } catch (const Rejected& r) {
              last = r.msg;
            }
          }
          reject(last);
        });
      }
      default:
        reject("meta-variable " + l.name() + " in a judgment that must be ground");
    }
  }

  DerivationPtr check(const Ctx& ctx, const Term& m, const Term& c) {
    if (m.is(Kind::Sort)) {
      if (!spec_.is_sort(m.name())) reject(m.name() + " is not a sort");
      Term cn = normal(c);
      if (!cn.is(Kind::Sort) || !spec_.has_axiom(m.name(), cn.name()))
        reject(m.name() + " does not have type " + print(c));
      Typed s = sorted(ctx, m.name(), cn.name());
      return alpha_eq(c, s.type) ? s.d : conv_r(ctx, s, c);
    }
    Typed t = infer(ctx, m);
    if (alpha_eq(t.type, c)) return t.d;
    if (conv(t.type, c) != Conv::Yes)
      reject(print(m) + " has type " + print(t.type) + ", not " + print(c));
    return conv_r(ctx, t, c);
  }

  DerivationPtr check_list(const Ctx& ctx, const Term& b, const ListTerm& l, const Term& c) {
    Typed t = infer_list(ctx, b, l);
    if (alpha_eq(t.type, c)) return t.d;
    if (conv(t.type, c) != Conv::Yes)
      reject("list " + print(l) + " yields " + print(t.type) + ", not " + print(c));
    Sorted s = infer_sort(ctx, c);
    return make_derivation(TRule::ConvRList, Judgment::list(ctx.env, b, l, c), {t.d, s.d});
  }

  Sorted infer_sort(const Ctx& ctx, const Term& a) {
    Typed t = infer(ctx, a);
    if (is_sort(t.type)) return {t.type.name(), t.d};
    Term n = normal(t.type);
    if (!is_sort(n)) reject(print(a) + " is not a type: its type " + print(t.type) + " is not a sort");
    return {n.name(), conv_r(ctx, t, n)};
  }

 private:
  [[noreturn]] static void reject(const std::string& msg) { throw Rejected{msg}; }

  bool is_sort(const Term& t) const { return t.is(Kind::Sort) && spec_.is_sort(t.name()); }

  Conv conv(const Term& a, const Term& b) {
    Conv c = convertible(a, b, fuel_);
    if (c == Conv::Undecided)
      throw Undecided{"convertibility of " + print(a) + " and " + print(b) + " undecided"};
    return c;
  }

  Term normal(const Term& t) {
    Normalized n = normalize_bx(t, fuel_);
    if (n.exhausted) throw Undecided{"normalisation of " + print(t) + " ran out of fuel"};
    return n.term;
  }

  Term expose_pi(const Term& b) {
    Normalized n = head_normalize(b, fuel_);
    if (n.exhausted) throw Undecided{"head normalisation of " + print(b) + " ran out of fuel"};
    if (!n.term.is(Kind::Pi)) reject("stoup " + print(b) + " is not a product");
    return n.term;
  }

  Ctx extend(const Ctx& ctx, const std::string& x, const Term& a, const DerivationPtr& da) {
    Ctx out{ctx.env.extended(x, a), ctx.wfs};
    out.wfs.push_back(make_derivation(TRule::Extend, Judgment::wf(out.env), {da}));
    return out;
  }

  Typed sorted(const Ctx& ctx, const std::string& s, const std::string& top) {
    Term ts = sort(top);
    return {ts, make_derivation(TRule::Sorted, Judgment::term(ctx.env, sort(s), ts), {ctx.wf()})};
  }

  Typed pi_wf(const Ctx& ctx, const Term& prod, const Sorted& a, const Sorted& b) {
    for (const auto& r : spec_.rules) {
      if (r[0] == a.sort && r[1] == b.sort) {
        Term s3 = sort(r[2]);
        return {s3, make_derivation(TRule::PiWf, Judgment::term(ctx.env, prod, s3), {a.d, b.d})};
      }
    }
    reject("no rule (" + a.sort + ", " + b.sort + ", _) for " + print(prod));
  }

  DerivationPtr conv_r(const Ctx& ctx, const Typed& t, const Term& c) {
    Sorted s = infer_sort(ctx, c);
    const Judgment& j = t.d->conclusion;
    return make_derivation(TRule::ConvR, Judgment::term(ctx.env, j.subject, c), {t.d, s.d});
  }

  // Wraps a list derivation whose stoup is not literally b in convL.
  DerivationPtr conv_stoup(const Ctx& ctx, const DerivationPtr& d, const Term& b) {
    const Judgment& j = d->conclusion;
    if (alpha_eq(j.stoup, b)) return d;
    if (conv(j.stoup, b) != Conv::Yes)
      reject("stoup " + print(b) + " is not convertible to " + print(j.stoup));
    Sorted s = infer_sort(ctx, b);
    return make_derivation(TRule::ConvL, Judgment::list(ctx.env, b, j.subject, j.type), {d, s.d});
  }

  // Renames the binder of a Pi, Lam, Cut or CutL when it is already in
  // the domain of the environment.
  Term freshen(const Ctx& ctx, const Expr& e) {
    if (!ctx.env.binds(e.name())) return e;
    const Expr& body = e.body();
    std::string z = fresh_name(e.name(), [&](std::string_view c) {
      return ctx.env.binds(c) || body.has_free(c);
    });
    std::vector<Expr> kids(e.children().begin(), e.children().end());
    kids.back() = rename_free(body, e.name(), z);
    return make_node(e.kind(), z, std::move(kids));
  }

  // Calls f(inner, payload derivation) where inner is Gamma, x:A, Delta for
  // each split tried by cut_splits; the first split that f accepts wins.
  template <class F>
  Typed under_cut(const Ctx& ctx, const Expr& t, F&& f) {
    std::string last;
    for (std::size_t k : cut_splits(ctx, t)) {
      try {
        Ctx pre = ctx.prefix(k);
        Sorted a = infer_sort(pre, t.domain());
        DerivationPtr p = check(pre, t.payload(), t.domain());
        Ctx inner = extend(pre, t.name(), t.domain(), a.d);
        for (std::size_t j = k; j < ctx.env.size(); ++j) {
          bool changed = false;
          Term dj = undo_cuts(ctx.env[j].type, t, changed);
          Sorted sj = infer_sort(inner, dj);
          inner = extend(inner, ctx.env[j].var, dj, sj.d);
        }
        return f(inner, p);
      } catch (const Rejected& r) {
        last = r.msg;
      }
    }
    reject(last);
  }

  // Where to split the environment E into Gamma, Delta'' for a cut: the whole
  // of E first (Delta empty), then, if some later declaration mentions a cut
  // of the same payload, the shortest prefix that still types the payload.
  std::vector<std::size_t> cut_splits(const Ctx& ctx, const Expr& cl) {
    std::vector<std::size_t> out{ctx.env.size()};
    std::size_t need = 0;
    for (std::size_t i = 0; i < ctx.env.size(); ++i) {
      const std::string& v = ctx.env[i].var;
      if (cl.payload().has_free(v) || cl.domain().has_free(v)) need = i + 1;
    }
    for (std::size_t i = need; i < ctx.env.size(); ++i) {
      bool changed = false;
      undo_cuts(ctx.env[i].type, cl, changed);
      if (changed) {
        out.push_back(need);
        break;
      }
    }
    return out;
  }

  // Stoups B0 with [P/x:A]B0 convertible to b. Subterms of b that are
  // literally cuts of P for some variable are undone first; b itself always
  // works up to weakening since x does not occur in it.
  std::vector<Term> stoup_candidates(const Term& b, const Expr& cl) {
    std::vector<Term> out;
    bool changed = false;
    Term undone = undo_cuts(b, cl, changed);
    if (changed) out.push_back(undone);
    out.push_back(b);
    return out;
  }

  Expr undo_cuts(const Expr& e, const Expr& cl, bool& changed) {
    const std::string& x = cl.name();
    if (e.is(Kind::Cut) && alpha_eq(e.domain(), cl.domain()) &&
        alpha_eq(e.payload(), cl.payload())) {
      Expr body = e.name() == x ? e.body() : rename_free(e.body(), e.name(), x);
      changed = true;
      return undo_cuts(body, cl, changed);
    }
    if (e.binds() && (e.name() == x || cl.payload().has_free(e.name()))) {
      // Undoing below this binder could capture; leave the subtree alone.
      return e;
    }
    if (e.children().empty()) return e;
    std::vector<Expr> kids;
    kids.reserve(e.children().size());
    for (const Expr& k : e.children()) kids.push_back(undo_cuts(k, cl, changed));
    return rebuild(e, std::move(kids));
  }

  const PtsSpec& spec_;
  std::size_t fuel_;
};

template <class F>
CheckResult run_checked(F&& f) {
  CheckResult r;
  try {
    r.derivation = f();
    r.verdict = Verdict::Accept;
  } catch (const Rejected& e) {
    r.verdict = Verdict::Reject;
    r.reason = e.msg;
  } catch (const Undecided& e) {
    r.verdict = Verdict::Undecided;
    r.reason = e.msg;
  }
  return r;
}

bool ground_all(std::initializer_list<const Expr*> es) {
  for (const Expr* e : es)
    if (!e->is_ground()) return false;
  return true;
}

}  // namespace

CheckResult check_env(const PtsSpec& spec, const Environment& env, std::size_t fuel) {
  return run_checked([&] { return Checker(spec, fuel).root(env).wf(); });
}

CheckResult check_term(const PtsSpec& spec, const Environment& env, const Term& m, const Term& a,
                       std::size_t fuel) {
  return run_checked([&] {
    if (!ground_all({&m, &a})) throw Rejected{"judgment is not ground"};
    Checker c(spec, fuel);
    Ctx ctx = c.root(env);
    return c.check(ctx, m, a);
  });
}

CheckResult check_list(const PtsSpec& spec, const Environment& env, const Term& stoup,
                       const ListTerm& l, const Term& c, std::size_t fuel) {
  return run_checked([&] {
    if (!ground_all({&stoup, &l, &c})) throw Rejected{"judgment is not ground"};
    Checker ch(spec, fuel);
    Ctx ctx = ch.root(env);
    // The stoup must itself be a type for the judgment to be derivable.
    ch.infer_sort(ctx, stoup);
    return ch.check_list(ctx, stoup, l, c);
  });
}

InferResult infer_term(const PtsSpec& spec, const Environment& env, const Term& m, std::size_t fuel) {
  InferResult out;
  CheckResult r = run_checked([&] {
    if (!m.is_ground()) throw Rejected{"term is not ground"};
    Checker c(spec, fuel);
    Ctx ctx = c.root(env);
    Typed t = c.infer(ctx, m);
    out.type = t.type;
    return t.d;
  });
  out.verdict = r.verdict;
  out.reason = r.reason;
  out.derivation = r.derivation;
  return out;
}

InferResult infer_sort(const PtsSpec& spec, const Environment& env, const Term& a, std::size_t fuel) {
  InferResult out;
  CheckResult r = run_checked([&] {
    if (!a.is_ground()) throw Rejected{"term is not ground"};
    Checker c(spec, fuel);
    Ctx ctx = c.root(env);
    Sorted s = c.infer_sort(ctx, a);
    out.type = sort(s.sort);
    return s.d;
  });
  out.verdict = r.verdict;
  out.reason = r.reason;
  out.derivation = r.derivation;
  return out;
}

// --- natural deduction checker ------------------------------------------------

namespace {

class PtsChecker {
 public:
  PtsChecker(const PtsSpec& spec, std::size_t fuel) : spec_(spec), fuel_(fuel) {}

  PtsEnv root(const PtsEnv& env) {
    PtsEnv out;
    for (const PtsDecl& d : env) {
      if (d.type.has_reserved()) reject("environment is not ground");
      if (lookup(out, d.var)) reject(d.var + " is declared twice");
      infer_sort(out, d.type);
      out.push_back(d);
    }
    return out;
  }

  PtsTerm infer(const PtsEnv& env, const PtsTerm& t) {
    switch (t.kind()) {
      case PKind::Var: {
        const PtsTerm* a = lookup(env, t.name());
        if (!a) reject(t.name() + " is not declared");
        return *a;
      }
      case PKind::Sort: {
        if (!spec_.is_sort(t.name())) reject(t.name() + " is not a sort");
        auto tops = spec_.sorts_of(t.name());
        if (tops.empty()) reject("sort " + t.name() + " has no type");
        return psort(tops.front());
      }
      case PKind::Pi: {
        PtsTerm u = freshen(env, t);
        std::string s1 = infer_sort(env, u.domain());
        PtsEnv inner = extended(env, u.name(), u.domain());
        std::string s2 = infer_sort(inner, u.body());
        return psort(rule(s1, s2, u));
      }
      case PKind::Lam: {
        PtsTerm u = freshen(env, t);
        std::string s1 = infer_sort(env, u.domain());
        PtsEnv inner = extended(env, u.name(), u.domain());
        PtsTerm body = infer(inner, u.body());
        std::string s2 = infer_sort(inner, body);
        PtsTerm prod = ppi(u.name(), u.domain(), body);
        rule(s1, s2, prod);
        return prod;
      }
      case PKind::App: {
        PtsTerm f = infer(env, t.fun());
        PtsTerm fn = normal(f);
        if (!fn.is(PKind::Pi)) reject(print(t.fun()) + " has type " + print(f) + ", not a product");
        check(env, t.arg(), fn.domain());
        return subst_pts(fn.body(), fn.name(), t.arg());
      }
      case PKind::Reserved:
        reject("reserved variable in a judgment that must be ground");
    }
    reject("unknown term");
  }

  void check(const PtsEnv& env, const PtsTerm& t, const PtsTerm& c) {
    if (t.is(PKind::Sort)) {
      PtsTerm cn = normal(c);
      if (!spec_.is_sort(t.name()) || !cn.is(PKind::Sort) || !spec_.has_axiom(t.name(), cn.name()))
        reject(t.name() + " does not have type " + print(c));
      if (!alpha_eq(c, cn)) infer_sort(env, c);
      return;
    }
    PtsTerm a = infer(env, t);
    if (alpha_eq(a, c)) return;
    Conv r = pts_convertible(a, c, fuel_);
    if (r == Conv::Undecided) throw Undecided{"conversion undecided"};
    if (r == Conv::No) reject(print(t) + " has type " + print(a) + ", not " + print(c));
    infer_sort(env, c);
  }

  std::string infer_sort(const PtsEnv& env, const PtsTerm& a) {
    PtsTerm t = infer(env, a);
    if (t.is(PKind::Sort)) return t.name();
    PtsTerm n = normal(t);
    if (!n.is(PKind::Sort)) reject(print(a) + " is not a type");
    // Conversion to n needs n itself to be typable.
    if (spec_.sorts_of(n.name()).empty()) reject("sort " + n.name() + " has no type");
    return n.name();
  }

 private:
  [[noreturn]] static void reject(const std::string& msg) { throw Rejected{msg}; }

  static const PtsTerm* lookup(const PtsEnv& env, const std::string& x) {
    for (std::size_t i = env.size(); i-- > 0;)
      if (env[i].var == x) return &env[i].type;
    return nullptr;
  }

  static PtsEnv extended(const PtsEnv& env, const std::string& x, const PtsTerm& a) {
    PtsEnv out = env;
    out.push_back({x, a});
    return out;
  }

  PtsTerm freshen(const PtsEnv& env, const PtsTerm& t) {
    if (!lookup(env, t.name())) return t;
    std::string z = fresh_name(t.name(), [&](std::string_view c) {
      return lookup(env, std::string(c)) != nullptr || t.body().has_free(c);
    });
    return make_pts(t.kind(), z, {t.domain(), rename_free(t.body(), t.name(), z)});
  }

  std::string rule(const std::string& s1, const std::string& s2, const PtsTerm& prod) {
    for (const auto& r : spec_.rules)
      if (r[0] == s1 && r[1] == s2) return r[2];
    reject("no rule (" + s1 + ", " + s2 + ", _) for " + print(prod));
  }

  PtsTerm normal(const PtsTerm& t) {
    PtsNormalized n = normalize_beta(t, fuel_);
    if (n.exhausted) throw Undecided{"normalisation of " + print(t) + " ran out of fuel"};
    return n.term;
  }

  const PtsSpec& spec_;
  std::size_t fuel_;
};

}  // namespace

CheckResult check_pts_env(const PtsSpec& spec, const PtsEnv& env, std::size_t fuel) {
  return run_checked([&] {
    PtsChecker(spec, fuel).root(env);
    return DerivationPtr{};
  });
}

CheckResult check_pts(const PtsSpec& spec, const PtsEnv& env, const PtsTerm& t, const PtsTerm& type,
                      std::size_t fuel) {
  return run_checked([&] {
    if (t.has_reserved() || type.has_reserved()) throw Rejected{"judgment is not ground"};
    PtsChecker c(spec, fuel);
    PtsEnv e = c.root(env);
    c.check(e, t, type);
    return DerivationPtr{};
  });
}

}  // namespace ptsc
