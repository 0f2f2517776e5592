#include "ptsc/search.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace ptsc {

// --- quasi-normal forms --------------------------------------------------------

std::optional<QuasiNormalWitness> quasi_normal_witness(const Expr& m) {
  QuasiNormalWitness w{m, {}};
  for (const Redex& r : find_redexes(m, all_rules())) {
    bool inside = false;
    const Expr* cur = &m;
    for (std::uint32_t i : r.position) {
      if (cur->is(Kind::Lam) && i == 0) {
        inside = true;
        break;
      }
      cur = &(*cur)[i];
    }
    if (!inside) return std::nullopt;
    w.annotation_redexes.push_back(r.position);
  }
  return w;
}

bool is_quasi_normal(const Expr& m) { return quasi_normal_witness(m).has_value(); }

// --- spines -----------------------------------------------------------------------

Spine spine(const Term& t, std::size_t fuel) {
  Spine s;
  std::vector<std::string> bound;
  Term cur = t;
  for (;;) {
    Normalized h = head_normalize(cur, fuel);
    if (h.exhausted) return s;
    cur = h.term;
    if (!cur.is(Kind::Pi)) break;
    bound.push_back(cur.name());
    ++s.products;
    cur = cur.body();
  }
  if (cur.is(Kind::Sort)) {
    s.head = Spine::Head::Sort;
  } else if (cur.is(Kind::VarApp)) {
    bool b = std::find(bound.begin(), bound.end(), cur.name()) != bound.end();
    s.head = b ? Spine::Head::Bound : Spine::Head::Free;
  } else {
    return s;
  }
  s.name = cur.name();
  return s;
}

bool spine_compatible(const Spine& stoup, const Spine& goal) {
  bool rigid = stoup.head == Spine::Head::Sort || stoup.head == Spine::Head::Free;
  if (!rigid || goal.head == Spine::Head::Unknown) return true;
  return stoup.products >= goal.products && stoup.head == goal.head && stoup.name == goal.name;
}

namespace {

struct Rejected {
  std::string msg;
};
struct Undecided {
  std::string msg;
};

std::string fresh_for(const Environment& g, const std::string& base) {
  if (!g.binds(base)) return base;
  return fresh_name(base, [&](std::string_view c) { return g.binds(c); });
}

Term head_nf(const Term& t, std::size_t fuel) {
  Normalized h = head_normalize(t, fuel);
  if (h.exhausted) throw Undecided{"fuel exhausted reducing " + print(t)};
  return h.term;
}

// --- checking -------------------------------------------------------------------

class PsChecker {
 public:
  PsChecker(const PtsSpec& spec, std::size_t fuel) : spec_(spec), fuel_(fuel) {}

  std::size_t term(const Environment& g, const Term& m, const Term& c) {
    switch (m.kind()) {
      case Kind::Sort: {
        Term hc = head_nf(c, fuel_);
        if (!hc.is(Kind::Sort) || !spec_.has_axiom(m.name(), hc.name()))
          throw Rejected{"sorted: " + print(c) + " does not reduce to a sort typing " + m.name()};
        return 1;
      }
      case Kind::Pi: {
        Term hc = head_nf(c, fuel_);
        if (!hc.is(Kind::Sort)) throw Rejected{"Pi-wf: " + print(c) + " does not reduce to a sort"};
        std::string x = fresh_for(g, m.name());
        Term body = x == m.name() ? m.body() : rename_free(m.body(), m.name(), x);
        std::optional<std::size_t> best;
        std::string last = "Pi-wf: no rule ends in " + hc.name();
        for (const auto& r : spec_.rules) {
          if (r[2] != hc.name()) continue;
          try {
            std::size_t h1 = term(g, m.domain(), sort(r[0]));
            std::size_t h2 = term(g.extended(x, m.domain()), body, sort(r[1]));
            std::size_t h = 1 + std::max(h1, h2);
            if (!best || h < *best) best = h;
          } catch (const Rejected& e) {
            last = e.msg;
          }
        }
        if (!best) throw Rejected{last};
        return *best;
      }
      case Kind::Lam: {
        Term hc = head_nf(c, fuel_);
        if (!hc.is(Kind::Pi)) throw Rejected{"Pi-R: " + print(c) + " does not reduce to a product"};
        Conv cv = convertible(m.domain(), hc.domain(), fuel_);
        if (cv == Conv::Undecided) throw Undecided{"fuel exhausted comparing annotations"};
        if (cv == Conv::No)
          throw Rejected{"Pi-R: annotation " + print(m.domain()) + " does not match " +
                         print(hc.domain())};
        std::string x = fresh_for(g, m.name());
        Term body = x == m.name() ? m.body() : rename_free(m.body(), m.name(), x);
        Term b = hc.name() == x ? hc.body() : rename_free(hc.body(), hc.name(), x);
        return 1 + term(g.extended(x, m.domain()), body, b);
      }
      case Kind::VarApp: {
        const Term* a = g.lookup(m.name());
        if (!a) throw Rejected{"Contr: " + m.name() + " is not declared"};
        return 1 + list(g, *a, m.args(), c);
      }
      default:
        throw Rejected{"no search rule builds a " + std::string(kind_name(m.kind()))};
    }
  }

  std::size_t list(const Environment& g, const Term& d, const ListTerm& l, const Term& c) {
    switch (l.kind()) {
      case Kind::Nil: {
        Conv cv = convertible(d, c, fuel_);
        if (cv == Conv::Undecided) throw Undecided{"fuel exhausted in axiom"};
        if (cv == Conv::No) throw Rejected{"axiom: " + print(d) + " is not convertible to " + print(c)};
        return 1;
      }
      case Kind::Cons: {
        Term hd = head_nf(d, fuel_);
        if (!hd.is(Kind::Pi)) throw Rejected{"Pi-L: " + print(d) + " does not reduce to a product"};
        std::size_t h1 = term(g, l.head(), hd.domain());
        std::size_t h2 = list(g, cut(hd.domain(), l.head(), hd.name(), hd.body()), l.tail(), c);
        return 1 + std::max(h1, h2);
      }
      default:
        throw Rejected{"no search rule builds a " + std::string(kind_name(l.kind()))};
    }
  }

 private:
  const PtsSpec& spec_;
  std::size_t fuel_;
};

// Internally every leaf counts as one; reported heights leave the leaf rules
// (sorted, axiom) out, so the two differ by exactly one.
template <class F>
PsVerdict run_ps(F&& f) {
  PsVerdict v;
  try {
    v.height = f() - 1;
    v.verdict = Verdict::Accept;
  } catch (const Rejected& e) {
    v.reason = e.msg;
  } catch (const Undecided& e) {
    v.verdict = Verdict::Undecided;
    v.reason = e.msg;
  }
  return v;
}

}  // namespace

PsVerdict ps_check(const PtsSpec& spec, const Environment& env, const Term& m, const Term& a,
                   std::size_t fuel) {
  return run_ps([&] {
    if (!m.is_ground() || !a.is_ground() || !env.is_ground()) throw Rejected{"judgment is not ground"};
    return PsChecker(spec, fuel).term(env, m, a);
  });
}

PsVerdict ps_check_list(const PtsSpec& spec, const Environment& env, const Term& stoup,
                        const ListTerm& l, const Term& c, std::size_t fuel) {
  return run_ps([&] {
    if (!l.is_ground() || !stoup.is_ground() || !c.is_ground() || !env.is_ground())
      throw Rejected{"judgment is not ground"};
    return PsChecker(spec, fuel).list(env, stoup, l, c);
  });
}

// --- search ----------------------------------------------------------------------

namespace {

struct Stop {};

// Restricts the rigid head of the type being generated: a sort or free
// variable head must equal `name` (when `kind` is Sort or Free) and is ruled
// out altogether when `kind` is Bound. Heads bound inside the generated term
// itself are always allowed.
struct HeadFilter {
  bool active = false;
  Spine::Head kind = Spine::Head::Unknown;
  std::string name;
  std::vector<std::string> locals;

  bool allows_sort(const std::string& s) const {
    return !active || (kind == Spine::Head::Sort && name == s);
  }
  bool allows_var(const std::string& v) const {
    if (!active || std::find(locals.begin(), locals.end(), v) != locals.end()) return true;
    return kind == Spine::Head::Free && name == v;
  }
  HeadFilter under(const std::string& x) const {
    HeadFilter f = *this;
    if (active) f.locals.push_back(x);
    return f;
  }
};

// A term goal together with everything its set of solutions depends on.
struct GoalKey {
  Environment env;
  Term goal;
  HeadFilter filter;

  bool operator==(const GoalKey& o) const {
    if (env.size() != o.env.size() || filter.active != o.filter.active ||
        filter.kind != o.filter.kind || filter.name != o.filter.name || filter.locals != o.filter.locals)
      return false;
    for (std::size_t i = 0; i < env.size(); ++i)
      if (env[i].var != o.env[i].var || !alpha_eq(env[i].type, o.env[i].type)) return false;
    return alpha_eq(goal, o.goal);
  }
};

struct GoalKeyHash {
  std::size_t operator()(const GoalKey& k) const {
    std::size_t h = alpha_hash(k.goal);
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (const Decl& d : k.env.decls()) {
      mix(std::hash<std::string>{}(d.var));
      mix(alpha_hash(d.type));
    }
    if (k.filter.active) mix(std::hash<std::string>{}(k.filter.name) + k.filter.locals.size());
    return h;
  }
};

// When the stoup is (x : A) -> B and the spine of B ends in x itself, the
// argument chosen for x decides the final head; returns the filter that
// keeps only arguments whose head can still meet the goal.
HeadFilter argument_filter(const Term& stoup, const Spine& goal, std::size_t fuel) {
  HeadFilter f;
  if (goal.head == Spine::Head::Unknown) return f;
  Spine body;
  Term cur = stoup.body();
  std::vector<std::string> bound;
  for (;;) {
    Normalized h = head_normalize(cur, fuel);
    if (h.exhausted) return f;
    cur = h.term;
    if (!cur.is(Kind::Pi)) break;
    bound.push_back(cur.name());
    cur = cur.body();
  }
  if (!cur.is(Kind::VarApp) || cur.name() != stoup.name() || !cur.args().is(Kind::Nil)) return f;
  if (std::find(bound.begin(), bound.end(), stoup.name()) != bound.end()) return f;
  f.active = true;
  f.kind = goal.head;
  f.name = goal.name;
  return f;
}

class Searcher {
 public:
  using TermK = std::function<void(const Term&)>;
  using ListK = std::function<void(const ListTerm&)>;

  Searcher(const PtsSpec& spec, const SearchConfig& cfg, SearchStats& stats, std::stop_token stop)
      : spec_(spec), cfg_(cfg), stats_(stats), stop_(std::move(stop)) {}

  void term(const Environment& g, const Term& c, std::size_t budget, const TermK& k,
            const HeadFilter& filter = {}) {
    if (budget == 0) return;
    GoalKey key{g, c, filter};
    auto it = empty_.find(key);
    if (it != empty_.end() && it->second >= budget) return;
    bool any = false;
    expand(g, c, budget, [&](const Term& m) {
      any = true;
      k(m);
    }, filter);
    if (!any) {
      std::size_t& b = empty_[std::move(key)];
      b = std::max(b, budget);
    }
  }

  void expand(const Environment& g, const Term& c, std::size_t budget, const TermK& k,
              const HeadFilter& filter) {
    tick();
    Normalized h = head_normalize(c, cfg_.conv_fuel);
    if (h.exhausted) {
      ++stats_.undecided;
      return;
    }
    const Term& hc = h.term;
    if (hc.is(Kind::Sort)) {
      for (const std::string& s : spec_.inhabitants_of(hc.name()))
        if (filter.allows_sort(s)) k(sort(s));
      pi_wf(g, hc.name(), budget, k, filter);
      contr(g, hc, budget, k, filter);
    } else if (hc.is(Kind::Pi)) {
      pi_r(g, hc, budget, k);
      if (!cfg_.eta_long_bias) contr(g, hc, budget, k, filter);
    } else {
      contr(g, hc, budget, k, filter);
    }
  }

  void list(const Environment& g, const Term& d, const Term& c, const Spine& cs, std::size_t budget,
            const ListK& k) {
    if (budget == 0) return;
    tick();
    Conv cv = convertible(d, c, cfg_.conv_fuel);
    if (cv == Conv::Undecided) ++stats_.undecided;
    if (cv == Conv::Yes) k(nil());
    if (budget == 1) return;
    Normalized h = head_normalize(d, cfg_.conv_fuel);
    if (h.exhausted) {
      ++stats_.undecided;
      return;
    }
    const Term& hd = h.term;
    if (!hd.is(Kind::Pi)) return;
    term(g, hd.domain(), budget - 1, [&](const Term& m) {
      Term next = cut(hd.domain(), m, hd.name(), hd.body());
      if (!spine_compatible(spine(next, cfg_.conv_fuel), cs)) return;
      list(g, next, c, cs, budget - 1, [&](const ListTerm& l) { k(cons(m, l)); });
    }, argument_filter(hd, cs, cfg_.conv_fuel));
  }

 private:
  void tick() {
    ++stats_.explored;
    if ((stats_.explored & 0xff) == 0 && stop_.stop_requested()) {
      stats_.cancelled = true;
      throw Stop{};
    }
  }

  void pi_wf(const Environment& g, const std::string& s3, std::size_t budget, const TermK& k,
             const HeadFilter& filter) {
    if (budget < 2) return;
    for (const auto& r : spec_.rules) {
      if (r[2] != s3) continue;
      // Binders of type-level domains get upper-case names.
      bool kind_level = !spec_.inhabitants_of(r[0]).empty() && spec_.sorts_of(r[0]).empty();
      std::string x = fresh_for(g, kind_level ? "X" : "x");
      term(g, sort(r[0]), budget - 1, [&](const Term& a) {
        Environment ext = g.extended(x, a);
        term(ext, sort(r[1]), budget - 1, [&](const Term& b) { k(pi(x, a, b)); }, filter.under(x));
      });
    }
  }

  void pi_r(const Environment& g, const Term& hc, std::size_t budget, const TermK& k) {
    if (budget < 2) return;
    std::string x = fresh_for(g, hc.name());
    Term b = x == hc.name() ? hc.body() : rename_free(hc.body(), hc.name(), x);
    Normalized ann = normalize_bx(hc.domain(), cfg_.conv_fuel);
    if (ann.exhausted) ++stats_.undecided;
    Term a = ann.exhausted ? hc.domain() : ann.term;
    term(g.extended(x, a), b, budget - 1, [&](const Term& m) { k(lam(x, a, m)); });
  }

  void contr(const Environment& g, const Term& hc, std::size_t budget, const TermK& k,
             const HeadFilter& filter) {
    if (budget < 2) return;
    Spine cs = spine(hc, cfg_.conv_fuel);
    std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Decl& d = g[cfg_.head_order == HeadOrder::LastBoundFirst ? n - 1 - i : i];
      if (!filter.allows_var(d.var)) continue;
      if (!spine_compatible(decl_spine(d.type), cs)) continue;
      list(g, d.type, hc, cs, budget - 1, [&](const ListTerm& l) { k(var_app(d.var, l)); });
    }
  }

  const Spine& decl_spine(const Term& t) {
    auto it = spines_.find(t.identity());
    if (it == spines_.end()) it = spines_.emplace(t.identity(), std::make_pair(t, spine(t, cfg_.conv_fuel))).first;
    return it->second.second;
  }

  const PtsSpec& spec_;
  const SearchConfig& cfg_;
  SearchStats& stats_;
  // Goals known to have no solution within the stored budget.
  std::unordered_map<GoalKey, std::size_t, GoalKeyHash> empty_;
  // Keyed by node identity; the stored term keeps the node alive.
  std::unordered_map<const void*, std::pair<Term, Spine>> spines_;
  std::stop_token stop_;
};

}  // namespace

SearchStats ps_search(const PtsSpec& spec, const Environment& env, const Term& goal,
                      const SearchConfig& cfg, const SearchSink& sink, std::stop_token stop) {
  if (cfg.max_depth < 1) throw SearchPrecondition("max_depth must be at least 1");
  if (!goal.is_ground() || !env.is_ground()) throw SearchPrecondition("goal and environment must be ground");
  CheckResult wf = check_env(spec, env, cfg.conv_fuel);
  if (!wf.accepted()) throw SearchPrecondition("environment is not well formed: " + wf.reason);
  bool is_sort = goal.is(Kind::Sort) && spec.is_sort(goal.name());
  if (!is_sort) {
    InferResult s = infer_sort(spec, env, goal, cfg.conv_fuel);
    if (s.verdict != Verdict::Accept) throw SearchPrecondition("goal is not a type: " + s.reason);
  }

  SearchStats stats;
  std::unordered_set<Term, AlphaHash, AlphaEq> seen;
  Searcher searcher(spec, cfg, stats, stop);
  try {
    for (std::size_t d = 0; d <= cfg.max_depth; ++d) {
      stats.depth = d;
      searcher.term(env, goal, d + 1, [&](const Term& m) {
        if (!seen.insert(m).second) return;
        ++stats.found;
        if (!sink(m, d) || stats.found >= cfg.max_results) throw Stop{};
      });
    }
  } catch (const Stop&) {
  }
  return stats;
}

std::vector<Term> ps_search_all(const PtsSpec& spec, const Environment& env, const Term& goal,
                                const SearchConfig& cfg, SearchStats* stats) {
  std::vector<Term> out;
  SearchStats st = ps_search(spec, env, goal, cfg, [&](const Term& m, std::size_t) {
    out.push_back(m);
    return true;
  });
  if (stats) *stats = st;
  return out;
}

}  // namespace ptsc
