// Command-line front end: normalize, translate, check, search, solve, serve.
//
// Arguments that name a term, list or environment are read from a file when
// a file of that name exists, and taken literally otherwise.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ptsc/enumeration.hpp"
#include "ptsc/parse.hpp"
#include "ptsc/pts.hpp"
#include "ptsc/rewrite.hpp"
#include "ptsc/search.hpp"
#include "ptsc/service.hpp"
#include "ptsc/session.hpp"
#include "ptsc/typing.hpp"

using namespace ptsc;

namespace {

std::string text_arg(const std::string& s) {
  std::error_code ec;
  if (s.empty() || !std::filesystem::is_regular_file(s, ec)) return s;
  std::ifstream in(s);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string t = ss.str();
  while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
  return t;
}

void print_trace(const std::vector<Redex>& trace) {
  for (const Redex& r : trace) {
    std::string path;
    for (std::size_t i = 0; i < r.position.size(); ++i) path += (i ? "." : "") + std::to_string(r.position[i]);
    std::cout << rule_name(r.rule) << ' ' << (path.empty() ? "root" : path) << '\n';
  }
}

int cmd_normalize(const std::string& input, const std::string& system, std::size_t fuel, bool trace) {
  ParseContext ctx;
  Expr e = parse(text_arg(input), ctx);
  std::vector<Redex> steps;
  Expr out;
  bool exhausted = false;
  if (system == "x") {
    out = trace ? normalize_x_traced(e, &steps) : normalize_x(e);
  } else {
    Normalized n = trace ? normalize_bx_traced(e, fuel, &steps) : normalize_bx(e, fuel);
    out = n.term;
    exhausted = n.exhausted;
  }
  if (trace) print_trace(steps);
  std::cout << print(out) << '\n';
  if (exhausted) {
    std::cerr << "fuel exhausted after " << fuel << " B steps\n";
    return 3;
  }
  return 0;
}

int cmd_translate(const std::string& input, const std::string& to, const std::string& env) {
  ParseContext ctx;
  if (to == "pts") {
    if (!env.empty()) std::cout << print(encode(parse_env(text_arg(env), ctx))) << '\n';
    std::cout << print(encode(parse_term(text_arg(input), ctx))) << '\n';
  } else {
    if (!env.empty()) std::cout << print(decode(parse_pts_env(text_arg(env), ctx))) << '\n';
    std::cout << print(decode(parse_pts(text_arg(input), ctx))) << '\n';
  }
  return 0;
}

int report(const CheckResult& r) {
  std::cout << verdict_name(r.verdict);
  if (!r.reason.empty()) std::cout << ": " << r.reason;
  std::cout << '\n';
  return r.accepted() ? 0 : r.verdict == Verdict::Reject ? 1 : 2;
}

int cmd_check(const PtsSpec& spec, const std::string& env, const std::string& term, const std::string& type,
              bool pts, std::size_t fuel) {
  ParseContext ctx{&spec, nullptr, false};
  if (pts)
    return report(check_pts(spec, parse_pts_env(text_arg(env), ctx), parse_pts(text_arg(term), ctx),
                            parse_pts(text_arg(type), ctx), fuel));
  return report(
      check_term(spec, parse_env(text_arg(env), ctx), parse_term(text_arg(term), ctx), parse_term(text_arg(type), ctx), fuel));
}

int cmd_search(const PtsSpec& spec, const std::string& env, const std::string& goal, const SearchConfig& cfg,
               double timeout) {
  ParseContext ctx{&spec, nullptr, false};
  std::stop_source stop;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
  std::jthread watchdog;
  if (timeout > 0)
    watchdog = std::jthread([&](std::stop_token own) {
      while (!own.stop_requested() && std::chrono::steady_clock::now() < deadline)
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      if (!own.stop_requested()) stop.request_stop();
    });
  SearchStats st = ps_search(
      spec, parse_env(text_arg(env), ctx), parse_term(text_arg(goal), ctx), cfg,
      [](const Term& t, std::size_t) {
        std::cout << print(t) << '\n' << std::flush;
        return true;
      },
      stop.get_token());
  if (watchdog.joinable()) watchdog.request_stop();
  std::cout << "found=" << st.found << " explored=" << st.explored << '\n';
  if (st.cancelled) std::cerr << "timed out at depth " << st.depth << '\n';
  return st.cancelled ? 3 : 0;
}

int cmd_solve(const PtsSpec& spec, const std::string& env_text, const std::string& goal_text,
              const std::string& strategy, std::size_t budget, std::size_t max_depth, bool trace, bool compact, bool all) {
  ParseContext ctx{&spec, nullptr, false};
  Environment env = parse_env(text_arg(env_text), ctx);
  Term goal = parse_term(text_arg(goal_text), ctx);
  if (CheckResult r = check_env(spec, env); !r.accepted()) {
    std::cerr << "environment: " << r.reason << '\n';
    return 1;
  }
  if (InferResult r = infer_sort(spec, env, goal); r.verdict != Verdict::Accept) {
    std::cerr << "goal is not typed by a sort: " << r.reason << '\n';
    return 1;
  }
  MetaVarRegistry reg;
  GoalEnvironment sigma = initial_goals(reg, env, goal);
  const std::string root = std::get<TermGoal>(sigma.front()).meta;
  PeOptions opts;
  opts.strategy = *strategy_from_name(strategy);
  opts.budget = budget;
  opts.max_depth = max_depth;
  opts.trace = trace;
  auto t0 = std::chrono::steady_clock::now();
  PeOutcome out = pe_solve(spec, reg, sigma, opts);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  PrintOptions po{compact};
  for (const std::string& line : out.trace) std::cout << line << '\n';
  if (out.status == PeStatus::Solved) {
    std::cout << '?' << root << " := " << print_binding(out.sigma.at(root), po) << '\n';
    if (all)
      for (const auto& [k, b] : out.sigma)
        if (k != root) std::cout << '?' << k << " := " << print_binding(b, po) << '\n';
  }
  if (out.status == PeStatus::Exhausted || out.status == PeStatus::Cancelled) {
    std::cout << "residual:\n";
    for (const GoalEntry& e : out.residual) {
      if (auto* t = std::get_if<TermGoal>(&e))
        std::cout << "  " << print(t->env) << " |- ?" << t->meta << " : " << print(t->type) << '\n';
      else if (auto* l = std::get_if<ListGoal>(&e))
        std::cout << "  " << print(l->env) << " ; " << print(l->stoup) << " |- ??" << l->meta << " : "
                  << print(l->type) << '\n';
      else {
        const auto& c = std::get<Constraint>(e);
        std::cout << "  " << print(c.env) << " |- " << print(c.lhs) << " = " << print(c.rhs) << '\n';
      }
    }
  }
  std::cout << "status=" << pe_status_name(out.status) << " nodes=" << out.nodes << " depth=" << out.depth
            << " seconds=" << secs;
  if (!out.reason.empty() && out.status != PeStatus::Solved) std::cout << " reason=\"" << out.reason << '"';
  std::cout << '\n';
  return out.status == PeStatus::Solved ? 0 : out.status == PeStatus::Failure ? 1 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pure type sequent calculi: reduction, translation, typing and proof search"};
  app.require_subcommand(1);

  std::string spec_name = "systemF", env, input, type, to = "pts", system = "x", strategy = "lazy";
  std::size_t fuel = kDefaultFuel, budget = 50'000, max_depth = 64;
  bool trace = false, pts = false, compact = false, all = false;
  SearchConfig cfg;
  double timeout = 0;

  auto* norm = app.add_subcommand("normalize", "normalise a term or list");
  norm->add_option("input", input, "term, list or file")->required();
  norm->add_option("--system", system, "x or bx")->check(CLI::IsMember({"x", "bx"}));
  norm->add_option("--fuel", fuel, "B steps allowed under bx");
  norm->add_flag("--trace", trace, "print each step as `rule path`");

  auto* tr = app.add_subcommand("translate", "translate between sequent and natural-deduction syntax");
  tr->add_option("input", input, "term or file")->required();
  tr->add_option("--to", to, "target syntax")->check(CLI::IsMember({"pts", "ptsc"}));
  tr->add_option("--env", env, "environment to translate first");

  auto* chk = app.add_subcommand("check", "check a typing judgment");
  chk->add_option("--spec", spec_name, "preset name or JSON file");
  chk->add_option("--env", env, "environment");
  chk->add_option("--term", input, "subject")->required();
  chk->add_option("--type", type, "type")->required();
  chk->add_flag("--pts", pts, "natural-deduction syntax");
  chk->add_option("--fuel", fuel, "conversion fuel");

  auto* srch = app.add_subcommand("search", "enumerate quasi-normal inhabitants");
  srch->add_option("--spec", spec_name, "preset name or JSON file");
  srch->add_option("--env", env, "environment");
  srch->add_option("--goal", type, "type to inhabit")->required();
  srch->add_option("--depth", cfg.max_depth, "derivation height bound");
  srch->add_option("--max", cfg.max_results, "results to print");
  srch->add_flag("--eta-long-bias", cfg.eta_long_bias, "prefer Pi-R on products");
  srch->add_option("--timeout", timeout, "seconds, 0 for none");

  auto* slv = app.add_subcommand("solve", "proof enumeration with meta-variables");
  slv->add_option("--spec", spec_name, "preset name or JSON file");
  slv->add_option("--env", env, "environment");
  slv->add_option("--goal", type, "type to inhabit")->required();
  slv->add_option("--strategy", strategy, "eager or lazy")->check(CLI::IsMember({"eager", "lazy"}));
  slv->add_option("--budget", budget, "rule applications");
  slv->add_option("--max-depth", max_depth, "deepening bound");
  slv->add_flag("--trace", trace, "print each rule application");
  slv->add_flag("--compact", compact, "omit lambda annotations in bindings");
  slv->add_flag("--all", all, "print the bindings of intermediate meta-variables too");

  std::string host = "127.0.0.1", state_dir;
  int port = 8080;
  auto* srv = app.add_subcommand("serve", "HTTP+JSON session service");
  srv->add_option("--port", port, "port");
  srv->add_option("--host", host, "address to bind");
  srv->add_option("--state-dir", state_dir, "directory for session snapshots");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*norm) return cmd_normalize(input, system, fuel, trace);
    if (*tr) return cmd_translate(input, to, env);
    if (*srv) {
      std::cerr << "listening on " << host << ':' << port << '\n';
      return run_server(host, port, state_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(state_dir));
    }
    PtsSpec spec = load_spec(spec_name);
    if (*chk) return cmd_check(spec, env, input, type, pts, fuel);
    if (*srch) return cmd_search(spec, env, type, cfg, timeout);
    if (*slv) return cmd_solve(spec, env, type, strategy, budget, max_depth, trace, compact, all);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
