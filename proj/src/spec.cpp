#include "ptsc/spec.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ptsc {

bool PtsSpec::is_sort(std::string_view s) const {
  return std::find(sorts.begin(), sorts.end(), s) != sorts.end();
}

bool PtsSpec::has_axiom(std::string_view s, std::string_view t) const {
  return std::any_of(axioms.begin(), axioms.end(),
                     [&](const auto& a) { return a.first == s && a.second == t; });
}

bool PtsSpec::has_rule(std::string_view a, std::string_view b, std::string_view c) const {
  return std::any_of(rules.begin(), rules.end(), [&](const auto& r) {
    return r[0] == a && r[1] == b && r[2] == c;
  });
}

std::vector<std::string> PtsSpec::sorts_of(std::string_view s) const {
  std::vector<std::string> out;
  for (const auto& [a, b] : axioms)
    if (a == s) out.push_back(b);
  return out;
}

std::vector<std::string> PtsSpec::inhabitants_of(std::string_view t) const {
  std::vector<std::string> out;
  for (const auto& [a, b] : axioms)
    if (b == t) out.push_back(a);
  return out;
}

void PtsSpec::validate() const {
  for (const auto& [a, b] : axioms)
    if (!is_sort(a) || !is_sort(b))
      throw std::invalid_argument("axiom (" + a + ", " + b + ") mentions an undeclared sort");
  for (const auto& r : rules)
    for (const auto& s : r)
      if (!is_sort(s))
        throw std::invalid_argument("rule mentions undeclared sort " + s);
}

bool operator==(const PtsSpec& a, const PtsSpec& b) {
  return a.sorts == b.sorts && a.axioms == b.axioms && a.rules == b.rules;
}

namespace {

PtsSpec cube(std::string name, std::vector<std::array<std::string, 3>> rules) {
  PtsSpec s;
  s.name = std::move(name);
  s.sorts = {"*", "#"};
  s.axioms = {{"*", "#"}};
  s.rules = std::move(rules);
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"stlc", "systemF", "fomega", "lambdaPi", "coc"};
}

PtsSpec preset(std::string_view name) {
  if (name == "stlc" || name == "lambda-arrow")
    return cube("stlc", {{"*", "*", "*"}});
  if (name == "systemF")
    return cube("systemF", {{"*", "*", "*"}, {"#", "*", "*"}});
  if (name == "fomega")
    return cube("fomega", {{"*", "*", "*"}, {"#", "*", "*"}, {"#", "#", "#"}});
  if (name == "lambdaPi")
    return cube("lambdaPi", {{"*", "*", "*"}, {"*", "#", "#"}});
  if (name == "coc")
    return cube("coc",
                {{"*", "*", "*"}, {"#", "*", "*"}, {"*", "#", "#"}, {"#", "#", "#"}});
  throw std::invalid_argument("unknown preset " + std::string(name));
}

PtsSpec spec_from_json(const nlohmann::json& j) {
  PtsSpec s;
  s.name = j.value("name", std::string("custom"));
  for (const auto& x : j.at("sorts")) s.sorts.push_back(x.get<std::string>());
  for (const auto& a : j.at("axioms")) {
    if (a.size() != 2) throw std::invalid_argument("axiom must have two sorts");
    s.axioms.emplace_back(a[0].get<std::string>(), a[1].get<std::string>());
  }
  for (const auto& r : j.at("rules")) {
    if (r.size() == 2)
      s.rules.push_back({r[0].get<std::string>(), r[1].get<std::string>(),
                         r[1].get<std::string>()});
    else if (r.size() == 3)
      s.rules.push_back({r[0].get<std::string>(), r[1].get<std::string>(),
                         r[2].get<std::string>()});
    else
      throw std::invalid_argument("rule must have two or three sorts");
  }
  s.validate();
  return s;
}

nlohmann::json spec_to_json(const PtsSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["sorts"] = s.sorts;
  j["axioms"] = nlohmann::json::array();
  for (const auto& [a, b] : s.axioms) j["axioms"].push_back({a, b});
  j["rules"] = nlohmann::json::array();
  for (const auto& r : s.rules) j["rules"].push_back({r[0], r[1], r[2]});
  return j;
}

PtsSpec load_spec(const std::string& preset_or_path) {
  auto names = preset_names();
  if (std::find(names.begin(), names.end(), preset_or_path) != names.end() ||
      preset_or_path == "lambda-arrow")
    return preset(preset_or_path);
  std::ifstream in(preset_or_path);
  if (!in) throw std::invalid_argument("no preset or spec file named " + preset_or_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return spec_from_json(nlohmann::json::parse(ss.str()));
}

}  // namespace ptsc
