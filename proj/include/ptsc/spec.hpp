// PTS specifications (sorts, axioms, rules) and the shipped presets.
#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ptsc {

struct PtsSpec {
  std::string name;
  std::vector<std::string> sorts;
  std::vector<std::pair<std::string, std::string>> axioms;
  std::vector<std::array<std::string, 3>> rules;  // declaration order matters

  bool is_sort(std::string_view s) const;
  bool has_axiom(std::string_view s, std::string_view t) const;
  bool has_rule(std::string_view a, std::string_view b, std::string_view c) const;
  // Every t with (s, t) in A, in declaration order.
  std::vector<std::string> sorts_of(std::string_view s) const;
  // Every s with (s, t) in A.
  std::vector<std::string> inhabitants_of(std::string_view t) const;

  // Throws std::invalid_argument if an axiom or rule mentions an undeclared sort.
  void validate() const;
};

bool operator==(const PtsSpec& a, const PtsSpec& b);

std::vector<std::string> preset_names();
// "stlc" (also "lambda-arrow"), "systemF", "fomega", "lambdaPi", "coc".
PtsSpec preset(std::string_view name);

PtsSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const PtsSpec& s);

// A preset name, or a path to a JSON spec file.
PtsSpec load_spec(const std::string& preset_or_path);

}  // namespace ptsc
