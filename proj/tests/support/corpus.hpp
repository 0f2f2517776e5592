// The typed-judgment corpus shipped in tests/data.
#pragma once

#include <string>
#include <vector>

#include "ptsc/pts.hpp"
#include "ptsc/spec.hpp"
#include "ptsc/syntax.hpp"

namespace ptsc::testing {

struct CorpusEntry {
  int line = 0;
  std::string preset;
  Environment env;
  Term term;
  Term type;
};

struct PtsCorpusEntry {
  int line = 0;
  std::string preset;
  PtsEnv env;
  PtsTerm term;
  PtsTerm type;
};

// An inhabitation problem: preset | env | type.
struct GoalCase {
  int line = 0;
  std::string preset;
  PtsSpec spec;
  Environment env;
  Term type;
};

std::string data_path(const std::string& file);

// Throws std::runtime_error (with the line number) on malformed lines.
std::vector<CorpusEntry> load_corpus(const std::string& file = "corpus.txt");
std::vector<PtsCorpusEntry> load_pts_corpus(const std::string& file = "corpus_pts.txt");
std::vector<GoalCase> load_goals(const std::string& file = "goals.txt");

}  // namespace ptsc::testing
