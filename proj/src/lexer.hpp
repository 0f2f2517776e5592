// Tokeniser shared by the term and PTS parsers.
#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "ptsc/parse.hpp"

namespace ptsc::detail {

enum class Tok { Ident, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

inline std::vector<Token> lex(std::string_view s) {
  static const char* const syms[] = {"::", ":=", "->", "++", "??", ":", "\\", ".", ",",
                                     "(",  ")",  "{",  "}",  "[",  "]", "?",  "*", "#"};
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), line, col});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char* sym : syms) {
      std::string_view v(sym);
      if (s.substr(i, v.size()) == v) {
        out.push_back({Tok::Sym, std::string(v), line, col});
        advance(v.size());
        matched = true;
        break;
      }
    }
    if (!matched)
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

}  // namespace ptsc::detail
