// SPDX-License-Identifier: Apache-2.0

#include "lexer.hpp"

#include <array>
#include <cctype>

namespace peb {

namespace {

// Longest match first.
constexpr std::array<std::string_view, 31> kPuncts = {
    "<<|", "<=>", "|>>", "|->", "/<:", "<<:", "<:", "<+", "<|", "|>", "<=",
    ">=",  "/=",  "/:",  ":=",  "..",  "=>",  "/\\", "\\/", "\\", "(",  ")",
    "{",   "}",   ",",   ".",   "|",   "@",   "+",   "-",   "*",
};
constexpr std::string_view kSingles = "/=<>:&;";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  std::uint32_t line = 1;
  std::size_t line_start = 0;
  bool space = true;

  auto make = [&](TokenKind kind, std::size_t begin, std::size_t end) {
    Token t;
    t.kind = kind;
    t.text = std::string(src.substr(begin, end - begin));
    t.line = line;
    t.column = static_cast<std::uint32_t>(begin - line_start + 1);
    t.offset = begin;
    t.length = end - begin;
    t.space_before = space;
    space = false;
    out.push_back(std::move(t));
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      line_start = ++i;
      space = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      space = true;
      continue;
    }
    if (src.substr(i, 3) == "---") {
      while (i < src.size() && src[i] != '\n') ++i;
      space = true;
      continue;
    }
    std::size_t begin = i;
    if (ident_start(c)) {
      while (i < src.size() && ident_char(src[i])) ++i;
      make(TokenKind::Ident, begin, i);
      continue;
    }
    if (digit(c)) {
      while (i < src.size() && digit(src[i])) ++i;
      if (i + 1 < src.size() && src[i] == '.' && digit(src[i + 1])) {
        ++i;
        while (i < src.size() && digit(src[i])) ++i;
        make(TokenKind::Decimal, begin, i);
      } else {
        make(TokenKind::Int, begin, i);
      }
      continue;
    }
    if (c == '"') {
      ++i;
      while (i < src.size() && src[i] != '"' && src[i] != '\n') ++i;
      if (i >= src.size() || src[i] != '"') {
        make(TokenKind::Error, begin, i);
        out.back().text = "unterminated string literal";
        return out;
      }
      ++i;
      make(TokenKind::String, begin, i);
      out.back().text = std::string(src.substr(begin + 1, i - begin - 2));
      continue;
    }
    // `:in` is one token when not followed by more identifier characters.
    if (src.substr(i, 3) == ":in" && (i + 3 >= src.size() || !ident_char(src[i + 3]))) {
      i += 3;
      make(TokenKind::Punct, begin, i);
      continue;
    }
    bool matched = false;
    for (auto p : kPuncts) {
      if (src.substr(i, p.size()) == p) {
        i += p.size();
        make(TokenKind::Punct, begin, i);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (kSingles.find(c) != std::string_view::npos) {
      ++i;
      make(TokenKind::Punct, begin, i);
      continue;
    }
    make(TokenKind::Error, begin, begin + 1);
    out.back().text = std::string("unexpected character '") + c + "'";
    return out;
  }
  make(TokenKind::End, src.size(), src.size());
  return out;
}

}  // namespace peb
