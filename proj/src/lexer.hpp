// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "peb/ast.hpp"

namespace peb {

enum class TokenKind { End, Ident, Int, Decimal, String, Punct, Error };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  std::uint32_t line = 1;
  std::uint32_t column = 1;
  std::size_t offset = 0;
  std::size_t length = 0;
  bool space_before = false;

  bool is(std::string_view punct) const { return kind == TokenKind::Punct && text == punct; }
  bool is_word(std::string_view word) const { return kind == TokenKind::Ident && text == word; }
};

/// Splits model text into tokens. `---` starts a comment running to the end
/// of the line. Malformed input yields a single Error token at the fault.
std::vector<Token> tokenize(std::string_view source);

}  // namespace peb
