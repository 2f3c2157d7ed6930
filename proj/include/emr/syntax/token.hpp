#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace emr::syntax {

enum class TokenKind : std::uint8_t {
  Identifier,
  Keyword,
  IntegerLiteral,
  FloatLiteral,
  CharLiteral,
  StringLiteral,
  TextBlock,
  Operator,     // + - = == -> :: etc, and '@'
  Separator,    // ( ) { } [ ] ; , . ...
  Comment,
  Invalid,      // stray character or unterminated literal/comment
  EndOfInput,
};

struct Token {
  TokenKind kind = TokenKind::EndOfInput;
  std::uint32_t start = 0;  // byte offset, inclusive
  std::uint32_t end = 0;    // byte offset, exclusive
  std::string_view text;    // view into the lexed source

  bool is(std::string_view s) const {
    return (kind == TokenKind::Operator || kind == TokenKind::Separator ||
            kind == TokenKind::Keyword) &&
           text == s;
  }
  bool is_identifier() const { return kind == TokenKind::Identifier; }
};

/// Tokenizes Java source. Comments are emitted as Comment tokens; callers that
/// want the lexical stream only use `lex_significant`.
std::vector<Token> lex(std::string_view source);

/// Same as `lex` with comments removed and without the trailing EndOfInput.
std::vector<Token> lex_significant(std::string_view source);

/// Lexical token texts (comments excluded). Shared by the length filter and the
/// text metrics.
std::vector<std::string> token_texts(std::string_view source);

/// Number of lexical tokens, comments excluded.
std::size_t count_tokens(std::string_view source);

bool is_java_keyword(std::string_view word);

/// Java reserved words plus the literals true/false/null.
const std::vector<std::string>& java_keywords();

}  // namespace emr::syntax
