#include "emr/syntax/token.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace emr::syntax {

namespace {

const std::unordered_set<std::string_view>& keyword_set() {
  static const std::unordered_set<std::string_view> kKeywords = {
      "abstract", "assert",     "boolean",  "break",     "byte",       "case",
      "catch",    "char",       "class",    "const",     "continue",   "default",
      "do",       "double",     "else",     "enum",      "extends",    "final",
      "finally",  "float",      "for",      "goto",      "if",         "implements",
      "import",   "instanceof", "int",      "interface", "long",       "native",
      "new",      "package",    "private",  "protected", "public",     "return",
      "short",    "static",     "strictfp", "super",     "switch",     "synchronized",
      "this",     "throw",      "throws",   "transient", "try",        "void",
      "volatile", "while",      "true",     "false",     "null"};
  return kKeywords;
}

// Longest operators first so maximal munch works with a linear scan.
constexpr std::array<std::string_view, 50> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==",
    "!=",   "<=",  ">=",  "+=",  "-=",  "*=", "/=", "&=", "|=", "^=", "%=", "<<",
    ">>",   "(",   ")",   "{",   "}",   "[",  "]",  ";",  ",",  ".",  "@",  "=",
    ">",    "<",   "!",   "~",   "?",   ":",  "+",  "-",  "*",  "/",  "&",  "|",
    "^",    "%"};

bool is_separator(std::string_view op) {
  return op == "(" || op == ")" || op == "{" || op == "}" || op == "[" || op == "]" ||
         op == ";" || op == "," || op == "." || op == "...";
}

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_part(unsigned char c) { return ident_start(c) || std::isdigit(c); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_whitespace();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    Token eof;
    eof.kind = TokenKind::EndOfInput;
    eof.start = eof.end = static_cast<std::uint32_t>(src_.size());
    eof.text = src_.substr(src_.size());
    out.push_back(eof);
    return out;
  }

 private:
  char peek(std::size_t off = 0) const {
    return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
  }

  void skip_whitespace() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  Token make(TokenKind kind, std::size_t start) const {
    Token t;
    t.kind = kind;
    t.start = static_cast<std::uint32_t>(start);
    t.end = static_cast<std::uint32_t>(pos_);
    t.text = src_.substr(start, pos_ - start);
    return t;
  }

  Token next() {
    std::size_t start = pos_;
    char c = peek();
    if (c == '/' && peek(1) == '/') {
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      return make(TokenKind::Comment, start);
    }
    if (c == '/' && peek(1) == '*') {
      auto close = src_.find("*/", pos_ + 2);
      if (close == std::string_view::npos) {
        pos_ = src_.size();
        return make(TokenKind::Invalid, start);
      }
      pos_ = close + 2;
      return make(TokenKind::Comment, start);
    }
    if (ident_start(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && ident_part(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      auto word = src_.substr(start, pos_ - start);
      return make(keyword_set().contains(word) ? TokenKind::Keyword : TokenKind::Identifier,
                  start);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return number(start);
    }
    if (c == '"') return string_or_text_block(start);
    if (c == '\'') return char_literal(start);
    for (auto op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        pos_ += op.size();
        return make(is_separator(op) ? TokenKind::Separator : TokenKind::Operator, start);
      }
    }
    // Consume one whole UTF-8 sequence so the token never splits a code point.
    ++pos_;
    while (pos_ < src_.size() && (static_cast<unsigned char>(src_[pos_]) & 0xC0) == 0x80) ++pos_;
    return make(TokenKind::Invalid, start);
  }

  Token number(std::size_t start) {
    bool is_float = false;
    auto digits = [&](auto pred) {
      while (pos_ < src_.size() && (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
    };
    auto is_dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
    auto is_hex = [](unsigned char ch) { return std::isxdigit(ch) != 0; };
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      pos_ += 2;
      digits(is_hex);
      if (peek() == '.') {
        ++pos_;
        digits(is_hex);
        is_float = true;
      }
      if (peek() == 'p' || peek() == 'P') {
        is_float = true;
        ++pos_;
        if (peek() == '+' || peek() == '-') ++pos_;
        digits(is_dec);
      }
    } else if (peek() == '0' && (peek(1) == 'b' || peek(1) == 'B')) {
      pos_ += 2;
      digits([](unsigned char ch) { return ch == '0' || ch == '1'; });
    } else {
      digits(is_dec);
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        ++pos_;
        digits(is_dec);
        is_float = true;
      } else if (peek() == '.' && !ident_start(static_cast<unsigned char>(peek(1))) &&
                 peek(1) != '.') {
        // "1." is a valid double literal
        ++pos_;
        is_float = true;
      }
      if (peek() == 'e' || peek() == 'E') {
        std::size_t save = pos_;
        ++pos_;
        if (peek() == '+' || peek() == '-') ++pos_;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
          digits(is_dec);
          is_float = true;
        } else {
          pos_ = save;
        }
      }
    }
    char suffix = peek();
    if (suffix == 'f' || suffix == 'F' || suffix == 'd' || suffix == 'D') {
      ++pos_;
      is_float = true;
    } else if (suffix == 'l' || suffix == 'L') {
      ++pos_;
    }
    return make(is_float ? TokenKind::FloatLiteral : TokenKind::IntegerLiteral, start);
  }

  Token string_or_text_block(std::size_t start) {
    if (src_.substr(pos_, 3) == "\"\"\"") {
      pos_ += 3;
      while (pos_ < src_.size()) {
        if (src_[pos_] == '\\') {
          pos_ += 2;
          continue;
        }
        if (src_.substr(pos_, 3) == "\"\"\"") {
          pos_ += 3;
          return make(TokenKind::TextBlock, start);
        }
        ++pos_;
      }
      pos_ = src_.size();
      return make(TokenKind::Invalid, start);
    }
    ++pos_;
    while (pos_ < src_.size()) {
      char ch = src_[pos_];
      if (ch == '\\') {
        pos_ += 2;
        continue;
      }
      if (ch == '\n') break;
      ++pos_;
      if (ch == '"') return make(TokenKind::StringLiteral, start);
    }
    pos_ = std::min(pos_, src_.size());
    return make(TokenKind::Invalid, start);
  }

  Token char_literal(std::size_t start) {
    ++pos_;
    while (pos_ < src_.size()) {
      char ch = src_[pos_];
      if (ch == '\\') {
        pos_ += 2;
        continue;
      }
      if (ch == '\n') break;
      ++pos_;
      if (ch == '\'') return make(TokenKind::CharLiteral, start);
    }
    pos_ = std::min(pos_, src_.size());
    return make(TokenKind::Invalid, start);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Token> lex(std::string_view source) { return Lexer(source).run(); }

std::vector<Token> lex_significant(std::string_view source) {
  auto all = lex(source);
  std::vector<Token> out;
  out.reserve(all.size());
  for (const auto& t : all) {
    if (t.kind != TokenKind::Comment && t.kind != TokenKind::EndOfInput) out.push_back(t);
  }
  return out;
}

std::vector<std::string> token_texts(std::string_view source) {
  std::vector<std::string> out;
  for (const auto& t : lex_significant(source)) out.emplace_back(t.text);
  return out;
}

std::size_t count_tokens(std::string_view source) { return lex_significant(source).size(); }

bool is_java_keyword(std::string_view word) { return keyword_set().contains(word); }

const std::vector<std::string>& java_keywords() {
  static const std::vector<std::string> kList = [] {
    std::vector<std::string> v(keyword_set().begin(), keyword_set().end());
    std::sort(v.begin(), v.end());
    return v;
  }();
  return kList;
}

}  // namespace emr::syntax
