#include <algorithm>
#include <initializer_list>
#include <optional>
#include <string>
#include <unordered_set>

#include "emr/syntax/token.hpp"
#include "emr/syntax/tree.hpp"

namespace emr::syntax {

namespace {

// Leaf kinds for keywords and punctuation point into this table so every
// Node::kind has static storage duration.
const std::unordered_set<std::string_view>& static_kinds() {
  static const std::unordered_set<std::string_view> kKinds = [] {
    std::unordered_set<std::string_view> s = {
        ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=",
        "<=",   ">=",  "+=",  "-=",  "*=",  "/=", "&=", "|=", "^=", "%=", "<<", ">>", "(",
        ")",    "{",   "}",   "[",   "]",   ";",  ",",  ".",  "@",  "=",  ">",  "<",  "!",
        "~",    "?",   ":",   "+",   "-",   "*",  "/",  "&",  "|",  "^",  "%",  "expression",
        "statement", "type"};
    for (const auto& k : java_keywords()) s.insert(k);  // java_keywords() has static storage
    return s;
  }();
  return kKinds;
}

std::string_view intern_kind(std::string_view text) {
  const auto& table = static_kinds();
  auto it = table.find(text);
  return it == table.end() ? kinds::kError : *it;
}

bool is_primitive(std::string_view w) {
  return w == "int" || w == "long" || w == "short" || w == "byte" || w == "char" ||
         w == "boolean" || w == "float" || w == "double";
}

bool is_modifier_keyword(std::string_view w) {
  return w == "public" || w == "protected" || w == "private" || w == "static" ||
         w == "final" || w == "abstract" || w == "native" || w == "synchronized" ||
         w == "transient" || w == "volatile" || w == "strictfp" || w == "default";
}

bool is_assignment_op(std::string_view w) {
  return w == "=" || w == "+=" || w == "-=" || w == "*=" || w == "/=" || w == "%=" ||
         w == "&=" || w == "|=" || w == "^=" || w == "<<=" || w == ">>=" || w == ">>>=";
}

int binary_precedence(const Token& t) {
  if (t.kind != TokenKind::Operator && t.kind != TokenKind::Keyword) return -1;
  auto w = t.text;
  if (w == "||") return 1;
  if (w == "&&") return 2;
  if (w == "|") return 3;
  if (w == "^") return 4;
  if (w == "&") return 5;
  if (w == "==" || w == "!=") return 6;
  if (w == "<" || w == ">" || w == "<=" || w == ">=" || w == "instanceof") return 7;
  if (w == "<<" || w == ">>" || w == ">>>") return 8;
  if (w == "+" || w == "-") return 9;
  if (w == "*" || w == "/" || w == "%") return 10;
  return -1;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {
    toks_ = lex_significant(src);
    Token eof;
    eof.kind = TokenKind::EndOfInput;
    eof.start = eof.end = static_cast<std::uint32_t>(src.size());
    toks_.push_back(eof);
  }

  std::vector<Node> take_nodes() { return std::move(nodes_); }

  NodeId program() {
    std::vector<NodeId> kids;
    if (at("package")) kids.push_back(package_decl());
    while (!at_eof()) {
      std::size_t before = pos_;
      if (at("import")) {
        kids.push_back(import_decl());
      } else if (at(";")) {
        kids.push_back(leaf());
      } else {
        NodeId decl = type_declaration_or_kNoNode();
        if (decl != kNoNode) kids.push_back(decl);
      }
      if (pos_ == before) kids.push_back(recover(/*consume_close=*/true));
    }
    NodeId root = make(kinds::kProgram, kids);
    nodes_[root].start = 0;
    nodes_[root].end = static_cast<std::uint32_t>(src_.size());
    return root;
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n = 1) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  const Token& tok(std::size_t p) const { return toks_[std::min(p, toks_.size() - 1)]; }
  bool at(std::string_view s) const { return cur().is(s); }
  bool at_eof() const { return cur().kind == TokenKind::EndOfInput; }
  bool at_ident() const { return cur().is_identifier(); }
  bool at_ident(std::string_view word) const { return cur().is_identifier() && cur().text == word; }

  NodeId push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  NodeId leaf() {
    const Token& t = cur();
    Node n;
    n.is_leaf = true;
    n.start = t.start;
    n.end = t.end;
    switch (t.kind) {
      case TokenKind::Identifier: n.kind = kinds::kIdentifier; break;
      case TokenKind::IntegerLiteral: n.kind = "integer_literal"; break;
      case TokenKind::FloatLiteral: n.kind = "floating_point_literal"; break;
      case TokenKind::CharLiteral: n.kind = "character_literal"; break;
      case TokenKind::StringLiteral: n.kind = "string_literal"; break;
      case TokenKind::TextBlock: n.kind = "text_block"; break;
      case TokenKind::Invalid:
        n.kind = kinds::kError;
        n.is_error = true;
        break;
      default: n.kind = intern_kind(t.text); break;
    }
    if (!at_eof()) ++pos_;
    return push(std::move(n));
  }

  std::uint32_t prev_end() const { return pos_ > 0 ? toks_[pos_ - 1].end : 0; }

  NodeId missing(std::string_view kind) {
    Node n;
    n.kind = intern_kind(kind);
    if (n.kind == kinds::kError) n.kind = "expression";
    n.is_leaf = true;
    n.is_missing = true;
    n.is_error = true;
    n.start = n.end = prev_end();
    return push(std::move(n));
  }

  NodeId make(std::string_view kind, const std::vector<NodeId>& children) {
    Node n;
    n.kind = kind;
    bool first = true;
    for (NodeId c : children) {
      if (c == kNoNode) continue;
      n.children.push_back(c);
      const Node& cn = nodes_[c];
      if (first) {
        n.start = cn.start;
        n.end = cn.end;
        first = false;
      } else {
        n.start = std::min(n.start, cn.start);
        n.end = std::max(n.end, cn.end);
      }
    }
    if (first) n.start = n.end = prev_end();
    return push(std::move(n));
  }

  NodeId make(std::string_view kind, std::initializer_list<NodeId> children) {
    return make(kind, std::vector<NodeId>(children));
  }

  NodeId expect(std::string_view s) { return at(s) ? leaf() : missing(s); }

  NodeId expect_ident() {
    if (at_ident()) return leaf();
    return missing(kinds::kIdentifier);
  }

  // Consumes one '>' from the current token, splitting ">>", ">>>", ">=" etc.
  NodeId expect_close_angle() {
    Token& t = toks_[pos_];
    if (t.kind == TokenKind::Operator && !t.text.empty() && t.text[0] == '>') {
      if (t.text.size() == 1) return leaf();
      Node n;
      n.kind = intern_kind(">");
      n.is_leaf = true;
      n.start = t.start;
      n.end = t.start + 1;
      t.start += 1;
      t.text = t.text.substr(1);
      return push(std::move(n));
    }
    return missing(">");
  }

  // Skips an unparseable region into an ERROR node. Stops after ';', before an
  // unmatched '}', or at EOF; a brace group is consumed as a whole.
  NodeId recover(bool consume_close) {
    std::vector<NodeId> kids;
    while (!at_eof()) {
      if (at("}")) {
        if (consume_close && kids.empty()) kids.push_back(leaf());
        break;
      }
      if (at(";")) {
        kids.push_back(leaf());
        break;
      }
      if (at("{")) {
        int depth = 0;
        do {
          if (at("{")) ++depth;
          if (at("}")) --depth;
          kids.push_back(leaf());
        } while (depth > 0 && !at_eof());
        break;
      }
      kids.push_back(leaf());
    }
    NodeId e = make(kinds::kError, kids);
    nodes_[e].is_error = true;
    return e;
  }

  // ---- lookahead scanning (no nodes built) -------------------------------

  struct Scan {
    std::size_t p;
    int pending_gt = 0;
  };

  bool s_at(const Scan& s, std::string_view w) const {
    if (s.pending_gt > 0) return w == ">";
    return tok(s.p).is(w);
  }
  bool s_ident(const Scan& s) const { return s.pending_gt == 0 && tok(s.p).is_identifier(); }
  void s_next(Scan& s) const {
    if (s.pending_gt > 0) {
      --s.pending_gt;
    } else {
      ++s.p;
    }
  }

  bool s_close_gt(Scan& s) const {
    if (s.pending_gt > 0) {
      --s.pending_gt;
      return true;
    }
    const Token& t = tok(s.p);
    if (t.is(">")) {
      ++s.p;
      return true;
    }
    if (t.is(">>")) {
      ++s.p;
      s.pending_gt = 1;
      return true;
    }
    if (t.is(">>>")) {
      ++s.p;
      s.pending_gt = 2;
      return true;
    }
    return false;
  }

  bool s_annotation(Scan& s) const {
    if (!s_at(s, "@") || tok(s.p + 1).is("interface")) return false;
    s_next(s);
    if (!s_ident(s)) return false;
    s_next(s);
    while (s_at(s, ".") && tok(s.p + 1).is_identifier()) {
      s_next(s);
      s_next(s);
    }
    if (s_at(s, "(")) {
      int depth = 0;
      do {
        if (s_at(s, "(")) ++depth;
        if (s_at(s, ")")) --depth;
        if (tok(s.p).kind == TokenKind::EndOfInput) return false;
        s_next(s);
      } while (depth > 0);
    }
    return true;
  }

  bool s_type_args(Scan& s) const {
    if (!s_at(s, "<")) return false;
    s_next(s);
    if (s_close_gt(s)) return true;  // diamond
    while (true) {
      while (s_annotation(s)) {
      }
      if (s_at(s, "?")) {
        s_next(s);
        if (s_at(s, "extends") || s_at(s, "super")) {
          s_next(s);
          if (!s_type(s)) return false;
        }
      } else if (!s_type(s)) {
        return false;
      }
      if (s_at(s, ",")) {
        s_next(s);
        continue;
      }
      return s_close_gt(s);
    }
  }

  bool s_type(Scan& s) const {
    while (s_annotation(s)) {
    }
    const Token& t = tok(s.p);
    if (s.pending_gt > 0) return false;
    if (t.kind == TokenKind::Keyword && (is_primitive(t.text) || t.text == "void")) {
      s_next(s);
    } else if (t.is_identifier()) {
      s_next(s);
      if (s_at(s, "<") && !s_type_args(s)) return false;
      while (s_at(s, ".") && s.pending_gt == 0) {
        Scan look = s;
        s_next(look);
        while (s_annotation(look)) {
        }
        if (!s_ident(look)) break;
        s_next(look);
        s = look;
        if (s_at(s, "<") && !s_type_args(s)) return false;
      }
    } else {
      return false;
    }
    while (s.pending_gt == 0) {
      Scan look = s;
      while (s_annotation(look)) {
      }
      if (s_at(look, "[") && tok(look.p + 1).is("]")) {
        look.p += 2;
        s = look;
      } else {
        break;
      }
    }
    return true;
  }

  std::optional<std::size_t> scan_type(std::size_t p) const {
    Scan s{p};
    if (!s_type(s) || s.pending_gt != 0) return std::nullopt;
    return s.p;
  }

  std::size_t skip_modifiers(std::size_t p) const {
    while (true) {
      const Token& t = tok(p);
      if (t.kind == TokenKind::Keyword && is_modifier_keyword(t.text)) {
        ++p;
        continue;
      }
      if (t.is_identifier() && t.text == "sealed" &&
          (tok(p + 1).is_identifier() || tok(p + 1).kind == TokenKind::Keyword)) {
        ++p;
        continue;
      }
      if (t.is_identifier() && t.text == "non" && tok(p + 1).is("-") &&
          tok(p + 2).text == "sealed") {
        p += 3;
        continue;
      }
      if (t.is("@") && !tok(p + 1).is("interface")) {
        Scan s{p};
        if (!s_annotation(s)) return p;
        p = s.p;
        continue;
      }
      return p;
    }
  }

  std::size_t matching_paren(std::size_t p) const {
    int depth = 0;
    for (std::size_t i = p; i < toks_.size(); ++i) {
      if (toks_[i].is("(")) ++depth;
      if (toks_[i].is(")")) {
        if (--depth == 0) return i;
      }
      if (toks_[i].kind == TokenKind::EndOfInput) break;
    }
    return toks_.size() - 1;
  }

  bool is_lambda_start() const {
    if (at_ident() && peek().is("->")) return true;
    if (at("(")) {
      std::size_t close = matching_paren(pos_);
      return tok(close + 1).is("->");
    }
    return false;
  }

  bool starts_unary_operand(const Token& t) const {
    switch (t.kind) {
      case TokenKind::Identifier:
      case TokenKind::IntegerLiteral:
      case TokenKind::FloatLiteral:
      case TokenKind::CharLiteral:
      case TokenKind::StringLiteral:
      case TokenKind::TextBlock:
        return true;
      case TokenKind::Keyword:
        return t.text == "this" || t.text == "super" || t.text == "new" || t.text == "true" ||
               t.text == "false" || t.text == "null" || t.text == "switch" ||
               is_primitive(t.text) || t.text == "void";
      default:
        return t.is("(") || t.is("!") || t.is("~");
    }
  }

  bool is_cast() const {
    if (!at("(")) return false;
    const Token& first = peek();
    if (first.kind == TokenKind::Keyword && is_primitive(first.text)) {
      auto after = scan_type(pos_ + 1);
      return after && tok(*after).is(")");
    }
    auto after = scan_type(pos_ + 1);
    if (!after) return false;
    std::size_t p = *after;
    while (tok(p).is("&")) {
      auto more = scan_type(p + 1);
      if (!more) return false;
      p = *more;
    }
    if (!tok(p).is(")")) return false;
    return starts_unary_operand(tok(p + 1));
  }

  // `Type ident` at statement level, with optional leading modifiers.
  bool is_local_var_decl() const {
    std::size_t p = skip_modifiers(pos_);
    const Token& t = tok(p);
    if (t.kind == TokenKind::Keyword && is_primitive(t.text)) {
      return !tok(p + 1).is(".");
    }
    if (!t.is_identifier()) return false;
    auto after = scan_type(p);
    if (!after) return false;
    return tok(*after).is_identifier() && !tok(*after + 1).is("->");
  }

  bool is_class_decl_start(std::size_t p) const {
    p = skip_modifiers(p);
    const Token& t = tok(p);
    if (t.is("class") || t.is("interface") || t.is("enum")) return true;
    if (t.is("@") && tok(p + 1).is("interface")) return true;
    return t.is_identifier() && t.text == "record" && tok(p + 1).is_identifier() &&
           (tok(p + 2).is("(") || tok(p + 2).is("<"));
  }

  // ---- declarations -------------------------------------------------------

  NodeId qualified_name() {
    std::vector<NodeId> kids{expect_ident()};
    while (at(".") && peek().is_identifier()) {
      kids.push_back(leaf());
      kids.push_back(leaf());
    }
    return make("scoped_identifier", kids);
  }

  NodeId package_decl() {
    std::vector<NodeId> kids{leaf(), qualified_name(), expect(";")};
    return make("package_declaration", kids);
  }

  NodeId import_decl() {
    std::vector<NodeId> kids{leaf()};
    if (at("static")) kids.push_back(leaf());
    kids.push_back(expect_ident());
    while (at(".")) {
      kids.push_back(leaf());
      if (at("*")) {
        kids.push_back(leaf());
        break;
      }
      kids.push_back(expect_ident());
    }
    kids.push_back(expect(";"));
    return make("import_declaration", kids);
  }

  NodeId annotation() {
    std::vector<NodeId> kids{leaf()};  // '@'
    kids.push_back(expect_ident());
    while (at(".") && peek().is_identifier()) {
      kids.push_back(leaf());
      kids.push_back(leaf());
    }
    if (at("(")) {
      std::vector<NodeId> args{leaf()};
      while (!at(")") && !at_eof()) {
        std::size_t before = pos_;
        if (at_ident() && peek().is("=")) {
          NodeId name = leaf();
          NodeId eq = leaf();
          args.push_back(make("element_value_pair", {name, eq, element_value()}));
        } else {
          args.push_back(element_value());
        }
        if (at(",")) {
          args.push_back(leaf());
        } else if (pos_ == before || !at(")")) {
          break;
        }
      }
      args.push_back(expect(")"));
      kids.push_back(make("annotation_argument_list", args));
    }
    return make("annotation", kids);
  }

  NodeId element_value() {
    if (at("@") && !peek().is("interface")) return annotation();
    if (at("{")) {
      std::vector<NodeId> kids{leaf()};
      while (!at("}") && !at_eof()) {
        std::size_t before = pos_;
        kids.push_back(element_value());
        if (at(",")) kids.push_back(leaf());
        if (pos_ == before) break;
      }
      kids.push_back(expect("}"));
      return make("element_value_array_initializer", kids);
    }
    return ternary();
  }

  NodeId modifiers() {
    std::vector<NodeId> kids;
    while (true) {
      if (cur().kind == TokenKind::Keyword && is_modifier_keyword(cur().text)) {
        // `default:` / `default ->` inside a switch is a label, never reached here.
        kids.push_back(leaf());
      } else if (at_ident("sealed") &&
                 (peek().is_identifier() || peek().kind == TokenKind::Keyword)) {
        kids.push_back(leaf());
      } else if (at_ident("non") && peek().is("-") && tok(pos_ + 2).text == "sealed") {
        kids.push_back(leaf());
        kids.push_back(leaf());
        kids.push_back(leaf());
      } else if (at("@") && !peek().is("interface")) {
        kids.push_back(annotation());
      } else {
        break;
      }
    }
    if (kids.empty()) return kNoNode;
    return make("modifiers", kids);
  }

  NodeId type_declaration_or_kNoNode() {
    if (!is_class_decl_start(pos_)) return kNoNode;
    NodeId mods = modifiers();
    return type_declaration_after_modifiers(mods);
  }

  NodeId type_declaration_after_modifiers(NodeId mods) {
    if (at("class")) return class_declaration(mods);
    if (at("interface")) return interface_declaration(mods);
    if (at("enum")) return enum_declaration(mods);
    if (at("@") && peek().is("interface")) return annotation_type_declaration(mods);
    if (at_ident("record")) return record_declaration(mods);
    return kNoNode;
  }

  NodeId type_parameters() {
    std::vector<NodeId> kids{leaf()};  // '<'
    while (!at_eof()) {
      std::vector<NodeId> tp;
      while (at("@")) tp.push_back(annotation());
      tp.push_back(expect_ident());
      if (at("extends")) {
        std::vector<NodeId> bound{leaf(), type()};
        while (at("&")) {
          bound.push_back(leaf());
          bound.push_back(type());
        }
        tp.push_back(make("type_bound", bound));
      }
      kids.push_back(make("type_parameter", tp));
      if (at(",")) {
        kids.push_back(leaf());
        continue;
      }
      break;
    }
    kids.push_back(expect_close_angle());
    return make("type_parameters", kids);
  }

  NodeId type_list(std::string_view kind) {
    std::vector<NodeId> kids{leaf(), type()};
    while (at(",")) {
      kids.push_back(leaf());
      kids.push_back(type());
    }
    return make(kind, kids);
  }

  NodeId class_declaration(NodeId mods) {
    std::vector<NodeId> kids{mods, leaf()};
    kids.push_back(expect_ident());
    if (at("<")) kids.push_back(type_parameters());
    if (at("extends")) kids.push_back(make("superclass", {leaf(), type()}));
    if (at("implements")) kids.push_back(type_list("super_interfaces"));
    if (at_ident("permits")) kids.push_back(type_list("permits"));
    kids.push_back(class_body("class_body"));
    return make("class_declaration", kids);
  }

  NodeId interface_declaration(NodeId mods) {
    std::vector<NodeId> kids{mods, leaf()};
    kids.push_back(expect_ident());
    if (at("<")) kids.push_back(type_parameters());
    if (at("extends")) kids.push_back(type_list("extends_interfaces"));
    if (at_ident("permits")) kids.push_back(type_list("permits"));
    kids.push_back(class_body("interface_body"));
    return make("interface_declaration", kids);
  }

  NodeId annotation_type_declaration(NodeId mods) {
    std::vector<NodeId> kids{mods, leaf(), leaf()};
    kids.push_back(expect_ident());
    kids.push_back(class_body("annotation_type_body"));
    return make("annotation_type_declaration", kids);
  }

  NodeId record_declaration(NodeId mods) {
    std::vector<NodeId> kids{mods, leaf()};
    kids.push_back(expect_ident());
    if (at("<")) kids.push_back(type_parameters());
    kids.push_back(formal_parameters());
    if (at("implements")) kids.push_back(type_list("super_interfaces"));
    kids.push_back(class_body("class_body"));
    return make("record_declaration", kids);
  }

  NodeId enum_declaration(NodeId mods) {
    std::vector<NodeId> kids{mods, leaf()};
    kids.push_back(expect_ident());
    if (at("implements")) kids.push_back(type_list("super_interfaces"));
    std::vector<NodeId> body{expect("{")};
    while ((at_ident() || at("@")) && !at_eof()) {
      std::vector<NodeId> c;
      while (at("@")) c.push_back(annotation());
      c.push_back(expect_ident());
      if (at("(")) c.push_back(argument_list());
      if (at("{")) c.push_back(class_body("class_body"));
      body.push_back(make("enum_constant", c));
      if (at(",")) {
        body.push_back(leaf());
      } else {
        break;
      }
    }
    if (at(";")) {
      body.push_back(leaf());
      class_members(body);
    }
    body.push_back(expect("}"));
    kids.push_back(make("enum_body", body));
    return make("enum_declaration", kids);
  }

  NodeId class_body(std::string_view kind) {
    std::vector<NodeId> kids{expect("{")};
    if (nodes_[kids[0]].is_missing) return make(kind, kids);
    class_members(kids);
    kids.push_back(expect("}"));
    return make(kind, kids);
  }

  void class_members(std::vector<NodeId>& kids) {
    while (!at("}") && !at_eof()) {
      std::size_t before = pos_;
      NodeId m = member();
      if (m != kNoNode) kids.push_back(m);
      if (pos_ == before) kids.push_back(recover(/*consume_close=*/false));
    }
  }

  NodeId member() {
    if (at(";")) return leaf();
    if (at("{")) return make("block_initializer", {block()});
    if (at("static") && peek().is("{")) {
      NodeId s = leaf();
      return make("static_initializer", {s, block()});
    }
    if (is_class_decl_start(pos_)) return type_declaration_or_kNoNode();

    std::size_t start = pos_;
    NodeId mods = modifiers();
    NodeId tparams = at("<") ? type_parameters() : kNoNode;

    // constructor: Name ( ... )
    if (at_ident() && peek().is("(")) {
      std::vector<NodeId> kids{mods, tparams, leaf(), formal_parameters()};
      if (at("throws")) kids.push_back(type_list("throws"));
      kids.push_back(at("{") ? block() : missing("{"));
      return make(kinds::kConstructor, kids);
    }
    // compact canonical constructor of a record: Name {
    if (at_ident() && peek().is("{") && tparams == kNoNode) {
      std::vector<NodeId> kids{mods, leaf(), block()};
      return make(kinds::kCompactConstructor, kids);
    }
    if (!(at_ident() || (cur().kind == TokenKind::Keyword &&
                         (is_primitive(cur().text) || cur().text == "void")))) {
      if (pos_ == start) return kNoNode;
      return make(kinds::kError, {mods, tparams, missing("type")});
    }
    NodeId ty = type();
    if (at_ident() && peek().is("(")) {
      std::vector<NodeId> kids{mods, tparams, ty, leaf(), formal_parameters()};
      if (at("[")) kids.push_back(dimensions());
      if (at("throws")) kids.push_back(type_list("throws"));
      if (at("default")) {
        NodeId d = leaf();
        kids.push_back(make("default_value", {d, element_value()}));
      }
      if (at("{")) {
        kids.push_back(block());
      } else {
        kids.push_back(expect(";"));
      }
      return make(kinds::kMethod, kids);
    }
    std::vector<NodeId> kids{mods, ty};
    kids.push_back(variable_declarator());
    while (at(",")) {
      kids.push_back(leaf());
      kids.push_back(variable_declarator());
    }
    kids.push_back(expect(";"));
    return make(kinds::kFieldDeclaration, kids);
  }

  NodeId formal_parameters() {
    std::vector<NodeId> kids{expect("(")};
    if (nodes_[kids[0]].is_missing) return make(kinds::kFormalParameters, kids);
    while (!at(")") && !at_eof()) {
      std::size_t p = skip_modifiers(pos_);
      const Token& t = tok(p);
      bool typed = t.is_identifier() ||
                   (t.kind == TokenKind::Keyword && is_primitive(t.text));
      if (!typed) break;
      kids.push_back(formal_parameter());
      if (at(",")) {
        kids.push_back(leaf());
      } else {
        break;
      }
    }
    kids.push_back(expect(")"));
    return make(kinds::kFormalParameters, kids);
  }

  NodeId formal_parameter() {
    NodeId mods = modifiers();
    NodeId ty = type();
    if (at("...")) {
      NodeId dots = leaf();
      return make(kinds::kSpreadParameter, {mods, ty, dots, expect_ident()});
    }
    if (at("this")) return make(kinds::kReceiverParameter, {mods, ty, leaf()});
    if (at_ident() && peek().is(".") && tok(pos_ + 2).is("this")) {
      NodeId a = leaf();
      NodeId b = leaf();
      return make(kinds::kReceiverParameter, {mods, ty, a, b, leaf()});
    }
    std::vector<NodeId> kids{mods, ty, expect_ident()};
    if (at("[")) kids.push_back(dimensions());
    return make(kinds::kFormalParameter, kids);
  }

  NodeId dimensions() {
    std::vector<NodeId> kids;
    while (at("[") && peek().is("]")) {
      kids.push_back(leaf());
      kids.push_back(leaf());
    }
    return make("dimensions", kids);
  }

  NodeId variable_declarator() {
    std::vector<NodeId> kids{expect_ident()};
    if (at("[")) kids.push_back(dimensions());
    if (at("=")) {
      kids.push_back(leaf());
      kids.push_back(at("{") ? array_initializer() : expression());
    }
    return make(kinds::kVariableDeclarator, kids);
  }

  NodeId array_initializer() {
    std::vector<NodeId> kids{leaf()};
    while (!at("}") && !at_eof()) {
      std::size_t before = pos_;
      kids.push_back(at("{") ? array_initializer() : expression());
      if (at(",")) {
        kids.push_back(leaf());
      } else {
        break;
      }
      if (pos_ == before) break;
    }
    kids.push_back(expect("}"));
    return make("array_initializer", kids);
  }

  // ---- types --------------------------------------------------------------

  NodeId type_arguments() {
    std::vector<NodeId> kids{leaf()};  // '<'
    if (cur().kind == TokenKind::Operator && !cur().text.empty() && cur().text[0] == '>') {
      kids.push_back(expect_close_angle());
      return make("type_arguments", kids);
    }
    while (!at_eof()) {
      while (at("@")) kids.push_back(annotation());
      if (at("?")) {
        std::vector<NodeId> w{leaf()};
        if (at("extends") || at("super")) {
          w.push_back(leaf());
          w.push_back(type());
        }
        kids.push_back(make("wildcard", w));
      } else {
        kids.push_back(type());
      }
      if (at(",")) {
        kids.push_back(leaf());
        continue;
      }
      break;
    }
    kids.push_back(expect_close_angle());
    return make("type_arguments", kids);
  }

  // A type without trailing dimensions.
  NodeId unann_type() {
    std::vector<NodeId> kids;
    while (at("@") && !peek().is("interface")) kids.push_back(annotation());
    if (cur().kind == TokenKind::Keyword && (is_primitive(cur().text) || cur().text == "void")) {
      kids.push_back(leaf());
      return make("type", kids);
    }
    kids.push_back(expect_ident());
    if (at("<")) kids.push_back(type_arguments());
    while (at(".")) {
      std::size_t p = pos_ + 1;
      while (tok(p).is("@")) {
        Scan s{p};
        if (!s_annotation(s)) break;
        p = s.p;
      }
      if (!tok(p).is_identifier()) break;
      kids.push_back(leaf());
      while (at("@")) kids.push_back(annotation());
      kids.push_back(leaf());
      if (at("<")) kids.push_back(type_arguments());
    }
    return make("type", kids);
  }

  NodeId type() {
    NodeId base = unann_type();
    if (at("[") && peek().is("]")) return make("array_type", {base, dimensions()});
    return base;
  }

  // ---- statements ---------------------------------------------------------

  NodeId block() {
    std::vector<NodeId> kids{expect("{")};
    if (nodes_[kids[0]].is_missing) return make(kinds::kBlock, kids);
    while (!at("}") && !at_eof()) {
      std::size_t before = pos_;
      kids.push_back(block_statement());
      if (pos_ == before) kids.push_back(recover(/*consume_close=*/false));
    }
    kids.push_back(expect("}"));
    return make(kinds::kBlock, kids);
  }

  NodeId block_statement() {
    if (is_class_decl_start(pos_)) {
      NodeId decl = type_declaration_or_kNoNode();
      return make("local_class_declaration", {decl});
    }
    if (is_local_var_decl()) return local_variable_declaration(/*with_semicolon=*/true);
    return statement();
  }

  NodeId local_variable_declaration(bool with_semicolon) {
    std::vector<NodeId> kids{modifiers(), type(), variable_declarator()};
    while (at(",")) {
      kids.push_back(leaf());
      kids.push_back(variable_declarator());
    }
    if (with_semicolon) kids.push_back(expect(";"));
    return make(kinds::kLocalVariableDeclaration, kids);
  }

  NodeId paren_expression() {
    NodeId open = expect("(");
    NodeId e = expression();
    return make("parenthesized_expression", {open, e, expect(")")});
  }

  bool is_yield_statement() const {
    if (!at_ident("yield")) return false;
    const Token& n = peek();
    if (n.kind == TokenKind::Operator &&
        (is_assignment_op(n.text) || n.text == "++" || n.text == "--" || n.text == "->" ||
         n.text == "::"))
      return false;
    if (n.is(".") || n.is("[") || n.is(";") || n.is(":")) return false;
    return true;
  }

  NodeId statement() {
    const Token& t = cur();
    if (t.is("{")) return block();
    if (t.is(";")) return make("empty_statement", {leaf()});
    if (t.is("if")) {
      std::vector<NodeId> kids{leaf(), paren_expression(), statement()};
      if (at("else")) {
        kids.push_back(leaf());
        kids.push_back(statement());
      }
      return make("if_statement", kids);
    }
    if (t.is("while")) {
      NodeId w = leaf();
      NodeId cond = paren_expression();
      return make("while_statement", {w, cond, statement()});
    }
    if (t.is("do")) {
      NodeId d = leaf();
      NodeId body = statement();
      NodeId w = expect("while");
      NodeId cond = paren_expression();
      return make("do_statement", {d, body, w, cond, expect(";")});
    }
    if (t.is("for")) return for_statement();
    if (t.is("return")) {
      std::vector<NodeId> kids{leaf()};
      if (!at(";")) kids.push_back(expression());
      kids.push_back(expect(";"));
      return make("return_statement", kids);
    }
    if (t.is("throw")) {
      NodeId th = leaf();
      NodeId e = expression();
      return make("throw_statement", {th, e, expect(";")});
    }
    if (t.is("break") || t.is("continue")) {
      std::string_view kind = t.is("break") ? "break_statement" : "continue_statement";
      std::vector<NodeId> kids{leaf()};
      if (at_ident()) kids.push_back(leaf());
      kids.push_back(expect(";"));
      return make(kind, kids);
    }
    if (is_yield_statement()) {
      NodeId y = leaf();
      NodeId e = expression();
      return make("yield_statement", {y, e, expect(";")});
    }
    if (t.is("synchronized")) {
      NodeId s = leaf();
      NodeId e = paren_expression();
      return make("synchronized_statement", {s, e, block()});
    }
    if (t.is("assert")) {
      std::vector<NodeId> kids{leaf(), expression()};
      if (at(":")) {
        kids.push_back(leaf());
        kids.push_back(expression());
      }
      kids.push_back(expect(";"));
      return make("assert_statement", kids);
    }
    if (t.is("try")) return try_statement();
    if (t.is("switch")) {
      NodeId sw = leaf();
      NodeId cond = paren_expression();
      return make("switch_statement", {sw, cond, switch_block()});
    }
    if (t.is_identifier() && peek().is(":")) {
      NodeId label = leaf();
      NodeId colon = leaf();
      return make("labeled_statement", {label, colon, statement()});
    }
    if ((t.is("this") || t.is("super")) && peek().is("(")) {
      NodeId kw = leaf();
      NodeId args = argument_list();
      return make("explicit_constructor_invocation", {kw, args, expect(";")});
    }
    if (t.kind == TokenKind::EndOfInput || t.is("}")) return missing("statement");
    std::size_t before = pos_;
    NodeId e = expression();
    if (pos_ == before) return e;  // nothing consumed; caller recovers
    return make("expression_statement", {e, expect(";")});
  }

  NodeId for_statement() {
    std::vector<NodeId> kids{leaf(), expect("(")};
    // enhanced for: [mods] Type name [dims] ':'
    if (is_local_var_decl()) {
      std::size_t p = skip_modifiers(pos_);
      auto after = scan_type(p);
      if (!after && tok(p).kind == TokenKind::Keyword) after = scan_type(p);
      if (after) {
        std::size_t q = *after + 1;
        while (tok(q).is("[") && tok(q + 1).is("]")) q += 2;
        if (tok(q).is(":")) {
          kids.push_back(modifiers());
          kids.push_back(type());
          kids.push_back(expect_ident());
          if (at("[")) kids.push_back(dimensions());
          kids.push_back(leaf());  // ':'
          kids.push_back(expression());
          kids.push_back(expect(")"));
          kids.push_back(statement());
          return make("enhanced_for_statement", kids);
        }
      }
      kids.push_back(local_variable_declaration(/*with_semicolon=*/false));
    } else {
      while (!at(";") && !at_eof() && !at(")")) {
        std::size_t before = pos_;
        kids.push_back(expression());
        if (at(",")) {
          kids.push_back(leaf());
        } else {
          break;
        }
        if (pos_ == before) break;
      }
    }
    kids.push_back(expect(";"));
    if (!at(";")) kids.push_back(expression());
    kids.push_back(expect(";"));
    while (!at(")") && !at_eof()) {
      std::size_t before = pos_;
      kids.push_back(expression());
      if (at(",")) {
        kids.push_back(leaf());
      } else {
        break;
      }
      if (pos_ == before) break;
    }
    kids.push_back(expect(")"));
    kids.push_back(statement());
    return make("for_statement", kids);
  }

  NodeId try_statement() {
    std::vector<NodeId> kids{leaf()};
    bool resources = false;
    if (at("(")) {
      resources = true;
      std::vector<NodeId> spec{leaf()};
      while (!at(")") && !at_eof()) {
        std::size_t before = pos_;
        if (is_local_var_decl()) {
          NodeId mods = modifiers();
          NodeId ty = type();
          NodeId name = expect_ident();
          NodeId eq = expect("=");
          spec.push_back(make("resource", {mods, ty, name, eq, expression()}));
        } else {
          spec.push_back(make("resource", {expression()}));
        }
        if (at(";")) spec.push_back(leaf());
        if (pos_ == before) break;
      }
      spec.push_back(expect(")"));
      kids.push_back(make("resource_specification", spec));
    }
    kids.push_back(block());
    bool handlers = false;
    while (at("catch")) {
      handlers = true;
      std::vector<NodeId> c{leaf(), expect("(")};
      std::vector<NodeId> param{modifiers()};
      std::vector<NodeId> types{type()};
      while (at("|")) {
        types.push_back(leaf());
        types.push_back(type());
      }
      param.push_back(make("catch_type", types));
      param.push_back(expect_ident());
      c.push_back(make("catch_formal_parameter", param));
      c.push_back(expect(")"));
      c.push_back(block());
      kids.push_back(make("catch_clause", c));
    }
    if (at("finally")) {
      handlers = true;
      NodeId f = leaf();
      kids.push_back(make("finally_clause", {f, block()}));
    }
    if (!handlers && !resources) kids.push_back(missing("catch"));
    return make(resources ? "try_with_resources_statement" : "try_statement", kids);
  }

  bool is_type_pattern() const {
    std::size_t p = skip_modifiers(pos_);
    auto after = scan_type(p);
    if (!after || !tok(*after).is_identifier()) return false;
    const Token& n = tok(*after + 1);
    return n.is("->") || n.is(":") || n.is(",") || (n.is_identifier() && n.text == "when");
  }

  NodeId switch_label() {
    std::vector<NodeId> kids{leaf()};  // case / default
    if (nodes_[kids[0]].kind == "default") return make("switch_label", kids);
    while (!at_eof()) {
      if (at("default")) {
        kids.push_back(leaf());
      } else if (is_type_pattern()) {
        NodeId mods = modifiers();
        NodeId ty = type();
        kids.push_back(make("type_pattern", {mods, ty, leaf()}));
      } else {
        kids.push_back(ternary());
      }
      if (at(",")) {
        kids.push_back(leaf());
        continue;
      }
      break;
    }
    if (at_ident("when")) {
      NodeId w = leaf();
      kids.push_back(make("guard", {w, expression()}));
    }
    return make("switch_label", kids);
  }

  NodeId switch_block() {
    std::vector<NodeId> kids{expect("{")};
    if (nodes_[kids[0]].is_missing) return make("switch_block", kids);
    while (!at("}") && !at_eof()) {
      std::size_t before = pos_;
      if (at("case") || at("default")) {
        NodeId label = switch_label();
        if (at("->")) {
          NodeId arrow = leaf();
          NodeId body;
          if (at("{")) {
            body = block();
          } else if (at("throw")) {
            body = statement();
          } else {
            NodeId e = expression();
            body = make("expression_statement", {e, expect(";")});
          }
          kids.push_back(make("switch_rule", {label, arrow, body}));
        } else {
          std::vector<NodeId> group{label, expect(":")};
          while ((at("case") || at("default")) && !peek().is("->")) {
            NodeId l = switch_label();
            group.push_back(l);
            group.push_back(expect(":"));
          }
          while (!at("case") && !at("default") && !at("}") && !at_eof()) {
            std::size_t b = pos_;
            group.push_back(block_statement());
            if (pos_ == b) group.push_back(recover(/*consume_close=*/false));
          }
          kids.push_back(make("switch_block_statement_group", group));
        }
      }
      if (pos_ == before) kids.push_back(recover(/*consume_close=*/false));
    }
    kids.push_back(expect("}"));
    return make("switch_block", kids);
  }

  // ---- expressions --------------------------------------------------------

  NodeId expression() {
    if (is_lambda_start()) return lambda();
    NodeId lhs = ternary();
    if (cur().kind == TokenKind::Operator && is_assignment_op(cur().text)) {
      NodeId op = leaf();
      NodeId rhs = expression();
      return make("assignment_expression", {lhs, op, rhs});
    }
    return lhs;
  }

  NodeId lambda() {
    NodeId params;
    if (at_ident()) {
      params = leaf();
    } else {
      std::size_t close = matching_paren(pos_);
      bool inferred = true;
      for (std::size_t i = pos_ + 1; i < close; ++i) {
        const Token& t = toks_[i];
        bool ok = (t.is_identifier() && ((i - pos_) % 2 == 1)) || (t.is(",") && ((i - pos_) % 2 == 0));
        if (!ok) {
          inferred = false;
          break;
        }
      }
      if (inferred) {
        std::vector<NodeId> kids{leaf()};
        while (!at(")") && !at_eof()) kids.push_back(leaf());
        kids.push_back(expect(")"));
        params = make("inferred_parameters", kids);
      } else {
        params = formal_parameters();
      }
    }
    NodeId arrow = expect("->");
    NodeId body = at("{") ? block() : expression();
    return make(kinds::kLambda, {params, arrow, body});
  }

  NodeId ternary() {
    NodeId cond = binary(1);
    if (!at("?")) return cond;
    NodeId q = leaf();
    NodeId then_e = expression();
    NodeId colon = expect(":");
    NodeId else_e = is_lambda_start() ? lambda() : ternary();
    return make("ternary_expression", {cond, q, then_e, colon, else_e});
  }

  NodeId binary(int min_prec) {
    NodeId left = unary();
    while (true) {
      int prec = binary_precedence(cur());
      if (prec < min_prec || prec < 0) break;
      if (at("instanceof")) {
        std::vector<NodeId> kids{left, leaf()};
        if (at("final")) kids.push_back(leaf());
        kids.push_back(type());
        if (at_ident() && !(binary_precedence(cur()) >= 0)) kids.push_back(leaf());
        left = make("instanceof_expression", kids);
        continue;
      }
      NodeId op = leaf();
      NodeId right = binary(prec + 1);
      left = make("binary_expression", {left, op, right});
    }
    return left;
  }

  NodeId unary() {
    if (at("++") || at("--")) {
      NodeId op = leaf();
      return make("update_expression", {op, unary()});
    }
    if (at("+") || at("-") || at("!") || at("~")) {
      NodeId op = leaf();
      return make("unary_expression", {op, unary()});
    }
    if (is_cast()) {
      std::vector<NodeId> kids{leaf(), type()};
      while (at("&")) {
        kids.push_back(leaf());
        kids.push_back(type());
      }
      kids.push_back(expect(")"));
      kids.push_back(is_lambda_start() ? lambda() : unary());
      return make("cast_expression", kids);
    }
    NodeId e = postfix(primary());
    while (at("++") || at("--")) e = make("update_expression", {e, leaf()});
    return e;
  }

  NodeId argument_list() {
    std::vector<NodeId> kids{expect("(")};
    if (nodes_[kids[0]].is_missing) return make(kinds::kArgumentList, kids);
    while (!at(")") && !at_eof()) {
      std::size_t before = pos_;
      kids.push_back(expression());
      if (at(",")) {
        kids.push_back(leaf());
      } else {
        break;
      }
      if (pos_ == before) break;
    }
    kids.push_back(expect(")"));
    return make(kinds::kArgumentList, kids);
  }

  NodeId primary() {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::IntegerLiteral:
      case TokenKind::FloatLiteral:
      case TokenKind::CharLiteral:
      case TokenKind::StringLiteral:
      case TokenKind::TextBlock:
        return leaf();
      case TokenKind::Identifier: {
        if (peek().is("(")) {
          NodeId name = leaf();
          return make(kinds::kMethodInvocation, {name, argument_list()});
        }
        // Generic or array type used as a method reference target: List<String>::new
        if (peek().is("<") || peek().is("[")) {
          auto after = scan_type(pos_);
          if (after && tok(*after).is("::")) return type();
        }
        return leaf();
      }
      case TokenKind::Keyword: {
        if (t.text == "true" || t.text == "false" || t.text == "null" || t.text == "this" ||
            t.text == "super") {
          return leaf();
        }
        if (t.text == "new") return creator(kNoNode, kNoNode);
        if (t.text == "switch") {
          NodeId sw = leaf();
          NodeId cond = paren_expression();
          return make("switch_expression", {sw, cond, switch_block()});
        }
        if (is_primitive(t.text) || t.text == "void") return type();
        break;
      }
      default:
        if (t.is("(")) return paren_expression();
        break;
    }
    return missing("expression");
  }

  NodeId creator(NodeId outer, NodeId dot) {
    std::vector<NodeId> kids{outer, dot, leaf()};  // 'new'
    if (at("<")) kids.push_back(type_arguments());
    NodeId ty = unann_type();
    kids.push_back(ty);
    if (at("[")) {
      while (at("[")) {
        if (peek().is("]")) {
          kids.push_back(dimensions());
          break;
        }
        NodeId open = leaf();
        NodeId e = expression();
        kids.push_back(make("dimensions_expr", {open, e, expect("]")}));
      }
      if (at("{")) kids.push_back(array_initializer());
      return make("array_creation_expression", kids);
    }
    kids.push_back(argument_list());
    if (at("{")) kids.push_back(class_body("class_body"));
    return make(kinds::kObjectCreation, kids);
  }

  NodeId postfix(NodeId e) {
    while (true) {
      if (at(".")) {
        NodeId dot = leaf();
        if (at("<")) {
          NodeId targs = type_arguments();
          NodeId name = expect_ident();
          e = make(kinds::kMethodInvocation, {e, dot, targs, name, argument_list()});
        } else if (at_ident() && peek().is("(")) {
          NodeId name = leaf();
          e = make(kinds::kMethodInvocation, {e, dot, name, argument_list()});
        } else if (at_ident() || at("this") || at("super")) {
          NodeId name = leaf();
          e = make("field_access", {e, dot, name});
        } else if (at("class")) {
          NodeId cls = leaf();
          e = make("class_literal", {e, dot, cls});
        } else if (at("new")) {
          e = creator(e, dot);
        } else {
          e = make("field_access", {e, dot, missing(kinds::kIdentifier)});
          break;
        }
      } else if (at("[")) {
        if (peek().is("]")) {
          e = make("array_type", {e, dimensions()});
          continue;
        }
        NodeId open = leaf();
        NodeId idx = expression();
        e = make("array_access", {e, open, idx, expect("]")});
      } else if (at("::")) {
        std::vector<NodeId> kids{e, leaf()};
        if (at("<")) kids.push_back(type_arguments());
        if (at("new")) {
          kids.push_back(leaf());
        } else {
          kids.push_back(expect_ident());
        }
        e = make("method_reference", kids);
      } else {
        break;
      }
    }
    return e;
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
};

}  // namespace

SyntaxTree parse_source(std::string_view text) {
  std::string owned(text);
  Parser parser(owned);
  NodeId root = parser.program();
  return SyntaxTree(std::move(owned), parser.take_nodes(), root);
}

}  // namespace emr::syntax
