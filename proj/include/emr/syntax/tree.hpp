#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emr/syntax/token.hpp"

namespace emr::syntax {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

/// One node of the concrete syntax tree. Leaves correspond to lexical tokens
/// (comments are not part of the tree). A missing placeholder is a zero-width
/// leaf inserted where the grammar required a token that was not present; it
/// is always error-flagged too.
struct Node {
  std::string_view kind;  // static storage; keyword/punctuation leaves use the token text
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  std::vector<NodeId> children;
  bool is_error = false;
  bool is_missing = false;
  bool is_leaf = false;
};

/// Byte span plus 1-based inclusive line range.
struct LineSpan {
  int start_line = 0;
  int end_line = 0;
  friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

class SyntaxTree {
 public:
  SyntaxTree() = default;
  SyntaxTree(std::string source, std::vector<Node> nodes, NodeId root);

  const std::string& source() const { return source_; }
  NodeId root() const { return root_; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  std::string_view text(NodeId id) const;
  /// Token texts of the non-missing leaves under `id`, joined by single spaces.
  std::string normalized_text(NodeId id) const;
  LineSpan lines(NodeId id) const;
  int line_of(std::uint32_t byte_offset) const;

  std::size_t error_count() const;    // nodes with is_error (includes missing placeholders)
  std::size_t missing_count() const;  // missing placeholders only
  bool has_errors() const { return error_count() > 0; }

  /// Pre-order walk. Return false from the visitor to skip a subtree.
  void walk(NodeId from, const std::function<bool(NodeId)>& visit) const;
  void leaves(NodeId from, std::vector<NodeId>& out) const;

  /// First child of `id` with the given kind, or kNoNode.
  NodeId child_of_kind(NodeId id, std::string_view kind) const;

  /// Depth-indented S-expression style dump; handy when debugging grammar issues.
  std::string dump(NodeId from) const;

 private:
  std::string source_;
  std::vector<Node> nodes_;
  NodeId root_ = kNoNode;
  std::vector<std::uint32_t> line_starts_;
};

/// Parses Java source into a concrete syntax tree. Never throws on malformed
/// input: unparseable regions become ERROR nodes and required-but-absent tokens
/// become missing placeholders.
SyntaxTree parse_source(std::string_view text);

/// Parses `snippet` as the members of a synthetic class shell, the hosting
/// used for generated methods.
SyntaxTree parse_class_members(std::string_view snippet);

/// Shell used to host bare methods: "class __Gen {\n" + members + "\n}\n".
std::string wrap_in_class(std::string_view members);

namespace kinds {
inline constexpr std::string_view kProgram = "program";
inline constexpr std::string_view kError = "ERROR";
inline constexpr std::string_view kIdentifier = "identifier";
inline constexpr std::string_view kClassBody = "class_body";
inline constexpr std::string_view kMethod = "method_declaration";
inline constexpr std::string_view kConstructor = "constructor_declaration";
inline constexpr std::string_view kCompactConstructor = "compact_constructor_declaration";
inline constexpr std::string_view kFormalParameters = "formal_parameters";
inline constexpr std::string_view kFormalParameter = "formal_parameter";
inline constexpr std::string_view kSpreadParameter = "spread_parameter";
inline constexpr std::string_view kReceiverParameter = "receiver_parameter";
inline constexpr std::string_view kBlock = "block";
inline constexpr std::string_view kMethodInvocation = "method_invocation";
inline constexpr std::string_view kArgumentList = "argument_list";
inline constexpr std::string_view kVariableDeclarator = "variable_declarator";
inline constexpr std::string_view kLocalVariableDeclaration = "local_variable_declaration";
inline constexpr std::string_view kFieldDeclaration = "field_declaration";
inline constexpr std::string_view kLambda = "lambda_expression";
inline constexpr std::string_view kObjectCreation = "object_creation_expression";
}  // namespace kinds

/// True for node kinds that are Java statements (used for statement
/// fingerprints and statement counting).
bool is_statement_kind(std::string_view kind);

/// True for class-like declarations whose bodies contain members.
bool is_type_body_kind(std::string_view kind);

}  // namespace emr::syntax
