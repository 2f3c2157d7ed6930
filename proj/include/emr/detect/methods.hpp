#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emr/syntax/tree.hpp"

namespace emr::detect {

struct Parameter {
  std::string type;
  std::string name;
  friend bool operator==(const Parameter&, const Parameter&) = default;
};

/// Comment-free, whitespace-canonical form of one statement. Nested
/// statements get their own fingerprints (see `MethodDecl::body_statements`).
struct StatementFingerprint {
  std::string normalized_text;
  std::string kind;
  syntax::LineSpan lines;
  friend bool operator==(const StatementFingerprint&, const StatementFingerprint&) = default;
};

struct MethodDecl {
  std::string name;
  std::vector<Parameter> parameters;
  /// Every statement of the body in pre-order, nested ones included, so a block
  /// lifted out of a loop still lines up with the caller's statements.
  std::vector<StatementFingerprint> body_statements;
  syntax::LineSpan source_span;
  std::string source_text;
  std::uint32_t start_byte = 0;
  std::uint32_t end_byte = 0;
  /// Names of unqualified or `this.`-qualified invocations inside the body.
  std::vector<std::string> invoked_names;
  bool is_constructor = false;

  std::size_t arity() const { return parameters.size(); }
  bool invokes(const std::string& method) const;
};

/// Methods and constructors that have a body, in source order, including
/// those of nested, local and anonymous classes. Declarations that sit inside
/// an ERROR region are skipped; bodyless (abstract/interface) members too.
std::vector<MethodDecl> index_methods(const syntax::SyntaxTree& tree);

}  // namespace emr::detect
