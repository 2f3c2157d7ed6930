#include "emr/syntax/tree.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace emr::syntax {

SyntaxTree::SyntaxTree(std::string source, std::vector<Node> nodes, NodeId root)
    : source_(std::move(source)), nodes_(std::move(nodes)), root_(root) {
  line_starts_.push_back(0);
  for (std::uint32_t i = 0; i < source_.size(); ++i) {
    if (source_[i] == '\n') line_starts_.push_back(i + 1);
  }
}

std::string_view SyntaxTree::text(NodeId id) const {
  const auto& n = nodes_[id];
  return std::string_view(source_).substr(n.start, n.end - n.start);
}

std::string SyntaxTree::normalized_text(NodeId id) const {
  std::vector<NodeId> ls;
  leaves(id, ls);
  std::string out;
  for (NodeId leaf : ls) {
    if (nodes_[leaf].is_missing) continue;
    if (!out.empty()) out += ' ';
    out += text(leaf);
  }
  return out;
}

int SyntaxTree::line_of(std::uint32_t byte_offset) const {
  auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), byte_offset);
  return static_cast<int>(it - line_starts_.begin());
}

LineSpan SyntaxTree::lines(NodeId id) const {
  const auto& n = nodes_[id];
  std::uint32_t last = n.end > n.start ? n.end - 1 : n.start;
  return {line_of(n.start), line_of(last)};
}

std::size_t SyntaxTree::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_error; }));
}

std::size_t SyntaxTree::missing_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_missing; }));
}

void SyntaxTree::walk(NodeId from, const std::function<bool(NodeId)>& visit) const {
  if (from == kNoNode) return;
  std::vector<NodeId> stack{from};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (!visit(id)) continue;
    const auto& ch = nodes_[id].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
}

void SyntaxTree::leaves(NodeId from, std::vector<NodeId>& out) const {
  walk(from, [&](NodeId id) {
    if (nodes_[id].is_leaf) out.push_back(id);
    return true;
  });
}

NodeId SyntaxTree::child_of_kind(NodeId id, std::string_view kind) const {
  for (NodeId c : nodes_[id].children) {
    if (nodes_[c].kind == kind) return c;
  }
  return kNoNode;
}

std::string SyntaxTree::dump(NodeId from) const {
  std::ostringstream os;
  std::function<void(NodeId, int)> rec = [&](NodeId id, int depth) {
    const auto& n = nodes_[id];
    os << std::string(static_cast<std::size_t>(depth) * 2, ' ') << n.kind;
    if (n.is_missing) os << " (MISSING)";
    if (n.is_leaf && !n.is_missing) os << " '" << text(id) << "'";
    os << '\n';
    for (NodeId c : n.children) rec(c, depth + 1);
  };
  if (from != kNoNode) rec(from, 0);
  return os.str();
}

std::string wrap_in_class(std::string_view members) {
  std::string out = "class __Gen {\n";
  out += members;
  out += "\n}\n";
  return out;
}

SyntaxTree parse_class_members(std::string_view snippet) {
  return parse_source(wrap_in_class(snippet));
}

bool is_statement_kind(std::string_view kind) {
  static const std::unordered_set<std::string_view> kStatements = {
      "local_variable_declaration",
      "expression_statement",
      "if_statement",
      "while_statement",
      "do_statement",
      "for_statement",
      "enhanced_for_statement",
      "return_statement",
      "throw_statement",
      "break_statement",
      "continue_statement",
      "yield_statement",
      "synchronized_statement",
      "assert_statement",
      "labeled_statement",
      "try_statement",
      "try_with_resources_statement",
      "switch_statement",
      "empty_statement",
      "explicit_constructor_invocation",
      "local_class_declaration",
  };
  return kStatements.contains(kind);
}

bool is_type_body_kind(std::string_view kind) {
  return kind == "class_body" || kind == "interface_body" || kind == "enum_body" ||
         kind == "annotation_type_body";
}

}  // namespace emr::syntax
