#include "emr/detect/methods.hpp"

#include <algorithm>

namespace emr::detect {

using syntax::kNoNode;
using syntax::NodeId;
using syntax::SyntaxTree;
namespace kinds = syntax::kinds;

bool MethodDecl::invokes(const std::string& method) const {
  return std::find(invoked_names.begin(), invoked_names.end(), method) != invoked_names.end();
}

namespace {

// Identifier leaf naming the declaration: the one right before the parameter
// list (methods, constructors) or before the body (compact constructors).
NodeId declaration_name(const SyntaxTree& tree, NodeId decl) {
  const auto& ch = tree.node(decl).children;
  for (std::size_t i = 1; i < ch.size(); ++i) {
    auto k = tree.node(ch[i]).kind;
    if (k == kinds::kFormalParameters || k == kinds::kBlock) {
      const auto& prev = tree.node(ch[i - 1]);
      if (prev.kind == kinds::kIdentifier && !prev.is_missing) return ch[i - 1];
      return kNoNode;
    }
  }
  return kNoNode;
}

std::vector<Parameter> parameters_of(const SyntaxTree& tree, NodeId decl) {
  std::vector<Parameter> out;
  NodeId params = tree.child_of_kind(decl, kinds::kFormalParameters);
  if (params == kNoNode) return out;
  for (NodeId p : tree.node(params).children) {
    const auto& pn = tree.node(p);
    if (pn.kind != kinds::kFormalParameter && pn.kind != kinds::kSpreadParameter) continue;
    Parameter param;
    for (NodeId c : pn.children) {
      const auto& cn = tree.node(c);
      if (cn.kind == "type" || cn.kind == "array_type") param.type = tree.normalized_text(c);
      if (cn.kind == kinds::kIdentifier) param.name = std::string(tree.text(c));
    }
    if (pn.kind == kinds::kSpreadParameter) param.type += " ...";
    out.push_back(std::move(param));
  }
  return out;
}

void scan_body(const SyntaxTree& tree, NodeId body, MethodDecl& m) {
  tree.walk(body, [&](NodeId id) {
    const auto& n = tree.node(id);
    if (syntax::is_type_body_kind(n.kind)) return false;
    if (n.kind == kinds::kMethodInvocation) {
      const auto& ch = n.children;
      for (std::size_t i = 1; i < ch.size(); ++i) {
        if (tree.node(ch[i]).kind != kinds::kArgumentList) continue;
        NodeId name = ch[i - 1];
        if (tree.node(name).kind != kinds::kIdentifier || tree.node(name).is_missing) break;
        bool unqualified = (i == 1);
        bool this_qualified = (i == 3 && tree.node(ch[0]).kind == "this");
        if (unqualified || this_qualified) m.invoked_names.emplace_back(tree.text(name));
        break;
      }
    }
    if (id != body && syntax::is_statement_kind(n.kind)) {
      m.body_statements.push_back(
          {tree.normalized_text(id), std::string(n.kind), tree.lines(id)});
    }
    return true;
  });
}

}  // namespace

std::vector<MethodDecl> index_methods(const SyntaxTree& tree) {
  std::vector<MethodDecl> out;
  tree.walk(tree.root(), [&](NodeId id) {
    const auto& n = tree.node(id);
    if (n.kind == kinds::kError) return false;
    bool is_method = n.kind == kinds::kMethod;
    bool is_ctor = n.kind == kinds::kConstructor || n.kind == kinds::kCompactConstructor;
    if (!is_method && !is_ctor) return true;
    NodeId body = tree.child_of_kind(id, kinds::kBlock);
    NodeId name = declaration_name(tree, id);
    if (body == kNoNode || name == kNoNode || tree.node(body).children.empty() ||
        tree.node(tree.node(body).children.front()).is_missing) {
      return true;  // nested declarations inside may still be indexable
    }
    MethodDecl m;
    m.name = std::string(tree.text(name));
    m.parameters = parameters_of(tree, id);
    m.is_constructor = is_ctor;
    m.source_span = tree.lines(id);
    m.source_text = std::string(tree.text(id));
    m.start_byte = n.start;
    m.end_byte = n.end;
    scan_body(tree, body, m);
    out.push_back(std::move(m));
    return true;
  });
  return out;
}

}  // namespace emr::detect
