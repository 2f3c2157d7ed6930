#include "emr/reward/micro.hpp"

#include "emr/syntax/tree.hpp"

namespace emr::reward {

MicroLanguage MicroLanguage::with_slots(int n) {
  MicroLanguage lang;
  for (int i = 0; i < n; ++i) {
    lang.fields.insert("p" + std::to_string(i));
    lang.fields.insert("q" + std::to_string(i));
  }
  return lang;
}

namespace {

using syntax::NodeId;
using syntax::SyntaxTree;

// Non-punctuation children.
std::vector<NodeId> parts(const SyntaxTree& t, NodeId id) {
  std::vector<NodeId> out;
  for (auto c : t.node(id).children) out.push_back(c);
  return out;
}

bool fail(std::string* diag, std::string msg) {
  if (diag) *diag = std::move(msg);
  return false;
}

}  // namespace

bool micro_well_formed(std::string_view code, const MicroLanguage& lang, std::string* diag) {
  auto tree = syntax::parse_class_members(code);
  if (tree.has_errors()) return fail(diag, "parse failure");
  const auto& root = tree.node(tree.root());
  if (root.children.size() != 1) return fail(diag, "unexpected top-level content");
  NodeId body = tree.child_of_kind(root.children[0], syntax::kinds::kClassBody);
  if (body == syntax::kNoNode) return fail(diag, "missing class body");

  std::set<std::string> methods;
  std::vector<NodeId> decls;
  for (auto c : tree.node(body).children) {
    const auto& n = tree.node(c);
    if (n.is_leaf) continue;  // braces
    if (n.kind != syntax::kinds::kMethod) return fail(diag, "only methods are allowed");
    auto ch = parts(tree, c);
    // void name formal_parameters block
    if (ch.size() != 4 || tree.normalized_text(ch[0]) != "void" ||
        tree.node(ch[1]).kind != syntax::kinds::kIdentifier ||
        tree.node(ch[2]).kind != syntax::kinds::kFormalParameters ||
        tree.node(ch[3]).kind != syntax::kinds::kBlock) {
      return fail(diag, "methods must be `void name ( ) { ... }`");
    }
    if (tree.node(ch[2]).children.size() != 2) return fail(diag, "methods take no parameters");
    std::string name(tree.text(ch[1]));
    if (lang.fields.contains(name)) return fail(diag, "method name clashes with a field: " + name);
    if (!methods.insert(name).second) return fail(diag, "duplicate method " + name);
    decls.push_back(ch[3]);
  }

  for (NodeId block : decls) {
    const auto& stmts = tree.node(block).children;
    for (std::size_t i = 1; i + 1 < stmts.size(); ++i) {
      NodeId s = stmts[i];
      const auto& sn = tree.node(s);
      if (sn.kind == "return_statement") {
        if (sn.children.size() != 2) return fail(diag, "return takes no value");
        if (i + 2 != stmts.size()) return fail(diag, "unreachable statement after return");
        continue;
      }
      if (sn.kind != "expression_statement") return fail(diag, "unsupported statement");
      NodeId e = sn.children[0];
      const auto& en = tree.node(e);
      if (en.kind == "update_expression") {
        if (en.children.size() != 2 || tree.node(en.children[0]).kind != syntax::kinds::kIdentifier) {
          return fail(diag, "unsupported update");
        }
        std::string var(tree.text(en.children[0]));
        if (!lang.fields.contains(var)) return fail(diag, "cannot find symbol " + var);
      } else if (en.kind == syntax::kinds::kMethodInvocation) {
        if (en.children.size() != 2 || tree.node(en.children[0]).kind != syntax::kinds::kIdentifier ||
            tree.node(en.children[1]).children.size() != 2) {
          return fail(diag, "unsupported call");
        }
        std::string callee(tree.text(en.children[0]));
        if (!methods.contains(callee)) return fail(diag, "cannot find method " + callee);
      } else {
        return fail(diag, "not a statement");
      }
    }
  }
  return true;
}

MicroRewardOracle::MicroRewardOracle(RewardWeights weights, MicroLanguage lang,
                                     detect::DetectConfig detect_config)
    : weights_(weights), lang_(std::move(lang)), detect_config_(detect_config) {}

RewardBreakdown MicroRewardOracle::score(std::string_view before, std::string_view generated) const {
  RewardBreakdown b;
  b.r_syntax = syntax_reward(generated);
  if (b.r_syntax == 1) {
    std::string diag;
    b.r_compile = micro_well_formed(generated, lang_, &diag) ? 1 : 0;
    if (b.r_compile == 0) b.diagnostics.push_back(diag);
  } else {
    b.diagnostics = syntax_diagnostics(generated);
    b.diagnostics.push_back("skipped: parse failure");
  }
  b.r_detect = detect_reward(before, generated, detect_config_);
  finalize(b, weights_);
  return b;
}

}  // namespace emr::reward
