#include "emr/metrics/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

#include "emr/syntax/tree.hpp"
#include "emr/util/error.hpp"
#include "emr/util/parallel.hpp"

namespace emr::metrics {

TokenSeq tokenize(std::string_view source) { return syntax::token_texts(source); }

const std::unordered_set<std::string>& java_keyword_set() {
  static const std::unordered_set<std::string> set(syntax::java_keywords().begin(),
                                                   syntax::java_keywords().end());
  return set;
}

namespace {

struct Gram {
  std::string key;
  bool has_keyword;
};

std::unordered_map<std::string, std::pair<std::size_t, bool>> count_grams(
    const TokenSeq& seq, int n, const std::unordered_set<std::string>* keywords) {
  std::unordered_map<std::string, std::pair<std::size_t, bool>> out;
  if (seq.size() < static_cast<std::size_t>(n)) return out;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    std::string key;
    bool kw = false;
    for (int k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += seq[i + k];
      if (keywords && keywords->contains(seq[i + k])) kw = true;
    }
    auto& slot = out[key];
    ++slot.first;
    slot.second = kw;
  }
  return out;
}

double smoothed_bleu(const TokenSeq& cand, const TokenSeq& ref, int max_n,
                     const std::unordered_set<std::string>* keywords, double kw_weight,
                     bool* degenerate) {
  if (max_n < 1) throw ConfigError("max_n must be >= 1");
  if (degenerate) *degenerate = cand.empty() || ref.empty();
  if (cand.empty() || ref.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    auto c = count_grams(cand, n, keywords);
    auto r = count_grams(ref, n, keywords);
    double num = 0.0;
    double den = 0.0;
    for (const auto& [key, v] : c) {
      double w = v.second ? kw_weight : 1.0;
      auto it = r.find(key);
      std::size_t clipped = it == r.end() ? 0 : std::min(v.first, it->second.first);
      num += w * static_cast<double>(clipped);
      den += w * static_cast<double>(v.first);
    }
    double p = den > 0.0 ? num / den : 0.0;
    if (num == 0.0) p = den > 0.0 ? kSmoothingEpsilon / den : kSmoothingEpsilon;
    log_sum += std::log(p);
  }
  double bp = 1.0;
  if (cand.size() < ref.size()) {
    bp = std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size()));
  }
  return bp * std::exp(log_sum / max_n);
}

}  // namespace

double bleu(const TokenSeq& candidate, const TokenSeq& reference, int max_n, bool* degenerate) {
  return smoothed_bleu(candidate, reference, max_n, nullptr, 1.0, degenerate);
}

double weighted_ngram_match(const TokenSeq& candidate, const TokenSeq& reference,
                            const std::unordered_set<std::string>& keywords, int max_n,
                            double keyword_weight, bool* degenerate) {
  return smoothed_bleu(candidate, reference, max_n, &keywords, keyword_weight, degenerate);
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeL rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  RougeL r;
  if (candidate.empty() || reference.empty()) {
    r.degenerate = true;
    return r;
  }
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  r.precision = lcs / static_cast<double>(candidate.size());
  r.recall = lcs / static_cast<double>(reference.size());
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

namespace {

// Members of the synthetic shell's class body (skips the braces).
std::vector<syntax::NodeId> snippet_roots(const syntax::SyntaxTree& tree) {
  std::vector<syntax::NodeId> out;
  const auto& root = tree.node(tree.root());
  for (auto decl : root.children) {
    auto body = tree.child_of_kind(decl, syntax::kinds::kClassBody);
    if (body == syntax::kNoNode) continue;
    for (auto c : tree.node(body).children) {
      if (!tree.node(c).is_leaf) out.push_back(c);
    }
    break;
  }
  return out;
}

std::string signature(const syntax::SyntaxTree& tree, syntax::NodeId id,
                      std::vector<std::string>& out) {
  const auto& n = tree.node(id);
  if (n.is_leaf) return std::string(n.kind);
  std::string s = "(" + std::string(n.kind);
  for (auto c : n.children) s += " " + signature(tree, c, out);
  s += ")";
  out.push_back(s);
  return s;
}

}  // namespace

std::vector<std::string> subtree_signatures(std::string_view snippet) {
  auto tree = syntax::parse_class_members(snippet);
  std::vector<std::string> out;
  for (auto id : snippet_roots(tree)) signature(tree, id, out);
  return out;
}

double ast_match(std::string_view candidate, std::string_view reference) {
  if (syntax::parse_class_members(candidate).has_errors()) return 0.0;
  auto cand = subtree_signatures(candidate);
  auto ref = subtree_signatures(reference);
  if (cand.empty()) return ref.empty() ? 1.0 : 0.0;
  std::unordered_map<std::string, std::size_t> pool;
  for (auto& s : ref) ++pool[s];
  std::size_t matched = 0;
  for (auto& s : cand) {
    auto it = pool.find(s);
    if (it != pool.end() && it->second > 0) {
      --it->second;
      ++matched;
    }
  }
  return static_cast<double>(matched) / static_cast<double>(cand.size());
}

namespace {

enum class Role { Skip, Def, Use, UseDef };

Role role_of(const syntax::SyntaxTree& tree, syntax::NodeId parent, std::size_t index) {
  const auto& p = tree.node(parent);
  const auto kind = p.kind;
  const auto& ch = p.children;
  auto next_kind = [&]() -> std::string_view {
    return index + 1 < ch.size() ? tree.node(ch[index + 1]).kind : std::string_view{};
  };
  if (kind == "type" || kind == "catch_type" || kind == "scoped_type_identifier" ||
      kind == "type_arguments" || kind == "type_parameter" || kind == "annotation" ||
      kind == "marker_annotation" || kind == syntax::kinds::kMethod ||
      kind == syntax::kinds::kConstructor || kind == "class_declaration" ||
      kind == "labeled_statement" || kind == "break_statement" || kind == "continue_statement") {
    return Role::Skip;
  }
  if (kind == syntax::kinds::kVariableDeclarator) return index == 0 ? Role::Def : Role::Use;
  if (kind == syntax::kinds::kFormalParameter || kind == syntax::kinds::kSpreadParameter ||
      kind == "catch_formal_parameter" || kind == "inferred_parameters" || kind == "resource") {
    return Role::Def;
  }
  if (kind == syntax::kinds::kLambda && index == 0) return Role::Def;
  if (kind == "enhanced_for_statement") {
    if (index > 0) {
      auto prev = tree.node(ch[index - 1]).kind;
      if (prev == "type" || prev == "array_type") return Role::Def;
    }
    return Role::Use;
  }
  if (kind == "assignment_expression" && index == 0) {
    return next_kind() == "=" ? Role::Def : Role::UseDef;
  }
  if (kind == "update_expression") return Role::UseDef;
  if (kind == "field_access" && index > 0) return Role::Skip;
  if (kind == syntax::kinds::kMethodInvocation && next_kind() == syntax::kinds::kArgumentList) {
    return Role::Skip;
  }
  if (kind == "method_reference" && index > 0) return Role::Skip;
  return Role::Use;
}

}  // namespace

std::vector<DataflowEdge> dataflow_edges(std::string_view snippet) {
  auto tree = syntax::parse_class_members(snippet);
  struct Occurrence {
    std::string name;
    Role role;
  };
  std::vector<Occurrence> occ;
  std::function<void(syntax::NodeId)> visit = [&](syntax::NodeId id) {
    const auto& n = tree.node(id);
    // The value is read before the target is written: `b = b * 2` uses the
    // previous definition of b.
    std::vector<std::size_t> order(n.children.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (!order.empty() && (n.kind == "assignment_expression" ||
                           n.kind == syntax::kinds::kVariableDeclarator)) {
      std::rotate(order.begin(), order.begin() + 1, order.end());
    }
    for (std::size_t i : order) {
      auto c = n.children[i];
      const auto& cn = tree.node(c);
      if (cn.kind == syntax::kinds::kIdentifier && cn.is_leaf) {
        if (cn.is_missing) continue;
        auto role = role_of(tree, id, i);
        if (role != Role::Skip) occ.push_back({std::string(tree.text(c)), role});
      } else if (!cn.is_leaf) {
        visit(c);
      }
    }
  };
  for (auto r : snippet_roots(tree)) visit(r);

  std::unordered_set<std::string> declared;
  for (const auto& o : occ) {
    if (o.role == Role::Def) declared.insert(o.name);
  }
  std::unordered_map<std::string, int> defs, uses;
  std::unordered_map<std::string, int> last_def;
  std::vector<DataflowEdge> edges;
  for (const auto& o : occ) {
    if (!declared.contains(o.name)) continue;
    if (o.role == Role::Use || o.role == Role::UseDef) {
      int u = uses[o.name]++;
      auto it = last_def.find(o.name);
      if (it != last_def.end()) edges.emplace_back(o.name, it->second, u);
    }
    if (o.role == Role::Def || o.role == Role::UseDef) last_def[o.name] = defs[o.name]++;
  }
  return edges;
}

double dataflow_match(std::string_view candidate, std::string_view reference) {
  if (syntax::parse_class_members(candidate).has_errors()) return 0.0;
  auto cand = dataflow_edges(candidate);
  auto ref = dataflow_edges(reference);
  if (cand.empty()) return ref.empty() ? 1.0 : 0.0;
  std::map<DataflowEdge, std::size_t> pool;
  for (auto& e : ref) ++pool[e];
  std::size_t matched = 0;
  for (auto& e : cand) {
    auto it = pool.find(e);
    if (it != pool.end() && it->second > 0) {
      --it->second;
      ++matched;
    }
  }
  return static_cast<double>(matched) / static_cast<double>(cand.size());
}

void Mixture::validate() const {
  if (ngram < 0 || weighted < 0 || ast < 0 || dataflow < 0 ||
      std::abs(ngram + weighted + ast + dataflow - 1.0) > 1e-9) {
    throw ConfigError("CodeBLEU mixture must be non-negative and sum to 1");
  }
}

Mixture Mixture::parse(const std::string& csv) {
  std::vector<double> v;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("invalid mixture value '" + item + "'");
    }
  }
  if (v.size() != 4) throw ConfigError("mixture needs four values, got '" + csv + "'");
  Mixture m{v[0], v[1], v[2], v[3]};
  m.validate();
  return m;
}

double mix(const CodeBleu& p, const Mixture& m) {
  return m.ngram * p.ngram_match + m.weighted * p.weighted_ngram_match + m.ast * p.ast_match +
         m.dataflow * p.dataflow_match;
}

CodeBleu codebleu(std::string_view candidate, std::string_view reference, const Mixture& mixture) {
  mixture.validate();
  auto c = tokenize(candidate);
  auto r = tokenize(reference);
  CodeBleu out;
  out.ngram_match = bleu(c, r);
  out.weighted_ngram_match = weighted_ngram_match(c, r, java_keyword_set());
  out.ast_match = ast_match(candidate, reference);
  out.dataflow_match = dataflow_match(candidate, reference);
  out.codebleu = mix(out, mixture);
  return out;
}

MetricReport corpus_report(const std::vector<ScoredPair>& pairs, const Mixture& mixture,
                           std::size_t workers) {
  if (pairs.empty()) throw DataError("metrics need at least one (candidate, reference) pair");
  mixture.validate();
  struct Row {
    double bleu;
    RougeL rouge;
    CodeBleu cb;
  };
  std::vector<Row> rows(pairs.size());
  util::parallel_for(pairs.size(), workers, [&](std::size_t i) {
    auto c = tokenize(pairs[i].candidate);
    auto r = tokenize(pairs[i].reference);
    rows[i].bleu = bleu(c, r);
    rows[i].rouge = rouge_l(c, r);
    rows[i].cb = codebleu(pairs[i].candidate, pairs[i].reference, mixture);
  });
  // Summed in index order so the result does not depend on scheduling.
  MetricReport rep;
  for (const auto& row : rows) {
    rep.bleu += row.bleu;
    rep.rouge_l.precision += row.rouge.precision;
    rep.rouge_l.recall += row.rouge.recall;
    rep.rouge_l.f1 += row.rouge.f1;
    rep.codebleu += row.cb.codebleu;
    rep.ngram_match += row.cb.ngram_match;
    rep.weighted_ngram_match += row.cb.weighted_ngram_match;
    rep.ast_match += row.cb.ast_match;
    rep.dataflow_match += row.cb.dataflow_match;
  }
  const double n = static_cast<double>(rows.size());
  rep.bleu /= n;
  rep.rouge_l.precision /= n;
  rep.rouge_l.recall /= n;
  rep.rouge_l.f1 /= n;
  rep.codebleu /= n;
  rep.ngram_match /= n;
  rep.weighted_ngram_match /= n;
  rep.ast_match /= n;
  rep.dataflow_match /= n;
  rep.n_pairs = rows.size();
  return rep;
}

}  // namespace emr::metrics
