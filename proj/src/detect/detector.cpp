#include "emr/detect/detector.hpp"

#include <algorithm>
#include <tuple>
#include <unordered_set>

namespace emr::detect {

LcsResult longest_common_subsequence(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::size_t> table((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return table[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      at(i, j) = a[i] == b[j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
    }
  }
  LcsResult result;
  result.length = at(0, 0);
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n && j < m) {
    if (a[i] == b[j]) {
      result.matched_b.push_back(j);
      ++i;
      ++j;
    } else if (at(i + 1, j) >= at(i, j + 1)) {
      ++i;
    } else {
      ++j;
    }
  }
  return result;
}

namespace {

std::vector<std::string> texts(const MethodDecl& m) {
  std::vector<std::string> out;
  out.reserve(m.body_statements.size());
  for (const auto& s : m.body_statements) out.push_back(s.normalized_text);
  return out;
}

const MethodDecl* find_by_signature(const std::vector<MethodDecl>& methods,
                                    const std::string& name, std::size_t arity) {
  for (const auto& m : methods) {
    if (m.name == name && m.arity() == arity) return &m;
  }
  return nullptr;
}

}  // namespace

std::vector<DetectedExtraction> detect_extractions(const syntax::SyntaxTree& before,
                                                   const syntax::SyntaxTree& after,
                                                   const DetectConfig& config) {
  const auto before_methods = index_methods(before);
  const auto after_methods = index_methods(after);

  std::unordered_set<std::string> before_names;
  for (const auto& m : before_methods) before_names.insert(m.name);

  std::vector<DetectedExtraction> out;
  std::unordered_set<std::string> seen_pairs;
  for (const auto& extracted : after_methods) {
    if (extracted.is_constructor || before_names.contains(extracted.name)) continue;
    const auto extracted_texts = texts(extracted);
    if (extracted_texts.empty()) continue;
    for (const auto& caller_after : after_methods) {
      if (&caller_after == &extracted || !caller_after.invokes(extracted.name)) continue;
      const MethodDecl* caller_before =
          find_by_signature(before_methods, caller_after.name, caller_after.arity());
      if (caller_before == nullptr) continue;
      // Overloads share (name, arity); the first declaration stands for all.
      if (find_by_signature(after_methods, caller_after.name, caller_after.arity()) !=
          &caller_after) {
        continue;
      }
      std::string key = caller_after.name + '/' + std::to_string(caller_after.arity()) + '>' +
                        extracted.name + '/' + std::to_string(extracted.arity());
      if (!seen_pairs.insert(key).second) continue;

      auto lcs = longest_common_subsequence(extracted_texts, texts(*caller_before));
      const double fraction =
          static_cast<double>(lcs.length) / static_cast<double>(extracted_texts.size());
      if (lcs.length < config.min_statements || fraction < config.min_match_fraction) continue;

      DetectedExtraction d;
      d.finding.caller_name = caller_after.name;
      d.finding.extracted_name = extracted.name;
      d.finding.matched_statements = lcs.length;
      d.finding.extracted_statements = extracted_texts.size();
      d.finding.match_score = fraction;
      for (std::size_t j : lcs.matched_b) {
        d.finding.caller_spans.push_back(caller_before->body_statements[j].lines);
      }
      d.caller_before = *caller_before;
      d.caller_after = caller_after;
      d.extracted = extracted;
      out.push_back(std::move(d));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.finding.caller_name, x.finding.extracted_name) <
           std::tie(y.finding.caller_name, y.finding.extracted_name);
  });
  return out;
}

std::vector<ExtractMethodFinding> detect_extract_method(std::string_view before_unit,
                                                        std::string_view after_unit,
                                                        const DetectConfig& config) {
  auto before = syntax::parse_source(before_unit);
  auto after = syntax::parse_source(after_unit);
  std::vector<ExtractMethodFinding> out;
  for (auto& d : detect_extractions(before, after, config)) out.push_back(std::move(d.finding));
  return out;
}

std::vector<ExtractMethodFinding> detect_in_generated(std::string_view before_method,
                                                      std::string_view generated_output,
                                                      const DetectConfig& config) {
  auto after = syntax::parse_class_members(generated_output);
  if (after.has_errors() || index_methods(after).size() < 2) return {};
  auto before = syntax::parse_class_members(before_method);
  std::vector<ExtractMethodFinding> out;
  for (auto& d : detect_extractions(before, after, config)) out.push_back(std::move(d.finding));
  return out;
}

}  // namespace emr::detect
