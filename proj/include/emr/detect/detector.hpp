#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "emr/detect/methods.hpp"
#include "emr/syntax/tree.hpp"

namespace emr::detect {

struct DetectConfig {
  double min_match_fraction = 0.5;
  std::size_t min_statements = 1;
};

/// Settings used by the qualitative evaluation: one- and two-liners are not
/// counted as extractions there.
inline DetectConfig qualitative_detect_config() { return {0.5, 3}; }

struct ExtractMethodFinding {
  std::string caller_name;
  std::string extracted_name;
  std::size_t matched_statements = 0;
  std::size_t extracted_statements = 0;
  double match_score = 0.0;
  /// Lines of the before-caller statements covered by the match.
  std::vector<syntax::LineSpan> caller_spans;

  friend bool operator==(const ExtractMethodFinding&, const ExtractMethodFinding&) = default;
};

/// A finding together with the three declarations it relates. The miner needs
/// the declarations to cut source slices; everything else only needs findings.
struct DetectedExtraction {
  ExtractMethodFinding finding;
  MethodDecl caller_before;
  MethodDecl caller_after;
  MethodDecl extracted;
};

std::vector<DetectedExtraction> detect_extractions(const syntax::SyntaxTree& before,
                                                   const syntax::SyntaxTree& after,
                                                   const DetectConfig& config = {});

/// Extract Method detection between two versions of a compilation unit.
///
/// A finding is reported for every (caller, new method) pair where the new
/// method's name does not occur in the before version, the caller exists in
/// both versions (same name and arity) and calls the new method afterwards, and
/// the longest common subsequence of statement fingerprints between the new
/// method and the before-caller covers at least `min_match_fraction` of the new
/// method's statements and at least `min_statements` statements.
/// Findings are sorted by (caller_name, extracted_name).
std::vector<ExtractMethodFinding> detect_extract_method(std::string_view before_unit,
                                                        std::string_view after_unit,
                                                        const DetectConfig& config = {});

/// Detection on a bare method and a model-generated output. Both snippets are
/// hosted in a synthetic class; an output that does not parse cleanly into at
/// least two methods yields no findings.
std::vector<ExtractMethodFinding> detect_in_generated(std::string_view before_method,
                                                      std::string_view generated_output,
                                                      const DetectConfig& config = {});

/// Length of the longest common subsequence of two string sequences, plus the
/// matched indices of `b` (ascending).
struct LcsResult {
  std::size_t length = 0;
  std::vector<std::size_t> matched_b;
};
LcsResult longest_common_subsequence(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b);

}  // namespace emr::detect
