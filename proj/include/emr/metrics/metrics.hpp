#pragma once

#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

namespace emr::metrics {

using TokenSeq = std::vector<std::string>;

/// Lexical tokens of a snippet, comments excluded.
TokenSeq tokenize(std::string_view source);

inline constexpr double kSmoothingEpsilon = 1e-9;
inline constexpr double kKeywordWeight = 4.0;

/// Sentence BLEU with add-epsilon smoothing and brevity penalty. Sets
/// `*degenerate` (when given) and returns 0 if either side is empty.
double bleu(const TokenSeq& candidate, const TokenSeq& reference, int max_n = 4,
            bool* degenerate = nullptr);

struct RougeL {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;
};
RougeL rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

/// BLEU-style score whose n-gram counts are weighted by `keyword_weight` when
/// the n-gram contains a keyword.
double weighted_ngram_match(const TokenSeq& candidate, const TokenSeq& reference,
                            const std::unordered_set<std::string>& keywords, int max_n = 4,
                            double keyword_weight = kKeywordWeight, bool* degenerate = nullptr);

/// Java reserved words as a set, for weighted_ngram_match.
const std::unordered_set<std::string>& java_keyword_set();

/// Structural signatures (node kinds, identifiers abstracted) of every subtree
/// of height >= 2 inside the class-hosted snippet.
std::vector<std::string> subtree_signatures(std::string_view snippet);

/// Matched candidate subtrees / candidate subtrees against the reference
/// multiset. 0 for an unparseable candidate.
double ast_match(std::string_view candidate, std::string_view reference);
inline double syntax_match_score(std::string_view candidate, std::string_view reference) {
  return ast_match(candidate, reference);
}

/// (variable, def ordinal, use ordinal): a use linked to the closest preceding
/// definition of the same name. Ordinals count per variable.
using DataflowEdge = std::tuple<std::string, int, int>;
std::vector<DataflowEdge> dataflow_edges(std::string_view snippet);

/// Matched candidate edges / candidate edges. 1 when both edge sets are empty,
/// 0 for an unparseable candidate.
double dataflow_match(std::string_view candidate, std::string_view reference);

struct Mixture {
  double ngram = 0.25;
  double weighted = 0.25;
  double ast = 0.25;
  double dataflow = 0.25;
  /// Parses "a,b,c,d"; throws ConfigError unless non-negative and summing to 1.
  static Mixture parse(const std::string& csv);
  void validate() const;
};

struct CodeBleu {
  double ngram_match = 0.0;
  double weighted_ngram_match = 0.0;
  double ast_match = 0.0;
  double dataflow_match = 0.0;
  double codebleu = 0.0;
};

CodeBleu codebleu(std::string_view candidate, std::string_view reference, const Mixture& mixture = {});
double mix(const CodeBleu& parts, const Mixture& mixture);

struct MetricReport {
  double bleu = 0.0;
  RougeL rouge_l;
  double codebleu = 0.0;
  double ngram_match = 0.0;
  double weighted_ngram_match = 0.0;
  double ast_match = 0.0;
  double dataflow_match = 0.0;
  std::size_t n_pairs = 0;
};

struct ScoredPair {
  std::string candidate;
  std::string reference;
};

/// Per-pair scores averaged arithmetically. Throws DataError on an empty list.
MetricReport corpus_report(const std::vector<ScoredPair>& pairs, const Mixture& mixture = {},
                           std::size_t workers = 1);

}  // namespace emr::metrics
