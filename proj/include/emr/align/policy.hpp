#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace emr::align {

using TokenId = std::uint32_t;
using TokenIds = std::vector<TokenId>;

class Vocabulary {
 public:
  static constexpr std::string_view kBos = "<bos>";
  static constexpr std::string_view kEos = "<eos>";
  static constexpr std::string_view kSep = "<sep>";
  static constexpr std::string_view kPad = "<pad>";

  Vocabulary();  // specials only
  /// Specials first, then `tokens` in sorted order, duplicates dropped.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool contains(std::string_view tok) const;
  /// Throws DataError for out-of-vocabulary tokens.
  TokenId id(std::string_view tok) const;
  TokenIds encode(const std::vector<std::string>& toks) const;
  /// Space-joined token texts, specials omitted.
  std::string decode(const TokenIds& ids) const;

  TokenId bos() const { return 0; }
  TokenId eos() const { return 1; }
  TokenId sep() const { return 2; }
  TokenId pad() const { return 3; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

struct FeatureConfig {
  int context_window = 3;       // k
  std::size_t dim = 4096;       // D
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Sparse, L2-normalized feature vector sorted by index.
using Features = std::vector<std::pair<std::uint32_t, double>>;

/// Hashed suffix n-grams (n = 1..k) of BOS + y_prefix restricted to the last k
/// tokens, plus hashed unigram counts of x, L2-normalized.
Features featurize(const std::vector<std::string>& x, const std::vector<std::string>& y_prefix,
                   const FeatureConfig& config);

/// Actor weights W [D x |V|] (row-major), value head u [D] and b.
struct PolicySnapshot {
  Vocabulary vocab;
  FeatureConfig features;
  std::vector<double> W;
  std::vector<double> u;
  double b = 0.0;
  std::string version = "emr-policy/1";

  static PolicySnapshot zeros(Vocabulary vocab, FeatureConfig features);
  std::size_t vocab_size() const { return vocab.size(); }
  double& w(std::size_t feature, TokenId token) { return W[feature * vocab.size() + token]; }
  double w(std::size_t feature, TokenId token) const { return W[feature * vocab.size() + token]; }
  bool finite() const;

  friend bool operator==(const PolicySnapshot&, const PolicySnapshot&) = default;
};

void save_snapshot(const PolicySnapshot& s, const std::filesystem::path& path);
PolicySnapshot load_snapshot(const std::filesystem::path& path);
std::string snapshot_to_json(const PolicySnapshot& s);
PolicySnapshot snapshot_from_json(const std::string& text);

/// Featurizer bound to a vocabulary; caches the input part for one x.
class StateEncoder {
 public:
  StateEncoder(const Vocabulary& vocab, const FeatureConfig& config, const TokenIds& x);
  Features encode(const TokenIds& y_prefix) const;

 private:
  const Vocabulary& vocab_;
  FeatureConfig config_;
  std::vector<std::pair<std::uint32_t, double>> input_counts_;
};

/// softmax(W^T phi / temperature); temperature 1 is the policy itself.
std::vector<double> logits(const PolicySnapshot& s, const Features& phi);
std::vector<double> softmax(const std::vector<double>& z);
std::vector<double> next_token_distribution(const PolicySnapshot& s, const Features& phi);

struct SequenceLogProb {
  double total = 0.0;
  std::vector<double> per_token;
};

/// log pi(y | x) under teacher forcing. Throws DataError on ids outside the
/// vocabulary.
SequenceLogProb policy_logprob(const PolicySnapshot& s, const TokenIds& x, const TokenIds& y);

struct SamplingConfig {
  int min_tokens = -1;  // -1: no minimum
  int max_tokens = 512;
  double temperature = 1.0;  // 0: greedy
};

/// Samples until EOS (included in the result) or max_tokens.
TokenIds sample_sequence(const PolicySnapshot& s, const TokenIds& x, const SamplingConfig& config,
                         std::mt19937_64& rng);

/// V(x) = u . phi(x, empty) + b.
double estimate_value(const PolicySnapshot& s, const TokenIds& x);

}  // namespace emr::align
