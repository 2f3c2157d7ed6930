#include "emr/align/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "emr/util/error.hpp"
#include "emr/util/fs.hpp"

namespace emr::align {

Vocabulary::Vocabulary() {
  for (auto s : {kBos, kEos, kSep, kPad}) {
    index_.emplace(std::string(s), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(s);
  }
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  Vocabulary v;
  for (auto& t : tokens) {
    if (v.index_.contains(t)) continue;
    v.index_.emplace(t, static_cast<TokenId>(v.tokens_.size()));
    v.tokens_.push_back(std::move(t));
  }
  return v;
}

bool Vocabulary::contains(std::string_view tok) const { return index_.contains(std::string(tok)); }

TokenId Vocabulary::id(std::string_view tok) const {
  auto it = index_.find(std::string(tok));
  if (it == index_.end()) throw DataError("token '" + std::string(tok) + "' is not in the vocabulary");
  return it->second;
}

TokenIds Vocabulary::encode(const std::vector<std::string>& toks) const {
  TokenIds out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(id(t));
  return out;
}

std::string Vocabulary::decode(const TokenIds& ids) const {
  std::string out;
  for (auto i : ids) {
    if (i < 4) continue;
    if (!out.empty()) out += ' ';
    out += token(i);
  }
  return out;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint32_t bucket(std::uint64_t h, std::size_t dim) { return static_cast<std::uint32_t>(h % dim); }

std::uint32_t input_bucket(std::string_view tok, std::size_t dim) {
  return bucket(fnv(fnv(kFnvOffset, "x\x1f"), tok), dim);
}

// Suffix n-grams of the context window.
template <typename TokenAt>
void add_context(std::size_t len, TokenAt&& at, const FeatureConfig& cfg,
                 std::map<std::uint32_t, double>& acc) {
  // Context is BOS + prefix; position 0 is BOS.
  const std::size_t total = len + 1;
  const std::size_t k = static_cast<std::size_t>(std::max(1, cfg.context_window));
  std::uint64_t h = fnv(kFnvOffset, "c\x1f");
  for (std::size_t n = 1; n <= std::min(k, total); ++n) {
    std::size_t pos = total - n;
    std::string_view tok = pos == 0 ? Vocabulary::kBos : at(pos - 1);
    h = fnv(h, tok);
    h = fnv(h, "\x1f");
    acc[bucket(h, cfg.dim)] += 1.0;
  }
}

Features normalize(const std::map<std::uint32_t, double>& acc) {
  double norm = 0.0;
  for (const auto& [i, v] : acc) norm += v * v;
  norm = std::sqrt(norm);
  Features out;
  out.reserve(acc.size());
  for (const auto& [i, v] : acc) out.emplace_back(i, v / norm);
  return out;
}

}  // namespace

Features featurize(const std::vector<std::string>& x, const std::vector<std::string>& y_prefix,
                   const FeatureConfig& cfg) {
  if (cfg.dim < 1) throw ConfigError("feature dimension must be >= 1");
  // Same accumulation order as StateEncoder so hash collisions agree.
  std::map<std::uint32_t, double> acc;
  for (const auto& t : x) acc[input_bucket(t, cfg.dim)] = 1.0;
  add_context(y_prefix.size(), [&](std::size_t i) -> std::string_view { return y_prefix[i]; }, cfg, acc);
  return normalize(acc);
}

StateEncoder::StateEncoder(const Vocabulary& vocab, const FeatureConfig& config, const TokenIds& x)
    : vocab_(vocab), config_(config) {
  std::map<std::uint32_t, double> acc;
  for (auto id : x) acc[input_bucket(vocab.token(id), config.dim)] = 1.0;
  input_counts_.assign(acc.begin(), acc.end());
}

Features StateEncoder::encode(const TokenIds& y_prefix) const {
  std::map<std::uint32_t, double> acc(input_counts_.begin(), input_counts_.end());
  add_context(
      y_prefix.size(), [&](std::size_t i) -> std::string_view { return vocab_.token(y_prefix[i]); },
      config_, acc);
  return normalize(acc);
}

PolicySnapshot PolicySnapshot::zeros(Vocabulary vocab, FeatureConfig features) {
  PolicySnapshot s;
  s.W.assign(features.dim * vocab.size(), 0.0);
  s.u.assign(features.dim, 0.0);
  s.vocab = std::move(vocab);
  s.features = features;
  return s;
}

bool PolicySnapshot::finite() const {
  auto ok = [](double v) { return std::isfinite(v); };
  return std::all_of(W.begin(), W.end(), ok) && std::all_of(u.begin(), u.end(), ok) && ok(b);
}

std::string snapshot_to_json(const PolicySnapshot& s) {
  nlohmann::ordered_json j;
  j["version"] = s.version;
  j["vocab"] = s.vocab.tokens();
  j["features"] = {{"context_window", s.features.context_window}, {"dim", s.features.dim}};
  j["W"] = s.W;
  j["u"] = s.u;
  j["b"] = s.b;
  return j.dump();
}

PolicySnapshot snapshot_from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    PolicySnapshot s;
    s.version = j.at("version").get<std::string>();
    auto toks = j.at("vocab").get<std::vector<std::string>>();
    if (toks.size() < 4 || toks[0] != Vocabulary::kBos || toks[1] != Vocabulary::kEos) {
      throw DataError("snapshot vocabulary lacks the special tokens");
    }
    s.vocab = Vocabulary::from_tokens({toks.begin() + 4, toks.end()});
    if (s.vocab.tokens() != toks) throw DataError("snapshot vocabulary is not in canonical order");
    s.features.context_window = j.at("features").at("context_window").get<int>();
    s.features.dim = j.at("features").at("dim").get<std::size_t>();
    s.W = j.at("W").get<std::vector<double>>();
    s.u = j.at("u").get<std::vector<double>>();
    s.b = j.at("b").get<double>();
    if (s.W.size() != s.features.dim * s.vocab.size() || s.u.size() != s.features.dim) {
      throw DataError("snapshot weight shapes do not match its configuration");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed policy snapshot: ") + e.what());
  }
}

void save_snapshot(const PolicySnapshot& s, const std::filesystem::path& path) {
  util::write_file(path, snapshot_to_json(s));
}

PolicySnapshot load_snapshot(const std::filesystem::path& path) {
  return snapshot_from_json(util::read_file(path));
}

std::vector<double> logits(const PolicySnapshot& s, const Features& phi) {
  const std::size_t V = s.vocab_size();
  std::vector<double> z(V, 0.0);
  for (const auto& [f, v] : phi) {
    const double* row = &s.W[static_cast<std::size_t>(f) * V];
    for (std::size_t t = 0; t < V; ++t) z[t] += v * row[t];
  }
  return z;
}

std::vector<double> softmax(const std::vector<double>& z) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : z) mx = std::max(mx, v);
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> next_token_distribution(const PolicySnapshot& s, const Features& phi) {
  return softmax(logits(s, phi));
}

SequenceLogProb policy_logprob(const PolicySnapshot& s, const TokenIds& x, const TokenIds& y) {
  for (auto id : x) {
    if (id >= s.vocab_size()) throw DataError("input token id outside the vocabulary");
  }
  StateEncoder enc(s.vocab, s.features, x);
  SequenceLogProb out;
  TokenIds prefix;
  for (auto tok : y) {
    if (tok >= s.vocab_size()) throw DataError("output token id outside the vocabulary");
    auto z = logits(s, enc.encode(prefix));
    double mx = *std::max_element(z.begin(), z.end());
    double lse = 0.0;
    for (double v : z) lse += std::exp(v - mx);
    double lp = z[tok] - mx - std::log(lse);
    out.per_token.push_back(lp);
    out.total += lp;
    prefix.push_back(tok);
  }
  return out;
}

TokenIds sample_sequence(const PolicySnapshot& s, const TokenIds& x, const SamplingConfig& cfg,
                         std::mt19937_64& rng) {
  StateEncoder enc(s.vocab, s.features, x);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  TokenIds y;
  const TokenId eos = s.vocab.eos();
  while (static_cast<int>(y.size()) < cfg.max_tokens) {
    auto z = logits(s, enc.encode(y));
    const bool block_eos = cfg.min_tokens >= 0 && static_cast<int>(y.size()) < cfg.min_tokens;
    if (block_eos) z[eos] = -std::numeric_limits<double>::infinity();
    TokenId next = 0;
    if (cfg.temperature <= 0.0) {
      next = static_cast<TokenId>(std::max_element(z.begin(), z.end()) - z.begin());
    } else {
      for (double& v : z) v /= cfg.temperature;
      auto p = softmax(z);
      double r = unif(rng);
      double acc = 0.0;
      next = static_cast<TokenId>(p.size() - 1);
      for (std::size_t t = 0; t < p.size(); ++t) {
        acc += p[t];
        if (r < acc) {
          next = static_cast<TokenId>(t);
          break;
        }
      }
      while (p[next] == 0.0 && next > 0) --next;  // guard against r landing past rounding
    }
    y.push_back(next);
    if (next == eos) break;
  }
  return y;
}

double estimate_value(const PolicySnapshot& s, const TokenIds& x) {
  StateEncoder enc(s.vocab, s.features, x);
  double v = s.b;
  for (const auto& [f, val] : enc.encode({})) v += s.u[f] * val;
  return v;
}

}  // namespace emr::align
