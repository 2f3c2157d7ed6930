#include "emr/align/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "emr/syntax/token.hpp"
#include "emr/util/error.hpp"
#include "emr/util/parallel.hpp"

namespace emr::align {

TrainMode parse_mode(const std::string& name) {
  if (name == "sft") return TrainMode::Sft;
  if (name == "rl") return TrainMode::Rl;
  if (name == "sft+rl") return TrainMode::SftRl;
  throw ConfigError("unknown training mode '" + name + "' (expected sft, rl or sft+rl)");
}

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::Sft: return "sft";
    case TrainMode::Rl: return "rl";
    case TrainMode::SftRl: return "sft+rl";
  }
  return "?";
}

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  // A 4-token window separates `m ( ) {` from `h ( ) {`; 1024 buckets are
  // ample for the toy vocabulary and keep dense Adam steps cheap.
  c.features = {4, 1024};
  c.rl_learning_rate = 0.01;
  c.value_learning_rate = 0.01;
  return c;
}

TrainConfig TrainConfig::paper() {
  TrainConfig c;
  c.preset = "paper";
  c.rl_steps = 20000;
  c.sft_learning_rate = 1.33e-5;
  c.rl_learning_rate = 1.33e-5;
  c.value_learning_rate = 1.33e-5;
  return c;
}

TrainConfig TrainConfig::preset_named(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "paper") return paper();
  throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

std::string TrainLog::csv() const {
  std::string out = "step,mean_reward,reward_std,mean_kl,beta,policy_loss,value_loss\n";
  for (const auto& r : rl) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.step, r.mean_reward, r.reward_std, r.mean_kl,
                       r.beta, r.policy_loss + 0.0, r.value_loss);
  }
  return out;
}

std::string TrainLog::sft_csv() const {
  std::string out = "epoch,step,loss\n";
  for (const auto& r : sft) out += fmt::format("{},{},{}\n", r.epoch, r.step, r.loss);
  return out;
}

Vocabulary build_vocabulary(const std::vector<mining::RefactoringRecord>& a,
                            const std::vector<mining::RefactoringRecord>& b) {
  std::vector<std::string> toks;
  for (const auto* set : {&a, &b}) {
    for (const auto& r : *set) {
      for (auto& t : syntax::token_texts(r.input)) toks.push_back(std::move(t));
      for (auto& t : syntax::token_texts(r.output)) toks.push_back(std::move(t));
    }
  }
  return Vocabulary::from_tokens(std::move(toks));
}

namespace {

bool finite(const std::vector<double>& v) {
  bool bad = false;
  for (double x : v) bad |= !(std::abs(x) <= std::numeric_limits<double>::max());
  return !bad;
}

bool finite(const Gradient& g) { return finite(g.W) && finite(g.u) && std::isfinite(g.b); }

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

// Batches of record indices, reshuffled at every pass over the data.
class BatchCycler {
 public:
  BatchCycler(std::size_t n, std::size_t batch, std::mt19937_64& rng) : n_(n), batch_(batch), rng_(rng) {}
  std::vector<std::size_t> next() {
    std::vector<std::size_t> out;
    while (out.size() < std::min(batch_, n_)) {
      if (pos_ == order_.size()) {
        order_.resize(n_);
        std::iota(order_.begin(), order_.end(), 0);
        std::shuffle(order_.begin(), order_.end(), rng_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  std::size_t n_, batch_;
  std::mt19937_64& rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

void run_sft(PolicySnapshot& policy, const std::vector<mining::RefactoringRecord>& data,
             const TrainConfig& config, std::mt19937_64& rng, TrainLog& log) {
  if (data.empty()) throw DataError("SFT dataset is empty");
  std::vector<SftExample> examples;
  for (const auto& r : data) {
    SftExample ex{policy.vocab.encode(syntax::token_texts(r.input)),
                  policy.vocab.encode(syntax::token_texts(r.output))};
    ex.y.push_back(policy.vocab.eos());
    examples.push_back(std::move(ex));
  }
  Adam opt(config.sft_learning_rate);
  std::size_t step = 0;
  std::vector<std::size_t> order(examples.size());
  for (std::size_t epoch = 0; epoch < config.sft_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::vector<SftExample> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i) {
        batch.push_back(examples[order[i]]);
      }
      Gradient g;
      double loss = sft_loss(policy, batch, &g);
      if (!std::isfinite(loss) || !finite(g)) {
        spdlog::warn("sft step {}: non-finite gradient, step skipped", step);
      } else {
        opt.step_policy(policy, g, /*ascend=*/false);
      }
      log.sft.push_back({epoch, step++, loss});
    }
    spdlog::debug("sft epoch {} done, last loss {}", epoch, log.sft.back().loss);
  }
}

}  // namespace

RlStepStats ppo_update(const PolicySnapshot& old_policy, PolicySnapshot& policy,
                       const std::vector<Episode>& episodes, KlController& kl,
                       const TrainConfig& config, Adam& policy_opt, Adam& value_opt) {
  RlStepStats stats;
  std::vector<double> rewards;
  for (const auto& e : episodes) rewards.push_back(e.r_total);
  std::tie(stats.mean_reward, stats.reward_std) = mean_std(rewards);
  stats.beta = kl.beta;

  const auto cache = prepare_ppo_batch(old_policy, episodes);
  const auto saved_W = policy.W;
  const auto saved_u = policy.u;
  const double saved_b = policy.b;
  for (std::size_t epoch = 0; epoch < std::max<std::size_t>(1, config.ppo_epochs); ++epoch) {
    Gradient g;
    auto terms = ppo_objective(policy, cache, kl.beta, config.clip, &g);
    Gradient gv;
    double vl = value_loss(policy, episodes, &gv);
    if (!std::isfinite(terms.objective) || !finite(g) || !std::isfinite(vl) || !finite(gv)) {
      spdlog::warn("ppo: non-finite gradient, restoring parameters and skipping the step");
      policy.W = saved_W;
      policy.u = saved_u;
      policy.b = saved_b;
      stats.aborted = true;
      break;
    }
    if (epoch == 0) stats.value_loss = vl;
    stats.policy_loss = -terms.objective;
    policy_opt.step_policy(policy, g, /*ascend=*/true);
    value_opt.step_value(policy, gv);
  }
  stats.mean_kl = mean_policy_kl(policy, cache);
  if (config.adaptive_kl) kl = adapt_kl(kl, stats.mean_kl);
  return stats;
}

namespace {

std::vector<reward::RewardBreakdown> score_all(const reward::RewardOracle& oracle,
                                               const std::vector<std::string>& before,
                                               const std::vector<std::string>& generated,
                                               std::size_t workers) {
  std::vector<reward::RewardBreakdown> out(before.size());
  util::parallel_for(before.size(), workers,
                     [&](std::size_t i) { out[i] = oracle.score(before[i], generated[i]); });
  return out;
}

std::string decode_output(const Vocabulary& vocab, const TokenIds& y) { return vocab.decode(y); }

void run_rl(PolicySnapshot& policy, const std::vector<mining::RefactoringRecord>& data,
            const reward::RewardOracle& oracle, const TrainConfig& config, std::mt19937_64& rng,
            TrainLog& log) {
  if (data.empty()) throw DataError("RL dataset is empty");
  std::vector<TokenIds> inputs;
  for (const auto& r : data) inputs.push_back(policy.vocab.encode(syntax::token_texts(r.input)));
  const PolicySnapshot reference = policy;
  Adam policy_opt(config.rl_learning_rate);
  Adam value_opt(config.value_learning_rate);
  KlController kl = config.kl;
  BatchCycler cycler(data.size(), config.batch_size, rng);
  const auto sampling = config.sampling();

  for (std::size_t step = 0; step < config.rl_steps; ++step) {
    const PolicySnapshot old_policy = policy;
    auto idx = cycler.next();
    std::vector<Episode> episodes(idx.size());
    std::vector<std::string> before, generated;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto& e = episodes[i];
      e.x = inputs[idx[i]];
      e.y = sample_sequence(old_policy, e.x, sampling, rng);
      e.old_logprobs = policy_logprob(old_policy, e.x, e.y).per_token;
      before.push_back(data[idx[i]].input);
      generated.push_back(decode_output(policy.vocab, e.y));
    }
    auto scores = score_all(oracle, before, generated, config.reward_workers);
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      auto& e = episodes[i];
      e.reward = std::move(scores[i]);
      e.r_total = e.reward.r_total;
      if (config.reference_kl_coef > 0.0) {
        double old_lp = std::accumulate(e.old_logprobs.begin(), e.old_logprobs.end(), 0.0);
        e.r_total -= config.reference_kl_coef * (old_lp - policy_logprob(reference, e.x, e.y).total);
      }
      e.value = estimate_value(policy, e.x);
      e.advantage = compute_advantage(e);
    }
    if (config.whiten_advantages) whiten_advantages(episodes);

    auto stats = ppo_update(old_policy, policy, episodes, kl, config, policy_opt, value_opt);
    log.rl.push_back({step, stats.mean_reward, stats.reward_std, stats.mean_kl, stats.beta,
                      stats.policy_loss, stats.value_loss});
    if (step % 100 == 0 || step + 1 == config.rl_steps) {
      spdlog::debug("rl step {}: reward {:.3f} (std {:.3f}) kl {:.4f} beta {:.4g}", step,
                    stats.mean_reward, stats.reward_std, stats.mean_kl, stats.beta);
    }
  }
}

}  // namespace

std::pair<double, double> evaluate_policy(const PolicySnapshot& policy,
                                          const std::vector<mining::RefactoringRecord>& records,
                                          const reward::RewardOracle& oracle,
                                          const TrainConfig& config, std::uint64_t seed) {
  if (records.empty()) throw DataError("evaluation set is empty");
  std::mt19937_64 rng(seed);
  std::vector<std::string> before, generated;
  for (const auto& r : records) {
    auto x = policy.vocab.encode(syntax::token_texts(r.input));
    generated.push_back(decode_output(policy.vocab, sample_sequence(policy, x, config.sampling(), rng)));
    before.push_back(r.input);
  }
  auto scores = score_all(oracle, before, generated, config.reward_workers);
  std::vector<double> totals;
  for (const auto& s : scores) totals.push_back(s.r_total);
  return mean_std(totals);
}

TrainResult train(TrainMode mode, const std::vector<mining::RefactoringRecord>& sft_data,
                  const std::vector<mining::RefactoringRecord>& rl_data,
                  const reward::RewardOracle& oracle, const TrainConfig& config,
                  const PolicySnapshot* initial) {
  if (config.batch_size < 1 || config.ppo_epochs < 1) throw ConfigError("batch size and PPO epochs must be positive");
  if (mode == TrainMode::SftRl) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : sft_data) seen.emplace(r.input, r.output);
    for (const auto& r : rl_data) {
      if (seen.contains({r.input, r.output})) {
        throw DataError("SFT and RL datasets share a record; they must be disjoint");
      }
    }
  }
  TrainResult result;
  result.log.whitened_advantages = config.whiten_advantages;
  if (initial != nullptr) {
    result.snapshot = *initial;
  } else {
    result.snapshot = PolicySnapshot::zeros(build_vocabulary(sft_data, rl_data), config.features);
  }
  std::mt19937_64 rng(config.seed);
  if (mode != TrainMode::Rl) run_sft(result.snapshot, sft_data, config, rng, result.log);
  if (mode != TrainMode::Sft) run_rl(result.snapshot, rl_data, oracle, config, rng, result.log);
  return result;
}

}  // namespace emr::align
