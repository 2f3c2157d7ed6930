#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emr/align/policy.hpp"
#include "emr/align/ppo.hpp"
#include "emr/mining/record.hpp"
#include "emr/reward/reward.hpp"

namespace emr::align {

enum class TrainMode { Sft, Rl, SftRl };
TrainMode parse_mode(const std::string& name);
std::string to_string(TrainMode mode);

struct TrainConfig {
  std::string preset = "desk";
  std::size_t batch_size = 16;
  std::size_t sft_epochs = 10;
  std::size_t rl_steps = 2000;
  std::size_t ppo_epochs = 10;
  double sft_learning_rate = 0.05;
  double rl_learning_rate = 0.05;  // desk preset: 0.01
  double value_learning_rate = 0.05;
  int min_tokens = -1;
  int max_tokens = 512;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  FeatureConfig features;
  KlController kl;
  bool adaptive_kl = true;
  bool whiten_advantages = true;
  std::optional<double> clip;       // PPO ratio clipping, off by default
  double reference_kl_coef = 0.0;   // per-episode KL to the RL starting policy, off by default
  std::size_t reward_workers = 1;

  static TrainConfig desk();
  static TrainConfig paper();
  /// "desk" or "paper"; throws ConfigError otherwise.
  static TrainConfig preset_named(const std::string& name);
  SamplingConfig sampling() const { return {min_tokens, max_tokens, temperature}; }
};

struct SftLogRow {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double loss = 0.0;
};

struct TrainLogRow {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double reward_std = 0.0;
  double mean_kl = 0.0;
  double beta = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
};

struct TrainLog {
  std::vector<SftLogRow> sft;
  std::vector<TrainLogRow> rl;
  bool whitened_advantages = true;
  /// step,mean_reward,reward_std,mean_kl,beta,policy_loss,value_loss
  std::string csv() const;
  /// epoch,step,loss
  std::string sft_csv() const;
};

struct RlStepStats {
  double mean_reward = 0.0;
  double reward_std = 0.0;
  double mean_kl = 0.0;
  double beta = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  bool aborted = false;
};

/// Tokens of every input and output, plus the specials.
Vocabulary build_vocabulary(const std::vector<mining::RefactoringRecord>& a,
                            const std::vector<mining::RefactoringRecord>& b);

/// One PPO step on episodes sampled from `old_policy`: `ppo_epochs` Adam ascent
/// steps on J(theta) plus value-head steps. Episodes need advantages already.
/// Restores the step's starting parameters on a non-finite gradient.
RlStepStats ppo_update(const PolicySnapshot& old_policy, PolicySnapshot& policy,
                       const std::vector<Episode>& episodes, KlController& kl,
                       const TrainConfig& config, Adam& policy_opt, Adam& value_opt);

/// Samples one output per record and scores it. Returns (mean, std).
std::pair<double, double> evaluate_policy(const PolicySnapshot& policy,
                                          const std::vector<mining::RefactoringRecord>& records,
                                          const reward::RewardOracle& oracle,
                                          const TrainConfig& config, std::uint64_t seed);

struct TrainResult {
  PolicySnapshot snapshot;
  TrainLog log;
};

/// sft: teacher-forced epochs over sft_data. rl: PPO over rl_data from
/// `initial` (or a zero policy). sft+rl: both in sequence; the two datasets
/// must not share a record.
TrainResult train(TrainMode mode, const std::vector<mining::RefactoringRecord>& sft_data,
                  const std::vector<mining::RefactoringRecord>& rl_data,
                  const reward::RewardOracle& oracle, const TrainConfig& config,
                  const PolicySnapshot* initial = nullptr);

}  // namespace emr::align
