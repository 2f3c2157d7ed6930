#pragma once

#include <optional>
#include <vector>

#include "emr/align/policy.hpp"
#include "emr/reward/reward.hpp"

namespace emr::align {

/// sum p ln(p/q). Throws DataError when sizes differ or q is 0 where p > 0.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q);

struct KlController {
  double beta = 0.2;
  double target_kl = 0.1;
  double factor = 2.0;
};

/// Doubles beta above 1.5*target, halves it below target/1.5.
KlController adapt_kl(KlController c, double observed_kl);

struct Episode {
  TokenIds x;
  TokenIds y;
  std::vector<double> old_logprobs;
  double value = 0.0;
  reward::RewardBreakdown reward;
  double r_total = 0.0;  // reward used for learning (reward.r_total minus any reference KL)
  double advantage = 0.0;
};

/// A = r_total - V(s).
double compute_advantage(const Episode& e);

/// (A - mean) / std over the batch; all zeros when the batch std is ~0.
void whiten_advantages(std::vector<Episode>& episodes);

/// Dense gradient buffers matching a snapshot's parameters.
struct Gradient {
  std::vector<double> W;
  std::vector<double> u;
  double b = 0.0;
};

struct SftExample {
  TokenIds x;
  TokenIds y;  // ends with EOS
};

/// Mean token cross-entropy under teacher forcing and its gradient w.r.t. W.
double sft_loss(const PolicySnapshot& s, const std::vector<SftExample>& batch, Gradient* grad);

/// Per-episode cache for the PPO objective: features and old distributions
/// at every generated position.
struct PpoEpisodeCache {
  std::vector<Features> phi;
  std::vector<std::vector<double>> old_probs;
  TokenIds y;
  double old_logprob = 0.0;
  double advantage = 0.0;
};
std::vector<PpoEpisodeCache> prepare_ppo_batch(const PolicySnapshot& old_policy,
                                               const std::vector<Episode>& episodes);

struct PpoTerms {
  double objective = 0.0;  // J = mean(ratio * A) - beta * mean KL
  double mean_kl = 0.0;
  double mean_ratio = 0.0;
};

/// J(theta) and dJ/dW. With `clip`, the surrogate min(rA, clip(r)A) is used.
PpoTerms ppo_objective(const PolicySnapshot& theta, const std::vector<PpoEpisodeCache>& batch,
                       double beta, std::optional<double> clip, Gradient* grad);

/// Mean over episodes of the sequence-averaged KL(pi_old || pi_theta).
double mean_policy_kl(const PolicySnapshot& theta, const std::vector<PpoEpisodeCache>& batch);

/// Mean squared error (R - V)^2 over episodes and its gradient w.r.t. (u, b).
double value_loss(const PolicySnapshot& s, const std::vector<Episode>& episodes, Gradient* grad);

/// Adam over the parameter groups of a snapshot. `ascend` flips the sign.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step_policy(PolicySnapshot& s, const Gradient& g, bool ascend);
  void step_value(PolicySnapshot& s, const Gradient& g);
  double lr() const { return lr_; }

 private:
  void update(std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& m,
              std::vector<double>& v, long long& t, double sign);
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> mW_, vW_, mU_, vU_, mB_{0.0}, vB_{0.0};
  long long tW_ = 0, tV_ = 0;
};

}  // namespace emr::align
