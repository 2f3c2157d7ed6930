#include "emr/align/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "emr/util/error.hpp"

namespace emr::align {

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DataError("KL divergence needs distributions over the same support");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) throw DataError("KL divergence undefined: q is zero where p is positive");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, kl);
}

KlController adapt_kl(KlController c, double observed_kl) {
  if (observed_kl > 1.5 * c.target_kl) {
    c.beta *= c.factor;
  } else if (observed_kl < c.target_kl / 1.5) {
    c.beta /= c.factor;
  }
  // Repeated halving cannot reach zero in practice, but keep beta positive.
  c.beta = std::clamp(c.beta, 1e-12, 1e12);
  return c;
}

double compute_advantage(const Episode& e) { return e.r_total - e.value; }

void whiten_advantages(std::vector<Episode>& episodes) {
  if (episodes.empty()) return;
  double mean = 0.0;
  for (const auto& e : episodes) mean += e.advantage;
  mean /= static_cast<double>(episodes.size());
  double var = 0.0;
  for (const auto& e : episodes) var += (e.advantage - mean) * (e.advantage - mean);
  var /= static_cast<double>(episodes.size());
  const double sd = std::sqrt(var);
  for (auto& e : episodes) e.advantage = sd > 1e-8 ? (e.advantage - mean) / sd : 0.0;
}

namespace {

void ensure_shape(Gradient& g, const PolicySnapshot& s) {
  g.W.assign(s.W.size(), 0.0);
  g.u.assign(s.u.size(), 0.0);
  g.b = 0.0;
}

// grad_W[f, :] += scale * phi_f * delta
void accumulate(Gradient& g, const Features& phi, const std::vector<double>& delta, double scale) {
  const std::size_t V = delta.size();
  for (const auto& [f, v] : phi) {
    double* row = &g.W[static_cast<std::size_t>(f) * V];
    const double c = scale * v;
    for (std::size_t t = 0; t < V; ++t) row[t] += c * delta[t];
  }
}

double log_softmax_at(const std::vector<double>& z, TokenId tok, std::vector<double>* probs) {
  double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  if (probs) {
    probs->resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) (*probs)[i] = std::exp(z[i] - mx) / sum;
  }
  return z[tok] - mx - std::log(sum);
}

}  // namespace

double sft_loss(const PolicySnapshot& s, const std::vector<SftExample>& batch, Gradient* grad) {
  if (batch.empty()) throw DataError("SFT batch is empty");
  if (grad) ensure_shape(*grad, s);
  std::size_t n_tokens = 0;
  for (const auto& ex : batch) n_tokens += ex.y.size();
  if (n_tokens == 0) throw DataError("SFT batch has no target tokens");
  const double inv = 1.0 / static_cast<double>(n_tokens);
  double loss = 0.0;
  std::vector<double> p;
  for (const auto& ex : batch) {
    StateEncoder enc(s.vocab, s.features, ex.x);
    TokenIds prefix;
    for (auto tok : ex.y) {
      auto phi = enc.encode(prefix);
      auto z = logits(s, phi);
      loss -= log_softmax_at(z, tok, grad ? &p : nullptr);
      if (grad) {
        p[tok] -= 1.0;  // d(-log p_y)/dz = p - onehot
        accumulate(*grad, phi, p, inv);
      }
      prefix.push_back(tok);
    }
  }
  return loss * inv;
}

std::vector<PpoEpisodeCache> prepare_ppo_batch(const PolicySnapshot& old_policy,
                                               const std::vector<Episode>& episodes) {
  std::vector<PpoEpisodeCache> out;
  out.reserve(episodes.size());
  for (const auto& e : episodes) {
    PpoEpisodeCache c;
    StateEncoder enc(old_policy.vocab, old_policy.features, e.x);
    TokenIds prefix;
    for (auto tok : e.y) {
      c.phi.push_back(enc.encode(prefix));
      auto z = logits(old_policy, c.phi.back());
      std::vector<double> p;
      c.old_logprob += log_softmax_at(z, tok, &p);
      c.old_probs.push_back(std::move(p));
      prefix.push_back(tok);
    }
    c.y = e.y;
    c.advantage = e.advantage;
    out.push_back(std::move(c));
  }
  return out;
}

PpoTerms ppo_objective(const PolicySnapshot& theta, const std::vector<PpoEpisodeCache>& batch,
                       double beta, std::optional<double> clip, Gradient* grad) {
  if (grad) ensure_shape(*grad, theta);
  PpoTerms terms;
  if (batch.empty()) return terms;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const std::size_t V = theta.vocab_size();
  std::vector<std::vector<double>> probs;
  std::vector<double> delta(V);
  for (const auto& c : batch) {
    const std::size_t T = c.y.size();
    probs.assign(T, {});
    double logp = 0.0;
    double kl = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      auto z = logits(theta, c.phi[t]);
      logp += log_softmax_at(z, c.y[t], &probs[t]);
      kl += kl_divergence(c.old_probs[t], probs[t]);
    }
    const double seq_kl = T > 0 ? kl / static_cast<double>(T) : 0.0;
    const double ratio = std::exp(logp - c.old_logprob);
    double surrogate = ratio * c.advantage;
    bool ratio_active = true;
    if (clip) {
      const double clipped = std::clamp(ratio, 1.0 - *clip, 1.0 + *clip) * c.advantage;
      if (clipped < surrogate) {
        surrogate = clipped;
        ratio_active = false;  // flat region: no gradient through the ratio
      }
    }
    terms.objective += inv_b * (surrogate - beta * seq_kl);
    terms.mean_kl += inv_b * seq_kl;
    terms.mean_ratio += inv_b * ratio;
    if (!grad) continue;
    const double ratio_scale = ratio_active ? inv_b * ratio * c.advantage : 0.0;
    const double kl_scale = T > 0 ? inv_b * beta / static_cast<double>(T) : 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      // d ratio / dz_t = ratio (onehot - p);  d KL_t / dz_t = p - p_old
      for (std::size_t v = 0; v < V; ++v) {
        const double onehot = v == c.y[t] ? 1.0 : 0.0;
        delta[v] = ratio_scale * (onehot - probs[t][v]) - kl_scale * (probs[t][v] - c.old_probs[t][v]);
      }
      accumulate(*grad, c.phi[t], delta, 1.0);
    }
  }
  return terms;
}

double mean_policy_kl(const PolicySnapshot& theta, const std::vector<PpoEpisodeCache>& batch) {
  return ppo_objective(theta, batch, 0.0, std::nullopt, nullptr).mean_kl;
}

double value_loss(const PolicySnapshot& s, const std::vector<Episode>& episodes, Gradient* grad) {
  if (episodes.empty()) throw DataError("value update needs at least one episode");
  if (grad) ensure_shape(*grad, s);
  const double inv = 1.0 / static_cast<double>(episodes.size());
  double loss = 0.0;
  for (const auto& e : episodes) {
    StateEncoder enc(s.vocab, s.features, e.x);
    auto phi = enc.encode({});
    double v = s.b;
    for (const auto& [f, val] : phi) v += s.u[f] * val;
    const double err = e.r_total - v;
    loss += inv * err * err;
    if (grad) {
      // d/dV (R - V)^2 = -2 (R - V)
      const double g = -2.0 * err * inv;
      for (const auto& [f, val] : phi) grad->u[f] += g * val;
      grad->b += g;
    }
  }
  return loss;
}

void Adam::update(std::vector<double>& param, const std::vector<double>& grad,
                  std::vector<double>& m, std::vector<double>& v, long long& t, double sign) {
  if (m.size() != param.size()) {
    m.assign(param.size(), 0.0);
    v.assign(param.size(), 0.0);
  }
  ++t;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = sign * grad[i];
    const double mi = beta1_ * m[i] + (1.0 - beta1_) * g;
    const double vi = beta2_ * v[i] + (1.0 - beta2_) * g * g;
    m[i] = mi;
    v[i] = vi;
    // Untouched coordinates keep m = v = 0 and stay put. Branch-free so the
    // loop vectorizes.
    const double step = lr_ * (mi / c1) / (std::sqrt(vi / c2) + eps_);
    param[i] -= vi == 0.0 ? 0.0 : step;
  }
}

void Adam::step_policy(PolicySnapshot& s, const Gradient& g, bool ascend) {
  update(s.W, g.W, mW_, vW_, tW_, ascend ? -1.0 : 1.0);
}

void Adam::step_value(PolicySnapshot& s, const Gradient& g) {
  long long t = tV_;
  update(s.u, g.u, mU_, vU_, t, 1.0);
  std::vector<double> b{s.b};
  update(b, {g.b}, mB_, vB_, tV_, 1.0);
  s.b = b[0];
}

}  // namespace emr::align
