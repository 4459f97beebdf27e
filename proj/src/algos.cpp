// Copyright 2026 The yahtzee-rl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "algos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace yahtzee {

const char* to_string(AlgoKind kind) {
  switch (kind) {
    case AlgoKind::kReinforce:
      return "reinforce";
    case AlgoKind::kA2c:
      return "a2c";
    case AlgoKind::kPpo:
      return "ppo";
  }
  return "?";
}

AlgoKind algo_from_string(const std::string& s) {
  if (s == "reinforce") return AlgoKind::kReinforce;
  if (s == "a2c") return AlgoKind::kA2c;
  if (s == "ppo") return AlgoKind::kPpo;
  throw std::invalid_argument("unknown algorithm: " + s);
}

std::vector<double> mc_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    g[i] = acc;
  }
  return g;
}

std::vector<double> td0_errors(std::span<const double> rewards,
                               std::span<const double> values, double gamma) {
  if (rewards.size() != values.size())
    throw std::invalid_argument("td0: rewards/values length mismatch");
  std::vector<double> delta(rewards.size());
  for (size_t t = 0; t < rewards.size(); ++t) {
    const double next_v = t + 1 < values.size() ? values[t + 1] : 0.0;
    delta[t] = rewards[t] + gamma * next_v - values[t];
  }
  return delta;
}

std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values,
                                   double gamma, double lambda) {
  std::vector<double> adv = td0_errors(rewards, values, gamma);
  double acc = 0.0;
  for (size_t i = adv.size(); i-- > 0;) {
    acc = adv[i] + gamma * lambda * acc;
    adv[i] = acc;
  }
  return adv;
}

void normalize_advantages(std::span<double> advantages) {
  if (advantages.size() < 2)
    throw std::invalid_argument("normalize_advantages needs >= 2 entries");
  bool all_equal = true;
  for (double a : advantages) all_equal &= a == advantages[0];
  if (all_equal) {
    for (double& a : advantages) a = 0.0;
    return;
  }
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= static_cast<double>(advantages.size());
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(advantages.size());
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages) a = (a - mean) * inv;
}

EntropyCoefficients entropy_coefficients(int64_t step, int64_t total_steps,
                                         const EntropySchedule& s) {
  const double progress =
      total_steps > 0
          ? std::clamp(static_cast<double>(step) / total_steps, 0.0, 1.0)
          : 1.0;
  auto value = [&](double max, double min) {
    if (progress <= s.hold_frac) return max;
    if (progress >= s.anneal_frac) return min;
    const double t =
        (progress - s.hold_frac) / (s.anneal_frac - s.hold_frac);
    return max + t * (min - max);
  };
  return {value(s.roll_max, s.roll_min), value(s.score_max, s.score_min)};
}

bool entropy_regime_preset(const std::string& name, EntropySchedule* out) {
  if (name == "none") {
    *out = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  } else if (name == "low") {
    *out = {0.05, 0.01, 0.01, 0.005, 0.2, 0.4};
  } else if (name == "baseline") {
    *out = {0.1, 0.02, 0.03, 0.01, 0.3, 0.6};
  } else if (name == "high") {
    *out = {0.2, 0.04, 0.06, 0.02, 0.35, 0.65};
  } else {
    return false;
  }
  return true;
}

double shaping_potential(double upper_pred, bool literal_form) {
  const double clamped =
      std::clamp(63.0 * (upper_pred + 1.0), 0.0, 63.0);
  const double raw = 35.0 * clamped;
  return literal_form ? raw : raw / 63.0;
}

std::vector<double> shaped_rewards(std::span<const double> rewards,
                                   std::span<const double> upper_preds,
                                   double gamma, double beta_shape,
                                   bool literal_form) {
  if (rewards.size() != upper_preds.size())
    throw std::invalid_argument("shaping: rewards/preds length mismatch");
  std::vector<double> out(rewards.begin(), rewards.end());
  if (rewards.empty()) return out;
  const size_t last = rewards.size() - 1;
  for (size_t t = 0; t < rewards.size(); ++t) {
    const double phi_s = shaping_potential(upper_preds[t], literal_form);
    const double phi_next =
        shaping_potential(upper_preds[t == last ? last : t + 1],
                          literal_form);
    out[t] += beta_shape * (gamma * phi_next - phi_s);
  }
  return out;
}

template <typename T>
double roll_log_prob(const PolicyOut<T>& po, int row, uint8_t keep_mask) {
  const T* p = po.roll_probs.data() + static_cast<size_t>(row) * po.roll_dim;
  if (po.roll_dim == kNumKeepMasks)
    return std::log(std::max(static_cast<double>(p[keep_mask]), 1e-300));
  double lp = 0.0;
  for (int i = 0; i < kNumDice; ++i) {
    const double pi = p[i];
    lp += std::log(std::max(keep_mask & (1u << i) ? pi : 1.0 - pi, 1e-300));
  }
  return lp;
}

template <typename T>
double score_log_prob(const PolicyOut<T>& po, int row, int category_index) {
  const double p =
      po.score_probs[static_cast<size_t>(row) * kNumCategories +
                     category_index];
  return std::log(std::max(p, 1e-300));
}

template <typename T>
double roll_entropy(const PolicyOut<T>& po, int row) {
  const T* p = po.roll_probs.data() + static_cast<size_t>(row) * po.roll_dim;
  double h = 0.0;
  if (po.roll_dim == kNumKeepMasks) {
    for (int j = 0; j < kNumKeepMasks; ++j) {
      const double pj = p[j];
      if (pj > 0.0) h -= pj * std::log(pj);
    }
  } else {
    for (int i = 0; i < kNumDice; ++i) {
      const double pi = p[i];
      if (pi > 0.0) h -= pi * std::log(pi);
      if (pi < 1.0) h -= (1.0 - pi) * std::log(1.0 - pi);
    }
  }
  return h;
}

template <typename T>
double score_entropy(const PolicyOut<T>& po, int row) {
  const T* p = po.score_probs.data() + static_cast<size_t>(row) * kNumCategories;
  double h = 0.0;
  for (int j = 0; j < kNumCategories; ++j) {
    const double pj = p[j];
    if (pj > 0.0) h -= pj * std::log(pj);
  }
  return h;
}

namespace {

// d(-H)/dz for a softmax row, scaled by `coef`. Masked probabilities are
// exactly zero, so their entries stay untouched.
template <typename T>
void add_neg_entropy_grad_softmax(const T* probs, int dim, double entropy,
                                  double coef, T* d_logits) {
  for (int j = 0; j < dim; ++j) {
    const double pj = probs[j];
    if (pj <= 0.0) continue;
    d_logits[j] += static_cast<T>(coef * pj * (std::log(pj) + entropy));
  }
}

}  // namespace

template <typename T>
LossBreakdown assemble_loss(const PolicyOut<T>& po,
                            const uint16_t* score_masks,
                            const uint8_t* actions, int steps_per_episode,
                            const BatchSignals& signals, const LossConfig& cfg,
                            HeadGrads<T>* grads) {
  const int n = po.n;
  if (n == 0 || steps_per_episode <= 0 || n % steps_per_episode != 0)
    throw std::invalid_argument("assemble_loss: bad batch shape");
  const bool ppo = cfg.kind == AlgoKind::kPpo;
  const bool regression = cfg.beta_regression > 0.0 &&
                          !signals.unorm_target.empty();
  const double scale = 1.0 / n;

  LossBreakdown out;
  double policy = 0.0, value = 0.0, entropy_term = 0.0, upper = 0.0;
  double h_roll_sum = 0.0, h_score_sum = 0.0, ratio_dev_sum = 0.0;
  int ppo_steps = 0;

  for (int t = 0; t < n; ++t) {
    const int pos = t % steps_per_episode;
    const bool roll_step = is_roll_step(pos);
    const double adv = signals.policy_adv[t];

    // Policy term on the acting head.
    if (!ppo) {
      if (roll_step) {
        const double lp = roll_log_prob(po, t, actions[t]);
        policy += scale * (-lp) * adv;
        if (grads != nullptr) {
          T* dz = grads->roll.data() + static_cast<size_t>(t) * po.roll_dim;
          const T* p =
              po.roll_probs.data() + static_cast<size_t>(t) * po.roll_dim;
          if (po.roll_dim == kNumKeepMasks) {
            for (int j = 0; j < kNumKeepMasks; ++j)
              dz[j] += static_cast<T>(
                  scale * adv *
                  (static_cast<double>(p[j]) - (j == actions[t] ? 1.0 : 0.0)));
          } else {
            for (int i = 0; i < kNumDice; ++i) {
              const double bit = (actions[t] >> i) & 1u;
              dz[i] += static_cast<T>(scale * adv *
                                      (static_cast<double>(p[i]) - bit));
            }
          }
        }
      } else {
        const double lp = score_log_prob(po, t, actions[t]);
        policy += scale * (-lp) * adv;
        if (grads != nullptr) {
          T* dz = grads->score.data() + static_cast<size_t>(t) * kNumCategories;
          const T* p =
              po.score_probs.data() + static_cast<size_t>(t) * kNumCategories;
          const uint16_t mask = score_masks[t];
          for (int j = 0; j < kNumCategories; ++j) {
            if (!(mask & (1u << j))) continue;
            dz[j] += static_cast<T>(
                scale * adv *
                (static_cast<double>(p[j]) - (j == actions[t] ? 1.0 : 0.0)));
          }
        }
      }
    } else {
      // PPO clipped surrogate; gradient flows through the unclipped branch
      // only when it attains the min.
      const double lp_new = roll_step ? roll_log_prob(po, t, actions[t])
                                      : score_log_prob(po, t, actions[t]);
      const double ratio = std::exp(lp_new - signals.behavior_logprob[t]);
      const double clipped =
          std::clamp(ratio, 1.0 - cfg.ppo_epsilon, 1.0 + cfg.ppo_epsilon);
      const double b1 = ratio * adv;
      const double b2 = clipped * adv;
      policy += scale * -std::min(b1, b2);
      ratio_dev_sum += std::abs(ratio - 1.0);
      ++ppo_steps;
      if (grads != nullptr && b1 <= b2) {
        const double coef = scale * adv * ratio;
        if (roll_step) {
          T* dz = grads->roll.data() + static_cast<size_t>(t) * po.roll_dim;
          const T* p =
              po.roll_probs.data() + static_cast<size_t>(t) * po.roll_dim;
          if (po.roll_dim == kNumKeepMasks) {
            for (int j = 0; j < kNumKeepMasks; ++j)
              dz[j] += static_cast<T>(
                  coef *
                  (static_cast<double>(p[j]) - (j == actions[t] ? 1.0 : 0.0)));
          } else {
            for (int i = 0; i < kNumDice; ++i) {
              const double bit = (actions[t] >> i) & 1u;
              dz[i] += static_cast<T>(coef * (static_cast<double>(p[i]) - bit));
            }
          }
        } else {
          T* dz = grads->score.data() + static_cast<size_t>(t) * kNumCategories;
          const T* p =
              po.score_probs.data() + static_cast<size_t>(t) * kNumCategories;
          const uint16_t mask = score_masks[t];
          for (int j = 0; j < kNumCategories; ++j) {
            if (!(mask & (1u << j))) continue;
            dz[j] += static_cast<T>(
                coef *
                (static_cast<double>(p[j]) - (j == actions[t] ? 1.0 : 0.0)));
          }
        }
      }
    }

    // Value loss.
    const double diff = static_cast<double>(po.value[t]) -
                        signals.value_target[t];
    if (cfg.value_loss_abs) {
      value += scale * cfg.value_coef * std::abs(diff);
      if (grads != nullptr && diff != 0.0)
        grads->value[t] += static_cast<T>(scale * cfg.value_coef *
                                          (diff > 0 ? 1.0 : -1.0));
    } else {
      value += scale * cfg.value_coef * diff * diff;
      if (grads != nullptr)
        grads->value[t] +=
            static_cast<T>(scale * cfg.value_coef * 2.0 * diff);
    }

    // Entropy bonus on both heads at every step.
    const double h_roll = roll_entropy(po, t);
    const double h_score = score_entropy(po, t);
    h_roll_sum += h_roll;
    h_score_sum += h_score;
    entropy_term -=
        scale * (cfg.beta_roll * h_roll + cfg.beta_score * h_score);
    if (grads != nullptr) {
      if (cfg.beta_roll > 0.0) {
        T* dz = grads->roll.data() + static_cast<size_t>(t) * po.roll_dim;
        const T* p =
            po.roll_probs.data() + static_cast<size_t>(t) * po.roll_dim;
        if (po.roll_dim == kNumKeepMasks) {
          add_neg_entropy_grad_softmax(p, kNumKeepMasks, h_roll,
                                       scale * cfg.beta_roll, dz);
        } else {
          // d(-H)/dz_i = -ln((1-p)/p) p (1-p) per independent die.
          for (int i = 0; i < kNumDice; ++i) {
            const double pi = p[i];
            if (pi <= 0.0 || pi >= 1.0) continue;
            dz[i] += static_cast<T>(scale * cfg.beta_roll *
                                    -(std::log((1.0 - pi) / pi) * pi *
                                      (1.0 - pi)));
          }
        }
      }
      if (cfg.beta_score > 0.0) {
        add_neg_entropy_grad_softmax(
            po.score_probs.data() + static_cast<size_t>(t) * kNumCategories,
            kNumCategories, h_score, scale * cfg.beta_score,
            grads->score.data() + static_cast<size_t>(t) * kNumCategories);
      }
    }

    // Upper-head regression.
    if (regression) {
      const double udiff = static_cast<double>(po.upper[t]) -
                           signals.unorm_target[t];
      upper += scale * cfg.beta_regression * udiff * udiff;
      if (grads != nullptr)
        grads->upper[t] +=
            static_cast<T>(scale * cfg.beta_regression * 2.0 * udiff);
    }
  }

  out.policy = policy;
  out.value = value;
  out.entropy = entropy_term;
  out.upper = upper;
  out.total = policy + value + entropy_term + upper;
  out.mean_entropy_roll = h_roll_sum / n;
  out.mean_entropy_score = h_score_sum / n;
  out.mean_abs_ratio_dev = ppo_steps > 0 ? ratio_dev_sum / ppo_steps : 0.0;
  return out;
}

template double roll_log_prob<float>(const PolicyOut<float>&, int, uint8_t);
template double roll_log_prob<double>(const PolicyOut<double>&, int, uint8_t);
template double score_log_prob<float>(const PolicyOut<float>&, int, int);
template double score_log_prob<double>(const PolicyOut<double>&, int, int);
template double roll_entropy<float>(const PolicyOut<float>&, int);
template double roll_entropy<double>(const PolicyOut<double>&, int);
template double score_entropy<float>(const PolicyOut<float>&, int);
template double score_entropy<double>(const PolicyOut<double>&, int);
template LossBreakdown assemble_loss<float>(const PolicyOut<float>&,
                                            const uint16_t*, const uint8_t*,
                                            int, const BatchSignals&,
                                            const LossConfig&,
                                            HeadGrads<float>*);
template LossBreakdown assemble_loss<double>(const PolicyOut<double>&,
                                             const uint16_t*, const uint8_t*,
                                             int, const BatchSignals&,
                                             const LossConfig&,
                                             HeadGrads<double>*);

}  // namespace yahtzee
