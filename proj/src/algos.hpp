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

#ifndef YAHTZEE_RL_SRC_ALGOS_HPP_
#define YAHTZEE_RL_SRC_ALGOS_HPP_

#include <span>
#include <string>
#include <vector>

#include "net.hpp"

namespace yahtzee {

enum class AlgoKind { kReinforce, kA2c, kPpo };

const char* to_string(AlgoKind kind);
AlgoKind algo_from_string(const std::string& s);

// ---- Return / advantage estimators (per episode) ---------------------------

// G_t = sum_{k>=t} gamma^{k-t} r_k.
std::vector<double> mc_returns(std::span<const double> rewards, double gamma);

// delta_t = r_t + gamma V(s_{t+1}) - V(s_t), bootstrapping 0 past the end.
std::vector<double> td0_errors(std::span<const double> rewards,
                               std::span<const double> values, double gamma);

// A_t = sum_{k>=0} (gamma lambda)^k delta_{t+k}.
std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values,
                                   double gamma, double lambda);

// In place: zero mean, unit (population) standard deviation, 1e-8 guard.
// Requires at least two entries.
void normalize_advantages(std::span<double> advantages);

// ---- Entropy schedule -------------------------------------------------------

struct EntropySchedule {
  double roll_max = 0.1, roll_min = 0.02;
  double score_max = 0.03, score_min = 0.01;
  double hold_frac = 0.075, anneal_frac = 0.9;
};

struct EntropyCoefficients {
  double roll = 0.0;
  double score = 0.0;
};

// Hold at max through hold_frac of training, decay linearly to min at
// anneal_frac, constant min afterwards.
EntropyCoefficients entropy_coefficients(int64_t step, int64_t total_steps,
                                         const EntropySchedule& schedule);

// Named regimes; "custom" keeps the caller's values.
bool entropy_regime_preset(const std::string& name, EntropySchedule* out);

// ---- Learned-potential reward shaping ---------------------------------------

// Normalized regression target for the upper head.
inline double upper_norm_target(int final_upper_sum) {
  return final_upper_sum / 63.0 - 1.0;
}

// Potential of a state given the upper head's prediction. The normalized
// form spans [0, 35] (bonus-sized); literal_form reproduces the unscaled
// printed variant spanning [0, 2205].
double shaping_potential(double upper_pred, bool literal_form);

// r'_t = r_t + beta (gamma Phi(s_{t+1}) - Phi(s_t)) along one episode, with
// the terminal successor's potential taken at the final observed state.
std::vector<double> shaped_rewards(std::span<const double> rewards,
                                   std::span<const double> upper_preds,
                                   double gamma, double beta_shape,
                                   bool literal_form);

// ---- Loss assembly -----------------------------------------------------------

// Quantities treated as constants by the gradient contract: the policy
// coefficient never backpropagates, value targets are fixed, and PPO ratios
// are measured against the behavior policy's recorded log-probabilities.
struct BatchSignals {
  std::vector<double> policy_adv;
  std::vector<double> value_target;
  std::vector<double> behavior_logprob;  // PPO only
  std::vector<double> unorm_target;      // empty when regression is off
};

struct LossConfig {
  AlgoKind kind = AlgoKind::kA2c;
  double value_coef = 0.005;
  bool value_loss_abs = false;  // REINFORCE uses an unsquared L2 value term
  double beta_roll = 0.0;
  double beta_score = 0.0;
  double beta_regression = 0.0;  // > 0 enables the upper-head regression
  double ppo_epsilon = 0.2;
};

struct LossBreakdown {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;  // term added to the loss (non-positive for beta>0)
  double upper = 0.0;
  double mean_entropy_roll = 0.0;
  double mean_entropy_score = 0.0;
  double mean_abs_ratio_dev = 0.0;  // PPO: mean |ratio - 1|
};

template <typename T>
struct HeadGrads {
  std::vector<T> roll, score, value, upper;
  void init(int n, int roll_dim) {
    roll.assign(static_cast<size_t>(n) * roll_dim, T(0));
    score.assign(static_cast<size_t>(n) * kNumCategories, T(0));
    value.assign(static_cast<size_t>(n), T(0));
    upper.assign(static_cast<size_t>(n), T(0));
  }
};

// Mean-reduced loss over a flat batch of steps (episodes of length
// steps_per_episode laid out consecutively; within a turn the two keep
// decisions precede the scoring decision). When `grads` is non-null the
// derivatives with respect to the head outputs are written there, honoring
// the detachment contract. All reductions run in double.
template <typename T>
LossBreakdown assemble_loss(const PolicyOut<T>& po,
                            const uint16_t* score_masks,
                            const uint8_t* actions, int steps_per_episode,
                            const BatchSignals& signals, const LossConfig& cfg,
                            HeadGrads<T>* grads);

// True if step index `pos` within an episode is a keep decision.
inline bool is_roll_step(int pos_in_episode) {
  return pos_in_episode % 3 != 2;
}

// Log-probability of the given action under one output row.
template <typename T>
double roll_log_prob(const PolicyOut<T>& po, int row, uint8_t keep_mask);
template <typename T>
double score_log_prob(const PolicyOut<T>& po, int row, int category_index);

// Entropy of one output row's distribution.
template <typename T>
double roll_entropy(const PolicyOut<T>& po, int row);
template <typename T>
double score_entropy(const PolicyOut<T>& po, int row);

extern template LossBreakdown assemble_loss<float>(
    const PolicyOut<float>&, const uint16_t*, const uint8_t*, int,
    const BatchSignals&, const LossConfig&, HeadGrads<float>*);
extern template LossBreakdown assemble_loss<double>(
    const PolicyOut<double>&, const uint16_t*, const uint8_t*, int,
    const BatchSignals&, const LossConfig&, HeadGrads<double>*);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_ALGOS_HPP_
