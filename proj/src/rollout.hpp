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

#ifndef YAHTZEE_RL_SRC_ROLLOUT_HPP_
#define YAHTZEE_RL_SRC_ROLLOUT_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dp.hpp"
#include "eval_stats.hpp"
#include "features.hpp"
#include "game.hpp"
#include "net.hpp"

namespace yahtzee {

inline constexpr int kFullGameSteps = 39;  // 13 turns x (2 keeps + 1 score)
inline constexpr int kSingleTurnSteps = 3;

// Episode start distribution.
struct EnvSpec {
  bool single_turn = false;
  // Single-turn context: empty card only, or uniformly sampled (category
  // mask uniform over non-full subsets, upper total uniform over sums
  // attainable with the used upper categories).
  bool empty_card_only = false;

  int steps_per_episode() const {
    return single_turn ? kSingleTurnSteps : kFullGameSteps;
  }
};

// Draws the single-turn starting scorecard from the per-game stream.
// Used lower categories get their minimal attainable value; the Yahtzee box,
// when used, is 0 (not bonus-eligible).
Scorecard sample_single_turn_card(const EnvSpec& env, Rng& rng);

// One batch of complete episodes played in lockstep, flattened to
// n_games * steps_per_episode rows in game-major order.
template <typename T>
struct TrajectoryBatch {
  int n_games = 0;
  int steps_per_episode = 0;
  int feat_dim = 0;
  int64_t first_game_index = 0;

  std::vector<T> features;            // row (g * steps + s)
  std::vector<uint16_t> score_masks;  // legal scoring set at each step
  std::vector<uint8_t> actions;       // keep mask or category index
  std::vector<double> behavior_logprob;
  std::vector<double> reward;  // raw environment reward
  std::vector<double> value;   // V(s_t) at collection
  std::vector<double> upper;   // upper prediction at collection
  std::vector<int> final_score;  // per game
  std::vector<int> final_upper;  // per game: upper sum at episode end

  int rows() const { return n_games * steps_per_episode; }
};

// Plays n_games episodes with sampled actions under the current policy.
// Game g uses the stream derive_stream(master_seed, domain, first_game + g);
// draw order per game: context (single-turn), initial roll, then one draw
// block per step. Illegal scoring actions have probability exactly zero.
template <typename T>
TrajectoryBatch<T> collect_batch(const Params<T>& params,
                                 const FeatureConfig& feat_cfg,
                                 const EnvSpec& env, int n_games,
                                 uint64_t master_seed, StreamDomain domain,
                                 int64_t first_game_index);

// Deterministic evaluation: argmax actions (ties toward the lowest ordinal),
// full games, aggregated statistics.
template <typename T>
EvalStats evaluate_net(const Params<T>& params, const FeatureConfig& feat_cfg,
                       int64_t n_games, uint64_t master_seed,
                       uint64_t stream_offset, const std::string& policy_name);

// Mean single-turn score under argmax play of the single-turn task.
template <typename T>
double evaluate_net_single_turn(const Params<T>& params,
                                const FeatureConfig& feat_cfg,
                                const EnvSpec& env, int64_t n_games,
                                uint64_t master_seed, uint64_t stream_offset);

// Full games under a scalar policy (optimal, greedy, random). The factory
// form runs games in parallel across worker threads (YAHTZEE_THREADS), one
// policy instance per worker; the tallies are integer counters, so the
// result is identical for any thread count.
EvalStats simulate_policy(Policy& policy, int64_t n_games,
                          uint64_t master_seed);
EvalStats simulate_policy(
    const std::function<std::unique_ptr<Policy>()>& policy_factory,
    int64_t n_games, uint64_t master_seed);

// ---- Training diagnostics ---------------------------------------------------

// 1 - Var(returns - values) / Var(returns); 0 when returns are constant.
double explained_variance(std::span<const double> values,
                          std::span<const double> returns);

// Mean over rows of KL(old || new), summed across the two action heads.
// Masked score entries contribute zero.
template <typename T>
double policy_kl(const PolicyOut<T>& old_out, const PolicyOut<T>& new_out,
                 std::span<const uint16_t> score_masks);

// Distinct keep masks chosen across the batch's roll decisions, over 32.
double mask_diversity(std::span<const uint8_t> actions,
                      int steps_per_episode);

// Fraction of decisions landing in the k most frequent actions of each head.
struct TopKFrequency {
  double roll = 0.0;
  double score = 0.0;
};
TopKFrequency top_k_frequency(std::span<const uint8_t> actions,
                              int steps_per_episode, int k);

// Fixed probe states for KL tracking: states visited by random play.
std::vector<GameState> make_probe_states(int count, uint64_t master_seed,
                                         const EnvSpec& env);

extern template struct TrajectoryBatch<float>;
extern template struct TrajectoryBatch<double>;

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_ROLLOUT_HPP_
