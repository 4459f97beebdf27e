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

#include "rollout.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <functional>
#include <memory>
#include <thread>

#include "algos.hpp"
#include "parallel.hpp"

namespace yahtzee {

namespace {

// Minimal value every lower category can legally hold.
constexpr int kMinLowerEntry[kNumCategories - 6] = {0, 0, 0, 0, 0, 0, 5};

int attainable_upper_witness(uint16_t used_mask, Rng& rng,
                             std::array<int, 6>* entries) {
  // Sums attainable with the used upper categories: each contributes a
  // multiple of its face value, zero through five dice.
  std::array<uint8_t, 106> reachable{};
  reachable[0] = 1;
  for (int c = 0; c < 6; ++c) {
    if (!(used_mask & (1u << c))) continue;
    const int face = c + 1;
    std::array<uint8_t, 106> next{};
    for (int s = 0; s < 106; ++s) {
      if (!reachable[s]) continue;
      for (int m = 0; m <= 5; ++m)
        if (s + m * face < 106) next[s + m * face] = 1;
    }
    reachable = next;
  }
  int count = 0;
  for (int s = 0; s < 106; ++s) count += reachable[s];
  int pick = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(count)));
  int target = 0;
  for (int s = 0; s < 106; ++s) {
    if (!reachable[s] && s != 0) continue;
    if (reachable[s] && pick-- == 0) {
      target = s;
      break;
    }
  }

  // Deterministic witness: walk the categories backward, taking the
  // smallest multiple that keeps the remainder attainable by the prefix.
  entries->fill(-1);
  std::array<std::array<uint8_t, 106>, 7> prefix{};
  prefix[0][0] = 1;
  for (int c = 0; c < 6; ++c) {
    prefix[c + 1] = prefix[c];
    if (!(used_mask & (1u << c))) continue;
    const int face = c + 1;
    std::array<uint8_t, 106> next{};
    for (int s = 0; s < 106; ++s) {
      if (!prefix[c][s]) continue;
      for (int m = 0; m <= 5; ++m)
        if (s + m * face < 106) next[s + m * face] = 1;
    }
    prefix[c + 1] = next;
  }
  int rest = target;
  for (int c = 5; c >= 0; --c) {
    if (!(used_mask & (1u << c))) continue;
    const int face = c + 1;
    for (int m = 0; m <= 5; ++m) {
      if (rest - m * face >= 0 && prefix[c][rest - m * face]) {
        (*entries)[c] = m * face;
        rest -= m * face;
        break;
      }
    }
  }
  return target;
}

}  // namespace

Scorecard sample_single_turn_card(const EnvSpec& env, Rng& rng) {
  Scorecard card;
  if (env.empty_card_only) return card;
  const uint16_t mask =
      static_cast<uint16_t>(rng.uniform_int(kAllCategoriesMask));  // never full
  std::array<int, 6> upper_entries;
  attainable_upper_witness(mask & kUpperCategoriesMask, rng, &upper_entries);
  for (int c = 0; c < 6; ++c)
    if (mask & (1u << c)) card.set(static_cast<Category>(c), upper_entries[c]);
  for (int c = 6; c < kNumCategories; ++c)
    if (mask & (1u << c))
      card.set(static_cast<Category>(c), kMinLowerEntry[c - 6]);
  return card;
}

namespace {

template <typename T>
uint8_t sample_roll_action(const PolicyOut<T>& po, int row, Rng& rng) {
  const T* p = po.roll_probs.data() + static_cast<size_t>(row) * po.roll_dim;
  if (po.roll_dim == kNumKeepMasks) {
    const double u = rng.uniform01();
    double cdf = 0.0;
    int last_positive = 0;
    for (int j = 0; j < kNumKeepMasks; ++j) {
      if (p[j] <= 0) continue;
      last_positive = j;
      cdf += p[j];
      if (u < cdf) return static_cast<uint8_t>(j);
    }
    return static_cast<uint8_t>(last_positive);
  }
  uint8_t mask = 0;
  for (int i = 0; i < kNumDice; ++i)
    if (rng.uniform01() < static_cast<double>(p[i])) mask |= 1u << i;
  return mask;
}

template <typename T>
int sample_score_action(const PolicyOut<T>& po, int row, Rng& rng) {
  const T* p =
      po.score_probs.data() + static_cast<size_t>(row) * kNumCategories;
  const double u = rng.uniform01();
  double cdf = 0.0;
  int last_positive = -1;
  for (int j = 0; j < kNumCategories; ++j) {
    if (p[j] <= 0) continue;
    last_positive = j;
    cdf += p[j];
    if (u < cdf) return j;
  }
  return last_positive;
}

template <typename T>
uint8_t argmax_roll_action(const PolicyOut<T>& po, int row) {
  const T* p = po.roll_probs.data() + static_cast<size_t>(row) * po.roll_dim;
  if (po.roll_dim == kNumKeepMasks) {
    int best = 0;
    for (int j = 1; j < kNumKeepMasks; ++j)
      if (p[j] > p[best]) best = j;
    return static_cast<uint8_t>(best);
  }
  uint8_t mask = 0;
  for (int i = 0; i < kNumDice; ++i)
    if (p[i] > T(0.5)) mask |= 1u << i;
  return mask;
}

template <typename T>
int argmax_score_action(const PolicyOut<T>& po, int row) {
  const T* p =
      po.score_probs.data() + static_cast<size_t>(row) * kNumCategories;
  int best = -1;
  for (int j = 0; j < kNumCategories; ++j) {
    if (p[j] <= 0) continue;
    if (best < 0 || p[j] > p[best]) best = j;
  }
  return best;
}

GameState make_initial_state(const EnvSpec& env, Rng& rng) {
  if (!env.single_turn) return GameState::initial(rng);
  GameState s;
  s.card = sample_single_turn_card(env, rng);
  s.turn = static_cast<uint8_t>(s.card.entries_used() + 1);
  s.dice = DiceRoll::random(rng);
  return s;
}

}  // namespace

template <typename T>
TrajectoryBatch<T> collect_batch(const Params<T>& params,
                                 const FeatureConfig& feat_cfg,
                                 const EnvSpec& env, int n_games,
                                 uint64_t master_seed, StreamDomain domain,
                                 int64_t first_game_index) {
  const int steps = env.steps_per_episode();
  const int dim = feature_length(feat_cfg);
  TrajectoryBatch<T> batch;
  batch.n_games = n_games;
  batch.steps_per_episode = steps;
  batch.feat_dim = dim;
  batch.first_game_index = first_game_index;
  const size_t rows = static_cast<size_t>(n_games) * steps;
  batch.features.resize(rows * dim);
  batch.score_masks.resize(rows);
  batch.actions.resize(rows);
  batch.behavior_logprob.resize(rows);
  batch.reward.resize(rows);
  batch.value.resize(rows);
  batch.upper.resize(rows);
  batch.final_score.resize(n_games);
  batch.final_upper.resize(n_games);

  std::vector<Rng> rngs;
  std::vector<GameState> states;
  rngs.reserve(n_games);
  states.reserve(n_games);
  for (int g = 0; g < n_games; ++g) {
    rngs.emplace_back(derive_stream(master_seed, domain,
                                    static_cast<uint64_t>(first_game_index + g)));
    states.push_back(make_initial_state(env, rngs.back()));
  }

  std::vector<T> step_feats(static_cast<size_t>(n_games) * dim);
  std::vector<uint16_t> step_masks(n_games);
  PolicyOut<T> po;

  for (int s = 0; s < steps; ++s) {
    const bool score_step = s % 3 == 2;
    for (int g = 0; g < n_games; ++g) {
      encode(states[g], feat_cfg, step_feats.data() + static_cast<size_t>(g) * dim);
      step_masks[g] = score_step
                          ? legal_score_mask(states[g].dice, states[g].card)
                          : states[g].card.open_mask();
    }
    net_forward<T>(params, step_feats.data(), n_games, step_masks.data(),
                   false, nullptr, nullptr, nullptr, &po);
    for (int g = 0; g < n_games; ++g) {
      const size_t row = static_cast<size_t>(g) * steps + s;
      std::copy(step_feats.begin() + static_cast<size_t>(g) * dim,
                step_feats.begin() + static_cast<size_t>(g + 1) * dim,
                batch.features.begin() + row * dim);
      batch.score_masks[row] = step_masks[g];
      batch.value[row] = po.value[g];
      batch.upper[row] = po.upper[g];

      if (!score_step) {
        const uint8_t a = sample_roll_action(po, g, rngs[g]);
        batch.actions[row] = a;
        batch.behavior_logprob[row] = roll_log_prob(po, g, a);
        const StepResult r =
            apply_action(states[g], Action::keep(a), rngs[g]);
        batch.reward[row] = r.reward;
        states[g] = r.next;
      } else {
        const int cat = sample_score_action(po, g, rngs[g]);
        batch.actions[row] = static_cast<uint8_t>(cat);
        batch.behavior_logprob[row] = score_log_prob(po, g, cat);
        const JokerResolution jr = joker_resolution(
            states[g].dice, static_cast<Category>(cat), states[g].card);
        const StepResult r = apply_action(
            states[g], Action::score(static_cast<Category>(cat)), rngs[g]);
        batch.reward[row] = env.single_turn ? jr.points : r.reward;
        states[g] = r.next;
      }
    }
  }

  for (int g = 0; g < n_games; ++g) {
    batch.final_upper[g] = states[g].card.upper_sum();
    batch.final_score[g] =
        env.single_turn
            ? static_cast<int>(
                  batch.reward[static_cast<size_t>(g) * steps + steps - 1])
            : total_score(states[g].card);
  }
  return batch;
}

template <typename T>
EvalStats evaluate_net(const Params<T>& params, const FeatureConfig& feat_cfg,
                       int64_t n_games, uint64_t master_seed,
                       uint64_t stream_offset,
                       const std::string& policy_name) {
  const int dim = feature_length(feat_cfg);
  StatsAccumulator acc;
  constexpr int kChunk = 500;
  std::vector<T> step_feats;
  std::vector<uint16_t> step_masks;
  PolicyOut<T> po;

  for (int64_t start = 0; start < n_games; start += kChunk) {
    const int chunk = static_cast<int>(std::min<int64_t>(kChunk, n_games - start));
    std::vector<Rng> rngs;
    std::vector<GameState> states;
    std::vector<std::array<int8_t, kNumCategories>> turn_cats(
        chunk, {{-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1}});
    std::vector<std::array<int8_t, kNumCategories>> turn_pts(
        chunk, {{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}});
    rngs.reserve(chunk);
    states.reserve(chunk);
    for (int g = 0; g < chunk; ++g) {
      rngs.emplace_back(derive_stream(
          master_seed, StreamDomain::kEvalGame,
          stream_offset + static_cast<uint64_t>(start + g)));
      states.push_back(GameState::initial(rngs.back()));
    }
    step_feats.resize(static_cast<size_t>(chunk) * dim);
    step_masks.resize(chunk);

    for (int s = 0; s < kFullGameSteps; ++s) {
      const bool score_step = s % 3 == 2;
      for (int g = 0; g < chunk; ++g) {
        encode(states[g], feat_cfg,
               step_feats.data() + static_cast<size_t>(g) * dim);
        step_masks[g] = score_step
                            ? legal_score_mask(states[g].dice, states[g].card)
                            : states[g].card.open_mask();
      }
      net_forward<T>(params, step_feats.data(), chunk, step_masks.data(),
                     false, nullptr, nullptr, nullptr, &po);
      for (int g = 0; g < chunk; ++g) {
        if (!score_step) {
          const uint8_t a = argmax_roll_action(po, g);
          states[g] = apply_action(states[g], Action::keep(a), rngs[g]).next;
        } else {
          const int cat = argmax_score_action(po, g);
          const int turn = s / 3;
          const JokerResolution jr = joker_resolution(
              states[g].dice, static_cast<Category>(cat), states[g].card);
          turn_cats[g][turn] = static_cast<int8_t>(cat);
          turn_pts[g][turn] = static_cast<int8_t>(jr.points);
          states[g] = apply_action(states[g],
                                   Action::score(static_cast<Category>(cat)),
                                   rngs[g])
                          .next;
        }
      }
    }
    for (int g = 0; g < chunk; ++g)
      acc.add_game(states[g].card, turn_cats[g], turn_pts[g]);
  }
  return acc.finalize(policy_name, master_seed);
}

template <typename T>
double evaluate_net_single_turn(const Params<T>& params,
                                const FeatureConfig& feat_cfg,
                                const EnvSpec& env, int64_t n_games,
                                uint64_t master_seed, uint64_t stream_offset) {
  const int dim = feature_length(feat_cfg);
  double total = 0.0;
  constexpr int kChunk = 500;
  std::vector<T> step_feats;
  std::vector<uint16_t> step_masks;
  PolicyOut<T> po;
  for (int64_t start = 0; start < n_games; start += kChunk) {
    const int chunk = static_cast<int>(std::min<int64_t>(kChunk, n_games - start));
    std::vector<Rng> rngs;
    std::vector<GameState> states;
    for (int g = 0; g < chunk; ++g) {
      rngs.emplace_back(derive_stream(
          master_seed, StreamDomain::kEvalGame,
          stream_offset + static_cast<uint64_t>(start + g)));
      states.push_back(make_initial_state(env, rngs.back()));
    }
    step_feats.resize(static_cast<size_t>(chunk) * dim);
    step_masks.resize(chunk);
    for (int s = 0; s < kSingleTurnSteps; ++s) {
      const bool score_step = s == 2;
      for (int g = 0; g < chunk; ++g) {
        encode(states[g], feat_cfg,
               step_feats.data() + static_cast<size_t>(g) * dim);
        step_masks[g] = score_step
                            ? legal_score_mask(states[g].dice, states[g].card)
                            : states[g].card.open_mask();
      }
      net_forward<T>(params, step_feats.data(), chunk, step_masks.data(),
                     false, nullptr, nullptr, nullptr, &po);
      for (int g = 0; g < chunk; ++g) {
        if (!score_step) {
          const uint8_t a = argmax_roll_action(po, g);
          states[g] = apply_action(states[g], Action::keep(a), rngs[g]).next;
        } else {
          const int cat = argmax_score_action(po, g);
          total += joker_resolution(states[g].dice, static_cast<Category>(cat),
                                    states[g].card)
                       .points;
        }
      }
    }
  }
  return total / static_cast<double>(n_games);
}

namespace {

void play_games(Policy& policy, uint64_t master_seed, int64_t begin,
                int64_t end, StatsAccumulator* acc) {
  for (int64_t g = begin; g < end; ++g) {
    Rng rng(derive_stream(master_seed, StreamDomain::kEvalGame,
                          static_cast<uint64_t>(g)));
    GameState state = GameState::initial(rng);
    std::array<int8_t, kNumCategories> turn_cats{};
    std::array<int8_t, kNumCategories> turn_pts{};
    while (!state.terminal) {
      const Action a = policy.act(state, rng);
      if (a.kind == Action::Kind::kScore) {
        const JokerResolution jr =
            joker_resolution(state.dice, a.category, state.card);
        turn_cats[state.turn - 1] = static_cast<int8_t>(index_of(a.category));
        turn_pts[state.turn - 1] = static_cast<int8_t>(jr.points);
      }
      state = apply_action(state, a, rng).next;
    }
    acc->add_game(state.card, turn_cats, turn_pts);
  }
}

}  // namespace

EvalStats simulate_policy(Policy& policy, int64_t n_games,
                          uint64_t master_seed) {
  StatsAccumulator acc;
  play_games(policy, master_seed, 0, n_games, &acc);
  return acc.finalize(policy.name(), master_seed);
}

EvalStats simulate_policy(
    const std::function<std::unique_ptr<Policy>()>& policy_factory,
    int64_t n_games, uint64_t master_seed) {
  const int threads =
      static_cast<int>(std::min<int64_t>(worker_thread_count(), n_games));
  std::string name;
  if (threads <= 1) {
    auto policy = policy_factory();
    StatsAccumulator acc;
    play_games(*policy, master_seed, 0, n_games, &acc);
    return acc.finalize(policy->name(), master_seed);
  }
  // Workers pull fixed-size ranges; every tally is an integer counter, so
  // the merged result does not depend on the work distribution.
  constexpr int64_t kChunk = 4096;
  const int64_t n_chunks = (n_games + kChunk - 1) / kChunk;
  std::atomic<int64_t> next{0};
  std::vector<StatsAccumulator> per_worker(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      auto policy = policy_factory();
      if (w == 0) name = policy->name();
      for (;;) {
        const int64_t c = next.fetch_add(1);
        if (c >= n_chunks) return;
        play_games(*policy, master_seed, c * kChunk,
                   std::min(n_games, (c + 1) * kChunk), &per_worker[w]);
      }
    });
  }
  for (auto& t : pool) t.join();
  StatsAccumulator acc;
  for (const auto& part : per_worker) acc.merge(part);
  return acc.finalize(name, master_seed);
}

double explained_variance(std::span<const double> values,
                          std::span<const double> returns) {
  if (values.size() != returns.size() || values.size() < 2)
    throw std::invalid_argument("explained_variance needs >= 2 pairs");
  const double n = static_cast<double>(returns.size());
  double mean_r = 0.0;
  for (double r : returns) mean_r += r;
  mean_r /= n;
  double var_r = 0.0;
  for (double r : returns) var_r += (r - mean_r) * (r - mean_r);
  var_r /= n;
  if (var_r == 0.0) return 0.0;
  double mean_d = 0.0;
  for (size_t i = 0; i < values.size(); ++i) mean_d += returns[i] - values[i];
  mean_d /= n;
  double var_d = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double d = returns[i] - values[i] - mean_d;
    var_d += d * d;
  }
  var_d /= n;
  return 1.0 - var_d / var_r;
}

template <typename T>
double policy_kl(const PolicyOut<T>& old_out, const PolicyOut<T>& new_out,
                 std::span<const uint16_t> score_masks) {
  if (old_out.n != new_out.n || old_out.roll_dim != new_out.roll_dim)
    throw std::invalid_argument("policy_kl: mismatched outputs");
  double total = 0.0;
  for (int r = 0; r < old_out.n; ++r) {
    const T* po = old_out.roll_probs.data() +
                  static_cast<size_t>(r) * old_out.roll_dim;
    const T* pn = new_out.roll_probs.data() +
                  static_cast<size_t>(r) * new_out.roll_dim;
    if (old_out.roll_dim == kNumKeepMasks) {
      for (int j = 0; j < kNumKeepMasks; ++j) {
        const double p = po[j];
        if (p <= 0.0) continue;
        total += p * (std::log(p) -
                      std::log(std::max(static_cast<double>(pn[j]), 1e-300)));
      }
    } else {
      for (int i = 0; i < kNumDice; ++i) {
        const double p = po[i], q = pn[i];
        if (p > 0.0)
          total += p * (std::log(p) - std::log(std::max(q, 1e-300)));
        if (p < 1.0)
          total += (1.0 - p) *
                   (std::log(1.0 - p) - std::log(std::max(1.0 - q, 1e-300)));
      }
    }
    const T* so =
        old_out.score_probs.data() + static_cast<size_t>(r) * kNumCategories;
    const T* sn =
        new_out.score_probs.data() + static_cast<size_t>(r) * kNumCategories;
    for (int j = 0; j < kNumCategories; ++j) {
      if (!(score_masks[r] & (1u << j))) continue;
      const double p = so[j];
      if (p <= 0.0) continue;
      total += p * (std::log(p) -
                    std::log(std::max(static_cast<double>(sn[j]), 1e-300)));
    }
  }
  return total / old_out.n;
}

double mask_diversity(std::span<const uint8_t> actions,
                      int steps_per_episode) {
  if (actions.empty()) throw std::invalid_argument("empty batch");
  std::array<bool, kNumKeepMasks> seen{};
  for (size_t t = 0; t < actions.size(); ++t)
    if (is_roll_step(static_cast<int>(t) % steps_per_episode))
      seen[actions[t]] = true;
  int distinct = 0;
  for (bool b : seen) distinct += b;
  return static_cast<double>(distinct) / kNumKeepMasks;
}

TopKFrequency top_k_frequency(std::span<const uint8_t> actions,
                              int steps_per_episode, int k) {
  if (actions.empty()) throw std::invalid_argument("empty batch");
  std::array<int64_t, kNumKeepMasks> roll_hist{};
  std::array<int64_t, kNumCategories> score_hist{};
  int64_t roll_total = 0, score_total = 0;
  for (size_t t = 0; t < actions.size(); ++t) {
    if (is_roll_step(static_cast<int>(t) % steps_per_episode)) {
      ++roll_hist[actions[t]];
      ++roll_total;
    } else {
      ++score_hist[actions[t]];
      ++score_total;
    }
  }
  auto top_k_share = [k](auto& hist, int64_t total) {
    if (total == 0) return 0.0;
    std::sort(hist.begin(), hist.end(), std::greater<>());
    int64_t top = 0;
    for (int i = 0; i < k && i < static_cast<int>(hist.size()); ++i)
      top += hist[i];
    return static_cast<double>(top) / total;
  };
  return {top_k_share(roll_hist, roll_total),
          top_k_share(score_hist, score_total)};
}

std::vector<GameState> make_probe_states(int count, uint64_t master_seed,
                                         const EnvSpec& env) {
  std::vector<GameState> probes;
  probes.reserve(count);
  RandomPolicy random;
  uint64_t game = 0;
  while (static_cast<int>(probes.size()) < count) {
    Rng rng(derive_stream(master_seed, StreamDomain::kProbe, game++));
    GameState state = make_initial_state(env, rng);
    int steps = 0;
    const int max_steps = env.steps_per_episode();
    while (!state.terminal && steps < max_steps &&
           static_cast<int>(probes.size()) < count) {
      probes.push_back(state);
      state = apply_action(state, random.act(state, rng), rng).next;
      ++steps;
    }
  }
  return probes;
}

template struct TrajectoryBatch<float>;
template struct TrajectoryBatch<double>;
template TrajectoryBatch<float> collect_batch<float>(
    const Params<float>&, const FeatureConfig&, const EnvSpec&, int, uint64_t,
    StreamDomain, int64_t);
template TrajectoryBatch<double> collect_batch<double>(
    const Params<double>&, const FeatureConfig&, const EnvSpec&, int,
    uint64_t, StreamDomain, int64_t);
template EvalStats evaluate_net<float>(const Params<float>&,
                                       const FeatureConfig&, int64_t,
                                       uint64_t, uint64_t,
                                       const std::string&);
template EvalStats evaluate_net<double>(const Params<double>&,
                                        const FeatureConfig&, int64_t,
                                        uint64_t, uint64_t,
                                        const std::string&);
template double evaluate_net_single_turn<float>(const Params<float>&,
                                                const FeatureConfig&,
                                                const EnvSpec&, int64_t,
                                                uint64_t, uint64_t);
template double evaluate_net_single_turn<double>(const Params<double>&,
                                                 const FeatureConfig&,
                                                 const EnvSpec&, int64_t,
                                                 uint64_t, uint64_t);
template double policy_kl<float>(const PolicyOut<float>&,
                                 const PolicyOut<float>&,
                                 std::span<const uint16_t>);
template double policy_kl<double>(const PolicyOut<double>&,
                                  const PolicyOut<double>&,
                                  std::span<const uint16_t>);

}  // namespace yahtzee
