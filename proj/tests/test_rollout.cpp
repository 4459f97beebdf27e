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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "algos.hpp"
#include "rollout.hpp"

using namespace yahtzee;

namespace {

struct TestNet {
  Params<float> params;
  FeatureConfig features;

  explicit TestNet(uint64_t seed, RollHeadMode mode =
                                      RollHeadMode::kCategorical32) {
    NetConfig cfg;
    cfg.hidden = 24;
    cfg.layers = 2;
    cfg.roll_head = mode;
    params = Params<float>::build(cfg, feature_length(features));
    params.init(seed);
  }
};

}  // namespace

TEST_CASE("collected episodes have the full-game step structure") {
  TestNet net(3);
  const EnvSpec env;
  const auto batch = collect_batch<float>(net.params, net.features, env, 8,
                                          99, StreamDomain::kGame, 0);
  CHECK(batch.steps_per_episode == 39);
  CHECK(batch.rows() == 8 * 39);
  // Rewards are nonnegative and sum to the final score per episode.
  for (int g = 0; g < batch.n_games; ++g) {
    double total = 0;
    for (int s = 0; s < 39; ++s) {
      const double r = batch.reward[g * 39 + s];
      CHECK(r >= 0.0);
      total += r;
    }
    CHECK(total == doctest::Approx(batch.final_score[g]));
  }
}

TEST_CASE("collection is bit-reproducible for a fixed seed") {
  TestNet net(7);
  const EnvSpec env;
  const auto a = collect_batch<float>(net.params, net.features, env, 6, 42,
                                      StreamDomain::kGame, 100);
  const auto b = collect_batch<float>(net.params, net.features, env, 6, 42,
                                      StreamDomain::kGame, 100);
  CHECK(a.features == b.features);
  CHECK(a.actions == b.actions);
  CHECK(a.reward == b.reward);
  CHECK(a.behavior_logprob == b.behavior_logprob);

  // A different game offset gives different dice.
  const auto c = collect_batch<float>(net.params, net.features, env, 6, 42,
                                      StreamDomain::kGame, 106);
  CHECK(a.actions != c.actions);
}

TEST_CASE("sampled scoring actions are always legal") {
  for (const RollHeadMode mode :
       {RollHeadMode::kCategorical32, RollHeadMode::kBernoulli5}) {
    TestNet net(11, mode);
    const EnvSpec env;
    const auto batch = collect_batch<float>(net.params, net.features, env,
                                            200, 5, StreamDomain::kGame, 0);
    for (int t = 0; t < batch.rows(); ++t) {
      if (is_roll_step(t % 39)) continue;
      CHECK(((batch.score_masks[t] >> batch.actions[t]) & 1u) != 0);
    }
  }
}

TEST_CASE("single-turn episodes run three steps with points-only reward") {
  TestNet net(13);
  EnvSpec env;
  env.single_turn = true;
  const auto batch = collect_batch<float>(net.params, net.features, env, 50,
                                          17, StreamDomain::kGame, 0);
  CHECK(batch.steps_per_episode == 3);
  for (int g = 0; g < batch.n_games; ++g) {
    CHECK(batch.reward[g * 3 + 0] == 0.0);
    CHECK(batch.reward[g * 3 + 1] == 0.0);
    const double pts = batch.reward[g * 3 + 2];
    CHECK(pts >= 0.0);
    CHECK(pts <= 50.0);
    CHECK(batch.final_score[g] == doctest::Approx(pts));
  }
}

TEST_CASE("single-turn context cards are legal and uniform over masks") {
  EnvSpec env;
  env.single_turn = true;
  Rng rng(23);
  for (int i = 0; i < 2000; ++i) {
    const Scorecard card = sample_single_turn_card(env, rng);
    CHECK(!card.is_full());
    for (int c = 0; c < 6; ++c) {
      if (!card.has(static_cast<Category>(c))) continue;
      const int v = card.get(static_cast<Category>(c));
      CHECK(v % (c + 1) == 0);
      CHECK(v <= 5 * (c + 1));
    }
    if (card.has(Category::kChance))
      CHECK(card.get(Category::kChance) == 5);
    if (card.has(Category::kYahtzee))
      CHECK(card.get(Category::kYahtzee) == 0);
  }

  EnvSpec empty_env;
  empty_env.single_turn = true;
  empty_env.empty_card_only = true;
  const Scorecard empty = sample_single_turn_card(empty_env, rng);
  CHECK(empty.entries_used() == 0);
}

TEST_CASE("deterministic evaluation is bit-reproducible") {
  TestNet net(29);
  const EvalStats a =
      evaluate_net<float>(net.params, net.features, 300, 7, 0, "agent");
  const EvalStats b =
      evaluate_net<float>(net.params, net.features, 300, 7, 0, "agent");
  CHECK(eval_stats_to_json(a, {}) == eval_stats_to_json(b, {}));
  CHECK(a.games == 300);
}

TEST_CASE("random-policy statistics match an independent simulation") {
  // simulate_policy against a from-scratch loop over legal actions.
  RandomPolicy policy;
  const EvalStats stats = simulate_policy(policy, 4000, 11);

  Rng rng(333111);
  double total = 0.0;
  const int n = 4000;
  for (int g = 0; g < n; ++g) {
    GameState s = GameState::initial(rng);
    while (!s.terminal) {
      auto actions = legal_actions(s);
      s = apply_action(s, actions[rng.uniform_int(actions.size())], rng).next;
    }
    total += total_score(s.card);
  }
  const double independent_mean = total / n;
  // Both are Monte-Carlo estimates of the same number (sd ~ 0.3).
  CHECK(std::abs(stats.mean - independent_mean) < 2.0);
}

TEST_CASE("parallel simulation merges identically to single-threaded") {
  GreedyPolicy single;
  const EvalStats a = simulate_policy(single, 500, 3);
  const EvalStats b = simulate_policy(
      [] { return std::make_unique<GreedyPolicy>(); }, 500, 3);
  CHECK(eval_stats_to_json(a, {}) == eval_stats_to_json(b, {}));
}

TEST_CASE("explained variance") {
  std::vector<double> returns = {1.0, 2.0, 5.0, -1.0};
  CHECK(explained_variance(returns, returns) == doctest::Approx(1.0));
  std::vector<double> mean_only(4, 1.75);
  CHECK(explained_variance(mean_only, returns) ==
        doctest::Approx(0.0).epsilon(1e-12));
  std::vector<double> constant = {3.0, 3.0, 3.0, 3.0};
  CHECK(explained_variance(returns, constant) == 0.0);

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(40), r(40);
    for (auto& x : v) x = rng.uniform01() * 10;
    for (auto& x : r) x = rng.uniform01() * 10;
    // Direct recomputation.
    double mr = 0, vr = 0, md = 0, vd = 0;
    for (double x : r) mr += x;
    mr /= 40;
    for (double x : r) vr += (x - mr) * (x - mr);
    vr /= 40;
    for (size_t i = 0; i < 40; ++i) md += r[i] - v[i];
    md /= 40;
    for (size_t i = 0; i < 40; ++i) {
      const double d = r[i] - v[i] - md;
      vd += d * d;
    }
    vd /= 40;
    CHECK(explained_variance(v, r) ==
          doctest::Approx(1.0 - vd / vr).epsilon(1e-12));
  }
}

TEST_CASE("policy KL on known distributions") {
  PolicyOut<double> p, q;
  p.n = q.n = 1;
  p.roll_dim = q.roll_dim = 32;
  p.roll_probs.assign(32, 1.0 / 32);
  q.roll_probs.assign(32, 1.0 / 32);
  p.score_probs.assign(13, 0.0);
  q.score_probs.assign(13, 0.0);
  // Two-point toy on the score head.
  const uint16_t mask = 0b11;
  p.score_probs[0] = 0.75;
  p.score_probs[1] = 0.25;
  q.score_probs[0] = 0.5;
  q.score_probs[1] = 0.5;
  std::vector<uint16_t> masks(1, mask);

  const double expect =
      0.75 * std::log(0.75 / 0.5) + 0.25 * std::log(0.25 / 0.5);
  CHECK(policy_kl(p, p, masks) == doctest::Approx(0.0));
  CHECK(policy_kl(p, q, masks) == doctest::Approx(expect).epsilon(1e-12));

  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    PolicyOut<double> a = p, b = p;
    double sa = 0, sb = 0;
    for (int j = 0; j < 32; ++j) {
      a.roll_probs[j] = rng.uniform01() + 1e-3;
      b.roll_probs[j] = rng.uniform01() + 1e-3;
      sa += a.roll_probs[j];
      sb += b.roll_probs[j];
    }
    for (int j = 0; j < 32; ++j) {
      a.roll_probs[j] /= sa;
      b.roll_probs[j] /= sb;
    }
    CHECK(policy_kl(a, b, masks) >= 0.0);
  }
}

TEST_CASE("mask diversity and top-k frequency") {
  // 2 episodes x 3 steps: roll steps at 0, 1; score at 2.
  std::vector<uint8_t> actions = {7, 7, 3, 7, 9, 3};
  CHECK(mask_diversity(actions, 3) == doctest::Approx(2.0 / 32));
  const TopKFrequency top1 = top_k_frequency(actions, 3, 1);
  CHECK(top1.roll == doctest::Approx(3.0 / 4));
  CHECK(top1.score == doctest::Approx(1.0));

  std::vector<uint8_t> uniform;
  for (int e = 0; e < 16; ++e) {
    uniform.push_back(static_cast<uint8_t>(2 * e));
    uniform.push_back(static_cast<uint8_t>(2 * e + 1));
    uniform.push_back(0);
  }
  CHECK(mask_diversity(uniform, 3) == doctest::Approx(1.0));
}

TEST_CASE("per-category accounting identity over simulated games") {
  GreedyPolicy policy;
  const EvalStats stats = simulate_policy(policy, 2000, 17);
  double category_total = 0.0;
  for (int c = 0; c < kNumCategories; ++c)
    category_total += stats.categories[c].mean;
  const double reconstructed = category_total +
                               35.0 * stats.bonus_rate_pct / 100.0 +
                               100.0 * stats.mean_yahtzee_bonus;
  CHECK(std::abs(reconstructed - stats.mean) < 1e-9);
}

TEST_CASE("per-turn usage covers exactly one scoring action per game") {
  GreedyPolicy policy;
  const EvalStats stats = simulate_policy(policy, 500, 19);
  for (int t = 0; t < kNumCategories; ++t) {
    double pct = 0.0;
    for (int r = 0; r < 3; ++r)
      if (stats.turn_top3[t][r].category >= 0)
        pct += stats.turn_top3[t][r].usage_pct;
    CHECK(pct <= 100.0 + 1e-9);
    CHECK(stats.turn_top3[t][0].usage_pct > 0.0);
  }
}

TEST_CASE("probe states are non-terminal and encodable") {
  const EnvSpec env;
  const auto probes = make_probe_states(256, 5, env);
  CHECK(probes.size() == 256);
  FeatureConfig features;
  std::vector<double> buf(feature_length(features));
  for (const GameState& s : probes) {
    CHECK(!s.terminal);
    encode(s, features, buf.data());
  }
}
