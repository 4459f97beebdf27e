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

#include <map>
#include <vector>

#include "features.hpp"
#include "game.hpp"

using namespace yahtzee;

namespace {

FeatureConfig full_config() { return FeatureConfig{}; }

FeatureConfig bare_config() {
  FeatureConfig cfg;
  cfg.dice_mode = DiceMode::kBin;
  cfg.include_lockin = false;
  cfg.include_bonus_progress = false;
  cfg.include_game_progress = false;
  cfg.include_joker = false;
  return cfg;
}

std::vector<double> enc(const GameState& s, const FeatureConfig& cfg) {
  std::vector<double> out(feature_length(cfg));
  encode(s, cfg, out.data());
  return out;
}

GameState random_state(Rng& rng) {
  GameState s = GameState::initial(rng);
  const int plays = static_cast<int>(rng.uniform_int(38));
  for (int i = 0; i < plays && !s.terminal; ++i) {
    auto actions = legal_actions(s);
    s = apply_action(s, actions[rng.uniform_int(actions.size())], rng).next;
  }
  return s;
}

}  // namespace

TEST_CASE("feature lengths per configuration") {
  CHECK(feature_length(full_config()) == 61);
  CHECK(feature_length(bare_config()) == 22);

  FeatureConfig onehot = full_config();
  onehot.dice_mode = DiceMode::kOneHot;
  FeatureConfig combined = full_config();
  CHECK(feature_length(combined) - feature_length(onehot) == 6);

  FeatureConfig with_potential = full_config();
  with_potential.include_potential = true;
  CHECK(feature_length(with_potential) == 61 + 13);
}

TEST_CASE("encode length always matches feature_length") {
  Rng rng(5);
  for (const DiceMode mode :
       {DiceMode::kOneHot, DiceMode::kBin, DiceMode::kCombined}) {
    FeatureConfig cfg = full_config();
    cfg.dice_mode = mode;
    cfg.include_potential = rng.uniform_int(2) == 1;
    for (int i = 0; i < 50; ++i) {
      const GameState s = random_state(rng);
      CHECK(enc(s, cfg).size() ==
            static_cast<size_t>(feature_length(cfg)));
    }
  }
}

TEST_CASE("empty card encodes zero progress and empty mask") {
  Rng rng(7);
  GameState s = GameState::initial(rng);
  const auto x = enc(s, full_config());
  // Layout: 30 one-hot + 6 counts + 13 mask + 1 bonus + 3 rolls + 1
  // progress + 1 joker + 6 lockin.
  for (int c = 0; c < 13; ++c) CHECK(x[36 + c] == 0.0);
  CHECK(x[49] == 0.0);  // bonus progress
  CHECK(x[50] == 1.0);  // rolls one-hot, r = 0
  CHECK(x[53] == 0.0);  // game progress, turn 1
  CHECK(x[54] == 0.0);  // joker flag
}

TEST_CASE("bonus progress clamps at one") {
  Rng rng(9);
  GameState s = GameState::initial(rng);
  s.card.set(Category::kSixes, 30);
  s.card.set(Category::kFives, 25);
  s.card.set(Category::kFours, 16);  // 71 >= 63
  s.turn = 4;
  const auto x = enc(s, full_config());
  CHECK(x[49] == 1.0);

  s.card.set(Category::kFours, 0);  // 55
  const auto y = enc(s, full_config());
  CHECK(y[49] == doctest::Approx(55.0 / 63.0));
}

TEST_CASE("dice one-hot blocks and rolls block each sum to one") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const GameState s = random_state(rng);
    const auto x = enc(s, full_config());
    for (int die = 0; die < 5; ++die) {
      double sum = 0;
      for (int v = 0; v < 6; ++v) sum += x[die * 6 + v];
      CHECK(sum == 1.0);
    }
    CHECK(x[50] + x[51] + x[52] == 1.0);
  }
}

TEST_CASE("lock-in bits follow the threshold formula") {
  // Upper sum 45, dice all fours: scoring fours would add 20 -> locked.
  GameState s;
  s.dice = DiceRoll::of({4, 4, 4, 4, 4});
  s.card.set(Category::kSixes, 30);
  s.card.set(Category::kThrees, 15);  // upper sum 45
  s.turn = 3;
  const auto x = enc(s, full_config());
  const int lockin_base = 55;
  CHECK(x[lockin_base + 3] == 1.0);   // fours: 45 + 20 = 65 >= 63
  CHECK(x[lockin_base + 0] == 0.0);   // ones: 45 + 0 < 63
  CHECK(x[lockin_base + 5] == 0.0);   // sixes: 45 + 0 (no sixes rolled)

  // Direct arithmetic on random states.
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const GameState st = random_state(rng);
    const auto f = enc(st, full_config());
    const int upper = st.card.upper_sum();
    for (int k = 0; k < 6; ++k) {
      const int gain =
          category_score(st.dice, static_cast<Category>(k));
      CHECK(f[lockin_base + k] == (upper + gain >= 63 ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("joker flag tracks the joker rule") {
  GameState s;
  s.dice = DiceRoll::of({2, 2, 2, 2, 2});
  s.turn = 2;
  s.card.set(Category::kYahtzee, 50);
  CHECK(enc(s, full_config())[54] == 1.0);
  s.card.entries[index_of(Category::kYahtzee)] = Scorecard::kUnused;
  s.turn = 1;
  CHECK(enc(s, full_config())[54] == 0.0);
  s.card.set(Category::kYahtzee, 0);
  s.dice = DiceRoll::of({1, 2, 3, 4, 5});
  s.turn = 2;
  CHECK(enc(s, full_config())[54] == 0.0);
}

TEST_CASE("every feature lies in the unit interval") {
  Rng rng(17);
  FeatureConfig cfg = full_config();
  cfg.include_potential = true;
  for (int i = 0; i < 300; ++i) {
    const GameState s = random_state(rng);
    for (double v : enc(s, cfg)) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("category potential block scales open-category scores") {
  FeatureConfig cfg = full_config();
  cfg.include_potential = true;
  GameState s;
  s.dice = DiceRoll::of({2, 3, 4, 5, 6});
  s.card.set(Category::kLargeStraight, 40);
  s.turn = 2;
  const auto x = enc(s, cfg);
  const int base = 61;
  CHECK(x[base + index_of(Category::kLargeStraight)] == 0.0);  // used
  CHECK(x[base + index_of(Category::kSmallStraight)] ==
        doctest::Approx(30.0 / 50.0));
  CHECK(x[base + index_of(Category::kChance)] ==
        doctest::Approx(20.0 / 50.0));
}

TEST_CASE("encode rejects terminal states") {
  Rng rng(19);
  GameState s = GameState::initial(rng);
  while (!s.terminal) {
    auto actions = legal_actions(s);
    s = apply_action(s, actions[rng.uniform_int(actions.size())], rng).next;
  }
  std::vector<double> out(feature_length(full_config()));
  CHECK_THROWS_AS(encode(s, full_config(), out.data()),
                  std::invalid_argument);
}

TEST_CASE("encode is injective on the aggregated state") {
  // Key: dice multiset, used mask, capped upper, rolls, turn, joker flag.
  Rng rng(23);
  using Key = std::tuple<FaceCounts, uint16_t, int, int, int, bool>;
  std::map<std::vector<double>, Key> seen;
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const GameState s = random_state(rng);
    const Key key{face_counts(s.dice),
                  s.card.used_mask(),
                  std::min(s.card.upper_sum(), 63),
                  s.rolls_used,
                  s.turn,
                  joker_active(s.dice, s.card)};
    const auto x = enc(s, full_config());
    auto [it, inserted] = seen.emplace(x, key);
    if (!inserted) {
      CHECK(it->second == key);
      ++checked;
    }
  }
  (void)checked;
}
