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

#include "features.hpp"

#include <algorithm>

namespace yahtzee {

const char* to_string(DiceMode mode) {
  switch (mode) {
    case DiceMode::kOneHot:
      return "onehot";
    case DiceMode::kBin:
      return "bin";
    case DiceMode::kCombined:
      return "combined";
  }
  return "?";
}

DiceMode dice_mode_from_string(const std::string& s) {
  if (s == "onehot") return DiceMode::kOneHot;
  if (s == "bin") return DiceMode::kBin;
  if (s == "combined") return DiceMode::kCombined;
  throw std::invalid_argument("unknown dice mode: " + s);
}

int feature_length(const FeatureConfig& cfg) {
  int n = 0;
  if (cfg.dice_mode != DiceMode::kBin) n += 30;
  if (cfg.dice_mode != DiceMode::kOneHot) n += 6;
  n += kNumCategories;  // used mask
  if (cfg.include_bonus_progress) n += 1;
  n += 3;  // rolls one-hot
  if (cfg.include_game_progress) n += 1;
  if (cfg.include_joker) n += 1;
  if (cfg.include_lockin) n += 6;
  if (cfg.include_potential) n += kNumCategories;
  return n;
}

template <typename T>
void encode(const GameState& state, const FeatureConfig& cfg, T* out) {
  if (state.terminal)
    throw std::invalid_argument("cannot encode a terminal state");
  T* p = out;

  if (cfg.dice_mode != DiceMode::kBin) {
    for (int i = 0; i < kNumDice; ++i) {
      for (int v = 0; v < 6; ++v)
        *p++ = state.dice.faces[i] == v + 1 ? T(1) : T(0);
    }
  }
  if (cfg.dice_mode != DiceMode::kOneHot) {
    const FaceCounts n = face_counts(state.dice);
    for (int v = 0; v < 6; ++v) *p++ = T(n[v] / 5.0);
  }

  for (int c = 0; c < kNumCategories; ++c)
    *p++ = state.card.entries[c] >= 0 ? T(1) : T(0);

  const int upper = state.card.upper_sum();
  if (cfg.include_bonus_progress)
    *p++ = T(std::min(upper / 63.0, 1.0));

  for (int r = 0; r < 3; ++r) *p++ = state.rolls_used == r ? T(1) : T(0);

  if (cfg.include_game_progress) *p++ = T((state.turn - 1) / 12.0);

  if (cfg.include_joker)
    *p++ = joker_active(state.dice, state.card) ? T(1) : T(0);

  if (cfg.include_lockin) {
    for (int k = 0; k < 6; ++k) {
      const int gain = category_score(state.dice, static_cast<Category>(k));
      *p++ = upper + gain >= kUpperBonusThreshold ? T(1) : T(0);
    }
  }

  if (cfg.include_potential) {
    for (int c = 0; c < kNumCategories; ++c) {
      const bool open = state.card.entries[c] < 0;
      *p++ = open ? T(category_score(state.dice, static_cast<Category>(c)) /
                      50.0)
                  : T(0);
    }
  }
}

template void encode<float>(const GameState&, const FeatureConfig&, float*);
template void encode<double>(const GameState&, const FeatureConfig&, double*);

}  // namespace yahtzee
