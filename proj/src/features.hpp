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

#ifndef YAHTZEE_RL_SRC_FEATURES_HPP_
#define YAHTZEE_RL_SRC_FEATURES_HPP_

#include <stdexcept>
#include <string>

#include "game.hpp"

namespace yahtzee {

enum class DiceMode { kOneHot, kBin, kCombined };

const char* to_string(DiceMode mode);
DiceMode dice_mode_from_string(const std::string& s);

// Ablation switches for the observation encoding. The encoded layout, in
// order, with all switches on (dice_mode = combined):
//
//   dice one-hot        30   per sorted die, 6-way one-hot
//   face counts          6   count of each face, scaled by 1/5
//   category used mask  13   1 = category already scored
//   bonus progress       1   min(upper_sum / 63, 1)
//   rolls one-hot        3   rolls used this turn
//   game progress        1   (turn - 1) / 12
//   joker flag           1   joker rule active for the current dice
//   lock-in              6   upper_sum + f_k(dice) >= 63 per upper category
//   category potential  13   optional, off by default: open-category scores
//                            f_j(dice) / 50, used entries 0
//
// Every feature lies in [0, 1].
struct FeatureConfig {
  DiceMode dice_mode = DiceMode::kCombined;
  bool include_lockin = true;
  bool include_bonus_progress = true;
  bool include_game_progress = true;
  bool include_joker = true;
  bool include_potential = false;

  bool operator==(const FeatureConfig&) const = default;
};

int feature_length(const FeatureConfig& cfg);

// Encodes a non-terminal state into `out[0 .. feature_length(cfg))`.
template <typename T>
void encode(const GameState& state, const FeatureConfig& cfg, T* out);

extern template void encode<float>(const GameState&, const FeatureConfig&,
                                   float*);
extern template void encode<double>(const GameState&, const FeatureConfig&,
                                    double*);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_FEATURES_HPP_
