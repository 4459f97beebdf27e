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

#ifndef YAHTZEE_RL_SRC_DICE_TABLES_HPP_
#define YAHTZEE_RL_SRC_DICE_TABLES_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "game.hpp"

namespace yahtzee {

inline constexpr int kNumRolls = 252;  // multisets of 5 faces
inline constexpr int kNumKeeps = 462;  // multisets of 0..5 faces

// Precomputed combinatorics of five six-sided dice: the 252 distinct rolls,
// the 462 distinct partial keeps, the multinomial completion probabilities
// between them, and per-roll category scores. Built once, shared, immutable.
class DiceTables {
 public:
  static const DiceTables& instance();

  // ---- Rolls (multisets of size 5) ----
  std::array<FaceCounts, kNumRolls> roll_counts;
  std::array<std::array<uint8_t, 5>, kNumRolls> roll_faces;  // ascending
  std::array<std::array<int16_t, kNumCategories>, kNumRolls> score;
  std::array<uint8_t, kNumRolls> yahtzee_face;  // 0 if not a yahtzee
  std::array<double, kNumRolls> initial_prob;   // P(roll with 5 fresh dice)

  // ---- Keeps (multisets of size 0..5) ----
  std::array<FaceCounts, kNumKeeps> keep_counts;
  std::array<uint8_t, kNumKeeps> keep_size;

  // Completion lists: for keep k, all rolls r >= k with the multinomial
  // probability of rolling the complement. CSR layout.
  std::array<uint32_t, kNumKeeps + 1> comp_begin;
  std::vector<uint16_t> comp_roll;
  std::vector<double> comp_prob;

  // Distinct sub-multisets of each roll (keep-node ids), CSR layout.
  std::array<uint32_t, kNumRolls + 1> sub_begin;
  std::vector<uint16_t> sub_keep;

  int roll_index(const FaceCounts& counts) const {
    return roll_lookup_[code_of(counts)];
  }
  int roll_index(const DiceRoll& dice) const {
    return roll_index(face_counts(dice));
  }
  int keep_index(const FaceCounts& counts) const {
    return keep_lookup_[code_of(counts)];
  }
  // Keep-node id of holding the dice selected by `mask` out of `dice`.
  int keep_index_of_mask(const DiceRoll& dice, uint8_t mask) const {
    FaceCounts c{0, 0, 0, 0, 0, 0};
    for (int i = 0; i < kNumDice; ++i)
      if (mask & (1u << i)) ++c[dice.faces[i] - 1];
    return keep_index(c);
  }

 private:
  DiceTables();

  static int code_of(const FaceCounts& c) {
    int code = 0;
    for (int v = 5; v >= 0; --v) code = code * 6 + c[v];
    return code;
  }

  std::vector<int16_t> roll_lookup_;  // base-6 count code -> roll id
  std::vector<int16_t> keep_lookup_;  // base-6 count code -> keep id
};

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_DICE_TABLES_HPP_
