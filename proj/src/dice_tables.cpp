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

#include "dice_tables.hpp"

namespace yahtzee {

namespace {

constexpr int kCodeSpace = 6 * 6 * 6 * 6 * 6 * 6;  // base-6 count codes

int factorial(int n) {
  int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Number of ordered dice sequences realizing a count vector.
int permutation_count(const FaceCounts& c, int size) {
  int denom = 1;
  for (int v = 0; v < 6; ++v) denom *= factorial(c[v]);
  return factorial(size) / denom;
}

// Enumerates all face-count vectors of the given total in a fixed
// lexicographic order (count of face 1 outermost).
void enumerate_multisets(int total, std::vector<FaceCounts>* out) {
  FaceCounts c{0, 0, 0, 0, 0, 0};
  for (c[0] = 0; c[0] <= total; ++c[0])
    for (c[1] = 0; c[0] + c[1] <= total; ++c[1])
      for (c[2] = 0; c[0] + c[1] + c[2] <= total; ++c[2])
        for (c[3] = 0; c[0] + c[1] + c[2] + c[3] <= total; ++c[3])
          for (c[4] = 0; c[0] + c[1] + c[2] + c[3] + c[4] <= total; ++c[4]) {
            c[5] = static_cast<uint8_t>(total - c[0] - c[1] - c[2] - c[3] -
                                        c[4]);
            out->push_back(c);
          }
}

}  // namespace

const DiceTables& DiceTables::instance() {
  static const DiceTables tables;
  return tables;
}

DiceTables::DiceTables() {
  roll_lookup_.assign(kCodeSpace, -1);
  keep_lookup_.assign(kCodeSpace, -1);

  // Rolls: all multisets of exactly 5 dice.
  std::vector<FaceCounts> rolls;
  enumerate_multisets(5, &rolls);
  for (int r = 0; r < kNumRolls; ++r) {
    const FaceCounts& c = rolls[r];
    roll_counts[r] = c;
    roll_lookup_[code_of(c)] = static_cast<int16_t>(r);
    int pos = 0;
    for (int v = 0; v < 6; ++v)
      for (int k = 0; k < c[v]; ++k)
        roll_faces[r][pos++] = static_cast<uint8_t>(v + 1);
    DiceRoll dice;
    dice.faces = roll_faces[r];
    for (int cat = 0; cat < kNumCategories; ++cat)
      score[r][cat] = static_cast<int16_t>(
          category_score(dice, static_cast<Category>(cat)));
    yahtzee_face[r] = dice.is_yahtzee() ? dice.faces[0] : 0;
    initial_prob[r] = permutation_count(c, 5) / 7776.0;  // 6^5
  }

  // Keeps: all multisets of size 0..5, grouped by size.
  std::vector<FaceCounts> keeps;
  for (int size = 0; size <= 5; ++size) enumerate_multisets(size, &keeps);
  for (int k = 0; k < kNumKeeps; ++k) {
    const FaceCounts& c = keeps[k];
    keep_counts[k] = c;
    keep_size[k] = static_cast<uint8_t>(c[0] + c[1] + c[2] + c[3] + c[4] +
                                        c[5]);
    keep_lookup_[code_of(c)] = static_cast<int16_t>(k);
  }

  // Completion probabilities keep -> roll.
  double pow6[6] = {1, 6, 36, 216, 1296, 7776};
  comp_begin[0] = 0;
  for (int k = 0; k < kNumKeeps; ++k) {
    const FaceCounts& kc = keep_counts[k];
    const int redraw = 5 - keep_size[k];
    for (int r = 0; r < kNumRolls; ++r) {
      FaceCounts diff;
      bool subset = true;
      for (int v = 0; v < 6; ++v) {
        if (roll_counts[r][v] < kc[v]) {
          subset = false;
          break;
        }
        diff[v] = static_cast<uint8_t>(roll_counts[r][v] - kc[v]);
      }
      if (!subset) continue;
      comp_roll.push_back(static_cast<uint16_t>(r));
      comp_prob.push_back(permutation_count(diff, redraw) / pow6[redraw]);
    }
    comp_begin[k + 1] = static_cast<uint32_t>(comp_roll.size());
  }

  // Sub-multisets of each roll.
  sub_begin[0] = 0;
  for (int r = 0; r < kNumRolls; ++r) {
    const FaceCounts& rc = roll_counts[r];
    FaceCounts c;
    for (c[0] = 0; c[0] <= rc[0]; ++c[0])
      for (c[1] = 0; c[1] <= rc[1]; ++c[1])
        for (c[2] = 0; c[2] <= rc[2]; ++c[2])
          for (c[3] = 0; c[3] <= rc[3]; ++c[3])
            for (c[4] = 0; c[4] <= rc[4]; ++c[4])
              for (c[5] = 0; c[5] <= rc[5]; ++c[5])
                sub_keep.push_back(static_cast<uint16_t>(keep_index(c)));
    sub_begin[r + 1] = static_cast<uint32_t>(sub_keep.size());
  }
}

}  // namespace yahtzee
