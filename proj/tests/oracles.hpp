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
//
// Test-only oracles, written independently of the production code paths they
// check: direct rule-statement scoring, ordered-outcome dice enumeration, and
// a recursive single-category expectimax.

#ifndef YAHTZEE_RL_TESTS_ORACLES_HPP_
#define YAHTZEE_RL_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "game.hpp"

namespace yahtzee::oracle {

// Scores five dice by checking each category's rule statement directly on the
// face list (no counting-function shortcut).
inline int direct_rule_score(std::array<int, 5> faces, int category_ordinal) {
  std::sort(faces.begin(), faces.end());
  const int sum = faces[0] + faces[1] + faces[2] + faces[3] + faces[4];

  auto longest_equal_run = [&faces]() {
    int best = 1, run = 1;
    for (int i = 1; i < 5; ++i) {
      run = faces[i] == faces[i - 1] ? run + 1 : 1;
      best = std::max(best, run);
    }
    return best;
  };

  switch (category_ordinal) {
    case 1:
    case 2:
    case 3:
    case 4:
    case 5:
    case 6: {
      int s = 0;
      for (int f : faces)
        if (f == category_ordinal) s += f;
      return s;
    }
    case 7:  // three of a kind
      return longest_equal_run() >= 3 ? sum : 0;
    case 8:  // four of a kind
      return longest_equal_run() >= 4 ? sum : 0;
    case 9: {  // full house: a pair and a triple of different faces
      std::map<int, int> freq;
      for (int f : faces) ++freq[f];
      bool pair = false, triple = false;
      for (auto [face, count] : freq) {
        if (count == 2) pair = true;
        if (count == 3) triple = true;
      }
      return pair && triple ? 25 : 0;
    }
    case 10: {  // small straight: four consecutive values present
      std::set<int> distinct(faces.begin(), faces.end());
      auto contains_all = [&distinct](std::initializer_list<int> vals) {
        for (int v : vals)
          if (!distinct.count(v)) return false;
        return true;
      };
      return (contains_all({1, 2, 3, 4}) || contains_all({2, 3, 4, 5}) ||
              contains_all({3, 4, 5, 6}))
                 ? 30
                 : 0;
    }
    case 11: {  // large straight: five consecutive values
      std::set<int> distinct(faces.begin(), faces.end());
      if (distinct.size() != 5) return 0;
      return (*distinct.rbegin() - *distinct.begin() == 4) ? 40 : 0;
    }
    case 12:
      return (faces[0] == faces[4]) ? 50 : 0;
    case 13:
      return sum;
    default:
      return -1;
  }
}

// All 252 multisets of five faces, as sorted face arrays.
inline std::vector<std::array<int, 5>> all_dice_multisets() {
  std::vector<std::array<int, 5>> out;
  for (int a = 1; a <= 6; ++a)
    for (int b = a; b <= 6; ++b)
      for (int c = b; c <= 6; ++c)
        for (int d = c; d <= 6; ++d)
          for (int e = d; e <= 6; ++e) out.push_back({a, b, c, d, e});
  return out;
}

// Single-category expectimax over one 3-roll turn, memoized per level and
// built on ordered-outcome enumeration (every reroll is expanded into its
// 6^n ordered results).
class SingleCategoryExpectimax {
 public:
  explicit SingleCategoryExpectimax(int ordinal) : ordinal_(ordinal) {
    for (const auto& faces : all_dice_multisets())
      value_[2][faces] = direct_rule_score(faces, ordinal_);
    solve_level(1);
    solve_level(0);
  }

  double turn_value(std::array<int, 5> faces, int rolls_used) const {
    std::sort(faces.begin(), faces.end());
    return value_[rolls_used].at(faces);
  }

  // Expected value of entering the turn, averaging over all 6^5 ordered
  // initial rolls.
  double entry_value() const {
    double total = 0.0;
    std::array<int, 5> faces;
    for (int a = 1; a <= 6; ++a)
      for (int b = 1; b <= 6; ++b)
        for (int c = 1; c <= 6; ++c)
          for (int d = 1; d <= 6; ++d)
            for (int e = 1; e <= 6; ++e) {
              faces = {a, b, c, d, e};
              total += turn_value(faces, 0);
            }
    return total / 7776.0;
  }

 private:
  void solve_level(int rolls_used) {
    for (const auto& faces : all_dice_multisets()) {
      double best = value_[rolls_used + 1].at(faces);  // keep everything
      for (int mask = 0; mask < 31; ++mask) {
        std::vector<int> redraw_positions;
        for (int i = 0; i < 5; ++i)
          if (!(mask & (1 << i))) redraw_positions.push_back(i);
        const int n = static_cast<int>(redraw_positions.size());
        int outcomes = 1;
        for (int i = 0; i < n; ++i) outcomes *= 6;
        double total = 0.0;
        for (int code = 0; code < outcomes; ++code) {
          std::array<int, 5> next = faces;
          int c = code;
          for (int i = 0; i < n; ++i) {
            next[redraw_positions[i]] = 1 + c % 6;
            c /= 6;
          }
          std::sort(next.begin(), next.end());
          total += value_[rolls_used + 1].at(next);
        }
        best = std::max(best, total / outcomes);
      }
      value_[rolls_used][faces] = best;
    }
  }

  int ordinal_;
  mutable std::map<std::array<int, 5>, double> value_[3];
};

}  // namespace yahtzee::oracle

#endif  // YAHTZEE_RL_TESTS_ORACLES_HPP_
