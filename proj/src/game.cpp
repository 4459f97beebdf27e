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

#include "game.hpp"

#include <algorithm>
#include <bit>

namespace yahtzee {

namespace {

const char* const kCategoryNames[kNumCategories] = {
    "ones",           "twos",           "threes",     "fours",
    "fives",          "sixes",          "three_kind", "four_kind",
    "full_house",     "small_straight", "large_straight",
    "yahtzee",        "chance"};

}  // namespace

Category category_from_ordinal(int ordinal) {
  if (ordinal < 1 || ordinal > kNumCategories)
    throw std::out_of_range("category ordinal must be in 1..13");
  return static_cast<Category>(ordinal - 1);
}

const char* category_name(Category c) { return kCategoryNames[index_of(c)]; }

DiceRoll DiceRoll::of(std::array<uint8_t, 5> faces) {
  for (uint8_t f : faces) {
    if (f < 1 || f > 6) throw std::out_of_range("die face must be in 1..6");
  }
  std::sort(faces.begin(), faces.end());
  DiceRoll d;
  d.faces = faces;
  return d;
}

DiceRoll DiceRoll::random(Rng& rng) {
  std::array<uint8_t, 5> f;
  for (auto& x : f) x = static_cast<uint8_t>(rng.roll_die());
  std::sort(f.begin(), f.end());
  DiceRoll d;
  d.faces = f;
  return d;
}

FaceCounts face_counts(const DiceRoll& dice) {
  FaceCounts n{0, 0, 0, 0, 0, 0};
  for (uint8_t f : dice.faces) ++n[f - 1];
  return n;
}

int category_score(const DiceRoll& dice, Category cat) {
  const FaceCounts n = face_counts(dice);
  const int idx = index_of(cat);
  if (idx < 6) return (idx + 1) * n[idx];

  const int max_count = *std::max_element(n.begin(), n.end());
  switch (cat) {
    case Category::kThreeOfAKind:
      return max_count >= 3 ? dice.sum() : 0;
    case Category::kFourOfAKind:
      return max_count >= 4 ? dice.sum() : 0;
    case Category::kFullHouse: {
      bool has3 = false, has2 = false;
      for (int v = 0; v < 6; ++v) {
        has3 |= n[v] == 3;
        has2 |= n[v] == 2;
      }
      return (has3 && has2) ? 25 : 0;
    }
    case Category::kSmallStraight: {
      for (int k = 0; k < 3; ++k) {
        int run = 0;
        for (int v = k; v < k + 4; ++v) run += n[v] > 0;
        if (run == 4) return 30;
      }
      return 0;
    }
    case Category::kLargeStraight: {
      for (int k = 0; k < 2; ++k) {
        int run = 0;
        for (int v = k; v < k + 5; ++v) run += n[v] > 0;
        if (run == 5) return 40;
      }
      return 0;
    }
    case Category::kYahtzee:
      return max_count == 5 ? 50 : 0;
    case Category::kChance:
      return dice.sum();
    default:
      throw std::out_of_range("bad category");
  }
}

int Scorecard::entries_used() const {
  int k = 0;
  for (int8_t e : entries) k += e >= 0;
  return k;
}

int Scorecard::upper_sum() const {
  int s = 0;
  for (int i = 0; i < 6; ++i)
    if (entries[i] >= 0) s += entries[i];
  return s;
}

int upper_bonus(const Scorecard& card) {
  return card.upper_sum() >= kUpperBonusThreshold ? kUpperBonusPoints : 0;
}

int total_score(const Scorecard& card) {
  int s = upper_bonus(card) + kExtraYahtzeePoints * card.yahtzee_bonus_count;
  for (int8_t e : card.entries)
    if (e >= 0) s += e;
  return s;
}

uint16_t legal_score_mask(const DiceRoll& dice, const Scorecard& card) {
  return legal_score_mask_bits(card.used_mask(),
                               dice.is_yahtzee() ? dice.faces[0] : 0);
}

JokerResolution joker_resolution(const DiceRoll& dice, Category cat,
                                 const Scorecard& card) {
  if (card.has(cat))
    throw IllegalMoveError(std::string("category already used: ") +
                           category_name(cat));
  if (!joker_active(dice, card)) return {category_score(dice, cat), 0};

  if (!(legal_score_mask(dice, card) & bit_of(cat)))
    throw IllegalMoveError(
        std::string("joker rule forbids scoring ") + category_name(cat) +
        " with " + to_string(dice));

  int points;
  switch (cat) {
    case Category::kFullHouse:
      points = 25;
      break;
    case Category::kSmallStraight:
      points = 30;
      break;
    case Category::kLargeStraight:
      points = 40;
      break;
    default:
      // Upper boxes, x-of-a-kind and chance score naturally (a Yahtzee
      // satisfies the of-a-kind indicators, and a non-matching upper box
      // scores 0, which is exactly the forced zero).
      points = category_score(dice, cat);
      break;
  }
  const int bonus = card.get(Category::kYahtzee) == 50 ? 100 : 0;
  return {points, bonus};
}

std::vector<Action> legal_actions(const GameState& state) {
  std::vector<Action> actions;
  if (state.terminal) return actions;
  if (state.rolls_used < 2) {
    actions.reserve(kNumKeepMasks);
    for (int m = 0; m < kNumKeepMasks; ++m)
      actions.push_back(Action::keep(static_cast<uint8_t>(m)));
  } else {
    const uint16_t legal = legal_score_mask(state.dice, state.card);
    for (int c = 0; c < kNumCategories; ++c)
      if (legal & (1u << c)) actions.push_back(Action::score(static_cast<Category>(c)));
  }
  return actions;
}

bool is_legal(const GameState& state, const Action& action) {
  if (state.terminal) return false;
  if (action.kind == Action::Kind::kKeep) return state.rolls_used < 2;
  if (state.rolls_used != 2) return false;
  return (legal_score_mask(state.dice, state.card) & bit_of(action.category)) !=
         0;
}

StepResult apply_action(const GameState& state, const Action& action,
                        Rng& rng) {
  if (state.terminal) throw IllegalMoveError("game is over");
  StepResult result;
  result.next = state;

  if (action.kind == Action::Kind::kKeep) {
    if (state.rolls_used >= 2)
      throw IllegalMoveError("no re-rolls left this turn");
    std::array<uint8_t, 5>& f = result.next.dice.faces;
    for (int i = 0; i < kNumDice; ++i) {
      if (!(action.keep_mask & (1u << i)))
        f[i] = static_cast<uint8_t>(rng.roll_die());
    }
    std::sort(f.begin(), f.end());
    result.next.rolls_used = state.rolls_used + 1;
    result.reward = 0;
    return result;
  }

  if (state.rolls_used != 2)
    throw IllegalMoveError("cannot score before the third roll");
  const JokerResolution jr =
      joker_resolution(state.dice, action.category, state.card);
  result.next.card.set(action.category, jr.points);
  result.next.card.yahtzee_bonus_count += jr.bonus_increment / 100;
  result.reward = total_score(result.next.card) - total_score(state.card);
  result.next.rolls_used = 0;
  if (result.next.card.is_full()) {
    result.next.terminal = true;
  } else {
    result.next.turn = state.turn + 1;
    result.next.dice = DiceRoll::random(rng);
  }
  return result;
}

std::string to_string(const DiceRoll& d) {
  std::string s = "[";
  for (int i = 0; i < kNumDice; ++i) {
    s += static_cast<char>('0' + d.faces[i]);
    if (i + 1 < kNumDice) s += ' ';
  }
  s += ']';
  return s;
}

std::string to_string(const Action& a) {
  if (a.kind == Action::Kind::kKeep) {
    std::string s = "keep(";
    for (int i = 0; i < kNumDice; ++i)
      s += (a.keep_mask & (1u << i)) ? '1' : '0';
    s += ')';
    return s;
  }
  return std::string("score(") + category_name(a.category) + ")";
}

}  // namespace yahtzee
