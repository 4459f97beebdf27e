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

#ifndef YAHTZEE_RL_SRC_GAME_HPP_
#define YAHTZEE_RL_SRC_GAME_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace yahtzee {

inline constexpr int kNumCategories = 13;
inline constexpr int kNumDice = 5;
inline constexpr int kNumKeepMasks = 32;
inline constexpr int kUpperBonusThreshold = 63;
inline constexpr int kUpperBonusPoints = 35;
inline constexpr int kExtraYahtzeePoints = 100;
inline constexpr uint16_t kAllCategoriesMask = 0x1fff;
inline constexpr uint16_t kUpperCategoriesMask = 0x003f;
inline constexpr uint16_t kLowerCategoriesMask = 0x1fc0;

enum class Category : uint8_t {
  kOnes = 0,
  kTwos,
  kThrees,
  kFours,
  kFives,
  kSixes,
  kThreeOfAKind,
  kFourOfAKind,
  kFullHouse,
  kSmallStraight,
  kLargeStraight,
  kYahtzee,
  kChance,
};

inline constexpr int index_of(Category c) { return static_cast<int>(c); }
inline constexpr uint16_t bit_of(Category c) {
  return static_cast<uint16_t>(1u << index_of(c));
}
// Categories are numbered 1..13 in user-facing contexts (Ones = 1).
inline constexpr int ordinal_of(Category c) { return index_of(c) + 1; }
Category category_from_ordinal(int ordinal);
const char* category_name(Category c);

// Thrown when a rule of the game would be violated.
class IllegalMoveError : public std::runtime_error {
 public:
  explicit IllegalMoveError(const std::string& what)
      : std::runtime_error(what) {}
};

// Counts of each face value 1..6; counts[v-1] is the number of dice showing v.
using FaceCounts = std::array<uint8_t, 6>;

// Five dice held in ascending order. The canonical sorted form is maintained
// everywhere; keep masks index positions of this sorted array.
struct DiceRoll {
  std::array<uint8_t, 5> faces{1, 1, 1, 1, 1};

  // Validates (faces in 1..6) and sorts.
  static DiceRoll of(std::array<uint8_t, 5> faces);
  static DiceRoll random(Rng& rng);

  int sum() const {
    return faces[0] + faces[1] + faces[2] + faces[3] + faces[4];
  }
  bool is_yahtzee() const { return faces[0] == faces[4]; }
  bool operator==(const DiceRoll&) const = default;
};

FaceCounts face_counts(const DiceRoll& dice);

// Potential score of `dice` in `cat`, ignoring scorecard context. Joker
// adjustments are handled separately by joker_resolution.
int category_score(const DiceRoll& dice, Category cat);

// The scorecard: 13 entries, absent until scored, plus the count of
// 100-point extra-Yahtzee bonuses collected.
struct Scorecard {
  static constexpr int8_t kUnused = -1;

  std::array<int8_t, kNumCategories> entries{
      kUnused, kUnused, kUnused, kUnused, kUnused, kUnused, kUnused,
      kUnused, kUnused, kUnused, kUnused, kUnused, kUnused};
  uint8_t yahtzee_bonus_count = 0;

  bool has(Category c) const { return entries[index_of(c)] >= 0; }
  int get(Category c) const { return entries[index_of(c)]; }
  void set(Category c, int points) {
    entries[index_of(c)] = static_cast<int8_t>(points);
  }
  uint16_t used_mask() const {
    uint16_t m = 0;
    for (int i = 0; i < kNumCategories; ++i)
      if (entries[i] >= 0) m |= static_cast<uint16_t>(1u << i);
    return m;
  }
  uint16_t open_mask() const {
    return static_cast<uint16_t>(~used_mask() & kAllCategoriesMask);
  }
  int entries_used() const;
  bool is_full() const { return entries_used() == kNumCategories; }
  int upper_sum() const;
  bool operator==(const Scorecard&) const = default;
};

int upper_bonus(const Scorecard& card);  // 0 or 35
int total_score(const Scorecard& card);

// MDP state: dice, card, rolls used this turn (0..2), 1-based turn index.
struct GameState {
  DiceRoll dice;
  Scorecard card;
  uint8_t rolls_used = 0;
  uint8_t turn = 1;
  bool terminal = false;

  static GameState initial(Rng& rng) {
    GameState s;
    s.dice = DiceRoll::random(rng);
    return s;
  }
  bool operator==(const GameState&) const = default;
};

struct Action {
  enum class Kind : uint8_t { kKeep, kScore };

  Kind kind = Kind::kKeep;
  uint8_t keep_mask = 0;  // bit i = hold sorted die i
  Category category = Category::kOnes;

  static Action keep(uint8_t mask) {
    Action a;
    a.kind = Kind::kKeep;
    a.keep_mask = mask;
    return a;
  }
  static Action score(Category c) {
    Action a;
    a.kind = Kind::kScore;
    a.category = c;
    return a;
  }
  // Ordering used for deterministic tie-breaking: keep masks by mask value,
  // score actions by category ordinal.
  int ordinal() const {
    return kind == Kind::kKeep ? keep_mask : index_of(category);
  }
  bool operator==(const Action&) const = default;
};

std::string to_string(const Action& a);
std::string to_string(const DiceRoll& d);

// True iff the joker rule governs scoring `dice` against `card`: the dice are
// a Yahtzee and the Yahtzee box is already filled (with any value).
inline bool joker_active(const DiceRoll& dice, const Scorecard& card) {
  return dice.is_yahtzee() && card.has(Category::kYahtzee);
}

// Bitmask of categories that may legally be scored right now. Normally all
// open categories; under the joker rule the forced order applies: the
// matching upper category if open, otherwise any open lower category,
// otherwise any open upper category (which scores 0).
uint16_t legal_score_mask(const DiceRoll& dice, const Scorecard& card);

// Bit-level form shared with the DP, which works on aggregated states.
// `yahtzee_face` is the face of the rolled Yahtzee, or 0 if the dice are not
// a Yahtzee.
inline uint16_t legal_score_mask_bits(uint16_t used_mask, int yahtzee_face) {
  const uint16_t open = static_cast<uint16_t>(~used_mask & kAllCategoriesMask);
  if (yahtzee_face == 0 || !(used_mask & bit_of(Category::kYahtzee)))
    return open;
  const uint16_t matching = static_cast<uint16_t>(1u << (yahtzee_face - 1));
  if (open & matching) return matching;
  const uint16_t lower = open & kLowerCategoriesMask;
  return lower ? lower : open;
}

// Points entered for scoring `dice` in `cat`, plus the extra-Yahtzee bonus
// increment (0 or 100) triggered by this scoring. Throws IllegalMoveError if
// `cat` is already used or violates the joker forced-category order.
struct JokerResolution {
  int points = 0;
  int bonus_increment = 0;
};
JokerResolution joker_resolution(const DiceRoll& dice, Category cat,
                                 const Scorecard& card);

std::vector<Action> legal_actions(const GameState& state);
bool is_legal(const GameState& state, const Action& action);

// Applies `action`, consuming entropy from `rng` for any dice resampled.
// Keep: held dice unchanged, the rest redrawn, dice re-sorted, reward 0.
// Score: entry recorded with joker resolution; reward is the total-score
// delta (bonuses included); the next turn starts with a fresh roll of all
// five dice unless the game just ended.
struct StepResult {
  GameState next;
  int reward = 0;
};
StepResult apply_action(const GameState& state, const Action& action,
                        Rng& rng);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_GAME_HPP_
