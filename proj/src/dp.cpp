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

#include "dp.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "parallel.hpp"

namespace yahtzee {

namespace {

constexpr char kCacheMagic[8] = {'Y', 'Z', 'V', 'T', 'A', 'B', 'L', 'E'};
constexpr uint32_t kCacheVersion = 1;

inline int joker_points(const DiceTables& t, int roll, int cat, bool joker) {
  if (joker) {
    if (cat == index_of(Category::kFullHouse)) return 25;
    if (cat == index_of(Category::kSmallStraight)) return 30;
    if (cat == index_of(Category::kLargeStraight)) return 40;
  }
  return t.score[roll][cat];
}

}  // namespace

MacroState MacroState::of(const Scorecard& card) {
  MacroState m;
  m.used_mask = card.used_mask();
  m.upper_total = static_cast<uint8_t>(
      std::min(card.upper_sum(), kUpperBonusThreshold));
  m.bonus_eligible = card.get(Category::kYahtzee) == 50;
  return m;
}

void ValueTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write value table: " + path);
  out.write(kCacheMagic, sizeof(kCacheMagic));
  uint32_t version = kCacheVersion;
  uint64_t count = kNumMacroStates;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw std::runtime_error("short write of value table: " + path);
}

ValueTable ValueTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open value table: " + path);
  char magic[8];
  uint32_t version = 0;
  uint64_t count = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
    throw CacheFormatError("value-table cache has wrong magic: " + path);
  if (version != kCacheVersion)
    throw CacheFormatError("value-table cache version " +
                           std::to_string(version) + " != expected " +
                           std::to_string(kCacheVersion));
  if (count != kNumMacroStates)
    throw CacheFormatError("value-table cache holds " + std::to_string(count) +
                           " states, expected " +
                           std::to_string(kNumMacroStates));
  ValueTable table;
  in.read(reinterpret_cast<char*>(table.values_.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in || in.gcount() !=
                 static_cast<std::streamsize>(count * sizeof(double)))
    throw CacheFormatError("value-table cache truncated: " + path);
  return table;
}

void compute_turn_widget(const MacroState& macro, const ValueTable* table,
                         LeafMode mode, TurnWidget* w) {
  const DiceTables& t = DiceTables::instance();
  const uint16_t mask = macro.used_mask;
  const int upper = macro.upper_total;
  const bool elig = macro.bonus_eligible;
  const bool yahtzee_used = (mask & bit_of(Category::kYahtzee)) != 0;

  // Scoring layer (r = 2).
  for (int m = 0; m < kNumRolls; ++m) {
    const int yface = t.yahtzee_face[m];
    const bool joker = yface != 0 && yahtzee_used;
    const uint16_t legal = legal_score_mask_bits(mask, yface);
    double best = 0.0;
    int best_cat = -1;
    for (int cat = 0; cat < kNumCategories; ++cat) {
      if (!(legal & (1u << cat))) continue;
      const int pts = joker_points(t, m, cat, joker);
      double value;
      if (mode == LeafMode::kPointsOnly) {
        value = pts;
      } else {
        const int b100 = (joker && elig) ? kExtraYahtzeePoints : 0;
        int new_upper = upper;
        int bonus35 = 0;
        if (cat < 6) {
          new_upper = std::min(upper + pts, kUpperBonusThreshold);
          if (upper < kUpperBonusThreshold &&
              upper + pts >= kUpperBonusThreshold)
            bonus35 = kUpperBonusPoints;
        }
        value = pts + b100 + bonus35;
        if (mode == LeafMode::kOptimal) {
          MacroState next;
          next.used_mask = static_cast<uint16_t>(mask | (1u << cat));
          next.upper_total = static_cast<uint8_t>(new_upper);
          next.bonus_eligible =
              elig || (cat == index_of(Category::kYahtzee) && pts == 50);
          value += table->at_index(macro_index(next));
        }
      }
      if (best_cat < 0 || value > best) {
        best = value;
        best_cat = cat;
      }
    }
    w->score_value[m] = best_cat < 0 ? 0.0 : best;
    w->best_category[m] = static_cast<int8_t>(best_cat);
  }

  // Keep layers and roll maxima, last reroll first.
  auto expectation = [&t](const std::array<double, kNumRolls>& roll_value,
                          std::array<double, kNumKeeps>* keep_value) {
    for (int k = 0; k < kNumKeeps; ++k) {
      double v = 0.0;
      for (uint32_t i = t.comp_begin[k]; i < t.comp_begin[k + 1]; ++i)
        v += t.comp_prob[i] * roll_value[t.comp_roll[i]];
      (*keep_value)[k] = v;
    }
  };
  auto best_keep = [&t](const std::array<double, kNumKeeps>& keep_value,
                        std::array<double, kNumRolls>* roll_value) {
    for (int m = 0; m < kNumRolls; ++m) {
      double best = -1.0;
      for (uint32_t i = t.sub_begin[m]; i < t.sub_begin[m + 1]; ++i)
        best = std::max(best, keep_value[t.sub_keep[i]]);
      (*roll_value)[m] = best;
    }
  };

  expectation(w->score_value, &w->keep_to2);
  best_keep(w->keep_to2, &w->roll1_value);
  expectation(w->roll1_value, &w->keep_to1);
  best_keep(w->keep_to1, &w->roll0_value);

  double entry = 0.0;
  for (int m = 0; m < kNumRolls; ++m)
    entry += t.initial_prob[m] * w->roll0_value[m];
  w->entry_value = entry;
}

ValueTable solve_optimal(const std::function<void(int, int)>& progress) {
  ValueTable table;
  // Group masks by used-category count; dependencies always point to more
  // used categories, so solving 13 bits down to 0 is a valid order. States
  // within one layer are independent and write disjoint slots, so each
  // layer may be solved in parallel.
  std::array<std::vector<uint16_t>, kNumCategories + 1> layers;
  for (uint32_t mask = 0; mask <= kAllCategoriesMask; ++mask)
    layers[std::popcount(mask)].push_back(static_cast<uint16_t>(mask));

  int layers_done = 0;
  for (int bits = kNumCategories; bits >= 0; --bits) {
    const std::vector<uint16_t>& masks = layers[bits];
    parallel_for_chunks(
        static_cast<int64_t>(masks.size()), 1,
        [&table, &masks](int64_t, int64_t begin, int64_t end) {
          thread_local TurnWidget widget;
          for (int64_t i = begin; i < end; ++i) {
            const uint16_t mask = masks[i];
            for (int upper = 0; upper <= kUpperBonusThreshold; ++upper) {
              // A joker needs the Yahtzee box used; without it the bonus
              // eligibility flag cannot matter, so copy that half.
              const bool elig_matters =
                  (mask & bit_of(Category::kYahtzee)) != 0;
              for (int elig = 0; elig < (elig_matters ? 2 : 1); ++elig) {
                MacroState macro{mask, static_cast<uint8_t>(upper),
                                 elig != 0};
                const uint32_t idx = macro_index(macro);
                if (mask == kAllCategoriesMask) {
                  table.at_index(idx) = 0.0;
                  continue;
                }
                compute_turn_widget(macro, &table, LeafMode::kOptimal,
                                    &widget);
                table.at_index(idx) = widget.entry_value;
              }
              if (!elig_matters) {
                MacroState macro{mask, static_cast<uint8_t>(upper), false};
                table.at_index(macro_index(macro) | 1u) =
                    table.at_index(macro_index(macro));
              }
            }
          }
        });
    ++layers_done;
    if (progress) progress(layers_done, kNumCategories + 1);
  }
  return table;
}

namespace {

// Lowest keep mask attaining the maximum keep value for this roll.
uint8_t best_keep_mask(const DiceTables& t, int roll,
                       const std::array<double, kNumKeeps>& keep_value) {
  DiceRoll dice;
  dice.faces = t.roll_faces[roll];
  double best = 0.0;
  int best_mask = -1;
  for (int mask = 0; mask < kNumKeepMasks; ++mask) {
    const double v = keep_value[t.keep_index_of_mask(dice, static_cast<uint8_t>(mask))];
    if (best_mask < 0 || v > best) {
      best = v;
      best_mask = mask;
    }
  }
  return static_cast<uint8_t>(best_mask);
}

const CompactTurnPolicy* cached_turn_policy(
    std::unordered_map<uint32_t, std::unique_ptr<CompactTurnPolicy>>* cache,
    size_t max_entries, const MacroState& macro, const ValueTable* table,
    LeafMode mode) {
  const uint32_t idx = macro_index(macro);
  auto it = cache->find(idx);
  if (it != cache->end()) return it->second.get();
  auto policy = std::make_unique<CompactTurnPolicy>();
  compile_turn_policy(macro, table, mode, policy.get());
  if (cache->size() >= max_entries) {
    // Cache is full; fall back to a transient entry kept alive by a static
    // slot (policies are single-threaded by contract).
    thread_local CompactTurnPolicy transient;
    transient = *policy;
    return &transient;
  }
  return cache->emplace(idx, std::move(policy)).first->second.get();
}

Action act_from_turn_policy(const CompactTurnPolicy& p,
                            const GameState& state) {
  const DiceTables& t = DiceTables::instance();
  const int m = t.roll_index(state.dice);
  if (state.rolls_used == 0) return Action::keep(p.keep_at_r0[m]);
  if (state.rolls_used == 1) return Action::keep(p.keep_at_r1[m]);
  return Action::score(static_cast<Category>(p.category[m]));
}

}  // namespace

void compile_turn_policy(const MacroState& macro, const ValueTable* table,
                         LeafMode mode, CompactTurnPolicy* out) {
  const DiceTables& t = DiceTables::instance();
  TurnWidget w;
  compute_turn_widget(macro, table, mode, &w);
  for (int m = 0; m < kNumRolls; ++m) {
    out->keep_at_r0[m] = best_keep_mask(t, m, w.keep_to1);
    out->keep_at_r1[m] = best_keep_mask(t, m, w.keep_to2);
    out->category[m] = w.best_category[m];
  }
}

Action optimal_action(const GameState& state, const ValueTable& table) {
  if (state.terminal)
    throw IllegalMoveError("no optimal action in a terminal state");
  const DiceTables& t = DiceTables::instance();
  TurnWidget w;
  compute_turn_widget(MacroState::of(state.card), &table, LeafMode::kOptimal,
                      &w);
  const int m = t.roll_index(state.dice);
  if (state.rolls_used == 2)
    return Action::score(static_cast<Category>(w.best_category[m]));
  return Action::keep(best_keep_mask(
      t, m, state.rolls_used == 0 ? w.keep_to1 : w.keep_to2));
}

double single_turn_points_optimum() {
  TurnWidget w;
  compute_turn_widget(MacroState{}, nullptr, LeafMode::kPointsOnly, &w);
  return w.entry_value;
}

Action DpPolicy::act(const GameState& state, Rng&) {
  const CompactTurnPolicy* p =
      cached_turn_policy(&cache_, max_cache_, MacroState::of(state.card),
                         table_, LeafMode::kOptimal);
  return act_from_turn_policy(*p, state);
}

Action GreedyPolicy::act(const GameState& state, Rng&) {
  const CompactTurnPolicy* p =
      cached_turn_policy(&cache_, max_cache_, MacroState::of(state.card),
                         nullptr, LeafMode::kImmediate);
  return act_from_turn_policy(*p, state);
}

Action RandomPolicy::act(const GameState& state, Rng& rng) {
  if (state.rolls_used < 2)
    return Action::keep(static_cast<uint8_t>(rng.uniform_int(kNumKeepMasks)));
  const uint16_t legal = legal_score_mask(state.dice, state.card);
  const int n = std::popcount(legal);
  int pick = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
  for (int c = 0; c < kNumCategories; ++c) {
    if (!(legal & (1u << c))) continue;
    if (pick-- == 0) return Action::score(static_cast<Category>(c));
  }
  throw std::logic_error("unreachable: empty legal score mask");
}

double keep_transition_prob(const FaceCounts& kept, const FaceCounts& result) {
  int kept_size = 0, result_size = 0;
  for (int v = 0; v < 6; ++v) {
    kept_size += kept[v];
    result_size += result[v];
  }
  if (result_size != kNumDice)
    throw std::invalid_argument("result must be a multiset of 5 dice");
  double prob = 1.0;
  int redraw = kNumDice - kept_size;
  // Multinomial over the complement: redraw! / prod(diff_v!) / 6^redraw.
  double numerator = 1.0;
  for (int i = 2; i <= redraw; ++i) numerator *= i;
  for (int v = 0; v < 6; ++v) {
    if (result[v] < kept[v]) return 0.0;
    const int d = result[v] - kept[v];
    for (int i = 2; i <= d; ++i) numerator /= i;
  }
  for (int i = 0; i < redraw; ++i) prob /= 6.0;
  return prob * numerator;
}

}  // namespace yahtzee
