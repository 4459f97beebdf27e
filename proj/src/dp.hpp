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

#ifndef YAHTZEE_RL_SRC_DP_HPP_
#define YAHTZEE_RL_SRC_DP_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "dice_tables.hpp"
#include "game.hpp"

namespace yahtzee {

// Between-turn aggregation of a scorecard. The expected future score depends
// on the card only through which categories are used, the upper total capped
// at the bonus threshold, and whether the Yahtzee box holds 50 (eligibility
// for further 100-point bonuses); already-banked points are additive and drop
// out of the recursion.
struct MacroState {
  uint16_t used_mask = 0;
  uint8_t upper_total = 0;  // capped at 63
  bool bonus_eligible = false;

  static MacroState of(const Scorecard& card);
  bool operator==(const MacroState&) const = default;
};

inline constexpr uint32_t kNumMacroStates = 1u << 20;

inline uint32_t macro_index(const MacroState& m) {
  return (static_cast<uint32_t>(m.used_mask) << 7) |
         (static_cast<uint32_t>(m.upper_total) << 1) |
         static_cast<uint32_t>(m.bonus_eligible);
}

class CacheFormatError : public std::runtime_error {
 public:
  explicit CacheFormatError(const std::string& what)
      : std::runtime_error(what) {}
};

// Expected future score for every macro-state.
class ValueTable {
 public:
  ValueTable() : values_(kNumMacroStates, 0.0) {}

  double at(const MacroState& m) const { return values_[macro_index(m)]; }
  double& at_index(uint32_t i) { return values_[i]; }
  double at_index(uint32_t i) const { return values_[i]; }
  // Expected score of a full game under optimal play.
  double start_value() const { return values_[0]; }

  // Versioned little-endian binary cache. load() throws CacheFormatError on
  // any magic/version/size mismatch.
  void save(const std::string& path) const;
  static ValueTable load(const std::string& path);

 private:
  std::vector<double> values_;
};

// What a scoring leaf is worth inside the turn lattice.
enum class LeafMode {
  kOptimal,    // points + bonus deltas + expected future score
  kImmediate,  // points + bonus deltas (single-turn greedy)
  kPointsOnly  // category points alone
};

// The within-turn decision lattice for one macro-state, solved by backward
// induction: scoring choice at the last roll, keep choice and completion
// expectation at each earlier roll, down to the initial-roll expectation.
struct TurnWidget {
  std::array<double, kNumRolls> score_value;    // value of being at r=2
  std::array<int8_t, kNumRolls> best_category;  // argmax, lowest ordinal ties
  std::array<double, kNumKeeps> keep_to2;       // keep chosen at r=1
  std::array<double, kNumRolls> roll1_value;
  std::array<double, kNumKeeps> keep_to1;  // keep chosen at r=0
  std::array<double, kNumRolls> roll0_value;
  double entry_value = 0.0;  // expectation over the initial roll
};

// `table` may be null unless mode == kOptimal; it must then already hold the
// values of every macro-state with strictly more used categories.
void compute_turn_widget(const MacroState& macro, const ValueTable* table,
                         LeafMode mode, TurnWidget* w);

// Full backward induction over all 2^13 x 64 x 2 macro-states.
// `progress(done, total)` is invoked once per used-category layer.
ValueTable solve_optimal(
    const std::function<void(int, int)>& progress = nullptr);

// Optimal action for a concrete state; ties broken by lowest action ordinal.
// Throws IllegalMoveError on terminal states.
Action optimal_action(const GameState& state, const ValueTable& table);

// Expected points of a single isolated turn on an empty card when only the
// category points matter (no bonuses, no future turns).
double single_turn_points_optimum();

// ---- Policies -------------------------------------------------------------

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const GameState& state, Rng& rng) = 0;
  virtual const char* name() const = 0;
};

// Per-macro-state compact action tables so simulation does one widget solve
// per (macro, turn) instead of per decision.
struct CompactTurnPolicy {
  std::array<uint8_t, kNumRolls> keep_at_r0;
  std::array<uint8_t, kNumRolls> keep_at_r1;
  std::array<int8_t, kNumRolls> category;
};

// Plays optimally against a solved table. Not thread-safe (per-instance
// memo); use one instance per worker.
class DpPolicy : public Policy {
 public:
  explicit DpPolicy(const ValueTable& table, size_t max_cache_entries = 1u
                                                                        << 18)
      : table_(&table), max_cache_(max_cache_entries) {}
  Action act(const GameState& state, Rng& rng) override;
  const char* name() const override { return "dp"; }

 private:
  const ValueTable* table_;
  size_t max_cache_;
  std::unordered_map<uint32_t, std::unique_ptr<CompactTurnPolicy>> cache_;
};

// Maximizes the expected immediate reward of the current turn.
class GreedyPolicy : public Policy {
 public:
  explicit GreedyPolicy(size_t max_cache_entries = 1u << 18)
      : max_cache_(max_cache_entries) {}
  Action act(const GameState& state, Rng& rng) override;
  const char* name() const override { return "greedy"; }

 private:
  size_t max_cache_;
  std::unordered_map<uint32_t, std::unique_ptr<CompactTurnPolicy>> cache_;
};

// Uniform over legal actions.
class RandomPolicy : public Policy {
 public:
  Action act(const GameState& state, Rng& rng) override;
  const char* name() const override { return "random"; }
};

// Builds the compact per-turn action tables for one macro-state.
void compile_turn_policy(const MacroState& macro, const ValueTable* table,
                         LeafMode mode, CompactTurnPolicy* out);

// Probability that re-rolling the complement of `kept` (a sub-multiset)
// produces the 5-die multiset `result`; 0 if kept is not contained in result.
double keep_transition_prob(const FaceCounts& kept, const FaceCounts& result);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_DP_HPP_
