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

#ifndef YAHTZEE_RL_SRC_EVAL_STATS_HPP_
#define YAHTZEE_RL_SRC_EVAL_STATS_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "game.hpp"

namespace yahtzee {

inline constexpr int kNumScoreThresholds = 10;
inline constexpr int kScoreThresholds[kNumScoreThresholds] = {
    50, 100, 150, 200, 250, 300, 400, 500, 750, 1000};
inline constexpr int kMaxGameScore = 1575;
inline constexpr int kEvalStatsSchemaVersion = 1;

struct CategoryStats {
  double mean = 0.0;
  double median = 0.0;
};

struct TurnTopEntry {
  int category = -1;  // 0-based index; -1 when fewer categories were used
  double usage_pct = 0.0;
  double median_score = 0.0;
};

// Aggregate results of simulated games under one policy.
struct EvalStats {
  int64_t games = 0;
  uint64_t seed = 0;
  std::string policy;

  double mean = 0.0;
  double median = 0.0;
  double std_dev = 0.0;  // sample (n-1)
  double variance = 0.0;
  double bonus_rate_pct = 0.0;
  double yahtzee_rate_pct = 0.0;     // yahtzee box scored at 50
  double mean_yahtzee_bonus = 0.0;   // extra-yahtzee bonuses per game
  double mean_upper_sum = 0.0;
  std::array<double, kNumScoreThresholds> p_score_ge{};  // fractions

  std::array<CategoryStats, kNumCategories> categories{};
  std::array<std::array<TurnTopEntry, 3>, kNumCategories> turn_top3{};
};

// Streaming accumulator over complete games. All tallies are integer
// counters, so merged or re-ordered accumulation is bit-stable.
class StatsAccumulator {
 public:
  StatsAccumulator();

  // `turn_categories[t]` / `turn_points[t]` describe the scoring action of
  // 1-based turn t+1.
  void add_game(const Scorecard& final_card,
                const std::array<int8_t, kNumCategories>& turn_categories,
                const std::array<int8_t, kNumCategories>& turn_points);

  // Integer tallies only, so merging is associative and order-independent.
  void merge(const StatsAccumulator& other);

  EvalStats finalize(const std::string& policy, uint64_t seed) const;
  int64_t games() const { return games_; }

 private:
  int64_t games_ = 0;
  int64_t score_sum_ = 0;
  int64_t score_sq_sum_ = 0;
  int64_t bonus_games_ = 0;
  int64_t yahtzee_games_ = 0;
  int64_t yahtzee_bonus_sum_ = 0;
  int64_t upper_sum_ = 0;
  std::vector<int64_t> score_hist_;
  std::array<int64_t, kNumCategories> cat_sum_{};
  std::array<std::array<int64_t, 51>, kNumCategories> cat_hist_{};
  std::array<std::array<int64_t, kNumCategories>, kNumCategories>
      turn_cat_count_{};
  std::array<std::array<std::array<int64_t, 51>, kNumCategories>,
             kNumCategories>
      turn_cat_hist_{};
};

// JSON object (schema_version, summary, thresholds, categories, turns) and a
// flat key,value CSV; both written with full double precision.
std::string eval_stats_to_json(const EvalStats& stats,
                               const std::map<std::string, std::string>&
                                   config_echo);
std::string eval_stats_to_csv(const EvalStats& stats);
EvalStats eval_stats_from_json(const std::string& text);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_EVAL_STATS_HPP_
