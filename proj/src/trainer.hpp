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

#ifndef YAHTZEE_RL_SRC_TRAINER_HPP_
#define YAHTZEE_RL_SRC_TRAINER_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "config.hpp"
#include "eval_stats.hpp"

namespace yahtzee {

struct TrainOutcome {
  int64_t games_played = 0;
  bool completed = false;  // reached the configured game budget
  std::optional<EvalStats> final_eval;
  double final_single_turn_mean = 0.0;  // single-turn task only
};

// Runs (or resumes) self-play training per the config, writing
// out/metrics.jsonl, out/checkpoint.bin and, on completion, the final
// evaluation to out/eval_stats.{json,csv}. halt_after_games < games stops
// early after a checkpoint (for interruption/resume testing).
//
// The run is deterministic for a fixed config: every random stream is
// derived from (seed, purpose, counter).
TrainOutcome run_training(const RunConfig& cfg, bool resume,
                          int64_t halt_after_games = -1);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_TRAINER_HPP_
