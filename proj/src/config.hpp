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

#ifndef YAHTZEE_RL_SRC_CONFIG_HPP_
#define YAHTZEE_RL_SRC_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "algos.hpp"
#include "features.hpp"
#include "net.hpp"

namespace yahtzee {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Fully resolved run configuration. Defaults depend on the algorithm and
// mirror the baseline hyperparameter tables; unknown keys are hard errors.
struct RunConfig {
  // task
  bool single_turn = false;
  bool single_turn_empty_card = false;

  uint64_t seed = 1;
  int64_t games = 250000;
  std::string out_dir = "runs/default";

  AlgoKind algo = AlgoKind::kA2c;
  double lr = 1e-4;
  double lr_min_ratio = 0.05;
  double gamma_min = 0.99;
  double gamma_max = 0.99;
  double clip_threshold = 1.0;
  double value_coef = 0.005;
  std::string entropy_regime = "custom";
  EntropySchedule entropy;
  double gae_lambda = 0.0;
  bool advantage_norm = false;
  double ppo_epsilon = 0.2;
  int ppo_epochs = 4;
  int ppo_games_per_minibatch = 4;

  bool shaping_enabled = true;  // a2c default; false for others
  double beta_shape = 1.0;
  double beta_regression = 1.0;
  bool shaping_literal_eq13 = false;

  FeatureConfig features;
  NetConfig net;
  bool net_float64 = false;

  int games_per_batch = 20;
  int64_t eval_every_games = 2500;
  int64_t eval_games = 1000;
  int64_t checkpoint_every_games = 5000;

  int kl_every_batches = 25;
  int kl_probe_states = 1024;
  int top_k = 3;

  // Canonical flat key -> value form of every field, stable order.
  std::map<std::string, std::string> echo() const;
  std::string echo_text() const;

  // Build from a key/value map (file contents plus overrides); unknown keys
  // or unparsable values raise ConfigError.
  static RunConfig from_map(const std::map<std::string, std::string>& kv);

  void validate() const;
};

// Flat "key = value" lines, '#' comments, blank lines allowed.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_CONFIG_HPP_
