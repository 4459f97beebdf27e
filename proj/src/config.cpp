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

#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "eval_stats.hpp"

namespace yahtzee {

namespace {

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected bool, got '" + v +
                    "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected number, got '" + v +
                      "'");
  }
}

int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int64_t x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected integer, got '" +
                      v + "'");
  }
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void apply_algo_defaults(RunConfig* c) {
  switch (c->algo) {
    case AlgoKind::kReinforce:
      c->lr = 1e-3;
      c->lr_min_ratio = 0.01;
      c->gamma_min = 0.95;
      c->gamma_max = 1.0;
      c->clip_threshold = 0.0;
      c->value_coef = 0.025;
      c->entropy = {0.1, 0.01, 0.02, 0.003, 0.25, 0.91};
      c->gae_lambda = 0.0;
      c->shaping_enabled = false;
      break;
    case AlgoKind::kA2c:
      c->lr = 1e-4;
      c->lr_min_ratio = 0.05;
      c->gamma_min = 0.99;
      c->gamma_max = 0.99;
      c->clip_threshold = 1.0;
      c->value_coef = 0.005;
      c->entropy = {0.1, 0.02, 0.03, 0.01, 0.075, 0.9};
      c->gae_lambda = 0.0;
      c->shaping_enabled = true;
      break;
    case AlgoKind::kPpo:
      c->lr = 1e-3;
      c->lr_min_ratio = 0.05;
      c->gamma_min = 0.99;
      c->gamma_max = 0.99;
      c->clip_threshold = 1.0;
      c->value_coef = 0.02;
      c->entropy = {0.005, 0.005, 0.05, 0.01, 0.05, 0.9};
      c->gae_lambda = 0.3;
      c->shaping_enabled = false;
      break;
  }
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    if (kv.count(key))
      throw ConfigError("config key '" + key + "' given twice");
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  // The algorithm determines the defaults for everything else.
  auto algo_it = kv.find("algo.name");
  c.algo = algo_it != kv.end() ? algo_from_string(algo_it->second)
                               : AlgoKind::kA2c;
  apply_algo_defaults(&c);

  bool shaping_enabled_set = false;
  for (const auto& [key, value] : kv) {
    if (key == "task") {
      if (value == "full-game") {
        c.single_turn = false;
      } else if (value == "single-turn") {
        c.single_turn = true;
      } else {
        throw ConfigError("config key 'task': expected full-game or "
                          "single-turn, got '" + value + "'");
      }
    } else if (key == "seed") {
      c.seed = static_cast<uint64_t>(parse_int(key, value));
    } else if (key == "games") {
      c.games = parse_int(key, value);
    } else if (key == "out") {
      c.out_dir = value;
    } else if (key == "algo.name") {
      // handled above
    } else if (key == "algo.lr") {
      c.lr = parse_double(key, value);
    } else if (key == "algo.lr_min_ratio") {
      c.lr_min_ratio = parse_double(key, value);
    } else if (key == "algo.gamma_min") {
      c.gamma_min = parse_double(key, value);
    } else if (key == "algo.gamma_max") {
      c.gamma_max = parse_double(key, value);
    } else if (key == "algo.clip_threshold") {
      c.clip_threshold = parse_double(key, value);
    } else if (key == "algo.value_coef") {
      c.value_coef = parse_double(key, value);
    } else if (key == "algo.entropy_regime") {
      c.entropy_regime = value;
      if (value != "custom" && !entropy_regime_preset(value, &c.entropy))
        throw ConfigError("config key 'algo.entropy_regime': unknown regime '" +
                          value + "'");
    } else if (key == "algo.entropy.roll_max") {
      c.entropy.roll_max = parse_double(key, value);
    } else if (key == "algo.entropy.roll_min") {
      c.entropy.roll_min = parse_double(key, value);
    } else if (key == "algo.entropy.score_max") {
      c.entropy.score_max = parse_double(key, value);
    } else if (key == "algo.entropy.score_min") {
      c.entropy.score_min = parse_double(key, value);
    } else if (key == "algo.entropy.hold") {
      c.entropy.hold_frac = parse_double(key, value);
    } else if (key == "algo.entropy.anneal") {
      c.entropy.anneal_frac = parse_double(key, value);
    } else if (key == "algo.gae_lambda") {
      c.gae_lambda = parse_double(key, value);
    } else if (key == "algo.advantage_norm") {
      c.advantage_norm = parse_bool(key, value);
    } else if (key == "algo.ppo.epsilon") {
      c.ppo_epsilon = parse_double(key, value);
    } else if (key == "algo.ppo.epochs") {
      c.ppo_epochs = static_cast<int>(parse_int(key, value));
    } else if (key == "algo.ppo.games_per_minibatch") {
      c.ppo_games_per_minibatch = static_cast<int>(parse_int(key, value));
    } else if (key == "shaping.enabled") {
      c.shaping_enabled = parse_bool(key, value);
      shaping_enabled_set = true;
    } else if (key == "shaping.beta_shape") {
      c.beta_shape = parse_double(key, value);
    } else if (key == "shaping.beta_regression") {
      c.beta_regression = parse_double(key, value);
    } else if (key == "shaping.literal_eq13") {
      c.shaping_literal_eq13 = parse_bool(key, value);
    } else if (key == "features.dice") {
      try {
        c.features.dice_mode = dice_mode_from_string(value);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config key 'features.dice': ") +
                          e.what());
      }
    } else if (key == "features.lockin") {
      c.features.include_lockin = parse_bool(key, value);
    } else if (key == "features.bonus_progress") {
      c.features.include_bonus_progress = parse_bool(key, value);
    } else if (key == "features.game_progress") {
      c.features.include_game_progress = parse_bool(key, value);
    } else if (key == "features.joker") {
      c.features.include_joker = parse_bool(key, value);
    } else if (key == "features.potential") {
      c.features.include_potential = parse_bool(key, value);
    } else if (key == "net.hidden") {
      c.net.hidden = static_cast<int>(parse_int(key, value));
    } else if (key == "net.layers") {
      c.net.layers = static_cast<int>(parse_int(key, value));
    } else if (key == "net.dropout") {
      c.net.dropout = parse_double(key, value);
    } else if (key == "net.roll_head") {
      try {
        c.net.roll_head = roll_head_from_string(value);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config key 'net.roll_head': ") +
                          e.what());
      }
    } else if (key == "net.layer_norm") {
      c.net.layer_norm = parse_bool(key, value);
    } else if (key == "net.precision") {
      if (value == "float32") {
        c.net_float64 = false;
      } else if (value == "float64") {
        c.net_float64 = true;
      } else {
        throw ConfigError(
            "config key 'net.precision': expected float32 or float64");
      }
    } else if (key == "train.games_per_batch") {
      c.games_per_batch = static_cast<int>(parse_int(key, value));
    } else if (key == "train.eval_every_games") {
      c.eval_every_games = parse_int(key, value);
    } else if (key == "train.eval_games") {
      c.eval_games = parse_int(key, value);
    } else if (key == "train.checkpoint_every_games") {
      c.checkpoint_every_games = parse_int(key, value);
    } else if (key == "single_turn.empty_card_only") {
      c.single_turn_empty_card = parse_bool(key, value);
    } else if (key == "diag.kl_every_batches") {
      c.kl_every_batches = static_cast<int>(parse_int(key, value));
    } else if (key == "diag.kl_probe_states") {
      c.kl_probe_states = static_cast<int>(parse_int(key, value));
    } else if (key == "diag.top_k") {
      c.top_k = static_cast<int>(parse_int(key, value));
    } else {
      throw ConfigError("unknown config key: '" + key + "'");
    }
  }
  if (!shaping_enabled_set) c.shaping_enabled = c.algo == AlgoKind::kA2c;
  c.validate();
  return c;
}

void RunConfig::validate() const {
  net.validate();
  if (games < 1) throw ConfigError("games must be >= 1");
  if (games_per_batch < 1) throw ConfigError("train.games_per_batch >= 1");
  if (gae_lambda < 0.0 || gae_lambda > 1.0)
    throw ConfigError("algo.gae_lambda must be in [0, 1]");
  if (ppo_epsilon <= 0.0 || ppo_epsilon >= 1.0)
    throw ConfigError("algo.ppo.epsilon must be in (0, 1)");
  if (ppo_epochs < 1 || ppo_games_per_minibatch < 1)
    throw ConfigError("ppo epochs / minibatch sizes must be >= 1");
  if (value_coef < 0.0 || beta_shape < 0.0 || beta_regression < 0.0)
    throw ConfigError("loss weights must be nonnegative");
  if (entropy.roll_max < 0 || entropy.roll_min < 0 || entropy.score_max < 0 ||
      entropy.score_min < 0)
    throw ConfigError("entropy coefficients must be nonnegative");
  if (gamma_min < 0.0 || gamma_max > 1.0 || gamma_min > gamma_max)
    throw ConfigError("gamma range must satisfy 0 <= min <= max <= 1");
  if (eval_games < 1) throw ConfigError("train.eval_games must be >= 1");
  if (kl_probe_states < 1) throw ConfigError("diag.kl_probe_states >= 1");
  if (top_k < 1) throw ConfigError("diag.top_k >= 1");
}

std::map<std::string, std::string> RunConfig::echo() const {
  std::map<std::string, std::string> kv;
  kv["task"] = single_turn ? "single-turn" : "full-game";
  kv["seed"] = std::to_string(seed);
  kv["games"] = std::to_string(games);
  kv["out"] = out_dir;
  kv["algo.name"] = to_string(algo);
  kv["algo.lr"] = fmt(lr);
  kv["algo.lr_min_ratio"] = fmt(lr_min_ratio);
  kv["algo.gamma_min"] = fmt(gamma_min);
  kv["algo.gamma_max"] = fmt(gamma_max);
  kv["algo.clip_threshold"] = fmt(clip_threshold);
  kv["algo.value_coef"] = fmt(value_coef);
  kv["algo.entropy_regime"] = entropy_regime;
  kv["algo.entropy.roll_max"] = fmt(entropy.roll_max);
  kv["algo.entropy.roll_min"] = fmt(entropy.roll_min);
  kv["algo.entropy.score_max"] = fmt(entropy.score_max);
  kv["algo.entropy.score_min"] = fmt(entropy.score_min);
  kv["algo.entropy.hold"] = fmt(entropy.hold_frac);
  kv["algo.entropy.anneal"] = fmt(entropy.anneal_frac);
  kv["algo.gae_lambda"] = fmt(gae_lambda);
  kv["algo.advantage_norm"] = advantage_norm ? "true" : "false";
  kv["algo.ppo.epsilon"] = fmt(ppo_epsilon);
  kv["algo.ppo.epochs"] = std::to_string(ppo_epochs);
  kv["algo.ppo.games_per_minibatch"] =
      std::to_string(ppo_games_per_minibatch);
  kv["shaping.enabled"] = shaping_enabled ? "true" : "false";
  kv["shaping.beta_shape"] = fmt(beta_shape);
  kv["shaping.beta_regression"] = fmt(beta_regression);
  kv["shaping.literal_eq13"] = shaping_literal_eq13 ? "true" : "false";
  kv["features.dice"] = to_string(features.dice_mode);
  kv["features.lockin"] = features.include_lockin ? "true" : "false";
  kv["features.bonus_progress"] =
      features.include_bonus_progress ? "true" : "false";
  kv["features.game_progress"] =
      features.include_game_progress ? "true" : "false";
  kv["features.joker"] = features.include_joker ? "true" : "false";
  kv["features.potential"] = features.include_potential ? "true" : "false";
  kv["net.hidden"] = std::to_string(net.hidden);
  kv["net.layers"] = std::to_string(net.layers);
  kv["net.dropout"] = fmt(net.dropout);
  kv["net.roll_head"] = to_string(net.roll_head);
  kv["net.layer_norm"] = net.layer_norm ? "true" : "false";
  kv["net.precision"] = net_float64 ? "float64" : "float32";
  kv["train.games_per_batch"] = std::to_string(games_per_batch);
  kv["train.eval_every_games"] = std::to_string(eval_every_games);
  kv["train.eval_games"] = std::to_string(eval_games);
  kv["train.checkpoint_every_games"] =
      std::to_string(checkpoint_every_games);
  kv["single_turn.empty_card_only"] =
      single_turn_empty_card ? "true" : "false";
  kv["diag.kl_every_batches"] = std::to_string(kl_every_batches);
  kv["diag.kl_probe_states"] = std::to_string(kl_probe_states);
  kv["diag.top_k"] = std::to_string(top_k);
  return kv;
}

std::string RunConfig::echo_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : echo()) out << k << " = " << v << "\n";
  return out.str();
}

}  // namespace yahtzee
