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
// Command-line entry point. Exit codes: 0 success, 1 usage error,
// 2 configuration error, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "checkpoint.hpp"
#include "config.hpp"
#include "dp.hpp"
#include "eval_stats.hpp"
#include "rollout.hpp"
#include "trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

using yahtzee::RunConfig;

RunConfig resolve_config(const std::string& config_path, uint64_t* seed,
                         int64_t* games, const std::string& out_dir) {
  std::map<std::string, std::string> kv;
  if (!config_path.empty()) kv = yahtzee::parse_config_file(config_path);
  if (seed != nullptr) kv["seed"] = std::to_string(*seed);
  if (games != nullptr) kv["games"] = std::to_string(*games);
  if (!out_dir.empty()) kv["out"] = out_dir;
  return RunConfig::from_map(kv);
}

const yahtzee::ValueTable& solved_table(const std::string& cache_path) {
  static std::unique_ptr<yahtzee::ValueTable> table;
  if (table != nullptr) return *table;
  if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
    table = std::make_unique<yahtzee::ValueTable>(
        yahtzee::ValueTable::load(cache_path));
    std::printf("loaded value table from %s\n", cache_path.c_str());
    return *table;
  }
  std::printf("solving the full game (this takes a little while)...\n");
  table = std::make_unique<yahtzee::ValueTable>(yahtzee::solve_optimal(
      [](int done, int total) {
        std::printf("  layer %d/%d\n", done, total);
        std::fflush(stdout);
      }));
  if (!cache_path.empty()) {
    table->save(cache_path);
    std::printf("cached value table at %s\n", cache_path.c_str());
  }
  return *table;
}

int cmd_solve_dp(const std::string& cache_path) {
  const yahtzee::ValueTable& table = solved_table(cache_path);
  const double ev = table.start_value();
  std::printf("expected score under optimal play: %.4f\n", ev);
  std::printf("per-turn share of optimal play:    %.4f\n", ev / 13.0);
  std::printf("isolated single-turn points optimum: %.4f\n",
              yahtzee::single_turn_points_optimum());
  return kExitOk;
}

int cmd_train(const std::string& config_path, std::optional<uint64_t> seed,
              std::optional<int64_t> games, const std::string& out_dir,
              bool resume, int64_t halt_after) {
  RunConfig cfg = resolve_config(
      config_path, seed.has_value() ? &*seed : nullptr,
      games.has_value() ? &*games : nullptr, out_dir);
  const yahtzee::TrainOutcome outcome =
      yahtzee::run_training(cfg, resume, halt_after);
  if (outcome.completed && outcome.final_eval.has_value()) {
    const yahtzee::EvalStats& s = *outcome.final_eval;
    std::printf(
        "final eval over %lld games: mean %.2f median %.1f bonus %.2f%% "
        "yahtzee %.2f%% p>=250 %.2f%%\n",
        static_cast<long long>(s.games), s.mean, s.median, s.bonus_rate_pct,
        s.yahtzee_rate_pct, 100.0 * s.p_score_ge[4]);
  } else {
    std::printf("halted after %lld games (checkpoint written)\n",
                static_cast<long long>(outcome.games_played));
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& checkpoint_path,
                 const std::string& policy_name, const std::string& cache_path,
                 int64_t n_games, uint64_t seed, const std::string& out_dir,
                 const std::string& config_path) {
  if (n_games <= 0) {
    std::fprintf(stderr, "evaluate: --games must be positive\n");
    return kExitUsage;
  }
  std::filesystem::create_directories(out_dir);
  yahtzee::EvalStats stats;

  if (!policy_name.empty()) {
    if (policy_name == "dp") {
      const yahtzee::ValueTable& table = solved_table(cache_path);
      stats = yahtzee::simulate_policy(
          [&table] { return std::make_unique<yahtzee::DpPolicy>(table); },
          n_games, seed);
    } else if (policy_name == "greedy") {
      stats = yahtzee::simulate_policy(
          [] { return std::make_unique<yahtzee::GreedyPolicy>(); }, n_games,
          seed);
    } else if (policy_name == "random") {
      stats = yahtzee::simulate_policy(
          [] { return std::make_unique<yahtzee::RandomPolicy>(); }, n_games,
          seed);
    } else {
      std::fprintf(stderr, "evaluate: unknown policy '%s'\n",
                   policy_name.c_str());
      return kExitUsage;
    }
    yahtzee::write_file(out_dir + "/eval_stats.json",
                        yahtzee::eval_stats_to_json(stats, {}));
  } else {
    const RunConfig ckpt_cfg =
        yahtzee::peek_checkpoint_config(checkpoint_path);
    if (!config_path.empty()) {
      const RunConfig requested = resolve_config(config_path, nullptr,
                                                 nullptr, "");
      if (!(requested.features == ckpt_cfg.features))
        throw yahtzee::ConfigError(
            "feature configuration of --config does not match the "
            "checkpoint");
      if (!(requested.net == ckpt_cfg.net))
        throw yahtzee::ConfigError(
            "network configuration of --config does not match the "
            "checkpoint");
    }
    if (ckpt_cfg.net_float64) {
      auto ckpt = yahtzee::load_checkpoint<double>(checkpoint_path);
      stats = yahtzee::evaluate_net<double>(ckpt.params, ckpt_cfg.features,
                                            n_games, seed, 0, "agent");
    } else {
      auto ckpt = yahtzee::load_checkpoint<float>(checkpoint_path);
      stats = yahtzee::evaluate_net<float>(ckpt.params, ckpt_cfg.features,
                                           n_games, seed, 0, "agent");
    }
    yahtzee::write_file(out_dir + "/eval_stats.json",
                        yahtzee::eval_stats_to_json(stats, ckpt_cfg.echo()));
  }
  yahtzee::write_file(out_dir + "/eval_stats.csv",
                      yahtzee::eval_stats_to_csv(stats));
  std::printf(
      "%s over %lld games: mean %.2f median %.1f bonus %.2f%% yahtzee "
      "%.2f%% p>=250 %.2f%%\n",
      stats.policy.c_str(), static_cast<long long>(stats.games), stats.mean,
      stats.median, stats.bonus_rate_pct, stats.yahtzee_rate_pct,
      100.0 * stats.p_score_ge[4]);
  return kExitOk;
}

int cmd_analyze(const std::string& stats_path, const std::string& baseline_path,
                const std::string& out_dir) {
  const yahtzee::EvalStats stats =
      yahtzee::eval_stats_from_json(yahtzee::read_file(stats_path));
  std::optional<yahtzee::EvalStats> baseline;
  if (!baseline_path.empty())
    baseline = yahtzee::eval_stats_from_json(yahtzee::read_file(baseline_path));
  std::filesystem::create_directories(out_dir);

  std::ostringstream turns;
  turns << "turn,rank,category,usage_pct,median_score\n";
  turns.precision(17);
  for (int t = 0; t < yahtzee::kNumCategories; ++t) {
    for (int r = 0; r < 3; ++r) {
      const yahtzee::TurnTopEntry& e = stats.turn_top3[t][r];
      if (e.category < 0) continue;
      turns << (t + 1) << "," << (r + 1) << ","
            << yahtzee::category_name(
                   static_cast<yahtzee::Category>(e.category))
            << "," << e.usage_pct << "," << e.median_score << "\n";
    }
  }
  yahtzee::write_file(out_dir + "/turn_usage.csv", turns.str());

  std::ostringstream cats;
  cats.precision(17);
  cats << "category,mean,median";
  if (baseline.has_value()) cats << ",baseline_mean,baseline_median";
  cats << "\n";
  for (int c = 0; c < yahtzee::kNumCategories; ++c) {
    cats << yahtzee::category_name(static_cast<yahtzee::Category>(c)) << ","
         << stats.categories[c].mean << "," << stats.categories[c].median;
    if (baseline.has_value())
      cats << "," << baseline->categories[c].mean << ","
           << baseline->categories[c].median;
    cats << "\n";
  }
  yahtzee::write_file(out_dir + "/category_compare.csv", cats.str());

  std::printf("policy %s, %lld games: mean %.2f median %.2f\n",
              stats.policy.c_str(), static_cast<long long>(stats.games),
              stats.mean, stats.median);
  std::printf("mean per turn (mean/13): %.4f\n", stats.mean / 13.0);
  std::printf("top categories by turn:\n");
  for (int t = 0; t < yahtzee::kNumCategories; ++t) {
    std::printf("  turn %2d:", t + 1);
    for (int r = 0; r < 3; ++r) {
      const yahtzee::TurnTopEntry& e = stats.turn_top3[t][r];
      if (e.category < 0) continue;
      std::printf(" %s %.1f%% (med %.0f)",
                  yahtzee::category_name(
                      static_cast<yahtzee::Category>(e.category)),
                  e.usage_pct, e.median_score);
    }
    std::printf("\n");
  }
  std::printf("wrote %s/turn_usage.csv and %s/category_compare.csv\n",
              out_dir.c_str(), out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-play policy-gradient training and exact analysis for "
               "solitaire Yahtzee"};
  app.require_subcommand(1);

  // solve-dp
  auto* solve = app.add_subcommand(
      "solve-dp", "Solve the full game exactly and report the optimal EV");
  std::string cache_path;
  solve->add_option("--cache", cache_path,
                    "Value-table cache file (created if absent)");

  // train
  auto* train = app.add_subcommand("train", "Run self-play training");
  std::string train_config, train_out;
  std::optional<uint64_t> train_seed;
  std::optional<int64_t> train_games;
  bool resume = false;
  int64_t halt_after = -1;
  train->add_option("--config", train_config, "Run configuration file")
      ->required();
  train->add_option("--seed", train_seed, "Master seed (overrides config)");
  train->add_option("--games", train_games,
                    "Total training games (overrides config)");
  train->add_option("--out", train_out,
                    "Output directory (overrides config)");
  train->add_flag("--resume", resume,
                  "Resume from <out>/checkpoint.bin");
  train->add_option("--halt-after", halt_after,
                    "Stop after this many games (checkpoint and exit); for "
                    "interruption testing");

  // evaluate
  auto* eval = app.add_subcommand("evaluate",
                                  "Evaluate a checkpoint or exact policy");
  std::string eval_checkpoint, eval_policy, eval_cache, eval_out = "eval",
              eval_config;
  int64_t eval_games = 100000;
  uint64_t eval_seed = 1;
  eval->add_option("--checkpoint", eval_checkpoint,
                   "Checkpoint to evaluate (argmax actions)");
  eval->add_option("--policy", eval_policy,
                   "Exact policy instead of a checkpoint: dp|greedy|random");
  eval->add_option("--cache", eval_cache, "Value-table cache for --policy dp");
  eval->add_option("--games", eval_games, "Number of evaluation games");
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_option("--out", eval_out, "Output directory");
  eval->add_option("--config", eval_config,
                   "Optional config; must match the checkpoint");

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "Derive per-turn and per-category tables from eval stats");
  std::string stats_path, baseline_path, analyze_out = "analysis";
  analyze->add_option("--stats", stats_path, "eval_stats.json to analyze")
      ->required();
  analyze->add_option("--baseline", baseline_path,
                      "Optional second eval_stats.json for comparison columns");
  analyze->add_option("--out", analyze_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve_dp(cache_path);
    if (train->parsed())
      return cmd_train(train_config, train_seed, train_games, train_out,
                       resume, halt_after);
    if (eval->parsed()) {
      if (eval_checkpoint.empty() == eval_policy.empty()) {
        std::fprintf(stderr,
                     "evaluate: exactly one of --checkpoint or --policy is "
                     "required\n");
        return kExitUsage;
      }
      return cmd_evaluate(eval_checkpoint, eval_policy, eval_cache,
                          eval_games, eval_seed, eval_out, eval_config);
    }
    if (analyze->parsed())
      return cmd_analyze(stats_path, baseline_path, analyze_out);
  } catch (const yahtzee::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
