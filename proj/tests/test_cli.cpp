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
// End-to-end tests of the command-line binary (path injected by the build).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "checkpoint.hpp"
#include "eval_stats.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWorkDir = "cli_test_tmp";

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

CmdResult run_cli(const std::string& args) {
  const fs::path log = kWorkDir / "cmd_output.txt";
  const std::string cmd =
      std::string(YAHTZEE_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.output = yahtzee::read_file(log.string());
  return result;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string tiny_config(const std::string& extra = "") {
  return "task = full-game\n"
         "algo.name = a2c\n"
         "games = 200\n"
         "net.hidden = 16\n"
         "net.layers = 1\n"
         "train.eval_every_games = 100\n"
         "train.eval_games = 40\n"
         "train.checkpoint_every_games = 100\n"
         "diag.kl_every_batches = 5\n"
         "diag.kl_probe_states = 32\n" +
         extra;
}

struct WorkDirSetup {
  WorkDirSetup() {
    fs::remove_all(kWorkDir);
    fs::create_directories(kWorkDir);
  }
};
const WorkDirSetup setup_once;

}  // namespace

TEST_CASE("usage and config errors map to distinct exit codes") {
  CHECK(run_cli("nonsense-command").exit_code == 1);
  CHECK(run_cli("train").exit_code == 1);  // missing required --config

  write_text(kWorkDir / "bad_key.cfg", tiny_config("totally.unknown = 1\n"));
  const CmdResult bad_key =
      run_cli("train --config " + (kWorkDir / "bad_key.cfg").string());
  CHECK(bad_key.exit_code == 2);
  CHECK(bad_key.output.find("totally.unknown") != std::string::npos);

  write_text(kWorkDir / "bad_algo.cfg", "algo.name = sarsa\n");
  const CmdResult bad_algo =
      run_cli("train --config " + (kWorkDir / "bad_algo.cfg").string());
  CHECK(bad_algo.exit_code == 2);
  CHECK(bad_algo.output.find("sarsa") != std::string::npos);
}

TEST_CASE("train smoke run writes checkpoint and metrics") {
  write_text(kWorkDir / "smoke.cfg", tiny_config());
  const fs::path out = kWorkDir / "smoke_run";
  const CmdResult r = run_cli("train --config " +
                              (kWorkDir / "smoke.cfg").string() +
                              " --seed 5 --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "checkpoint.bin"));
  CHECK(fs::exists(out / "metrics.jsonl"));
  CHECK(fs::exists(out / "eval_stats.json"));

  const std::string metrics = yahtzee::read_file((out / "metrics.jsonl").string());
  CHECK(metrics.find("\"type\":\"meta\"") != std::string::npos);
  CHECK(metrics.find("\"type\":\"batch\"") != std::string::npos);
  CHECK(metrics.find("\"type\":\"eval\"") != std::string::npos);
  CHECK(metrics.find("\"type\":\"final_eval\"") != std::string::npos);

  const yahtzee::RunConfig cfg =
      yahtzee::peek_checkpoint_config((out / "checkpoint.bin").string());
  CHECK(cfg.net.hidden == 16);
  CHECK(cfg.games == 200);
}

TEST_CASE("identical seed and config give bit-identical metrics") {
  write_text(kWorkDir / "repro.cfg", tiny_config());
  const CmdResult a = run_cli("train --config " +
                              (kWorkDir / "repro.cfg").string() +
                              " --seed 9 --out " +
                              (kWorkDir / "repro_a").string());
  const CmdResult b = run_cli("train --config " +
                              (kWorkDir / "repro.cfg").string() +
                              " --seed 9 --out " +
                              (kWorkDir / "repro_b").string());
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  const std::string ma =
      yahtzee::read_file((kWorkDir / "repro_a" / "metrics.jsonl").string());
  const std::string mb =
      yahtzee::read_file((kWorkDir / "repro_b" / "metrics.jsonl").string());
  CHECK(ma == mb);

  const CmdResult c = run_cli("train --config " +
                              (kWorkDir / "repro.cfg").string() +
                              " --seed 10 --out " +
                              (kWorkDir / "repro_c").string());
  REQUIRE(c.exit_code == 0);
  CHECK(yahtzee::read_file(
            (kWorkDir / "repro_c" / "metrics.jsonl").string()) != ma);
}

TEST_CASE("interrupted training resumes bit-identically") {
  write_text(kWorkDir / "resume.cfg", tiny_config());
  const CmdResult full = run_cli("train --config " +
                                 (kWorkDir / "resume.cfg").string() +
                                 " --seed 4 --out " +
                                 (kWorkDir / "resume_full").string());
  REQUIRE(full.exit_code == 0);

  const CmdResult first_half = run_cli(
      "train --config " + (kWorkDir / "resume.cfg").string() +
      " --seed 4 --out " + (kWorkDir / "resume_split").string() +
      " --halt-after 100");
  REQUIRE(first_half.exit_code == 0);
  const CmdResult second_half = run_cli(
      "train --config " + (kWorkDir / "resume.cfg").string() +
      " --seed 4 --out " + (kWorkDir / "resume_split").string() +
      " --resume");
  REQUIRE(second_half.exit_code == 0);

  CHECK(yahtzee::read_file(
            (kWorkDir / "resume_full" / "metrics.jsonl").string()) ==
        yahtzee::read_file(
            (kWorkDir / "resume_split" / "metrics.jsonl").string()));

  // Resuming under a different config is refused.
  write_text(kWorkDir / "resume_wrong.cfg",
             tiny_config("algo.lr = 0.009\n"));
  const CmdResult wrong = run_cli(
      "train --config " + (kWorkDir / "resume_wrong.cfg").string() +
      " --seed 4 --out " + (kWorkDir / "resume_split").string() +
      " --resume");
  CHECK(wrong.exit_code == 2);
}

TEST_CASE("evaluate a checkpoint deterministically") {
  write_text(kWorkDir / "eval.cfg", tiny_config());
  const fs::path run = kWorkDir / "eval_run";
  REQUIRE(run_cli("train --config " + (kWorkDir / "eval.cfg").string() +
                  " --seed 6 --out " + run.string())
              .exit_code == 0);

  const std::string ckpt = (run / "checkpoint.bin").string();
  const CmdResult e1 = run_cli("evaluate --checkpoint " + ckpt +
                               " --games 100 --seed 3 --out " +
                               (kWorkDir / "eval_out1").string());
  CHECK(e1.exit_code == 0);
  const CmdResult e2 = run_cli("evaluate --checkpoint " + ckpt +
                               " --games 100 --seed 3 --out " +
                               (kWorkDir / "eval_out2").string());
  CHECK(e2.exit_code == 0);
  CHECK(yahtzee::read_file((kWorkDir / "eval_out1" / "eval_stats.json").string()) ==
        yahtzee::read_file((kWorkDir / "eval_out2" / "eval_stats.json").string()));
  CHECK(fs::exists(kWorkDir / "eval_out1" / "eval_stats.csv"));

  // Zero games is a usage error; mismatched feature config is a config
  // error; both must not clobber the exit code space.
  CHECK(run_cli("evaluate --checkpoint " + ckpt +
                " --games 0 --out " + (kWorkDir / "eval_out3").string())
            .exit_code == 1);
  write_text(kWorkDir / "eval_mismatch.cfg",
             tiny_config("features.dice = bin\n"));
  CHECK(run_cli("evaluate --checkpoint " + ckpt + " --config " +
                (kWorkDir / "eval_mismatch.cfg").string() +
                " --games 10 --out " + (kWorkDir / "eval_out4").string())
            .exit_code == 2);

  // Exactly one of --checkpoint / --policy.
  CHECK(run_cli("evaluate --games 10").exit_code == 1);
}

TEST_CASE("analyze emits per-turn and per-category tables") {
  const fs::path eval_out = kWorkDir / "analyze_eval";
  REQUIRE(run_cli("evaluate --policy greedy --games 400 --seed 2 --out " +
                  eval_out.string())
              .exit_code == 0);
  const CmdResult a = run_cli("analyze --stats " +
                              (eval_out / "eval_stats.json").string() +
                              " --out " + (kWorkDir / "analysis").string());
  CHECK(a.exit_code == 0);
  CHECK(fs::exists(kWorkDir / "analysis" / "turn_usage.csv"));
  CHECK(fs::exists(kWorkDir / "analysis" / "category_compare.csv"));

  // All 13 turn sections appear.
  const std::string turns = yahtzee::read_file(
      (kWorkDir / "analysis" / "turn_usage.csv").string());
  for (int t = 1; t <= 13; ++t)
    CHECK(turns.find("\n" + std::to_string(t) + ",1,") != std::string::npos);

  write_text(kWorkDir / "garbage.json", "{\"schema_version\": 999}");
  CHECK(run_cli("analyze --stats " + (kWorkDir / "garbage.json").string() +
                " --out " + (kWorkDir / "analysis2").string())
            .exit_code != 0);
}

TEST_CASE("solve-dp rejects a corrupted cache") {
  write_text(kWorkDir / "bad_cache.bin", "not a value table at all");
  const CmdResult r =
      run_cli("solve-dp --cache " + (kWorkDir / "bad_cache.bin").string());
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("magic") != std::string::npos);
}

TEST_CASE("single-turn task trains and reports its score") {
  write_text(kWorkDir / "st.cfg",
             "task = single-turn\n"
             "algo.name = reinforce\n"
             "games = 300\n"
             "net.hidden = 16\n"
             "net.layers = 1\n"
             "features.game_progress = false\n"
             "features.joker = false\n"
             "features.lockin = false\n"
             "net.roll_head = bernoulli\n"
             "train.eval_every_games = 0\n"
             "train.eval_games = 60\n"
             "train.checkpoint_every_games = 0\n"
             "diag.kl_probe_states = 32\n");
  const CmdResult r = run_cli("train --config " +
                              (kWorkDir / "st.cfg").string() +
                              " --seed 2 --out " +
                              (kWorkDir / "st_run").string());
  CHECK(r.exit_code == 0);
  const std::string metrics =
      yahtzee::read_file((kWorkDir / "st_run" / "metrics.jsonl").string());
  CHECK(metrics.find("single_turn_mean") != std::string::npos);
}
