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
// Acceptance suite: verifies the headline guarantees end to end and prints
// one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kernels.hpp"

#include "algos.hpp"
#include "config.hpp"
#include "dp.hpp"
#include "eval_stats.hpp"
#include "gradcheck.hpp"
#include "net.hpp"
#include "rollout.hpp"
#include "trainer.hpp"

#include "oracles.hpp"

using namespace yahtzee;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", id,
              name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buffer[1024];
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

const ValueTable& shared_table(double* solve_seconds = nullptr) {
  static double seconds = 0.0;
  static const ValueTable table = [] {
    const auto start = std::chrono::steady_clock::now();
    ValueTable t = solve_optimal();
    seconds = seconds_since(start);
    return t;
  }();
  if (solve_seconds != nullptr) *solve_seconds = seconds;
  return table;
}

// ---- 1. DP optimum ---------------------------------------------------------

void criterion_1() {
  double solve_seconds = 0.0;
  const double ev = shared_table(&solve_seconds).start_value();
  const bool pass = std::abs(ev - 254.59) <= 0.005 && solve_seconds < 600.0;
  report(1, "exact solver reproduces the optimal expected score", pass,
         fmt("EV %.4f vs 254.59 +- 0.005, solved in %.1fs (budget 600s)", ev,
             solve_seconds));
}

// ---- 2. DP policy statistics over 100k games -------------------------------

void criterion_2() {
  const auto start = std::chrono::steady_clock::now();
  const ValueTable& table = shared_table();
  const EvalStats stats = simulate_policy(
      [&table] { return std::make_unique<DpPolicy>(table); }, 100000, 1);
  const double elapsed = seconds_since(start);

  struct Row {
    int threshold;
    double reference;
  };
  const Row reference_rows[] = {{50, 1.000000},  {100, 0.999998},
                                {150, 0.991230}, {200, 0.863584},
                                {250, 0.483683}, {300, 0.143265},
                                {400, 0.038351}, {500, 0.007192}};
  bool pass = std::abs(stats.bonus_rate_pct - 68.12) <= 0.5 &&
              std::abs(stats.yahtzee_rate_pct - 33.74) <= 0.5 &&
              std::abs(100.0 * stats.p_score_ge[4] - 48.37) <= 0.5;
  double worst_pp = 0.0;
  for (const Row& row : reference_rows) {
    for (int i = 0; i < kNumScoreThresholds; ++i) {
      if (kScoreThresholds[i] != row.threshold) continue;
      const double diff_pp =
          100.0 * std::abs(stats.p_score_ge[i] - row.reference);
      worst_pp = std::max(worst_pp, diff_pp);
      pass = pass && diff_pp <= 0.5;
    }
  }
  pass = pass && elapsed < 300.0;
  report(2, "optimal-policy simulation matches the reported statistics", pass,
         fmt("bonus %.2f%% (68.12), yahtzee %.2f%% (33.74), P>=250 %.2f%% "
             "(48.37), score-distribution max dev %.3fpp, %.1fs",
             stats.bonus_rate_pct, stats.yahtzee_rate_pct,
             100.0 * stats.p_score_ge[4], worst_pp, elapsed));
}

// ---- 3. Per-turn share consistency -----------------------------------------

void criterion_3() {
  const double per_turn = shared_table().start_value() / 13.0;
  const bool pass = std::abs(per_turn - 19.59) <= 0.01;
  report(3, "per-turn share of optimal play matches the reference line",
         pass, fmt("EV/13 = %.4f vs 19.59 +- 0.01", per_turn));
}

// ---- 4. Desk-scale A2C reproduction ----------------------------------------

void criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  struct RunResult {
    uint64_t seed;
    bool layer_norm;
    double mean;
  };
  std::vector<RunResult> results;
  for (const uint64_t seed : {1ull, 2ull, 3ull}) {
    for (const bool layer_norm : {true, false}) {
      std::map<std::string, std::string> kv;
      kv["task"] = "full-game";
      kv["algo.name"] = "a2c";
      kv["games"] = "25000";
      kv["seed"] = std::to_string(seed);
      kv["net.layer_norm"] = layer_norm ? "true" : "false";
      kv["train.eval_every_games"] = "0";
      kv["train.checkpoint_every_games"] = "0";
      kv["out"] = "acceptance_runs/a2c_seed" + std::to_string(seed) +
                  (layer_norm ? "_ln" : "_noln");
      const RunConfig cfg = RunConfig::from_map(kv);
      std::printf("  training a2c seed %llu layer_norm=%s ...\n",
                  static_cast<unsigned long long>(seed),
                  layer_norm ? "on" : "off");
      std::fflush(stdout);
      const TrainOutcome outcome = run_training(cfg, false);
      const double mean = outcome.final_eval->mean;
      std::printf("    final deterministic eval mean: %.2f\n", mean);
      std::fflush(stdout);
      results.push_back({seed, layer_norm, mean});
    }
  }
  int reached_150 = 0, ln_wins = 0;
  std::string detail;
  for (const uint64_t seed : {1ull, 2ull, 3ull}) {
    double with_ln = 0.0, without_ln = 0.0;
    for (const RunResult& r : results) {
      if (r.seed != seed) continue;
      (r.layer_norm ? with_ln : without_ln) = r.mean;
    }
    reached_150 += with_ln >= 150.0;
    ln_wins += without_ln < with_ln;
    detail += fmt("seed %llu: %.1f vs %.1f without norm; ",
                  static_cast<unsigned long long>(seed), with_ln,
                  without_ln);
  }
  const bool pass = reached_150 >= 2 && ln_wins >= 2;
  report(4, "25k-game A2C run reaches 150+ and layer norm helps", pass,
         detail + fmt("%d/3 reached 150, norm ahead in %d/3, %.0fs total",
                      reached_150, ln_wins, seconds_since(start)));
}

// ---- 5. Gradient correctness ------------------------------------------------

gradcheck::LossCase make_loss_case(AlgoKind kind, RollHeadMode mode,
                                   uint64_t seed) {
  gradcheck::LossCase c;
  NetConfig net_cfg;
  net_cfg.hidden = 8;
  net_cfg.layers = 2;
  net_cfg.dropout = 0.2;
  net_cfg.roll_head = mode;
  net_cfg.layer_norm = true;
  const int dim = 22;
  c.params = Params<double>::build(net_cfg, dim);
  c.params.init(seed);

  Rng rng(seed * 31 + 7);
  c.n = 12;
  c.steps_per_episode = 3;
  c.features.resize(static_cast<size_t>(c.n) * dim);
  for (auto& x : c.features) x = rng.uniform01();
  c.score_masks.resize(c.n);
  c.actions.resize(c.n);
  for (int t = 0; t < c.n; ++t) {
    c.score_masks[t] =
        static_cast<uint16_t>(rng.uniform_int(kAllCategoriesMask) + 1);
    if (is_roll_step(t % 3)) {
      c.actions[t] = static_cast<uint8_t>(rng.uniform_int(kNumKeepMasks));
    } else {
      const int n_legal = std::popcount(c.score_masks[t]);
      int pick = static_cast<int>(rng.uniform_int(n_legal));
      for (int j = 0; j < kNumCategories; ++j) {
        if (!(c.score_masks[t] & (1u << j))) continue;
        if (pick-- == 0) {
          c.actions[t] = static_cast<uint8_t>(j);
          break;
        }
      }
    }
  }
  c.signals.policy_adv.resize(c.n);
  c.signals.value_target.resize(c.n);
  c.signals.unorm_target.resize(c.n);
  for (int t = 0; t < c.n; ++t) {
    c.signals.policy_adv[t] = rng.uniform01() * 4 - 2;
    c.signals.value_target[t] = rng.uniform01() * 20;
    c.signals.unorm_target[t] = rng.uniform01() * 2 - 1;
  }
  c.loss_cfg.kind = kind;
  c.loss_cfg.value_coef = 0.025;
  c.loss_cfg.value_loss_abs = kind == AlgoKind::kReinforce;
  c.loss_cfg.beta_roll = 0.1;       // entropy terms active
  c.loss_cfg.beta_score = 0.03;
  c.loss_cfg.beta_regression = 0.5;  // shaping regression active
  c.loss_cfg.ppo_epsilon = 0.2;

  ForwardTrace<double> trace;
  PolicyOut<double> po;
  Rng drop_rng(seed + 13);
  net_forward(c.params, c.features.data(), c.n, c.score_masks.data(), true,
              &drop_rng, nullptr, &trace, &po);
  c.masks = trace.masks;
  if (kind == AlgoKind::kPpo) {
    c.signals.behavior_logprob.resize(c.n);
    for (int t = 0; t < c.n; ++t) {
      const double lp = is_roll_step(t % 3)
                            ? roll_log_prob(po, t, c.actions[t])
                            : score_log_prob(po, t, c.actions[t]);
      c.signals.behavior_logprob[t] = lp + (rng.uniform01() - 0.5) * 0.3;
    }
  }
  return c;
}

void criterion_5() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  uint64_t seed = 2026;
  for (const AlgoKind kind :
       {AlgoKind::kReinforce, AlgoKind::kA2c, AlgoKind::kPpo}) {
    for (const RollHeadMode mode :
         {RollHeadMode::kCategorical32, RollHeadMode::kBernoulli5}) {
      auto c = make_loss_case(kind, mode, seed++);
      worst = std::max(worst, gradcheck::check_loss_case(c).max_rel_error);
    }
  }
  const bool pass = worst < 1e-4;
  report(5, "analytic gradients match central finite differences", pass,
         fmt("max relative error %.3g over all losses and both roll heads "
             "(d_h=8, L=2), %.1fs",
             worst, seconds_since(start)));
}

// ---- 6. Estimator equivalences ----------------------------------------------

void criterion_6() {
  Rng rng(99);
  double worst0 = 0.0, worst1 = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t len = 2 + rng.uniform_int(38);
    std::vector<double> rewards(len), values(len);
    for (auto& r : rewards) r = rng.uniform01() * 20 - 4;
    for (auto& v : values) v = rng.uniform01() * 20 - 4;
    const double gamma = 0.9 + 0.1 * rng.uniform01();

    const auto adv0 = gae_advantages(rewards, values, gamma, 0.0);
    const auto delta = td0_errors(rewards, values, gamma);
    const auto adv1 = gae_advantages(rewards, values, 1.0, 1.0);
    const auto mc = mc_returns(rewards, 1.0);
    for (size_t t = 0; t < len; ++t) {
      worst0 = std::max(worst0, std::abs(adv0[t] - delta[t]));
      worst1 = std::max(worst1, std::abs(adv1[t] - (mc[t] - values[t])));
    }
  }
  const bool pass = worst0 < 1e-10 && worst1 < 1e-10;
  report(6, "GAE reduces to TD(0) and MC-minus-baseline at the endpoints",
         pass,
         fmt("lambda=0 max dev %.2g, lambda=1/gamma=1 max dev %.2g over "
             "1000 trajectories",
             worst0, worst1));
}

// ---- 7. Rules-engine oracle equivalence --------------------------------------

void criterion_7() {
  int checked = 0, mismatches = 0;
  for (const auto& faces : oracle::all_dice_multisets()) {
    DiceRoll dice;
    for (int i = 0; i < 5; ++i) dice.faces[i] = static_cast<uint8_t>(faces[i]);
    for (int ordinal = 1; ordinal <= kNumCategories; ++ordinal) {
      const int got = category_score(dice, category_from_ordinal(ordinal));
      const int expect = oracle::direct_rule_score(faces, ordinal);
      mismatches += got != expect;
      ++checked;
    }
  }
  report(7, "category scoring matches the direct-rule oracle exactly",
         mismatches == 0,
         fmt("%d/%d cases agree", checked - mismatches, checked));
}

// ---- 8. Masking and sampling safety -----------------------------------------

void criterion_8() {
  const auto start = std::chrono::steady_clock::now();
  NetConfig net_cfg;
  net_cfg.hidden = 32;
  net_cfg.layers = 2;
  FeatureConfig features;
  auto params = Params<float>::build(net_cfg, feature_length(features));
  params.init(4242);

  int64_t illegal = 0, exact_zero_violations = 0, episodes = 0;
  const EnvSpec env;
  for (int chunk = 0; chunk < 20; ++chunk) {
    const auto batch = collect_batch<float>(params, features, env, 500, 7,
                                            StreamDomain::kGame,
                                            chunk * 500);
    episodes += batch.n_games;
    for (int t = 0; t < batch.rows(); ++t) {
      if (is_roll_step(t % batch.steps_per_episode)) continue;
      if (!((batch.score_masks[t] >> batch.actions[t]) & 1u)) ++illegal;
    }
  }

  // Masked probabilities are exactly zero and masked logits get exactly
  // zero parameter gradient.
  auto params64 = Params<double>::build(net_cfg, feature_length(features));
  params64.init(77);
  Rng rng(5);
  const int n = 6;
  std::vector<double> feats(static_cast<size_t>(n) * feature_length(features));
  for (auto& x : feats) x = rng.uniform01();
  const uint16_t mask = bit_of(Category::kTwos) | bit_of(Category::kYahtzee);
  std::vector<uint16_t> masks(n, mask);
  ForwardTrace<double> trace;
  PolicyOut<double> po;
  net_forward<double>(params64, feats.data(), n, masks.data(), false,
                      nullptr, nullptr, &trace, &po);
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < kNumCategories; ++j)
      if (!(mask & (1u << j)) &&
          po.score_probs[r * kNumCategories + j] != 0.0)
        ++exact_zero_violations;

  BatchSignals sig;
  sig.policy_adv.assign(n, 1.0);
  sig.value_target.assign(n, 5.0);
  LossConfig lc;
  lc.kind = AlgoKind::kA2c;
  lc.value_coef = 0.005;
  lc.beta_roll = 0.1;
  lc.beta_score = 0.03;
  std::vector<uint8_t> actions(n);
  for (int t = 0; t < n; ++t)
    actions[t] = is_roll_step(t % 3)
                     ? static_cast<uint8_t>(3)
                     : static_cast<uint8_t>(index_of(Category::kTwos));
  HeadGrads<double> hg;
  hg.init(n, po.roll_dim);
  assemble_loss<double>(po, masks.data(), actions.data(), 3, sig, lc, &hg);
  std::vector<double> grads(params64.param_count(), 0.0);
  net_backward(params64, trace, hg.roll.data(), hg.score.data(),
               hg.value.data(), hg.upper.data(), &grads);
  const int wv = params64.find_view("head.score.out.w");
  const int bv = params64.find_view("head.score.out.b");
  const TensorView& w = params64.views[wv];
  for (int in = 0; in < w.rows; ++in)
    for (int j = 0; j < w.cols; ++j)
      if (!(mask & (1u << j)) &&
          grads[w.offset + static_cast<size_t>(in) * w.cols + j] != 0.0)
        ++exact_zero_violations;
  for (int j = 0; j < kNumCategories; ++j)
    if (!(mask & (1u << j)) && grads[params64.views[bv].offset + j] != 0.0)
      ++exact_zero_violations;

  const bool pass = illegal == 0 && exact_zero_violations == 0;
  report(8, "sampling never picks illegal actions; masks zero prob and grad",
         pass,
         fmt("%lld episodes sampled, %lld illegal scores, %lld nonzero "
             "masked entries, %.1fs",
             static_cast<long long>(episodes), static_cast<long long>(illegal),
             static_cast<long long>(exact_zero_violations),
             seconds_since(start)));
}

// ---- 9. Shaping telescoping ---------------------------------------------------

void criterion_9() {
  Rng rng(314);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const size_t len = 3 + rng.uniform_int(37);
    std::vector<double> rewards(len), preds(len);
    for (auto& r : rewards) r = rng.uniform_int(51);
    for (auto& p : preds) p = rng.uniform01() * 4 - 2;
    const double beta = 0.25 + 2.0 * rng.uniform01();
    const bool literal = trial % 2 == 0;
    const auto shaped = shaped_rewards(rewards, preds, 1.0, beta, literal);
    double increments = 0.0;
    for (size_t t = 0; t < len; ++t) increments += shaped[t] - rewards[t];
    const double expect =
        beta * (shaping_potential(preds[len - 1], literal) -
                shaping_potential(preds[0], literal));
    worst = std::max(worst, std::abs(increments - expect));
  }
  report(9, "shaping increments telescope to the potential difference",
         worst < 1e-9, fmt("max deviation %.2g over 500 episodes", worst));
}

// ---- 10. Reproducibility -------------------------------------------------------

void criterion_10() {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories("acceptance_runs");
  const std::string cfg_path = "acceptance_runs/repro.cfg";
  {
    std::ofstream out(cfg_path);
    out << "task = full-game\nalgo.name = a2c\ngames = 200\n"
           "net.hidden = 24\nnet.layers = 2\n"
           "train.eval_every_games = 100\ntrain.eval_games = 50\n"
           "train.checkpoint_every_games = 100\n"
           "diag.kl_every_batches = 3\ndiag.kl_probe_states = 64\n";
  }
  auto run = [&](const std::string& out_dir) {
    const std::string cmd = std::string(YAHTZEE_BIN) + " train --config " +
                            cfg_path + " --seed 11 --out " + out_dir +
                            " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const int rc1 = run("acceptance_runs/repro_a");
  const int rc2 = run("acceptance_runs/repro_b");
  std::string ma, mb;
  bool identical = false;
  if (rc1 == 0 && rc2 == 0) {
    ma = read_file("acceptance_runs/repro_a/metrics.jsonl");
    mb = read_file("acceptance_runs/repro_b/metrics.jsonl");
    identical = !ma.empty() && ma == mb;
  }
  report(10, "identical config and seed give bit-identical metrics files",
         rc1 == 0 && rc2 == 0 && identical,
         fmt("two cmd_train runs, %zu bytes each, identical=%s, %.1fs",
             ma.size(), identical ? "yes" : "no", seconds_since(start)));
}

}  // namespace

int main() {
  std::printf("acceptance suite (%s kernels)\n",
              kernels::active_isa_name());
  std::fflush(stdout);
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_4();  // the slow one last: six 25k-game training runs
  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria FAILED\n", g_failures);
  return 1;
}
