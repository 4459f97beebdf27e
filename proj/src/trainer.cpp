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

#include "trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "algos.hpp"
#include "checkpoint.hpp"
#include "optim.hpp"
#include "rollout.hpp"

namespace yahtzee {

namespace {

using Json = nlohmann::ordered_json;

class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, bool append) {
    out_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open metrics file: " + path);
  }
  void write(const Json& record) {
    out_ << record.dump() << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

// Per-batch detached signals plus the shaped rewards used to build them.
struct BatchPrep {
  BatchSignals signals;
  std::vector<double> shaped;
  double adv_mean = 0.0;
  double adv_std = 0.0;
  double ev = 0.0;
  double reward_mean = 0.0;
  double score_mean = 0.0;
};

template <typename T>
BatchPrep prepare_signals(const RunConfig& cfg, const TrajectoryBatch<T>& b,
                          double gamma) {
  const int S = b.steps_per_episode;
  const int rows = b.rows();
  BatchPrep prep;
  prep.signals.policy_adv.resize(rows);
  prep.signals.value_target.resize(rows);
  prep.shaped.resize(rows);
  if (cfg.algo == AlgoKind::kPpo)
    prep.signals.behavior_logprob = b.behavior_logprob;
  const bool shaping = cfg.shaping_enabled;
  if (shaping) prep.signals.unorm_target.resize(rows);

  for (int g = 0; g < b.n_games; ++g) {
    const size_t base = static_cast<size_t>(g) * S;
    std::vector<double> rewards(b.reward.begin() + base,
                                b.reward.begin() + base + S);
    if (shaping) {
      std::vector<double> preds(b.upper.begin() + base,
                                b.upper.begin() + base + S);
      rewards = shaped_rewards(rewards, preds, gamma, cfg.beta_shape,
                               cfg.shaping_literal_eq13);
    }
    std::copy(rewards.begin(), rewards.end(), prep.shaped.begin() + base);
    const std::span<const double> values(b.value.data() + base,
                                         static_cast<size_t>(S));

    switch (cfg.algo) {
      case AlgoKind::kReinforce: {
        const auto g_returns = mc_returns(rewards, gamma);
        for (int t = 0; t < S; ++t) {
          prep.signals.policy_adv[base + t] = g_returns[t] - values[t];
          prep.signals.value_target[base + t] = g_returns[t];
        }
        break;
      }
      case AlgoKind::kA2c: {
        const auto adv =
            gae_advantages(rewards, values, gamma, cfg.gae_lambda);
        for (int t = 0; t < S; ++t) {
          prep.signals.policy_adv[base + t] = adv[t];
          const double next_v = t + 1 < S ? values[t + 1] : 0.0;
          prep.signals.value_target[base + t] =
              rewards[t] + gamma * next_v;
        }
        break;
      }
      case AlgoKind::kPpo: {
        const auto adv =
            gae_advantages(rewards, values, gamma, cfg.gae_lambda);
        for (int t = 0; t < S; ++t) {
          prep.signals.policy_adv[base + t] = adv[t];
          prep.signals.value_target[base + t] = adv[t] + values[t];
        }
        break;
      }
    }
    if (shaping) {
      const double target = upper_norm_target(b.final_upper[g]);
      for (int t = 0; t < S; ++t)
        prep.signals.unorm_target[base + t] = target;
    }
  }

  if (cfg.advantage_norm) normalize_advantages(prep.signals.policy_adv);

  double adv_sum = 0.0, adv_sq = 0.0, reward_sum = 0.0;
  for (int t = 0; t < rows; ++t) {
    adv_sum += prep.signals.policy_adv[t];
    adv_sq += prep.signals.policy_adv[t] * prep.signals.policy_adv[t];
    reward_sum += prep.shaped[t];
  }
  prep.adv_mean = adv_sum / rows;
  prep.adv_std =
      std::sqrt(std::max(adv_sq / rows - prep.adv_mean * prep.adv_mean, 0.0));
  prep.reward_mean = reward_sum / rows;
  double score_sum = 0.0;
  for (int s : b.final_score) score_sum += s;
  prep.score_mean = score_sum / b.n_games;
  prep.ev = explained_variance(b.value, prep.signals.value_target);
  return prep;
}

template <typename T>
class Trainer {
 public:
  explicit Trainer(const RunConfig& cfg)
      : cfg_(cfg),
        env_{cfg.single_turn, cfg.single_turn_empty_card},
        feat_dim_(feature_length(cfg.features)) {
    loss_cfg_.kind = cfg.algo;
    loss_cfg_.value_coef = cfg.value_coef;
    loss_cfg_.value_loss_abs = cfg.algo == AlgoKind::kReinforce;
    loss_cfg_.beta_regression =
        cfg.shaping_enabled ? cfg.beta_regression : 0.0;
    loss_cfg_.ppo_epsilon = cfg.ppo_epsilon;
  }

  void init_fresh() {
    params_ = Params<T>::build(cfg_.net, feat_dim_);
    params_.init(cfg_.seed);
    adam_ = AdamState<T>::zeros(params_.param_count());
    kl_snapshot_ = params_.data;
    games_played_ = 0;
    updates_ = 0;
  }

  void load(const Checkpoint<T>& ckpt) {
    params_ = ckpt.params;
    adam_ = ckpt.adam;
    kl_snapshot_ = ckpt.kl_snapshot;
    games_played_ = ckpt.games_played;
    updates_ = ckpt.updates;
  }

  TrainOutcome run(MetricsWriter* metrics, int64_t halt_after) {
    const int B = cfg_.games_per_batch;
    const int S = env_.steps_per_episode();
    probe_states_ = make_probe_states(cfg_.kl_probe_states, cfg_.seed, env_);
    const int64_t stop =
        halt_after >= 0 ? std::min<int64_t>(halt_after, cfg_.games)
                        : cfg_.games;

    while (games_played_ < stop) {
      const int64_t batch_index = games_played_ / B;
      const double frac =
          static_cast<double>(games_played_) / static_cast<double>(cfg_.games);
      const double gamma =
          cfg_.gamma_min + (cfg_.gamma_max - cfg_.gamma_min) * frac;
      const EntropyCoefficients betas =
          entropy_coefficients(games_played_, cfg_.games, cfg_.entropy);
      const double lr =
          lr_at(games_played_, cfg_.games, cfg_.lr, cfg_.lr_min_ratio);
      loss_cfg_.beta_roll = betas.roll;
      loss_cfg_.beta_score = betas.score;

      TrajectoryBatch<T> batch =
          collect_batch(params_, cfg_.features, env_, B, cfg_.seed,
                        StreamDomain::kGame, games_played_);
      BatchPrep prep = prepare_signals(cfg_, batch, gamma);

      LossBreakdown loss{};
      double grad_norm = 0.0;
      double clip_count = 0.0;
      int n_updates = 0;
      if (cfg_.algo != AlgoKind::kPpo) {
        const auto one = update_once(batch, prep.signals, 0, batch.n_games,
                                     lr);
        loss = one.loss;
        grad_norm = one.grad_norm;
        clip_count = one.clipped ? 1.0 : 0.0;
        n_updates = 1;
      } else {
        // k epochs of minibatch updates over a shuffled game order.
        const int m = std::min(cfg_.ppo_games_per_minibatch, batch.n_games);
        std::vector<int> order(batch.n_games);
        for (int e = 0; e < cfg_.ppo_epochs; ++e) {
          for (int i = 0; i < batch.n_games; ++i) order[i] = i;
          Rng shuffle_rng(derive_stream(
              cfg_.seed, StreamDomain::kShuffle,
              static_cast<uint64_t>(batch_index) * cfg_.ppo_epochs + e));
          for (int i = batch.n_games - 1; i > 0; --i) {
            const int j = static_cast<int>(
                shuffle_rng.uniform_int(static_cast<uint64_t>(i) + 1));
            std::swap(order[i], order[j]);
          }
          for (int start = 0; start + m <= batch.n_games; start += m) {
            const auto one = update_minibatch(
                batch, prep.signals, {order.begin() + start,
                                      order.begin() + start + m},
                lr);
            loss.total += one.loss.total;
            loss.policy += one.loss.policy;
            loss.value += one.loss.value;
            loss.entropy += one.loss.entropy;
            loss.upper += one.loss.upper;
            loss.mean_entropy_roll += one.loss.mean_entropy_roll;
            loss.mean_entropy_score += one.loss.mean_entropy_score;
            grad_norm += one.grad_norm;
            clip_count += one.clipped ? 1.0 : 0.0;
            ++n_updates;
          }
        }
        const double inv = 1.0 / n_updates;
        loss.total *= inv;
        loss.policy *= inv;
        loss.value *= inv;
        loss.entropy *= inv;
        loss.upper *= inv;
        loss.mean_entropy_roll *= inv;
        loss.mean_entropy_score *= inv;
        grad_norm *= inv;
      }

      games_played_ += B;

      Json rec;
      rec["type"] = "batch";
      rec["batch"] = batch_index;
      rec["games"] = games_played_;
      rec["updates"] = updates_;
      rec["lr"] = lr;
      rec["gamma"] = gamma;
      rec["beta_roll"] = betas.roll;
      rec["beta_score"] = betas.score;
      rec["score_mean"] = prep.score_mean;
      rec["reward_mean"] = prep.reward_mean;
      rec["loss"] = loss.total;
      rec["loss_policy"] = loss.policy;
      rec["loss_value"] = loss.value;
      rec["loss_entropy"] = loss.entropy;
      rec["loss_upper"] = loss.upper;
      rec["explained_variance"] = prep.ev;
      rec["entropy_roll"] = loss.mean_entropy_roll;
      rec["entropy_score"] = loss.mean_entropy_score;
      rec["grad_norm"] = grad_norm;
      rec["clip_rate"] = clip_count / std::max(n_updates, 1);
      rec["adv_mean"] = prep.adv_mean;
      rec["adv_std"] = prep.adv_std;
      rec["mask_diversity"] =
          mask_diversity(batch.actions, batch.steps_per_episode);
      const TopKFrequency topk =
          top_k_frequency(batch.actions, batch.steps_per_episode, cfg_.top_k);
      rec["top_k_roll"] = topk.roll;
      rec["top_k_score"] = topk.score;
      if (cfg_.kl_every_batches > 0 &&
          batch_index % cfg_.kl_every_batches == 0) {
        rec["policy_kl"] = probe_kl();
      }
      metrics->write(rec);

      if (cfg_.eval_every_games > 0 &&
          crossed(games_played_ - B, games_played_, cfg_.eval_every_games)) {
        run_periodic_eval(metrics);
      }
      if (cfg_.checkpoint_every_games > 0 &&
          crossed(games_played_ - B, games_played_,
                  cfg_.checkpoint_every_games)) {
        save(checkpoint_path());
      }
    }

    TrainOutcome outcome;
    outcome.games_played = games_played_;
    outcome.completed = games_played_ >= cfg_.games;
    save(checkpoint_path());
    if (outcome.completed) {
      EvalStats stats = evaluate_net<T>(
          params_, cfg_.features, cfg_.eval_games, cfg_.seed,
          static_cast<uint64_t>(games_played_) << 24, "agent");
      outcome.final_eval = stats;
      if (cfg_.single_turn) {
        outcome.final_single_turn_mean = evaluate_net_single_turn<T>(
            params_, cfg_.features, env_, cfg_.eval_games, cfg_.seed,
            static_cast<uint64_t>(games_played_) << 24 | 0x800000u);
      }
      Json rec = eval_record(stats, "final_eval");
      if (cfg_.single_turn)
        rec["single_turn_mean"] = outcome.final_single_turn_mean;
      metrics->write(rec);
      write_file(cfg_.out_dir + "/eval_stats.json",
                 eval_stats_to_json(stats, cfg_.echo()));
      write_file(cfg_.out_dir + "/eval_stats.csv", eval_stats_to_csv(stats));
    }
    return outcome;
  }

  void save(const std::string& path) const {
    Checkpoint<T> ckpt;
    ckpt.config = cfg_;
    ckpt.params = params_;
    ckpt.adam = adam_;
    ckpt.kl_snapshot = kl_snapshot_;
    ckpt.games_played = games_played_;
    ckpt.updates = updates_;
    save_checkpoint(path, ckpt);
  }

  std::string checkpoint_path() const {
    return cfg_.out_dir + "/checkpoint.bin";
  }

 private:
  static bool crossed(int64_t before, int64_t after, int64_t every) {
    return before / every != after / every;
  }

  struct UpdateResult {
    LossBreakdown loss;
    double grad_norm = 0.0;
    bool clipped = false;
  };

  // One gradient step over games [game_begin, game_end) of the batch.
  UpdateResult update_once(const TrajectoryBatch<T>& batch,
                           const BatchSignals& signals, int game_begin,
                           int game_end, double lr) {
    std::vector<int> order(game_end - game_begin);
    for (int i = 0; i < game_end - game_begin; ++i)
      order[i] = game_begin + i;
    return update_minibatch(batch, signals, order, lr);
  }

  UpdateResult update_minibatch(const TrajectoryBatch<T>& batch,
                                const BatchSignals& signals,
                                std::span<const int> games, double lr) {
    const int S = batch.steps_per_episode;
    const int n = static_cast<int>(games.size()) * S;
    mb_features_.resize(static_cast<size_t>(n) * batch.feat_dim);
    mb_masks_.resize(n);
    mb_actions_.resize(n);
    BatchSignals mb_signals;
    mb_signals.policy_adv.resize(n);
    mb_signals.value_target.resize(n);
    if (!signals.behavior_logprob.empty())
      mb_signals.behavior_logprob.resize(n);
    if (!signals.unorm_target.empty()) mb_signals.unorm_target.resize(n);

    for (size_t i = 0; i < games.size(); ++i) {
      const size_t src = static_cast<size_t>(games[i]) * S;
      const size_t dst = i * S;
      std::copy(batch.features.begin() + src * batch.feat_dim,
                batch.features.begin() + (src + S) * batch.feat_dim,
                mb_features_.begin() + dst * batch.feat_dim);
      for (int t = 0; t < S; ++t) {
        mb_masks_[dst + t] = batch.score_masks[src + t];
        mb_actions_[dst + t] = batch.actions[src + t];
        mb_signals.policy_adv[dst + t] = signals.policy_adv[src + t];
        mb_signals.value_target[dst + t] = signals.value_target[src + t];
        if (!signals.behavior_logprob.empty())
          mb_signals.behavior_logprob[dst + t] =
              signals.behavior_logprob[src + t];
        if (!signals.unorm_target.empty())
          mb_signals.unorm_target[dst + t] = signals.unorm_target[src + t];
      }
    }

    Rng dropout_rng(derive_stream(cfg_.seed, StreamDomain::kDropout,
                                  static_cast<uint64_t>(updates_)));
    net_forward<T>(params_, mb_features_.data(), n, mb_masks_.data(), true,
                   &dropout_rng, nullptr, &trace_, &po_);
    HeadGrads<T> hg;
    hg.init(n, po_.roll_dim);
    UpdateResult result;
    result.loss = assemble_loss<T>(po_, mb_masks_.data(), mb_actions_.data(),
                                   S, mb_signals, loss_cfg_, &hg);
    grads_.assign(params_.param_count(), T(0));
    net_backward<T>(params_, trace_, hg.roll.data(), hg.score.data(),
                    hg.value.data(), hg.upper.data(), &grads_);
    const auto clip = clip_gradients(&grads_, cfg_.clip_threshold);
    result.grad_norm = clip.norm;
    result.clipped = clip.was_clipped;
    adam_step(&params_, grads_, &adam_, lr);
    ++updates_;
    return result;
  }

  double probe_kl() {
    const int n = static_cast<int>(probe_states_.size());
    probe_features_.resize(static_cast<size_t>(n) * feat_dim_);
    probe_masks_.resize(n);
    for (int i = 0; i < n; ++i) {
      encode(probe_states_[i], cfg_.features,
             probe_features_.data() + static_cast<size_t>(i) * feat_dim_);
      probe_masks_[i] =
          probe_states_[i].rolls_used == 2
              ? legal_score_mask(probe_states_[i].dice, probe_states_[i].card)
              : probe_states_[i].card.open_mask();
    }
    Params<T> old_params = params_;
    old_params.data = kl_snapshot_;
    old_params.sync_derived();
    PolicyOut<T> po_old, po_new;
    net_forward<T>(old_params, probe_features_.data(), n,
                   probe_masks_.data(), false, nullptr, nullptr, nullptr,
                   &po_old);
    net_forward<T>(params_, probe_features_.data(), n, probe_masks_.data(),
                   false, nullptr, nullptr, nullptr, &po_new);
    kl_snapshot_ = params_.data;
    return policy_kl(po_old, po_new, probe_masks_);
  }

  void run_periodic_eval(MetricsWriter* metrics) {
    EvalStats stats = evaluate_net<T>(
        params_, cfg_.features, cfg_.eval_games, cfg_.seed,
        static_cast<uint64_t>(games_played_) << 24, "agent");
    Json rec = eval_record(stats, "eval");
    if (cfg_.single_turn) {
      rec["single_turn_mean"] = evaluate_net_single_turn<T>(
          params_, cfg_.features, env_, cfg_.eval_games, cfg_.seed,
          static_cast<uint64_t>(games_played_) << 24 | 0x800000u);
    }
    metrics->write(rec);
  }

  Json eval_record(const EvalStats& stats, const char* type) const {
    Json rec;
    rec["type"] = type;
    rec["games"] = games_played_;
    rec["eval_games"] = stats.games;
    rec["mean"] = stats.mean;
    rec["median"] = stats.median;
    rec["bonus_rate_pct"] = stats.bonus_rate_pct;
    rec["yahtzee_rate_pct"] = stats.yahtzee_rate_pct;
    rec["p_ge_250"] = stats.p_score_ge[4];
    return rec;
  }

  RunConfig cfg_;
  EnvSpec env_;
  int feat_dim_;
  LossConfig loss_cfg_;
  Params<T> params_;
  AdamState<T> adam_;
  std::vector<T> kl_snapshot_;
  std::vector<GameState> probe_states_;
  int64_t games_played_ = 0;
  int64_t updates_ = 0;

  // Reused batch scratch.
  std::vector<T> mb_features_;
  std::vector<uint16_t> mb_masks_;
  std::vector<uint8_t> mb_actions_;
  std::vector<T> grads_;
  std::vector<T> probe_features_;
  std::vector<uint16_t> probe_masks_;
  ForwardTrace<T> trace_;
  PolicyOut<T> po_;
};

template <typename T>
TrainOutcome run_training_impl(const RunConfig& cfg, bool resume,
                               int64_t halt_after) {
  std::filesystem::create_directories(cfg.out_dir);
  Trainer<T> trainer(cfg);
  bool fresh = true;
  if (resume) {
    const std::string path = cfg.out_dir + "/checkpoint.bin";
    Checkpoint<T> ckpt = load_checkpoint<T>(path);
    if (ckpt.config.echo_text() != cfg.echo_text())
      throw ConfigError(
          "checkpoint config does not match the requested config; refusing "
          "to resume");
    trainer.load(ckpt);
    fresh = false;
  } else {
    trainer.init_fresh();
  }

  MetricsWriter metrics(cfg.out_dir + "/metrics.jsonl", /*append=*/!fresh);
  if (fresh) {
    Json meta;
    meta["type"] = "meta";
    meta["schema_version"] = 1;
    Json echo;
    for (const auto& [k, v] : cfg.echo()) echo[k] = v;
    meta["config"] = echo;
    metrics.write(meta);
  }

  try {
    return trainer.run(&metrics, halt_after);
  } catch (const TrainingAbortError& e) {
    Json rec;
    rec["type"] = "abort";
    rec["reason"] = e.what();
    metrics.write(rec);
    throw;
  }
}

}  // namespace

TrainOutcome run_training(const RunConfig& cfg, bool resume,
                          int64_t halt_after_games) {
  if (cfg.net_float64)
    return run_training_impl<double>(cfg, resume, halt_after_games);
  return run_training_impl<float>(cfg, resume, halt_after_games);
}

}  // namespace yahtzee
