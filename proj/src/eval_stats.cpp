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

#include "eval_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace yahtzee {

namespace {

using Json = nlohmann::ordered_json;

// Median of a histogram of `n` integer samples.
double hist_median(const int64_t* hist, int size, int64_t n) {
  if (n == 0) return 0.0;
  auto value_at_rank = [&](int64_t rank) {  // 0-based order statistic
    int64_t seen = 0;
    for (int v = 0; v < size; ++v) {
      seen += hist[v];
      if (seen > rank) return static_cast<double>(v);
    }
    return static_cast<double>(size - 1);
  };
  if (n % 2 == 1) return value_at_rank(n / 2);
  return 0.5 * (value_at_rank(n / 2 - 1) + value_at_rank(n / 2));
}

}  // namespace

StatsAccumulator::StatsAccumulator() : score_hist_(kMaxGameScore + 1, 0) {}

void StatsAccumulator::add_game(
    const Scorecard& final_card,
    const std::array<int8_t, kNumCategories>& turn_categories,
    const std::array<int8_t, kNumCategories>& turn_points) {
  const int score = total_score(final_card);
  ++games_;
  score_sum_ += score;
  score_sq_sum_ += static_cast<int64_t>(score) * score;
  ++score_hist_[std::min(score, kMaxGameScore)];
  const int upper = final_card.upper_sum();
  upper_sum_ += upper;
  bonus_games_ += upper >= kUpperBonusThreshold;
  yahtzee_games_ += final_card.get(Category::kYahtzee) == 50;
  yahtzee_bonus_sum_ += final_card.yahtzee_bonus_count;
  for (int t = 0; t < kNumCategories; ++t) {
    const int cat = turn_categories[t];
    const int pts = turn_points[t];
    cat_sum_[cat] += pts;
    ++cat_hist_[cat][pts];
    ++turn_cat_count_[t][cat];
    ++turn_cat_hist_[t][cat][pts];
  }
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  games_ += other.games_;
  score_sum_ += other.score_sum_;
  score_sq_sum_ += other.score_sq_sum_;
  bonus_games_ += other.bonus_games_;
  yahtzee_games_ += other.yahtzee_games_;
  yahtzee_bonus_sum_ += other.yahtzee_bonus_sum_;
  upper_sum_ += other.upper_sum_;
  for (size_t i = 0; i < score_hist_.size(); ++i)
    score_hist_[i] += other.score_hist_[i];
  for (int c = 0; c < kNumCategories; ++c) {
    cat_sum_[c] += other.cat_sum_[c];
    for (int v = 0; v <= 50; ++v) cat_hist_[c][v] += other.cat_hist_[c][v];
  }
  for (int t = 0; t < kNumCategories; ++t)
    for (int c = 0; c < kNumCategories; ++c) {
      turn_cat_count_[t][c] += other.turn_cat_count_[t][c];
      for (int v = 0; v <= 50; ++v)
        turn_cat_hist_[t][c][v] += other.turn_cat_hist_[t][c][v];
    }
}

EvalStats StatsAccumulator::finalize(const std::string& policy,
                                     uint64_t seed) const {
  EvalStats s;
  s.games = games_;
  s.seed = seed;
  s.policy = policy;
  if (games_ == 0) return s;

  const double n = static_cast<double>(games_);
  s.mean = score_sum_ / n;
  s.variance = games_ > 1
                   ? (score_sq_sum_ - n * s.mean * s.mean) / (n - 1.0)
                   : 0.0;
  s.std_dev = std::sqrt(std::max(s.variance, 0.0));
  s.median = hist_median(score_hist_.data(),
                         static_cast<int>(score_hist_.size()), games_);
  s.bonus_rate_pct = 100.0 * bonus_games_ / n;
  s.yahtzee_rate_pct = 100.0 * yahtzee_games_ / n;
  s.mean_yahtzee_bonus = yahtzee_bonus_sum_ / n;
  s.mean_upper_sum = upper_sum_ / n;

  for (int i = 0; i < kNumScoreThresholds; ++i) {
    int64_t count = 0;
    for (int v = kScoreThresholds[i]; v <= kMaxGameScore; ++v)
      count += score_hist_[v];
    s.p_score_ge[i] = count / n;
  }

  for (int c = 0; c < kNumCategories; ++c) {
    // Every game scores each category exactly once.
    s.categories[c].mean = cat_sum_[c] / n;
    s.categories[c].median = hist_median(cat_hist_[c].data(), 51, games_);
  }

  for (int t = 0; t < kNumCategories; ++t) {
    // Top 3 categories by usage; ties break toward the lower index.
    std::array<int, kNumCategories> order;
    for (int c = 0; c < kNumCategories; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return turn_cat_count_[t][a] > turn_cat_count_[t][b];
    });
    for (int r = 0; r < 3; ++r) {
      const int cat = order[r];
      const int64_t used = turn_cat_count_[t][cat];
      if (used == 0) {
        s.turn_top3[t][r] = TurnTopEntry{};
        continue;
      }
      s.turn_top3[t][r].category = cat;
      s.turn_top3[t][r].usage_pct = 100.0 * used / n;
      s.turn_top3[t][r].median_score =
          hist_median(turn_cat_hist_[t][cat].data(), 51, used);
    }
  }
  return s;
}

std::string eval_stats_to_json(
    const EvalStats& stats,
    const std::map<std::string, std::string>& config_echo) {
  Json j;
  j["schema_version"] = kEvalStatsSchemaVersion;
  j["policy"] = stats.policy;
  j["games"] = stats.games;
  j["seed"] = stats.seed;
  Json summary;
  summary["mean"] = stats.mean;
  summary["median"] = stats.median;
  summary["std_dev"] = stats.std_dev;
  summary["variance"] = stats.variance;
  summary["bonus_rate_pct"] = stats.bonus_rate_pct;
  summary["yahtzee_rate_pct"] = stats.yahtzee_rate_pct;
  summary["mean_yahtzee_bonus"] = stats.mean_yahtzee_bonus;
  summary["mean_upper_sum"] = stats.mean_upper_sum;
  j["summary"] = summary;
  Json pge;
  for (int i = 0; i < kNumScoreThresholds; ++i)
    pge[std::to_string(kScoreThresholds[i])] = stats.p_score_ge[i];
  j["p_score_ge"] = pge;
  Json cats = Json::array();
  for (int c = 0; c < kNumCategories; ++c) {
    Json cat;
    cat["ordinal"] = c + 1;
    cat["name"] = category_name(static_cast<Category>(c));
    cat["mean"] = stats.categories[c].mean;
    cat["median"] = stats.categories[c].median;
    cats.push_back(cat);
  }
  j["categories"] = cats;
  Json turns = Json::array();
  for (int t = 0; t < kNumCategories; ++t) {
    Json turn;
    turn["turn"] = t + 1;
    Json top = Json::array();
    for (int r = 0; r < 3; ++r) {
      const TurnTopEntry& e = stats.turn_top3[t][r];
      if (e.category < 0) continue;
      Json row;
      row["category"] = category_name(static_cast<Category>(e.category));
      row["usage_pct"] = e.usage_pct;
      row["median_score"] = e.median_score;
      top.push_back(row);
    }
    turn["top"] = top;
    turns.push_back(turn);
  }
  j["turns"] = turns;
  if (!config_echo.empty()) {
    Json echo;
    for (const auto& [k, v] : config_echo) echo[k] = v;
    j["config"] = echo;
  }
  return j.dump(2) + "\n";
}

std::string eval_stats_to_csv(const EvalStats& stats) {
  std::ostringstream out;
  out.precision(17);
  out << "key,value\n";
  out << "schema_version," << kEvalStatsSchemaVersion << "\n";
  out << "policy," << stats.policy << "\n";
  out << "games," << stats.games << "\n";
  out << "seed," << stats.seed << "\n";
  out << "mean," << stats.mean << "\n";
  out << "median," << stats.median << "\n";
  out << "std_dev," << stats.std_dev << "\n";
  out << "variance," << stats.variance << "\n";
  out << "bonus_rate_pct," << stats.bonus_rate_pct << "\n";
  out << "yahtzee_rate_pct," << stats.yahtzee_rate_pct << "\n";
  out << "mean_yahtzee_bonus," << stats.mean_yahtzee_bonus << "\n";
  out << "mean_upper_sum," << stats.mean_upper_sum << "\n";
  for (int i = 0; i < kNumScoreThresholds; ++i)
    out << "p_score_ge_" << kScoreThresholds[i] << ","
        << stats.p_score_ge[i] << "\n";
  for (int c = 0; c < kNumCategories; ++c) {
    const char* name = category_name(static_cast<Category>(c));
    out << "category_mean_" << name << "," << stats.categories[c].mean
        << "\n";
    out << "category_median_" << name << "," << stats.categories[c].median
        << "\n";
  }
  for (int t = 0; t < kNumCategories; ++t) {
    for (int r = 0; r < 3; ++r) {
      const TurnTopEntry& e = stats.turn_top3[t][r];
      if (e.category < 0) continue;
      const char* name = category_name(static_cast<Category>(e.category));
      out << "turn" << (t + 1) << "_top" << (r + 1) << "," << name << "\n";
      out << "turn" << (t + 1) << "_top" << (r + 1) << "_usage_pct,"
          << e.usage_pct << "\n";
      out << "turn" << (t + 1) << "_top" << (r + 1) << "_median,"
          << e.median_score << "\n";
    }
  }
  return out.str();
}

EvalStats eval_stats_from_json(const std::string& text) {
  const Json j = Json::parse(text);
  if (!j.contains("schema_version") ||
      j["schema_version"].get<int>() != kEvalStatsSchemaVersion)
    throw std::runtime_error("eval stats schema version mismatch");
  EvalStats s;
  s.policy = j["policy"].get<std::string>();
  s.games = j["games"].get<int64_t>();
  s.seed = j["seed"].get<uint64_t>();
  const Json& summary = j["summary"];
  s.mean = summary["mean"].get<double>();
  s.median = summary["median"].get<double>();
  s.std_dev = summary["std_dev"].get<double>();
  s.variance = summary["variance"].get<double>();
  s.bonus_rate_pct = summary["bonus_rate_pct"].get<double>();
  s.yahtzee_rate_pct = summary["yahtzee_rate_pct"].get<double>();
  s.mean_yahtzee_bonus = summary["mean_yahtzee_bonus"].get<double>();
  s.mean_upper_sum = summary["mean_upper_sum"].get<double>();
  for (int i = 0; i < kNumScoreThresholds; ++i)
    s.p_score_ge[i] =
        j["p_score_ge"][std::to_string(kScoreThresholds[i])].get<double>();
  for (int c = 0; c < kNumCategories; ++c) {
    s.categories[c].mean = j["categories"][c]["mean"].get<double>();
    s.categories[c].median = j["categories"][c]["median"].get<double>();
  }
  for (int t = 0; t < kNumCategories; ++t) {
    const Json& top = j["turns"][t]["top"];
    for (size_t r = 0; r < top.size() && r < 3; ++r) {
      const std::string name = top[r]["category"].get<std::string>();
      for (int c = 0; c < kNumCategories; ++c)
        if (name == category_name(static_cast<Category>(c)))
          s.turn_top3[t][r].category = c;
      s.turn_top3[t][r].usage_pct = top[r]["usage_pct"].get<double>();
      s.turn_top3[t][r].median_score = top[r]["median_score"].get<double>();
    }
  }
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("short write: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace yahtzee
