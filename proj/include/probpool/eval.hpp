#pragma once

// Online evaluation protocol: every aggregator predicts each game before the
// outcome is revealed, is scored by the contest rule, and is ranked against
// the expert population. Also: 0-1 error, the exact one-sided sign test for
// pairwise comparisons, multi-year expert filtering, and the hindsight
// below-zero-average diagnostic.

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "probpool/aggregator.hpp"
#include "probpool/core.hpp"
#include "probpool/io.hpp"

namespace probpool {

struct GameResult {
  int season;
  int game_id;
  double prediction;
  double score;
};

struct SeasonStats {
  int season;
  double total_score;
  double zero_one_error;
  int rank_vs_experts;
};

struct AggregatorRun {
  std::string name;
  std::vector<GameResult> games;
  std::vector<SeasonStats> seasons;
};

struct EvalReport {
  std::vector<AggregatorRun> runs;
  // Final totals of the experts that participated in each season, roster order.
  std::map<int, std::vector<double>> expert_totals;
};

// Fraction of games where thresholding the prediction (p >= 0.5 predicts 1)
// disagrees with the outcome.
inline double zero_one_error(std::span<const double> preds, std::span<const int> outcomes) {
  if (preds.size() != outcomes.size()) {
    throw std::invalid_argument("zero_one_error: mismatched lengths");
  }
  if (preds.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require_outcome(outcomes[i]);
    const int called = preds[i] >= 0.5 ? 1 : 0;
    if (called != outcomes[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(preds.size());
}

// Competition ranking: 1 + number of experts with strictly greater total.
inline int expert_rank(double aggregator_total, std::span<const double> expert_totals) {
  int greater = 0;
  for (double t : expert_totals) {
    if (t > aggregator_total) ++greater;
  }
  return 1 + greater;
}

struct SignTest {
  int wins = 0;
  int losses = 0;
  int ties = 0;
  double p_value = 1.0;
  bool all_ties = false;
};

namespace detail {

// P[X >= k] for X ~ Binomial(n, 1/2), exact up to double rounding.
inline double binomial_tail_geq(int n, int k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double term = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                         n * std::log(2.0));
  double sum = 0.0;
  for (int j = k; j <= n; ++j) {
    sum += term;
    term *= static_cast<double>(n - j) / (j + 1.0);
  }
  return std::min(sum, 1.0);
}

}  // namespace detail

// One-sided exact sign test on per-game scores: small p means the first
// sequence scores higher more often than chance. Ties are dropped.
inline SignTest sign_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("sign_test: mismatched lengths");
  SignTest r;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) {
      ++r.wins;
    } else if (a[i] < b[i]) {
      ++r.losses;
    } else {
      ++r.ties;
    }
  }
  if (r.wins + r.losses == 0) {
    r.all_ties = true;
    r.p_value = 1.0;
    return r;
  }
  r.p_value = detail::binomial_tail_geq(r.wins + r.losses, r.wins);
  return r;
}

// Runs every aggregator through the dataset in chronological order. For each
// game all predictions are collected before any aggregator observes the
// outcome. A NoAdviceError becomes a 0.5 prediction; anything outside [0,1]
// is a hard failure naming the offender.
inline EvalReport run_online(const Dataset& ds,
                             std::span<const std::unique_ptr<Aggregator>> aggregators) {
  if (aggregators.empty()) throw std::invalid_argument("run_online: no aggregators");
  EvalReport report;
  report.runs.resize(aggregators.size());
  for (std::size_t a = 0; a < aggregators.size(); ++a) {
    report.runs[a].name = aggregators[a]->name();
  }

  std::map<int, std::vector<double>> expert_totals;
  std::map<int, std::vector<char>> expert_played;

  for (std::size_t t = 0; t < ds.games.size(); ++t) {
    const Game& game = ds.games[t];
    const PredictionRow& row = ds.predictions[t];
    if (!game.outcome) {
      throw std::invalid_argument("run_online: game without an outcome");
    }
    const int y = *game.outcome;

    for (std::size_t a = 0; a < aggregators.size(); ++a) {
      double p;
      try {
        p = aggregators[a]->predict(row);
      } catch (const NoAdviceError&) {
        p = 0.5;
      }
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::runtime_error("aggregator '" + aggregators[a]->name() +
                                 "' emitted an invalid probability at game (" +
                                 std::to_string(game.season) + "," +
                                 std::to_string(game.game_id) + ")");
      }
      report.runs[a].games.push_back(GameResult{game.season, game.game_id, p, prob_score(p, y)});
    }
    for (const auto& agg : aggregators) agg->observe(y);

    auto& totals = expert_totals[game.season];
    auto& played = expert_played[game.season];
    totals.resize(ds.num_experts(), 0.0);
    played.resize(ds.num_experts(), 0);
    for (const auto& e : row.entries()) {
      totals[e.expert] += prob_score(e.prob, y);
      played[e.expert] = 1;
    }
  }

  for (const auto& [season, totals] : expert_totals) {
    auto& kept = report.expert_totals[season];
    const auto& played = expert_played[season];
    for (std::size_t i = 0; i < totals.size(); ++i) {
      if (played[i]) kept.push_back(totals[i]);
    }
  }

  for (auto& run : report.runs) {
    std::map<int, std::pair<std::vector<double>, std::vector<int>>> by_season;
    std::vector<int> season_order;
    for (std::size_t t = 0; t < run.games.size(); ++t) {
      const int season = run.games[t].season;
      if (!by_season.count(season)) season_order.push_back(season);
      by_season[season].first.push_back(run.games[t].prediction);
      by_season[season].second.push_back(*ds.games[t].outcome);
    }
    std::sort(season_order.begin(), season_order.end());
    for (int season : season_order) {
      const auto& [preds, outs] = by_season[season];
      double total = 0.0;
      for (std::size_t i = 0; i < preds.size(); ++i) total += prob_score(preds[i], outs[i]);
      run.seasons.push_back(SeasonStats{season, total, zero_one_error(preds, outs),
                                        expert_rank(total, report.expert_totals[season])});
    }
  }
  return report;
}

// Restrict to the chosen seasons and to experts with at least one prediction
// in every chosen season. Games that end up with no predictions are kept.
inline Dataset multi_year_filter(const Dataset& ds, std::span<const int> seasons) {
  if (seasons.empty()) throw std::invalid_argument("multi_year_filter: no seasons chosen");
  std::set<int> chosen(seasons.begin(), seasons.end());
  {
    const std::vector<int> have = ds.seasons();
    for (int s : chosen) {
      if (std::find(have.begin(), have.end(), s) == have.end()) {
        throw std::invalid_argument("multi_year_filter: unknown season " + std::to_string(s));
      }
    }
  }

  std::map<int, std::vector<char>> played;
  for (std::size_t t = 0; t < ds.games.size(); ++t) {
    const int season = ds.games[t].season;
    if (!chosen.count(season)) continue;
    auto& flags = played[season];
    flags.resize(ds.num_experts(), 0);
    for (const auto& e : ds.predictions[t].entries()) flags[e.expert] = 1;
  }

  std::vector<int> new_index(ds.num_experts(), -1);
  Dataset out;
  for (std::size_t i = 0; i < ds.num_experts(); ++i) {
    bool in_all = true;
    for (const auto& [season, flags] : played) {
      in_all = in_all && flags[i];
    }
    if (in_all) {
      new_index[i] = static_cast<int>(out.roster.size());
      out.roster.push_back(ds.roster[i]);
    }
  }
  for (std::size_t t = 0; t < ds.games.size(); ++t) {
    if (!chosen.count(ds.games[t].season)) continue;
    out.games.push_back(ds.games[t]);
    PredictionRow row;
    for (const auto& e : ds.predictions[t].entries()) {
      if (new_index[e.expert] >= 0) row.set(new_index[e.expert], e.prob);
    }
    out.predictions.push_back(std::move(row));
  }
  return out;
}

struct BelowZeroAverage {
  std::vector<double> predictions;    // aligned with the dataset's games
  std::vector<int> fallback_seasons;  // seasons with no below-zero expert
};

// Hindsight diagnostic: per-game simple average over the experts that ended
// the game's season with a negative total score. Seasons where no expert
// finished below zero fall back to the all-expert average.
inline BelowZeroAverage below_zero_average(const Dataset& ds) {
  std::map<int, std::vector<double>> totals;
  for (std::size_t t = 0; t < ds.games.size(); ++t) {
    if (!ds.games[t].outcome) {
      throw std::invalid_argument("below_zero_average: game without an outcome");
    }
    auto& season_totals = totals[ds.games[t].season];
    season_totals.resize(ds.num_experts(), 0.0);
    for (const auto& e : ds.predictions[t].entries()) {
      season_totals[e.expert] += prob_score(e.prob, *ds.games[t].outcome);
    }
  }

  std::map<int, std::vector<char>> below;
  BelowZeroAverage out;
  for (const auto& [season, season_totals] : totals) {
    auto& flags = below[season];
    flags.resize(ds.num_experts(), 0);
    bool any = false;
    for (std::size_t i = 0; i < season_totals.size(); ++i) {
      if (season_totals[i] < 0.0) {
        flags[i] = 1;
        any = true;
      }
    }
    if (!any) out.fallback_seasons.push_back(season);
  }

  for (std::size_t t = 0; t < ds.games.size(); ++t) {
    const auto& flags = below[ds.games[t].season];
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& e : ds.predictions[t].entries()) {
      if (flags[e.expert]) {
        sum += e.prob;
        ++count;
      }
    }
    if (count > 0) {
      out.predictions.push_back(sum / static_cast<double>(count));
    } else if (!ds.predictions[t].empty()) {
      out.predictions.push_back(average_predict(ds.predictions[t]));
    } else {
      out.predictions.push_back(0.5);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report files.

inline std::string results_csv(const EvalReport& report) {
  std::string out = "aggregator,season,game_id,prediction,prob_score\n";
  for (const AggregatorRun& run : report.runs) {
    for (const GameResult& g : run.games) {
      out += run.name + "," + std::to_string(g.season) + "," + std::to_string(g.game_id) + "," +
             io::format_prob(g.prediction) + "," + io::format_fixed(g.score, 6) + "\n";
    }
  }
  return out;
}

inline std::string summary_csv(const EvalReport& report) {
  std::string out = "aggregator,season,total_score,zero_one_error,rank_vs_experts\n";
  for (const AggregatorRun& run : report.runs) {
    for (const SeasonStats& s : run.seasons) {
      out += run.name + "," + std::to_string(s.season) + "," + io::format_fixed(s.total_score, 6) +
             "," + io::format_fixed(s.zero_one_error, 6) + "," +
             std::to_string(s.rank_vs_experts) + "\n";
    }
  }
  return out;
}

struct SignTestRow {
  std::string a;
  std::string b;
  SignTest result;
};

inline std::string signtest_csv(std::span<const SignTestRow> rows) {
  std::string out = "aggregator_a,aggregator_b,wins,losses,ties,p_value\n";
  char buf[32];
  for (const SignTestRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6g", r.result.p_value);
    out += r.a + "," + r.b + "," + std::to_string(r.result.wins) + "," +
           std::to_string(r.result.losses) + "," + std::to_string(r.result.ties) + "," + buf +
           "\n";
  }
  return out;
}

}  // namespace probpool
