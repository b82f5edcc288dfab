#pragma once

// Domain types for games, per-game expert predictions and datasets, plus the
// loss functions and the contest scoring rule used by every aggregator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace probpool {

inline constexpr const char* kVersion = "0.1.0";

// An aggregator (or market) has nothing to go on this round: no present
// expert, or no participant with positive wealth. The evaluation harness
// catches this and substitutes a 0.5 prediction.
class NoAdviceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. line is 1-based and counts the header.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Bad command-line or aggregator-specifier input; the CLI maps this to exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error(std::string(what) + " must be a probability in [0,1], got " +
                            std::to_string(p));
  }
}

inline void require_outcome(int y) {
  if (y != 0 && y != 1) {
    throw std::domain_error("outcome must be 0 or 1, got " + std::to_string(y));
  }
}

// One binary event. (season, game_id) is unique and defines chronological
// order. true_prob is only set for synthetic data and is never shown to
// aggregators.
struct Game {
  int season = 0;
  int game_id = 0;
  std::optional<int> outcome;
  std::optional<double> true_prob;
};

// Sparse per-game expert predictions, keyed by roster index. Experts absent
// from the row gave no prediction for the game.
class PredictionRow {
 public:
  struct Entry {
    int expert;
    double prob;
  };

  void set(int expert, double prob) {
    require_probability(prob, "expert prediction");
    auto it = std::lower_bound(entries_.begin(), entries_.end(), expert,
                               [](const Entry& e, int x) { return e.expert < x; });
    if (it != entries_.end() && it->expert == expert) {
      it->prob = prob;
    } else {
      entries_.insert(it, Entry{expert, prob});
    }
  }

  std::optional<double> at(int expert) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), expert,
                               [](const Entry& e, int x) { return e.expert < x; });
    if (it != entries_.end() && it->expert == expert) return it->prob;
    return std::nullopt;
  }

  bool has(int expert) const { return at(expert).has_value(); }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;  // sorted by expert index
};

// Roster + chronological games + one prediction row per game, aligned.
struct Dataset {
  std::vector<std::string> roster;
  std::vector<Game> games;
  std::vector<PredictionRow> predictions;

  std::size_t num_experts() const { return roster.size(); }
  std::size_t num_games() const { return games.size(); }

  std::vector<int> seasons() const {
    std::vector<int> out;
    for (const Game& g : games) {
      if (out.empty() || out.back() != g.season) out.push_back(g.season);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Loss functions and the contest scoring rule.

inline double quadratic_loss(double p, int y) {
  require_probability(p, "prediction");
  require_outcome(y);
  const double d = p - y;
  return d * d;
}

inline double absolute_loss(double p, int y) {
  require_probability(p, "prediction");
  require_outcome(y);
  return std::abs(p - y);
}

// Returns +infinity for p=0,y=1 and p=1,y=0; that is a valid loss, not an
// error.
inline double log_loss(double p, int y) {
  require_probability(p, "prediction");
  require_outcome(y);
  const double q = y == 1 ? p : 1.0 - p;
  if (q == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(q);
}

// Contest rule: 100 - 400 (p - y)^2, range [-300, 100].
inline double prob_score(double p, int y) { return 100.0 - 400.0 * quadratic_loss(p, y); }

inline double cumulative_score(std::span<const double> preds, std::span<const int> outcomes) {
  if (preds.size() != outcomes.size()) {
    throw std::invalid_argument("cumulative_score: mismatched lengths");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    total += prob_score(preds[i], outcomes[i]);
  }
  return total;
}

}  // namespace probpool
