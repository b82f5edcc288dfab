#pragma once

// The stateful aggregator contract shared by every algorithm, plus the
// non-adaptive baselines: simple averaging, top-k-by-score averaging and a
// constant predictor.

#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "probpool/core.hpp"

namespace probpool {

// Online protocol: predict() is called exactly once per game, then observe()
// with that game's outcome, before the next predict(). predict() may throw
// NoAdviceError; the harness substitutes 0.5 and still calls observe().
class Aggregator {
 public:
  explicit Aggregator(std::string name) : name_(std::move(name)) {}
  virtual ~Aggregator() = default;

  virtual double predict(const PredictionRow& row) = 0;
  virtual void observe(int outcome) = 0;
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// Running contest scores per expert. Only experts present in a game's row are
// scored for that game.
class ScoreLedger {
 public:
  explicit ScoreLedger(std::size_t n_experts) : total_(n_experts, 0.0), games_(n_experts, 0) {}

  void update(const PredictionRow& row, int y) {
    require_outcome(y);
    for (const auto& e : row.entries()) {
      total_[e.expert] += prob_score(e.prob, y);
      games_[e.expert] += 1;
    }
  }

  std::size_t size() const { return total_.size(); }
  double total(int expert) const { return total_[expert]; }
  int participation(int expert) const { return games_[expert]; }

  bool all_equal() const {
    for (double t : total_) {
      if (t != total_.front()) return false;
    }
    return true;
  }

  // Indices of the k best-scoring experts; equal totals break by ascending
  // expert index.
  std::vector<int> top_k(int k) const {
    std::vector<int> idx(total_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return total_[a] > total_[b]; });
    if (k >= 0 && static_cast<std::size_t>(k) < idx.size()) idx.resize(k);
    return idx;
  }

 private:
  std::vector<double> total_;
  std::vector<int> games_;
};

inline double average_predict(const PredictionRow& row) {
  if (row.empty()) throw NoAdviceError("average: no expert predicted this game");
  double sum = 0.0;
  for (const auto& e : row.entries()) sum += e.prob;
  return sum / static_cast<double>(row.size());
}

// Mean over present experts that are currently in the ledger's top k. While
// every ledger total is still equal (e.g. the first game) all present experts
// are used; an empty intersection also falls back to the plain average.
inline double average_top_k_predict(const PredictionRow& row, const ScoreLedger& ledger, int k) {
  if (row.empty()) throw NoAdviceError("average-top: no expert predicted this game");
  if (k < 1) throw std::invalid_argument("average-top: k must be >= 1");
  if (ledger.all_equal()) return average_predict(row);
  std::vector<char> in_top(ledger.size(), 0);
  for (int i : ledger.top_k(k)) in_top[i] = 1;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& e : row.entries()) {
    if (in_top[e.expert]) {
      sum += e.prob;
      ++count;
    }
  }
  if (count == 0) return average_predict(row);
  return sum / static_cast<double>(count);
}

class AverageAggregator final : public Aggregator {
 public:
  AverageAggregator() : Aggregator("average") {}
  explicit AverageAggregator(std::string name) : Aggregator(std::move(name)) {}
  double predict(const PredictionRow& row) override { return average_predict(row); }
  void observe(int) override {}
};

class TopKAverageAggregator final : public Aggregator {
 public:
  TopKAverageAggregator(std::size_t n_experts, int k, std::string name)
      : Aggregator(std::move(name)), ledger_(n_experts), k_(k) {
    if (k < 1) throw std::invalid_argument("average-top: k must be >= 1");
  }

  double predict(const PredictionRow& row) override {
    last_row_ = row;
    return average_top_k_predict(row, ledger_, k_);
  }

  void observe(int y) override {
    ledger_.update(last_row_, y);
    last_row_ = PredictionRow{};
  }

  const ScoreLedger& ledger() const { return ledger_; }

 private:
  ScoreLedger ledger_;
  int k_;
  PredictionRow last_row_;
};

class ConstantAggregator final : public Aggregator {
 public:
  ConstantAggregator(double c, std::string name) : Aggregator(std::move(name)), c_(c) {
    require_probability(c, "constant prediction");
  }
  double predict(const PredictionRow&) override { return c_; }
  void observe(int) override {}

 private:
  double c_;
};

}  // namespace probpool
