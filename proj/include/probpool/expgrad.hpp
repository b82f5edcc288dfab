#pragma once

// Exponentiated-gradient learner: a linear predictor over expert
// probabilities, trained by multiplicative updates driven by the
// quadratic-loss gradient over a fixed number of chronological passes. For
// each game it retrains from scratch on the games seen so far and predicts
// with the best post-pass snapshot.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "probpool/aggregator.hpp"
#include "probpool/core.hpp"

namespace probpool {

struct ExpGradConfig {
  int passes = 3;
  double learning_rate = 0.1;
};

// Feature vector over the full roster; a missing value is a 0.5 prediction.
inline std::vector<double> effective_predictions(const PredictionRow& row, std::size_t n_experts) {
  std::vector<double> x(n_experts, 0.5);
  for (const auto& e : row.entries()) x[e.expert] = e.prob;
  return x;
}

inline double eg_predict(std::span<const double> w, std::span<const double> x) {
  double p = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) p += w[i] * x[i];
  return std::clamp(p, 0.0, 1.0);
}

// w_i *= exp(2 x_i (y - p) lr), then renormalize to sum 1.
inline void eg_update(std::vector<double>& w, std::span<const double> x, int y, double lr) {
  require_outcome(y);
  const double delta = y - eg_predict(w, x);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] *= std::exp(2.0 * x[i] * delta * lr);
    sum += w[i];
  }
  for (double& wi : w) wi /= sum;
}

struct TrainingGame {
  std::vector<double> x;
  int y;
};

// Chronological passes from uniform weights; after each pass the frozen
// weights are scored by total quadratic loss on the full history, and the
// best snapshot wins. The uniform start is itself a candidate, so training
// never selects something worse than plain averaging on the training set.
inline std::vector<double> eg_train(std::span<const TrainingGame> history, std::size_t n_experts,
                                    const ExpGradConfig& cfg) {
  if (cfg.passes < 1) throw std::invalid_argument("expgrad: passes must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("expgrad: learning rate must be > 0");
  std::vector<double> w(n_experts, 1.0 / static_cast<double>(n_experts));
  if (history.empty()) return w;

  const auto training_loss = [&](const std::vector<double>& weights) {
    double total = 0.0;
    for (const TrainingGame& g : history) {
      const double d = eg_predict(weights, g.x) - g.y;
      total += d * d;
    }
    return total;
  };

  std::vector<double> best = w;
  double best_loss = training_loss(w);
  for (int pass = 0; pass < cfg.passes; ++pass) {
    for (const TrainingGame& g : history) {
      eg_update(w, g.x, g.y, cfg.learning_rate);
    }
    const double loss = training_loss(w);
    if (loss < best_loss) {
      best_loss = loss;
      best = w;
    }
  }
  return best;
}

class ExpGradAggregator final : public Aggregator {
 public:
  ExpGradAggregator(std::size_t n_experts, ExpGradConfig cfg, std::string name)
      : Aggregator(std::move(name)), cfg_(cfg), n_(n_experts) {
    if (n_experts == 0) throw std::invalid_argument("expgrad: empty roster");
  }

  double predict(const PredictionRow& row) override {
    last_x_ = effective_predictions(row, n_);
    const std::vector<double> w = eg_train(history_, n_, cfg_);
    return eg_predict(w, last_x_);
  }

  void observe(int y) override {
    require_outcome(y);
    history_.push_back(TrainingGame{std::move(last_x_), y});
    last_x_.clear();
  }

 private:
  ExpGradConfig cfg_;
  std::size_t n_;
  std::vector<TrainingGame> history_;
  std::vector<double> last_x_;
};

}  // namespace probpool
