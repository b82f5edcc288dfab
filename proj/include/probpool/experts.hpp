#pragma once

// The multiplicative-weights experts algorithm: pluggable prediction
// functions (Vovk, piecewise linear, identity), update functions (power,
// exponential, linear) and two missing-data policies, plus the worst-case
// loss bound as a checkable quantity.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "probpool/aggregator.hpp"
#include "probpool/core.hpp"

namespace probpool {

enum class PredictionFn { kVovk, kPiecewise, kIdentity };
enum class UpdateFn { kPower, kExpNeg, kLinear };
enum class MissingPolicy { kFillHalf, kRelativeWeight };

struct ExpertsConfig {
  double beta = 0.75;
  PredictionFn prediction_fn = PredictionFn::kVovk;
  UpdateFn update_fn = UpdateFn::kExpNeg;
  MissingPolicy missing_policy = MissingPolicy::kRelativeWeight;
};

inline void require_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::domain_error("beta must lie in (0,1), got " + std::to_string(beta));
  }
}

struct PredictionInterval {
  double lo;
  double hi;
};

// Admissible prediction range for weighted advice r, clamped to [0,1].
// Any prediction function staying inside it inherits the loss bound.
inline PredictionInterval prediction_interval(double r, double beta) {
  require_probability(r, "weighted advice r");
  require_beta(beta);
  const double denom = 2.0 * std::log(2.0 / (1.0 + beta));
  const double lo = 1.0 + std::log1p(-(1.0 - r) * (1.0 - beta)) / denom;
  const double hi = -std::log1p(-r * (1.0 - beta)) / denom;
  return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

inline double predict_vovk(double r, double beta) {
  require_probability(r, "weighted advice r");
  require_beta(beta);
  // ln(1-r+r*beta) and ln((1-r)*beta+r) via log1p for precision near 0.
  const double num = std::log1p(-r * (1.0 - beta));
  const double den = num + std::log1p(-(1.0 - r) * (1.0 - beta));
  return num / den;
}

inline double piecewise_halfwidth(double beta) {
  require_beta(beta);
  return (1.0 + beta) * std::log(2.0 / (1.0 + beta)) / (2.0 * (1.0 - beta));
}

inline double predict_piecewise(double r, double beta) {
  require_probability(r, "weighted advice r");
  const double c = piecewise_halfwidth(beta);
  if (r <= 0.5 - c) return 0.0;
  if (r >= 0.5 + c) return 1.0;
  return 0.5 - (1.0 - 2.0 * r) / (4.0 * c);
}

// Does not satisfy the admissibility bounds; kept because it works well in
// practice.
inline double predict_identity(double r, double beta) {
  require_probability(r, "weighted advice r");
  require_beta(beta);
  return r;
}

inline double apply_prediction_fn(PredictionFn fn, double r, double beta) {
  switch (fn) {
    case PredictionFn::kVovk: return predict_vovk(r, beta);
    case PredictionFn::kPiecewise: return predict_piecewise(r, beta);
    case PredictionFn::kIdentity: return predict_identity(r, beta);
  }
  throw std::logic_error("unreachable prediction fn");
}

// Multiplicative penalty for one round of loss q in [0,1].
inline double update_factor(double q, double beta, UpdateFn fn) {
  require_probability(q, "round loss q");
  require_beta(beta);
  switch (fn) {
    case UpdateFn::kPower: return std::pow(beta, q);
    case UpdateFn::kExpNeg: return std::exp(-beta * q);
    case UpdateFn::kLinear: return 1.0 - (1.0 - beta) * q;
  }
  throw std::logic_error("unreachable update fn");
}

// Worst-case cumulative absolute loss of the algorithm, in terms of the best
// expert's cumulative absolute loss L (known only in hindsight).
inline double loss_bound(std::size_t n_experts, double best_loss, double beta) {
  if (n_experts < 1) throw std::domain_error("loss_bound: need at least one expert");
  if (best_loss < 0.0) throw std::domain_error("loss_bound: negative loss");
  require_beta(beta);
  return (std::log(static_cast<double>(n_experts)) + best_loss * std::log(1.0 / beta)) /
         (2.0 * std::log(2.0 / (1.0 + beta)));
}

// Weighted-majority style aggregator. Weights renormalize to sum 1 after
// every round; predictions depend only on weight ratios, so this is
// semantically neutral and avoids underflow on long seasons.
class ExpertsAggregator final : public Aggregator {
 public:
  ExpertsAggregator(std::size_t n_experts, ExpertsConfig cfg, std::string name)
      : Aggregator(std::move(name)),
        cfg_(cfg),
        w_(n_experts, 1.0 / static_cast<double>(n_experts)) {
    if (n_experts == 0) throw std::invalid_argument("experts: empty roster");
    require_beta(cfg.beta);
  }

  double predict(const PredictionRow& row) override {
    last_row_ = row;
    double r;
    if (cfg_.missing_policy == MissingPolicy::kFillHalf) {
      r = 0.0;
      for (std::size_t i = 0; i < w_.size(); ++i) {
        r += w_[i] * effective(row, static_cast<int>(i));
      }
    } else {
      if (row.empty()) throw NoAdviceError("experts: no expert predicted this game");
      double num = 0.0, den = 0.0;
      for (const auto& e : row.entries()) {
        num += w_[e.expert] * e.prob;
        den += w_[e.expert];
      }
      r = num / den;
    }
    return apply_prediction_fn(cfg_.prediction_fn, std::clamp(r, 0.0, 1.0), cfg_.beta);
  }

  void observe(int y) override {
    require_outcome(y);
    if (cfg_.missing_policy == MissingPolicy::kFillHalf) {
      for (std::size_t i = 0; i < w_.size(); ++i) {
        const double q = std::abs(effective(last_row_, static_cast<int>(i)) - y);
        w_[i] *= update_factor(q, cfg_.beta, cfg_.update_fn);
      }
    } else if (!last_row_.empty()) {
      // Present experts take their own factor; absent experts take the
      // participation-weighted mean factor, which keeps their share of the
      // total weight unchanged.
      double factor_num = 0.0, factor_den = 0.0;
      std::vector<double> factor(w_.size(), -1.0);
      for (const auto& e : last_row_.entries()) {
        const double f = update_factor(std::abs(e.prob - y), cfg_.beta, cfg_.update_fn);
        factor[e.expert] = f;
        factor_num += w_[e.expert] * f;
        factor_den += w_[e.expert];
      }
      const double mean_factor = factor_num / factor_den;
      for (std::size_t i = 0; i < w_.size(); ++i) {
        w_[i] *= factor[i] >= 0.0 ? factor[i] : mean_factor;
      }
    }
    renormalize();
    last_row_ = PredictionRow{};
  }

  const std::vector<double>& weights() const { return w_; }

 private:
  double effective(const PredictionRow& row, int expert) const {
    return row.at(expert).value_or(0.5);
  }

  void renormalize() {
    double sum = 0.0;
    for (double w : w_) sum += w;
    for (double& w : w_) w /= sum;
  }

  ExpertsConfig cfg_;
  std::vector<double> w_;
  PredictionRow last_row_;
};

}  // namespace probpool
