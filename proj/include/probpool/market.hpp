#pragma once

// Simulated information market. Agents correspond to experts, hold wealth,
// and have log utility, so the competitive equilibrium price of the binary
// security is the wealth-weighted average belief and each agent's Kelly
// position stakes fraction b (resp. 1-b) of wealth on the two outcomes.
// Agents learn from the market by averaging their belief with the price; the
// final price is the aggregate prediction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "probpool/aggregator.hpp"
#include "probpool/core.hpp"

namespace probpool {

struct MarketConfig {
  bool single_update = false;  // one belief-averaging step instead of iterating
  double price_tol = 1e-9;
  int max_iters = 100;
};

// Wealth-weighted average belief. The caller guarantees at least one
// participant with positive wealth.
inline double equilibrium_price(std::span<const double> beliefs, std::span<const double> wealths) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    require_probability(beliefs[i], "agent belief");
    num += beliefs[i] * wealths[i];
    den += wealths[i];
  }
  if (!(den > 0.0)) throw NoAdviceError("market: no participant with positive wealth");
  return std::clamp(num / den, 0.0, 1.0);
}

// Kelly settlement. For price strictly inside (0,1), wealth scales by b/price
// (outcome 1) or (1-b)/(1-price) (outcome 0); total wealth is conserved
// whenever price is the wealth-weighted mean of the settled beliefs. A price
// of exactly 0 or 1 means unanimous extreme beliefs: the unanimous side keeps
// its wealth if realized and is wiped out otherwise.
inline void settle(std::span<double> wealths, std::span<const double> beliefs, double price,
                   int y) {
  require_outcome(y);
  require_probability(price, "market price");
  if (price == 0.0 || price == 1.0) {
    const int unanimous_side = price == 1.0 ? 1 : 0;
    if (y != unanimous_side) {
      for (double& w : wealths) w = 0.0;
    }
    return;
  }
  for (std::size_t i = 0; i < wealths.size(); ++i) {
    wealths[i] *= y == 1 ? beliefs[i] / price : (1.0 - beliefs[i]) / (1.0 - price);
  }
}

struct MarketRound {
  double price = 0.5;
  std::vector<double> beliefs;  // posterior beliefs, aligned with the inputs
};

// Price the round and update beliefs toward the price. Iteration note: the
// wealth-weighted mean is invariant under b <- (b + price)/2, so the price
// settles immediately and the stopping rule fires on the second pass; the
// single-update flag skips that confirmation pass.
inline MarketRound clear_market(std::span<const double> priors, std::span<const double> wealths,
                                const MarketConfig& cfg = {}) {
  MarketRound round;
  round.beliefs.assign(priors.begin(), priors.end());
  double prev = -1.0;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    round.price = equilibrium_price(round.beliefs, wealths);
    if (iter > 0 && std::abs(round.price - prev) < cfg.price_tol) break;
    for (double& b : round.beliefs) b = 0.5 * (b + round.price);
    prev = round.price;
    if (cfg.single_update) break;
  }
  return round;
}

// Each present expert with positive wealth trades one round per game with a
// prior equal to its prediction. Absent and eliminated (zero-wealth) agents
// neither trade nor change wealth.
class MarketAggregator final : public Aggregator {
 public:
  MarketAggregator(std::size_t n_experts, std::string name, MarketConfig cfg = {})
      : Aggregator(std::move(name)), cfg_(cfg), wealth_(n_experts, 1.0) {
    if (n_experts == 0) throw std::invalid_argument("market: empty roster");
  }

  double predict(const PredictionRow& row) override {
    participants_.clear();
    std::vector<double> priors, wealths;
    for (const auto& e : row.entries()) {
      if (wealth_[e.expert] > 0.0) {
        participants_.push_back(e.expert);
        priors.push_back(e.prob);
        wealths.push_back(wealth_[e.expert]);
      }
    }
    if (participants_.empty()) {
      throw NoAdviceError("market: no funded participant in this game");
    }
    round_ = clear_market(priors, wealths, cfg_);
    return round_.price;
  }

  void observe(int y) override {
    require_outcome(y);
    if (participants_.empty()) return;
    std::vector<double> wealths(participants_.size());
    for (std::size_t i = 0; i < participants_.size(); ++i) wealths[i] = wealth_[participants_[i]];
    settle(wealths, round_.beliefs, round_.price, y);
    for (std::size_t i = 0; i < participants_.size(); ++i) wealth_[participants_[i]] = wealths[i];
    participants_.clear();
  }

  const std::vector<double>& wealth() const { return wealth_; }

 private:
  MarketConfig cfg_;
  std::vector<double> wealth_;
  std::vector<int> participants_;
  MarketRound round_;
};

}  // namespace probpool
