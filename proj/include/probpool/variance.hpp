#pragma once

// The Variance aggregator: each expert is modeled as a Gaussian centered on
// the event's true probability with a per-expert variance. Consensus
// probabilities (inverse-variance weighted means) and per-expert standard
// deviations are re-estimated by alternating maximum-likelihood sweeps after
// every event, warm-started from the previous event's fit. Outcomes are never
// used in the fit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "probpool/aggregator.hpp"
#include "probpool/core.hpp"

namespace probpool {

struct VarianceConfig {
  // Floor for estimated sigmas. Must be large enough that an expert tracking
  // the consensus cannot pin itself there with runaway weight: below ~0.01
  // the one-event fit admits a stable collapsed solution in which a single
  // early expert keeps ~1/floor^2 weight forever.
  double sigma_floor = 0.02;
  // A priori sigma for all experts, and for experts with no participation.
  double sigma_init = 0.25;
  double em_tol = 1e-6;
  int max_sweeps = 50;
};

struct VarianceState {
  std::vector<double> sigma;      // per expert
  std::vector<double> consensus;  // per fitted event
  std::vector<int> participation; // per expert

  VarianceState() = default;
  VarianceState(std::size_t n_experts, const VarianceConfig& cfg)
      : sigma(n_experts, cfg.sigma_init), participation(n_experts, 0) {}
};

// Eq-1 pooling: inverse-variance weighted mean over the present experts.
inline double ml_probability(const PredictionRow& row, std::span<const double> sigma) {
  if (row.empty()) throw NoAdviceError("variance: no expert predicted this game");
  double num = 0.0, den = 0.0;
  for (const auto& e : row.entries()) {
    const double w = 1.0 / (sigma[e.expert] * sigma[e.expert]);
    num += w * e.prob;
    den += w;
  }
  return std::clamp(num / den, 0.0, 1.0);
}

// Eq-2 estimate: RMS deviation of the expert's predictions from the
// consensus, over the events the expert participated in. No participation
// falls back to the a priori sigma.
inline double estimate_sigma(int expert, std::span<const double> consensus,
                             std::span<const PredictionRow> rows, const VarianceConfig& cfg) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (auto p = rows[t].at(expert)) {
      const double d = consensus[t] - *p;
      sum += d * d;
      ++count;
    }
  }
  if (count == 0) return cfg.sigma_init;
  return std::max(std::sqrt(sum / count), cfg.sigma_floor);
}

// One alternation: all consensus values from current sigmas, then all sigmas
// from the new consensus. Returns true if any clamp fired (sigma floored or
// consensus clipped), which exempts the sweep from the monotone-likelihood
// property.
inline bool em_sweep(VarianceState& state, std::span<const PredictionRow> rows,
                     const VarianceConfig& cfg) {
  bool clamped = false;
  state.consensus.resize(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].empty()) {
      state.consensus[t] = 0.5;  // no participants; excluded from every sigma sum
      continue;
    }
    double num = 0.0, den = 0.0;
    for (const auto& e : rows[t].entries()) {
      const double w = 1.0 / (state.sigma[e.expert] * state.sigma[e.expert]);
      num += w * e.prob;
      den += w;
    }
    const double raw = num / den;
    if (raw < 0.0 || raw > 1.0) clamped = true;
    state.consensus[t] = std::clamp(raw, 0.0, 1.0);
  }
  std::vector<double> dev2(state.sigma.size(), 0.0);
  std::vector<int> count(state.sigma.size(), 0);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (const auto& e : rows[t].entries()) {
      const double d = state.consensus[t] - e.prob;
      dev2[e.expert] += d * d;
      count[e.expert] += 1;
    }
  }
  for (std::size_t i = 0; i < state.sigma.size(); ++i) {
    if (count[i] == 0) {
      state.sigma[i] = cfg.sigma_init;
    } else {
      const double raw = std::sqrt(dev2[i] / count[i]);
      if (raw < cfg.sigma_floor) clamped = true;
      state.sigma[i] = std::max(raw, cfg.sigma_floor);
    }
  }
  return clamped;
}

// Sweeps until the largest per-expert |delta sigma| drops below em_tol or
// max_sweeps is hit. Warm start: state.sigma carries over from the caller.
inline int em_refit(VarianceState& state, std::span<const PredictionRow> rows,
                    const VarianceConfig& cfg) {
  std::vector<double> prev;
  int sweeps = 0;
  while (sweeps < cfg.max_sweeps) {
    prev = state.sigma;
    em_sweep(state, rows, cfg);
    ++sweeps;
    double delta = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
      delta = std::max(delta, std::abs(state.sigma[i] - prev[i]));
    }
    if (delta < cfg.em_tol) break;
  }
  return sweeps;
}

// Eq-1 pooling restricted to the k present experts with smallest sigma
// (ties by ascending expert index). Empty intersection falls back to the
// unrestricted pool.
inline double variance_top_k_predict(const PredictionRow& row, std::span<const double> sigma,
                                     int k) {
  if (row.empty()) throw NoAdviceError("variance-top: no expert predicted this game");
  if (k < 1) throw std::invalid_argument("variance-top: k must be >= 1");
  if (static_cast<std::size_t>(k) >= sigma.size()) return ml_probability(row, sigma);
  std::vector<int> idx(sigma.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return sigma[a] < sigma[b]; });
  std::vector<char> in_top(sigma.size(), 0);
  for (int j = 0; j < k; ++j) in_top[idx[j]] = 1;
  double num = 0.0, den = 0.0;
  for (const auto& e : row.entries()) {
    if (!in_top[e.expert]) continue;
    const double w = 1.0 / (sigma[e.expert] * sigma[e.expert]);
    num += w * e.prob;
    den += w;
  }
  if (den == 0.0) return ml_probability(row, sigma);
  return std::clamp(num / den, 0.0, 1.0);
}

// k == 0 means unrestricted pooling.
class VarianceAggregator final : public Aggregator {
 public:
  VarianceAggregator(std::size_t n_experts, std::string name, int top_k = 0,
                     VarianceConfig cfg = {})
      : Aggregator(std::move(name)), cfg_(cfg), state_(n_experts, cfg), top_k_(top_k) {
    if (n_experts == 0) throw std::invalid_argument("variance: empty roster");
    if (top_k < 0) throw std::invalid_argument("variance-top: k must be >= 1");
  }

  double predict(const PredictionRow& row) override {
    last_row_ = row;
    have_row_ = true;
    if (top_k_ > 0) return variance_top_k_predict(row, state_.sigma, top_k_);
    return ml_probability(row, state_.sigma);
  }

  // The outcome is deliberately unused: the fit sees only predictions.
  void observe(int y) override {
    require_outcome(y);
    if (!have_row_) return;
    for (const auto& e : last_row_.entries()) state_.participation[e.expert] += 1;
    history_.push_back(std::move(last_row_));
    last_row_ = PredictionRow{};
    have_row_ = false;
    em_refit(state_, history_, cfg_);
  }

  const VarianceState& state() const { return state_; }
  const VarianceConfig& config() const { return cfg_; }

 private:
  VarianceConfig cfg_;
  VarianceState state_;
  std::vector<PredictionRow> history_;
  PredictionRow last_row_;
  bool have_row_ = false;
  int top_k_;
};

}  // namespace probpool
