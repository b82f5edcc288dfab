#pragma once

// Aggregator specifiers: `name` or `name:param:...` (colon syntax, no
// spaces). The string used on the command line is the name that appears in
// every report file.

#include <charconv>
#include <memory>
#include <string>
#include <vector>

#include "probpool/aggregator.hpp"
#include "probpool/core.hpp"
#include "probpool/expgrad.hpp"
#include "probpool/experts.hpp"
#include "probpool/io.hpp"
#include "probpool/market.hpp"
#include "probpool/variance.hpp"

namespace probpool {

// The benchmark row set: average, top-30 average, variance, top-20 variance,
// the plain experts algorithm (missing treated as 0.5), its missing-data
// variant, exponentiated gradient, and the market simulation.
inline constexpr const char* kDefaultAlgos =
    "average,average-top:30,variance,variance-top:20,"
    "experts:0.75:vovk:expneg:fill,experts,expgrad,market";

inline std::string aggregator_usage() {
  return "valid aggregators:\n"
         "  average\n"
         "  average-top:<k>\n"
         "  constant:<c>\n"
         "  variance\n"
         "  variance-top:<k>\n"
         "  experts  (= experts:0.75:vovk:expneg:relative)\n"
         "  experts:<beta>:<vovk|piecewise|identity>:<power|expneg|linear>:<fill|relative>\n"
         "  expgrad  (= expgrad:3:0.1)\n"
         "  expgrad:<passes>:<learning-rate>\n"
         "  market | market:single-update";
}

namespace detail {

inline int spec_int(const std::string& s, const std::string& spec) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError("bad integer '" + s + "' in aggregator '" + spec + "'");
  }
  return v;
}

inline double spec_double(const std::string& s, const std::string& spec) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError("bad number '" + s + "' in aggregator '" + spec + "'");
  }
  return v;
}

}  // namespace detail

inline std::unique_ptr<Aggregator> make_aggregator(const std::string& spec,
                                                   std::size_t n_experts) {
  const std::vector<std::string> parts = io::split(spec, ':');
  const std::string& kind = parts.front();
  const std::size_t n_params = parts.size() - 1;
  const auto want = [&](std::size_t lo, std::size_t hi) {
    if (n_params < lo || n_params > hi) {
      throw UsageError("aggregator '" + spec + "' has the wrong number of parameters\n" +
                       aggregator_usage());
    }
  };

  if (kind == "average") {
    want(0, 0);
    return std::make_unique<AverageAggregator>(spec);
  }
  if (kind == "average-top") {
    want(1, 1);
    const int k = detail::spec_int(parts[1], spec);
    if (k < 1) throw UsageError("aggregator '" + spec + "': k must be >= 1");
    return std::make_unique<TopKAverageAggregator>(n_experts, k, spec);
  }
  if (kind == "constant") {
    want(1, 1);
    const double c = detail::spec_double(parts[1], spec);
    if (!(c >= 0.0 && c <= 1.0)) {
      throw UsageError("aggregator '" + spec + "': constant must lie in [0,1]");
    }
    return std::make_unique<ConstantAggregator>(c, spec);
  }
  if (kind == "variance") {
    want(0, 0);
    return std::make_unique<VarianceAggregator>(n_experts, spec);
  }
  if (kind == "variance-top") {
    want(1, 1);
    const int k = detail::spec_int(parts[1], spec);
    if (k < 1) throw UsageError("aggregator '" + spec + "': k must be >= 1");
    return std::make_unique<VarianceAggregator>(n_experts, spec, k);
  }
  if (kind == "experts") {
    want(0, 4);
    if (n_params != 0 && n_params != 4) {
      throw UsageError("aggregator '" + spec + "' needs 0 or 4 parameters\n" + aggregator_usage());
    }
    ExpertsConfig cfg;
    if (n_params == 4) {
      cfg.beta = detail::spec_double(parts[1], spec);
      if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) {
        throw UsageError("aggregator '" + spec + "': beta must lie in (0,1)");
      }
      if (parts[2] == "vovk") {
        cfg.prediction_fn = PredictionFn::kVovk;
      } else if (parts[2] == "piecewise") {
        cfg.prediction_fn = PredictionFn::kPiecewise;
      } else if (parts[2] == "identity") {
        cfg.prediction_fn = PredictionFn::kIdentity;
      } else {
        throw UsageError("aggregator '" + spec + "': unknown prediction function '" + parts[2] +
                         "'\n" + aggregator_usage());
      }
      if (parts[3] == "power") {
        cfg.update_fn = UpdateFn::kPower;
      } else if (parts[3] == "expneg") {
        cfg.update_fn = UpdateFn::kExpNeg;
      } else if (parts[3] == "linear") {
        cfg.update_fn = UpdateFn::kLinear;
      } else {
        throw UsageError("aggregator '" + spec + "': unknown update function '" + parts[3] +
                         "'\n" + aggregator_usage());
      }
      if (parts[4] == "fill") {
        cfg.missing_policy = MissingPolicy::kFillHalf;
      } else if (parts[4] == "relative") {
        cfg.missing_policy = MissingPolicy::kRelativeWeight;
      } else {
        throw UsageError("aggregator '" + spec + "': unknown missing policy '" + parts[4] +
                         "'\n" + aggregator_usage());
      }
    }
    return std::make_unique<ExpertsAggregator>(n_experts, cfg, spec);
  }
  if (kind == "expgrad") {
    want(0, 2);
    if (n_params == 1) {
      throw UsageError("aggregator '" + spec + "' needs 0 or 2 parameters\n" + aggregator_usage());
    }
    ExpGradConfig cfg;
    if (n_params == 2) {
      cfg.passes = detail::spec_int(parts[1], spec);
      cfg.learning_rate = detail::spec_double(parts[2], spec);
      if (cfg.passes < 1) throw UsageError("aggregator '" + spec + "': passes must be >= 1");
      if (!(cfg.learning_rate > 0.0)) {
        throw UsageError("aggregator '" + spec + "': learning rate must be > 0");
      }
    }
    return std::make_unique<ExpGradAggregator>(n_experts, cfg, spec);
  }
  if (kind == "market") {
    want(0, 1);
    MarketConfig cfg;
    if (n_params == 1) {
      if (parts[1] != "single-update") {
        throw UsageError("aggregator '" + spec + "': unknown market mode '" + parts[1] + "'\n" +
                         aggregator_usage());
      }
      cfg.single_update = true;
    }
    return std::make_unique<MarketAggregator>(n_experts, spec, cfg);
  }
  throw UsageError("unknown aggregator '" + spec + "'\n" + aggregator_usage());
}

}  // namespace probpool
