#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "probpool/aggregator.hpp"
#include "probpool/expgrad.hpp"

using namespace probpool;
using Catch::Approx;
using testutil::row;

TEST_CASE("eg update examples") {
  SECTION("delta of zero leaves weights untouched") {
    std::vector<double> w{0.5, 0.5};
    const std::vector<double> x{1.0, 1.0};
    eg_update(w, x, 1, 0.1);
    CHECK(w[0] == 0.5);
    CHECK(w[1] == 0.5);
  }
  SECTION("two experts pulling apart") {
    std::vector<double> w{0.5, 0.5};
    const std::vector<double> x{0.0, 1.0};
    eg_update(w, x, 1, 0.1);
    const double w1 = std::exp(0.1) / (1.0 + std::exp(0.1));
    CHECK(w[1] == Approx(w1).margin(1e-12));
    CHECK(w[1] == Approx(0.524979187478940).margin(1e-12));
    CHECK(w[0] == Approx(1.0 - w1).margin(1e-12));
    CHECK(w[0] + w[1] == Approx(1.0).margin(1e-15));
  }
  SECTION("identical features cancel after renormalization") {
    std::vector<double> w{0.3, 0.7};
    const std::vector<double> x{0.4, 0.4};
    eg_update(w, x, 0, 0.1);
    CHECK(w[0] == Approx(0.3).margin(1e-15));
    CHECK(w[1] == Approx(0.7).margin(1e-15));
  }
}

TEST_CASE("eg predict") {
  const std::vector<double> uniform{0.25, 0.25, 0.25, 0.25};
  const std::vector<double> x{0.1, 0.2, 0.3, 0.8};
  CHECK(eg_predict(uniform, x) == Approx(0.35));

  const std::vector<double> concentrated{0.0, 1.0, 0.0, 0.0};
  CHECK(eg_predict(concentrated, x) == Approx(0.2));

  const std::vector<double> w{0.75, 0.25};
  const auto eff = effective_predictions(row({{0, 0.8}}), 2);
  CHECK(eff[1] == 0.5);  // missing expert treated as 0.5
  CHECK(eg_predict(w, eff) == Approx(0.725));
}

TEST_CASE("training on an empty history returns uniform weights") {
  const std::vector<TrainingGame> none;
  const auto w = eg_train(none, 4, ExpGradConfig{});
  for (double wi : w) CHECK(wi == 0.25);
}

namespace {

double training_loss(const std::vector<double>& w, const std::vector<TrainingGame>& hist) {
  double total = 0.0;
  for (const auto& g : hist) {
    double p = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) p += w[i] * g.x[i];
    total += (p - g.y) * (p - g.y);
  }
  return total;
}

}  // namespace

TEST_CASE("a perfectly correct expert gains weight every pass") {
  std::vector<TrainingGame> hist;
  probpool::rng::Stream s(2024);
  for (int t = 0; t < 10; ++t) {
    const int y = s.next_bernoulli(0.5) ? 1 : 0;
    std::vector<double> x{static_cast<double>(y), 0.5, 0.5};
    hist.push_back(TrainingGame{x, y});
  }
  double prev = 1.0 / 3.0;
  for (int passes = 1; passes <= 3; ++passes) {
    const auto w = eg_train(hist, 3, ExpGradConfig{passes, 0.1});
    CHECK(w[0] > prev);
    prev = w[0];
  }
}

TEST_CASE("more passes never hurt on the training set") {
  const auto season = testutil::random_season(5, 30, 606);
  std::vector<TrainingGame> hist;
  for (std::size_t t = 0; t < season.rows.size(); ++t) {
    hist.push_back(TrainingGame{effective_predictions(season.rows[t], 5), season.outcomes[t]});
  }
  const auto w1 = eg_train(hist, 5, ExpGradConfig{1, 0.1});
  const auto w3 = eg_train(hist, 5, ExpGradConfig{3, 0.1});
  CHECK(training_loss(w3, hist) <= training_loss(w1, hist) + 1e-12);
}

TEST_CASE("update is invariant to pre-update weight rescaling") {
  probpool::rng::Stream s(17);
  std::vector<double> w{0.2, 0.3, 0.5};
  std::vector<double> scaled{0.4, 0.6, 1.0};  // same ratios, unnormalized
  for (int round = 0; round < 10; ++round) {
    std::vector<double> x{s.next_unit(), s.next_unit(), s.next_unit()};
    // normalize the scaled copy first: eg_update expects a distribution
    double sum = 0.0;
    for (double v : scaled) sum += v;
    for (double& v : scaled) v /= sum;
    const int y = s.next_bernoulli(0.5) ? 1 : 0;
    eg_update(w, x, y, 0.1);
    eg_update(scaled, x, y, 0.1);
    for (int i = 0; i < 3; ++i) CHECK(w[i] == Approx(scaled[i]).epsilon(1e-12));
  }
}

TEST_CASE("weights stay strictly positive and normalized") {
  const auto season = testutil::random_season(4, 50, 808);
  std::vector<double> w(4, 0.25);
  for (std::size_t t = 0; t < season.rows.size(); ++t) {
    eg_update(w, effective_predictions(season.rows[t], 4), season.outcomes[t], 0.1);
    double sum = 0.0;
    for (double wi : w) {
      REQUIRE(wi > 0.0);
      sum += wi;
    }
    REQUIRE(sum == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("online protocol: no lookahead") {
  const auto season = testutil::random_season(4, 20, 909);

  SECTION("a sentinel future game does not change earlier predictions") {
    std::vector<double> with_sentinel, without;
    for (int variant = 0; variant < 2; ++variant) {
      ExpGradAggregator agg(4, ExpGradConfig{}, "expgrad");
      auto& preds = variant == 0 ? without : with_sentinel;
      for (std::size_t t = 0; t < season.rows.size(); ++t) {
        preds.push_back(agg.predict(season.rows[t]));
        agg.observe(season.outcomes[t]);
      }
      if (variant == 1) {
        agg.predict(row({{0, 0.123}, {1, 0.456}}));
        agg.observe(1);
      }
    }
    REQUIRE(with_sentinel == without);
  }

  SECTION("flipping the final outcome changes no prediction") {
    std::vector<double> preds_a, preds_b;
    for (int variant = 0; variant < 2; ++variant) {
      ExpGradAggregator agg(4, ExpGradConfig{}, "expgrad");
      auto& preds = variant == 0 ? preds_a : preds_b;
      for (std::size_t t = 0; t < season.rows.size(); ++t) {
        preds.push_back(agg.predict(season.rows[t]));
        const bool last = t + 1 == season.rows.size();
        agg.observe(last && variant == 1 ? 1 - season.outcomes[t] : season.outcomes[t]);
      }
    }
    REQUIRE(preds_a == preds_b);
  }
}

TEST_CASE("whole pipeline is deterministic") {
  const auto season = testutil::random_season(5, 25, 111);
  std::vector<double> a, b;
  for (int round = 0; round < 2; ++round) {
    ExpGradAggregator agg(5, ExpGradConfig{}, "expgrad");
    auto& preds = round == 0 ? a : b;
    for (std::size_t t = 0; t < season.rows.size(); ++t) {
      preds.push_back(agg.predict(season.rows[t]));
      agg.observe(season.outcomes[t]);
    }
  }
  REQUIRE(a == b);
}
