#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "helpers.hpp"
#include "probpool/aggregator.hpp"
#include "probpool/eval.hpp"

using namespace probpool;
using Catch::Approx;
using testutil::row;

TEST_CASE("simple average") {
  CHECK(average_predict(row({{0, 0.2}, {1, 0.8}})) == Approx(0.5));
  CHECK(average_predict(row({{0, 0.7}})) == Approx(0.7));
  CHECK(average_predict(row({{0, 0.1}, {1, 0.2}, {2, 0.9}})) == Approx(0.4));
  CHECK_THROWS_AS(average_predict(PredictionRow{}), NoAdviceError);
}

TEST_CASE("top-k average picks the ledger's best scorers") {
  ScoreLedger ledger(3);
  ledger.update(row({{0, 1.0}}), 1);  // e0: +100
  ledger.update(row({{1, 0.9}}), 1);  // e1: +64
  ledger.update(row({{2, 0.5}}), 1);  // e2: 0
  REQUIRE(ledger.top_k(2) == std::vector<int>{0, 1});

  CHECK(average_top_k_predict(row({{0, 0.6}, {1, 0.8}, {2, 0.0}}), ledger, 2) == Approx(0.7));

  SECTION("ledger with all-equal scores uses every present expert") {
    ScoreLedger fresh(3);
    const auto r = row({{0, 0.1}, {1, 0.2}, {2, 0.9}});
    CHECK(average_top_k_predict(r, fresh, 30) == average_predict(r));
  }

  SECTION("empty intersection falls back to the plain average") {
    CHECK(average_top_k_predict(row({{2, 0.9}}), ledger, 1) == Approx(0.9));
  }
}

TEST_CASE("top-k fallback through the aggregator over a 3-game fixture") {
  TopKAverageAggregator agg(2, 1, "average-top:1");
  CHECK(agg.predict(row({{0, 1.0}, {1, 0.5}})) == Approx(0.75));  // all ties: plain average
  agg.observe(1);  // e0 now leads with +100
  CHECK(agg.predict(row({{1, 0.9}})) == Approx(0.9));  // leader absent: fallback
  agg.observe(1);
  CHECK(agg.predict(row({{0, 0.3}, {1, 0.9}})) == Approx(0.3));  // leader present: top-1
}

TEST_CASE("ledger tie-break is ascending expert index") {
  ScoreLedger ledger(3);
  ledger.update(row({{0, 0.8}, {2, 0.8}}), 1);  // e0 and e2 tie, e1 behind
  CHECK(ledger.top_k(2) == std::vector<int>{0, 2});
  CHECK(ledger.participation(1) == 0);
}

TEST_CASE("constant baseline") {
  ConstantAggregator home(1.0, "constant:1");
  CHECK(home.predict(row({{0, 0.1}})) == 1.0);
  CHECK(home.predict(PredictionRow{}) == 1.0);
  CHECK_THROWS_AS(ConstantAggregator(1.5, "constant:1.5"), std::domain_error);

  // constant-1 on a season where the home side wins 14 of 25 games
  std::vector<double> preds(25, 1.0);
  std::vector<int> outs(25, 0);
  for (int i = 0; i < 14; ++i) outs[i] = 1;
  CHECK(zero_one_error(preds, outs) == Approx(0.44));
}

TEST_CASE("baseline outputs stay inside the convex hull of present predictions") {
  const auto season = testutil::random_season(6, 40, 17);
  ScoreLedger ledger(6);
  for (std::size_t t = 0; t < season.rows.size(); ++t) {
    const auto& entries = season.rows[t].entries();
    double lo = 1.0, hi = 0.0;
    for (const auto& e : entries) {
      lo = std::min(lo, e.prob);
      hi = std::max(hi, e.prob);
    }
    for (double p : {average_predict(season.rows[t]),
                     average_top_k_predict(season.rows[t], ledger, 3)}) {
      CHECK(p >= lo);
      CHECK(p <= hi);
    }
    ledger.update(season.rows[t], season.outcomes[t]);
  }
}

TEST_CASE("top-k with k >= roster equals plain average on every game") {
  const auto season = testutil::random_season(5, 60, 23);
  TopKAverageAggregator topk(5, 9, "average-top:9");
  AverageAggregator avg;
  for (std::size_t t = 0; t < season.rows.size(); ++t) {
    REQUIRE(topk.predict(season.rows[t]) == avg.predict(season.rows[t]));
    topk.observe(season.outcomes[t]);
    avg.observe(season.outcomes[t]);
  }
}

TEST_CASE("identical datasets produce bit-identical prediction sequences") {
  const auto season = testutil::random_season(4, 50, 31);
  std::vector<double> first, second;
  for (int round = 0; round < 2; ++round) {
    TopKAverageAggregator agg(4, 2, "average-top:2");
    auto& out = round == 0 ? first : second;
    for (std::size_t t = 0; t < season.rows.size(); ++t) {
      out.push_back(agg.predict(season.rows[t]));
      agg.observe(season.outcomes[t]);
    }
  }
  REQUIRE(first == second);
}
