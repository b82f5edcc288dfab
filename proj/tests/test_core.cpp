#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "probpool/core.hpp"

using namespace probpool;
using Catch::Approx;

TEST_CASE("quadratic loss") {
  CHECK(quadratic_loss(1.0, 1) == 0.0);
  CHECK(quadratic_loss(0.5, 0) == Approx(0.25));
  CHECK(quadratic_loss(0.2, 1) == Approx(0.64));
  CHECK_THROWS_AS(quadratic_loss(-0.1, 1), std::domain_error);
  CHECK_THROWS_AS(quadratic_loss(1.1, 0), std::domain_error);
  CHECK_THROWS_AS(quadratic_loss(0.5, 2), std::domain_error);
}

TEST_CASE("absolute loss") {
  CHECK(absolute_loss(1.0, 1) == 0.0);
  CHECK(absolute_loss(0.25, 1) == Approx(0.75));
  CHECK(absolute_loss(0.25, 0) == Approx(0.25));
}

TEST_CASE("log loss, infinite at the wrong extremes") {
  CHECK(log_loss(1.0, 1) == 0.0);
  CHECK(log_loss(0.5, 1) == Approx(std::log(2.0)));
  CHECK(log_loss(0.0, 1) == std::numeric_limits<double>::infinity());
  CHECK(log_loss(1.0, 0) == std::numeric_limits<double>::infinity());
  CHECK(log_loss(0.0, 0) == 0.0);
}

TEST_CASE("contest score") {
  CHECK(prob_score(0.5, 1) == 0.0);
  CHECK(prob_score(1.0, 1) == 100.0);
  CHECK(prob_score(0.0, 1) == -300.0);
}

TEST_CASE("score is an affine transform of quadratic loss, exactly") {
  for (int i = 0; i <= 10000; ++i) {
    const double p = i / 10000.0;
    for (int y : {0, 1}) {
      REQUIRE(prob_score(p, y) == 100.0 - 400.0 * quadratic_loss(p, y));
    }
  }
}

TEST_CASE("losses are minimized at p = y and quadratic/log are strictly convex") {
  for (int y : {0, 1}) {
    const double at_truth_q = quadratic_loss(static_cast<double>(y), y);
    const double at_truth_l = log_loss(static_cast<double>(y), y);
    const double at_truth_a = absolute_loss(static_cast<double>(y), y);
    for (int i = 0; i <= 100; ++i) {
      const double p = i / 100.0;
      CHECK(quadratic_loss(p, y) >= at_truth_q);
      CHECK(log_loss(p, y) >= at_truth_l);
      CHECK(absolute_loss(p, y) >= at_truth_a);
    }
    // midpoint inequality on interior grid pairs
    for (int i = 1; i < 99; i += 3) {
      for (int j = i + 2; j < 100; j += 5) {
        const double a = i / 100.0, b = j / 100.0, m = 0.5 * (a + b);
        CHECK(quadratic_loss(m, y) < 0.5 * (quadratic_loss(a, y) + quadratic_loss(b, y)));
        CHECK(log_loss(m, y) < 0.5 * (log_loss(a, y) + log_loss(b, y)));
      }
    }
  }
}

TEST_CASE("quadratic loss symmetry") {
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    CHECK(quadratic_loss(p, 1) == Approx(quadratic_loss(1.0 - p, 0)).margin(1e-15));
  }
}

TEST_CASE("cumulative score") {
  CHECK(cumulative_score({}, {}) == 0.0);
  const std::vector<double> preds{0.5, 1.0};
  const std::vector<int> outs{1, 1};
  CHECK(cumulative_score(preds, outs) == Approx(100.0));
  const std::vector<double> p1{0.5};
  CHECK_THROWS_AS(cumulative_score(p1, outs), std::invalid_argument);
}

// A conservative strategy that always reports 0.65 for the side it favors,
// and is right 65% of the time, collects about 2250 points per 250 games.
TEST_CASE("conservative 0.65 strategy scores about 2250 per season") {
  std::vector<double> preds(1000, 0.65);
  std::vector<int> outs(1000);
  for (int i = 0; i < 1000; ++i) outs[i] = i < 650 ? 1 : 0;
  const double per_season = cumulative_score(preds, outs) * 250.0 / 1000.0;
  CHECK(per_season == Approx(2250.0).epsilon(0.01));
  const double analytic = 0.65 * 250 * prob_score(0.65, 1) + 0.35 * 250 * prob_score(0.65, 0);
  CHECK(analytic == Approx(2250.0).epsilon(0.01));
}

TEST_CASE("prediction rows store sorted unique experts") {
  PredictionRow row;
  row.set(7, 0.2);
  row.set(3, 0.9);
  row.set(7, 0.4);  // overwrite
  REQUIRE(row.size() == 2);
  CHECK(row.entries()[0].expert == 3);
  CHECK(row.entries()[1].expert == 7);
  CHECK(row.at(7) == 0.4);
  CHECK(!row.has(5));
  CHECK_THROWS_AS(row.set(1, 1.5), std::domain_error);
}
