#include <doctest.h>

#include <cmath>
#include <set>

#include "../oracles.hpp"
#include "ects/core.hpp"
#include "ects/error.hpp"
#include "helpers.hpp"

using namespace ects;

TEST_SUITE("core") {

TEST_CASE("checkpoints are the distinct ceil(kT/steps)") {
  for (std::size_t length : {2u, 7u, 20u, 33u, 100u}) {
    std::set<std::size_t> want;
    for (std::size_t k = 1; k <= 20; ++k) want.insert((k * length + 19) / 20);
    const auto got = default_checkpoints(length, 20);
    CHECK(std::vector<std::size_t>(want.begin(), want.end()) == got);
    CHECK(got.back() == length);
  }
  CHECK(default_checkpoints(100, 20).front() == 5);
}

TEST_CASE("delay cost runs from 1 to the scale") {
  CHECK(delay_cost(1, 50) == doctest::Approx(std::exp(std::log(100.0) / 50)));
  CHECK(delay_cost(50, 50) == doctest::Approx(100.0));
  for (std::size_t t = 1; t <= 37; ++t)
    CHECK(delay_cost(t, 37) == doctest::Approx(oracle::delay(t, 37)).epsilon(1e-14));
  CHECK(delay_cost(10, 10, 10.0) == doctest::Approx(10.0));
  CHECK_THROWS_AS(delay_cost(0, 10), InputError);
}

TEST_CASE("misclassification cost penalises missing the minority") {
  CHECK(misclassification_cost(1, 1, 0, 2) == 0.0);
  CHECK(misclassification_cost(1, 0, 0, 2) == 100.0);
  CHECK(misclassification_cost(0, 1, 0, 2) == 1.0);
  CHECK(misclassification_cost(2, 1, 1, 3, 7.0) == 7.0);
}

TEST_CASE("standard cost model matches the loss definition") {
  const std::size_t T = 40;
  for (double alpha : {0.0, 0.3, 1.0}) {
    const auto c = CostModel::standard(3, 2, T, alpha);
    for (std::size_t t = 1; t <= T; ++t)
      for (ClassIndex p = 0; p < 3; ++p)
        for (ClassIndex y = 0; y < 3; ++y) {
          const double want = alpha * oracle::misclassification(p, y, 2) +
                              (1 - alpha) * oracle::delay(t, T);
          CHECK(c.loss(p, y, t) == doctest::Approx(want).epsilon(1e-13));
        }
  }
}

TEST_CASE("with_alpha and scaled keep the components consistent") {
  const auto c = CostModel::standard(2, 0, 10, 0.2);
  const auto d = c.with_alpha(0.9);
  CHECK(d.alpha() == 0.9);
  CHECK(d.delay(4) == c.delay(4));
  const auto s = c.scaled(3.0);
  CHECK(s.loss(1, 0, 5) == doctest::Approx(3.0 * c.loss(1, 0, 5)));
}

TEST_CASE("cost model rejects bad shapes") {
  CHECK_THROWS_AS(CostModel({{0, 1}, {1}}, {1, 2}, 0.5), InputError);
  CHECK_THROWS_AS(CostModel({{0, 1}, {1, 0}}, {1, 2}, 1.5), InputError);
}

TEST_CASE("minority class ties go to the lowest index") {
  const std::vector<ClassIndex> a{0, 1, 1, 2, 2};
  CHECK(minority_class(a, 3) == 0);
  const std::vector<ClassIndex> b{0, 0, 1, 1};
  CHECK(minority_class(b, 2) == 0);
  const std::vector<ClassIndex> c{0, 0, 1};
  CHECK(minority_class(c, 3) == 1);  // absent classes are not candidates
}

TEST_CASE("argmax prefers the first maximum") {
  const std::vector<double> v{0.2, 0.4, 0.4};
  CHECK(argmax(v) == 1);
}

TEST_CASE("hindsight optimum is the earliest per-series minimum") {
  const auto eps = testing::random_episodes(200, 6, 3, 11);
  const std::vector<std::size_t> grid{2, 4, 6, 8, 10, 12};
  for (double alpha : {0.1, 0.5, 0.95}) {
    const auto costs = CostModel::standard(3, 1, 12, alpha);
    const auto out = oracle_outcomes(eps.posteriors, eps.labels, grid, costs);
    double mean = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const oracle::Episode e{testing::rows_of(eps.posteriors[i]), eps.labels[i]};
      std::size_t best = 0;
      for (std::size_t k = 1; k < grid.size(); ++k)
        if (oracle::loss(e, k, grid, 12, 1, alpha) < oracle::loss(e, best, grid, 12, 1, alpha))
          best = k;
      CHECK(out[i].checkpoint == best);
      mean += oracle::loss(e, best, grid, 12, 1, alpha);
    }
    CHECK(oracle_avg_cost(eps.posteriors, eps.labels, grid, costs) ==
          doctest::Approx(mean / out.size()).epsilon(1e-12));
  }
}

TEST_CASE("average cost by hand") {
  // rows are the prediction: predicting 1 for a 0 costs 10, predicting 0 for a 1 costs 1
  const CostModel c({{0, 1}, {10, 0}}, {1, 2, 4}, 0.5);
  const std::vector<EpisodeOutcome> o{{0, 0, 1, 0}, {0, 1, 3, 2}, {1, 0, 2, 1}};
  const auto r = average_cost(o, c);
  // weighted: (0 + 0.5) + (0.5 + 2) + (5 + 1), over three
  CHECK(r.avg_cost == doctest::Approx(9.0 / 3));
  CHECK(r.avg_delay_cost == doctest::Approx(7.0 / 3));
  CHECK(r.avg_misclassification_cost == doctest::Approx(11.0 / 3));
  CHECK(r.unweighted_avg_cost == doctest::Approx(18.0 / 3));
  CHECK(r.mean_trigger_time == doctest::Approx(2.0));
  CHECK(r.accuracy == doctest::Approx(1.0 / 3));
  CHECK(r.count == 3);
}

TEST_CASE("posterior rows") {
  const auto p = PosteriorSequence::from_rows({{0.2, 0.8}, {0.6, 0.4}});
  CHECK(p.n_checkpoints() == 2);
  CHECK(p.predicted(0) == 1);
  CHECK(p.max_posterior(1) == doctest::Approx(0.6));
}

TEST_CASE("dataset invariants") {
  LabeledSeries a{{{1, 2, 3}}, 0}, b{{{1, 2}}, 1};
  CHECK_THROWS_AS(SeriesDataset::build({a, b}, {"x", "y"}), InputError);
  LabeledSeries c{{{1, 2, 3}}, 2};
  CHECK_THROWS_AS(SeriesDataset::build({a, c}, {"x", "y"}), InputError);
  CHECK_THROWS_AS(SeriesDataset::build({a}, {"x"}, {1, 2}), InputError);
  const auto d = SeriesDataset::build({a, a, LabeledSeries{{{0, 0, 0}}, 1}}, {"x", "y"});
  CHECK(d.minority_class == 1);
  CHECK(d.checkpoints.back() == 3);
}

TEST_CASE("derived seeds are stable and stream-specific") {
  CHECK(derive_seed(5, {1, 2}) == derive_seed(5, {1, 2}));
  CHECK(derive_seed(5, {1, 2}) != derive_seed(5, {2, 1}));
  CHECK(derive_seed(5, {1}) != derive_seed(6, {1}));
}

}
