#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "../oracles.hpp"
#include "ects/rl.hpp"
#include "ects/triggers.hpp"
#include "helpers.hpp"

using namespace ects;

namespace {

struct Toy {
  testing::Episodes eps;
  std::vector<oracle::Episode> plain;
  std::vector<std::size_t> grid;
  std::size_t length;
  DecisionContext ctx;
};

Toy make_toy(std::size_t n, std::size_t k_count, std::uint64_t seed) {
  Toy t;
  t.eps = testing::random_episodes(n, k_count, 2, seed);
  for (std::size_t i = 0; i < n; ++i)
    t.plain.push_back({testing::rows_of(t.eps.posteriors[i]), t.eps.labels[i]});
  t.length = 3 * k_count;
  for (std::size_t k = 1; k <= k_count; ++k) t.grid.push_back(3 * k);
  t.ctx = {t.grid, t.length, nullptr};
  return t;
}

std::vector<double> oracle_margin(const std::vector<double>& row) {
  auto s = row;
  std::sort(s.rbegin(), s.rend());
  return {s[0], s[0] - s[1]};
}

class Always final : public TriggerPolicy {
 public:
  explicit Always(Decision d) : d_(d) {}
  std::string type() const override { return "always"; }
  Decision decide(const TriggerState&, std::span<const double>, std::size_t) const override {
    return d_;
  }
  void save(std::ostream&) const override {}

 private:
  Decision d_;
};

}  // namespace

TEST_SUITE("triggers") {

TEST_CASE("the last checkpoint always triggers") {
  const auto t = make_toy(5, 4, 1);
  const auto out = run_policy(Always(Decision::Wait), t.eps.posteriors, t.eps.labels, t.ctx);
  for (const auto& o : out) {
    CHECK(o.checkpoint == 3);
    CHECK(o.trigger_time == 12);
  }
  const auto first = run_policy(Always(Decision::Trigger), t.eps.posteriors[0], 0, t.ctx);
  CHECK(first.checkpoint == 0);
  CHECK(first.predicted == t.eps.posteriors[0].predicted(0));
}

TEST_CASE("threshold fit is the smallest grid minimiser") {
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    const auto t = make_toy(40, 5, seed);
    const double alpha = 0.2 + 0.2 * seed;
    const auto costs = CostModel::standard(2, 0, t.length, alpha);
    double best = std::numeric_limits<double>::infinity(), best_theta = -1;
    for (int i = 0; i <= 100; ++i) {
      const double theta = i / 100.0;
      const double c = oracle::rollout_cost(t.plain, t.grid, t.length, 0, alpha,
                                            [&](const oracle::Episode& e, std::size_t k) {
                                              return oracle_margin(e.posterior[k])[0] >= theta;
                                            });
      if (c < best - 1e-12) best = c, best_theta = theta;
    }
    CHECK(proba_threshold_fit(t.eps.posteriors, t.eps.labels, t.ctx, costs).threshold() ==
          doctest::Approx(best_theta));
  }
}

TEST_CASE("stopping rule fit matches an exhaustive scan") {
  const auto t = make_toy(25, 4, 7);
  const double alpha = 0.6;
  const auto costs = CostModel::standard(2, 0, t.length, alpha);
  double best = std::numeric_limits<double>::infinity();
  StoppingRuleParams want;
  for (int a = -10; a <= 10; ++a)
    for (int b = -10; b <= 10; ++b)
      for (int c = -10; c <= 10; ++c) {
        const double g1 = a / 10.0, g2 = b / 10.0, g3 = c / 10.0;
        const double cost = oracle::rollout_cost(
            t.plain, t.grid, t.length, 0, alpha, [&](const oracle::Episode& e, std::size_t k) {
              const auto mm = oracle_margin(e.posterior[k]);
              return g1 * mm[0] + g2 * mm[1] + g3 * t.grid[k] / double(t.length) > 0;
            });
        if (cost < best - 1e-12) best = cost, want = {g1, g2, g3};
      }
  const auto got = stopping_rule_fit(t.eps.posteriors, t.eps.labels, t.ctx, costs).params();
  CHECK(got.gamma1 == doctest::Approx(want.gamma1));
  CHECK(got.gamma2 == doctest::Approx(want.gamma2));
  CHECK(got.gamma3 == doctest::Approx(want.gamma3));
}

TEST_CASE("calimera table holds trigger costs and suffix minima") {
  const auto t = make_toy(10, 6, 5);
  const auto costs = CostModel::standard(2, 0, t.length, 0.4);
  const auto tab = calimera_cost_table(t.eps.posteriors, t.eps.labels, t.grid, costs);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t k = 0; k < 6; ++k) {
      const double now = oracle::loss(t.plain[i], k, t.grid, t.length, 0, 0.4);
      CHECK(tab.trigger_cost[i][k] == doctest::Approx(now));
      double m = now;
      for (std::size_t j = k; j < 6; ++j)
        m = std::min(m, oracle::loss(t.plain[i], j, t.grid, t.length, 0, 0.4));
      CHECK(tab.min_future[i][k] == doctest::Approx(m));
    }
}

TEST_CASE("ridge recovers an exact linear relation") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> x, y;
  for (int i = 0; i < 50; ++i) {
    const double a = g(rng), b = g(rng);
    x.insert(x.end(), {a, b});
    y.push_back(2 * a - 3 * b + 0.5);
  }
  const auto r = fit_ridge(x, y, 2, 1e-9);
  CHECK(r.weights[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.weights[1] == doctest::Approx(-3.0).epsilon(1e-6));
  CHECK(r.bias == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("economy transitions are stochastic and forecasts start at the present") {
  auto t = make_toy(60, 4, 12);
  const auto bins = fit_bins(t.eps.posteriors, 3);
  t.ctx.bins = &bins;
  const auto costs = CostModel::standard(2, 0, t.length, 0.5);
  const auto m = economy_fit(t.eps.posteriors, t.eps.labels, t.ctx, costs);
  for (std::size_t k = 0; k + 1 < 4; ++k)
    for (std::size_t i = 0; i < 3; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 3; ++j) s += m.transition(k)[i * 3 + j];
      CHECK(s == doctest::Approx(1.0));
    }
  const auto f = m.forecast_costs(1, 2);
  CHECK(f.size() == 3);
  CHECK(f[0] == doctest::Approx(0.5 * m.expected_misclassification(1)[2] +
                                0.5 * oracle::delay(6, 12)));
}

TEST_CASE("every policy survives save and load") {
  auto t = make_toy(60, 4, 13);
  const auto bins = fit_bins(t.eps.posteriors, 3);
  t.ctx.bins = &bins;
  const auto costs = CostModel::standard(2, 0, t.length, 0.5);
  std::vector<std::unique_ptr<TriggerPolicy>> policies;
  policies.push_back(std::make_unique<ProbaThreshold>(0.73));
  policies.push_back(std::make_unique<StoppingRule>(StoppingRuleParams{-0.3, 0.7, 0.1}));
  policies.push_back(std::make_unique<EconomyModel>(
      economy_fit(t.eps.posteriors, t.eps.labels, t.ctx, costs)));
  policies.push_back(std::make_unique<CalimeraModel>(
      calimera_fit(t.eps.posteriors, t.eps.labels, t.ctx, costs)));
  policies.push_back(std::make_unique<AlertPolicy>(QNetwork::initialized(6, 8, 4), FeatureSet::all()));
  for (const auto& p : policies) {
    std::stringstream buf;
    p->save(buf);
    const auto back = load_policy(buf);
    CHECK(back->type() == p->type());
    const auto a = run_policy(*p, t.eps.posteriors, t.eps.labels, t.ctx);
    const auto b = run_policy(*back, t.eps.posteriors, t.eps.labels, t.ctx);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].checkpoint == b[i].checkpoint);
  }
  std::istringstream junk("ects-policy v1\ntype fortune_teller\n");
  CHECK_THROWS(load_policy(junk));
}

}
