#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "../oracles.hpp"
#include "ects/error.hpp"
#include "ects/rl.hpp"
#include "helpers.hpp"

using namespace ects;

namespace {

DecisionContext plain_context(std::size_t k_count, std::size_t step) {
  DecisionContext c;
  for (std::size_t k = 1; k <= k_count; ++k) c.checkpoints.push_back(k * step);
  c.length = k_count * step;
  return c;
}

}  // namespace

TEST_SUITE("rl") {

TEST_CASE("transitions cover every checkpoint and shaped rewards telescope") {
  const auto eps = testing::random_episodes(12, 5, 2, 3);
  const auto ctx = plain_context(5, 4);
  const double alpha = 0.35;
  const auto costs = CostModel::standard(2, 1, 20, alpha);
  const auto tr = extract_transitions(eps.posteriors, eps.labels, ctx, costs, RewardMode::Shaped,
                                      FeatureSet::parse("time"));
  REQUIRE(tr.size() == 12 * (2 * 5 - 1));
  // per series: trigger_0 wait_0 trigger_1 wait_1 ... trigger_4
  for (std::size_t i = 0; i < 12; ++i) {
    const oracle::Episode e{testing::rows_of(eps.posteriors[i]), eps.labels[i]};
    const std::size_t base = i * 9;
    double waited = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      const auto trig = tr.get(base + 2 * k);
      CHECK(trig.action == Action::Trigger);
      CHECK(trig.terminal);
      CHECK(waited + trig.reward ==
            doctest::Approx(-oracle::loss(e, k, ctx.checkpoints, 20, 1, alpha)).epsilon(1e-12));
      if (k + 1 < 5) {
        const auto w = tr.get(base + 2 * k + 1);
        CHECK(w.action == Action::Wait);
        CHECK_FALSE(w.terminal);
        CHECK(w.next_forced == (k + 2 == 5));
        CHECK(w.next_state[0] == doctest::Approx(ctx.checkpoints[k + 1] / 20.0));
        waited += w.reward;
      }
    }
  }
}

TEST_CASE("delayed rewards pay everything on trigger") {
  const auto eps = testing::random_episodes(3, 4, 2, 4);
  const auto ctx = plain_context(4, 5);
  const auto costs = CostModel::standard(2, 0, 20, 0.8);
  const auto tr = extract_transitions(eps.posteriors, eps.labels, ctx, costs, RewardMode::Delayed);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr.action(i) == Action::Wait) CHECK(tr.reward(i) == 0.0);
  }
  const oracle::Episode e{testing::rows_of(eps.posteriors[0]), eps.labels[0]};
  CHECK(tr.reward(2) == doctest::Approx(-oracle::loss(e, 1, ctx.checkpoints, 20, 0, 0.8)));
  CHECK(tr.scaled(0.5).reward(2) == doctest::Approx(0.5 * tr.reward(2)));
}

TEST_CASE("analytic gradient matches central differences") {
  const auto net = QNetwork::initialized(4, 6, 17);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::vector<double> x{u(rng), u(rng), u(rng), u(rng)};
  const std::array<double, 2> up{0.7, -1.3};
  QNetwork::Cache cache;
  net.forward(x, cache);
  std::vector<double> grad(net.parameter_count(), 0.0);
  net.backward(cache, up, grad);
  auto probe = net;
  const double h = 1e-6;
  for (std::size_t j = 0; j < probe.parameter_count(); ++j) {
    const double keep = probe.parameters()[j];
    probe.parameters()[j] = keep + h;
    const auto hi = probe.forward(x);
    probe.parameters()[j] = keep - h;
    const auto lo = probe.forward(x);
    probe.parameters()[j] = keep;
    const double fd = (up[0] * (hi[0] - lo[0]) + up[1] * (hi[1] - lo[1])) / (2 * h);
    CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("soft update interpolates") {
  auto a = QNetwork::initialized(3, 4, 1);
  const auto b = QNetwork::initialized(3, 4, 2);
  auto c = a;
  c.soft_update_from(b, 1.0);
  CHECK(c == b);
  c = a;
  c.soft_update_from(b, 0.0);
  CHECK(c == a);
  a.soft_update_from(b, 0.25);
  const auto a0 = QNetwork::initialized(3, 4, 1);
  CHECK(a.parameters()[5] ==
        doctest::Approx(0.75 * a0.parameters()[5] + 0.25 * b.parameters()[5]));
}

TEST_CASE("greedy ties trigger") {
  CHECK(alert_decide({-0.5, -0.5}) == Decision::Trigger);
  CHECK(alert_decide({-0.4, -0.5}) == Decision::Wait);
  const QNetwork zero(3, 4);
  const std::vector<double> s{0.1, 0.2, 0.3};
  CHECK(alert_decide(zero, s) == Decision::Trigger);
}

TEST_CASE("network text round-trips exactly") {
  const auto n = QNetwork::initialized(5, 7, 99);
  std::stringstream buf;
  n.save(buf);
  CHECK(QNetwork::load(buf) == n);
  std::istringstream bad("ects-qnet v1\ninput 2 hidden 2 outputs 3\n");
  CHECK_THROWS(QNetwork::load(bad));
}

TEST_CASE("first Adam step moves each parameter by the learning rate") {
  AdamOptimizer opt(3, 0.01);
  std::vector<double> p{1.0, 1.0, 1.0};
  const std::vector<double> g{2.0, -0.5, 0.0};
  opt.step(p, g);
  CHECK(p[0] == doctest::Approx(0.99));
  CHECK(p[1] == doctest::Approx(1.01));
  CHECK(p[2] == doctest::Approx(1.0));
  CHECK(opt.steps() == 1);
}

TEST_CASE("a terminal transition is regressed onto its reward") {
  TransitionSet tr(2);
  tr.add({{0.5, 0.5}, Action::Trigger, -0.3, {}, true, false});
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 1;
  DdqnState st(QNetwork::initialized(2, 8, 3), cfg, 1);
  for (int i = 0; i < 2000; ++i) ddqn_epoch(st, tr, cfg);
  const std::vector<double> s{0.5, 0.5};
  CHECK(st.online.forward(s)[1] == doctest::Approx(-0.3).epsilon(1e-3));
}

TEST_CASE("two-state chain learns the value-iteration policy") {
  // state A: trigger -1, or wait -0.2 into forced state B whose trigger pays -0.5.
  // state C: trigger -0.1, or wait -0.2 into B. Optimal: wait in A, trigger in C.
  TransitionSet tr(2);
  const std::vector<double> a{1, 0}, b{0, 1}, c{0, 0};
  tr.add({a, Action::Trigger, -1.0, {}, true, false});
  tr.add({a, Action::Wait, -0.2, b, false, true});
  tr.add({c, Action::Trigger, -0.1, {}, true, false});
  tr.add({c, Action::Wait, -0.2, b, false, true});
  tr.add({b, Action::Trigger, -0.5, {}, true, false});
  const auto vi = oracle::value_iteration({{0, 1, -1.0, -1}, {0, 0, -0.2, 1}, {2, 1, -0.1, -1},
                                           {2, 0, -0.2, 1}, {1, 1, -0.5, -1}},
                                          3, {false, true, false});
  CHECK(vi[0][0] == doctest::Approx(-0.7));
  TrainConfig cfg;
  cfg.learning_rate = 5e-3;
  cfg.batch_size = 5;
  cfg.tau = 0.1;
  DdqnState st(QNetwork::initialized(2, 16, 5), cfg, 2);
  for (int i = 0; i < 1500; ++i) ddqn_epoch(st, tr, cfg);
  CHECK(alert_decide(st.online, a) == Decision::Wait);
  CHECK(alert_decide(st.online, c) == Decision::Trigger);
  CHECK(st.online.forward(a)[0] == doctest::Approx(vi[0][0]).epsilon(0.02));
}

TEST_CASE("training config is validated") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.tau = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.features = FeatureSet::none();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("training is deterministic and keeps one snapshot per fold at minimum") {
  const auto eps = testing::random_episodes(60, 4, 2, 6);
  const auto ctx = plain_context(4, 5);
  const auto costs = CostModel::standard(2, 0, 20, 0.5);
  std::vector<ValidationFold> folds(2);
  for (std::size_t i = 0; i < 60; ++i) {
    (i % 3 ? folds[0].train : folds[0].valid).push_back(i);
    (i % 3 != 1 ? folds[1].train : folds[1].valid).push_back(i);
  }
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.validate_every = 5;
  cfg.seed = 12;
  const auto r1 = train_alert(eps.posteriors, eps.labels, folds, ctx, costs, cfg);
  const auto r2 = train_alert(eps.posteriors, eps.labels, folds, ctx, costs, cfg);
  CHECK(r1.selected_epoch == 5);
  CHECK(r1.validation.size() == 2);
  CHECK(r1.network == r2.network);
  CHECK_THROWS_AS(train_alert(eps.posteriors, eps.labels, {}, ctx, costs, cfg), TrainingError);
}

TEST_CASE("threshold surface splits at the threshold") {
  const ProbaThreshold p(0.8);
  SurfaceSpec spec;
  spec.time_steps = 5;
  spec.proba_steps = 11;
  const auto s = decision_surface(p, spec, plain_context(4, 5));
  REQUIRE(s.probas.size() == 11);
  for (std::size_t i = 0; i < 11; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(s.at(i, j) == (s.probas[i] >= 0.8 - 1e-12 ? 1 : 0));
  std::ostringstream csv;
  s.write_csv(csv);
  CHECK(csv.str().rfind("max_posterior,time,decision\n", 0) == 0);
}

}
