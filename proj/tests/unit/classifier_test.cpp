#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ects/bench.hpp"
#include "ects/classifier.hpp"
#include "ects/error.hpp"
#include "ects/log.hpp"
#include "ects/synthetic.hpp"

using namespace ects;

TEST_SUITE("classifier") {

TEST_CASE("summary features of a ramp") {
  const LabeledSeries s{{{1, 2, 3, 4, 0}}, 0};
  const auto f = summary_features(s, 4);
  REQUIRE(f.size() == kFeaturesPerChannel);
  CHECK(f[0] == doctest::Approx(2.5));
  CHECK(f[1] == doctest::Approx(std::sqrt(1.25)));  // population deviation
  CHECK(f[2] == doctest::Approx(1.0));
  CHECK(f[3] == 1.0);
  CHECK(f[4] == 4.0);
  CHECK(f[5] == 4.0);
  CHECK(f[6] == 1.0);  // one pass through the mean
  CHECK_THROWS_AS(summary_features(s, 6), InputError);
}

TEST_CASE("softmax normalises and sharpens with low temperature") {
  const std::vector<double> s{1.0, 2.0, 4.0};
  const auto p = softmax(s);
  double z = std::exp(1.0) + std::exp(2.0) + std::exp(4.0);
  CHECK(p[2] == doctest::Approx(std::exp(4.0) / z));
  const auto cold = softmax(s, 0.1);
  CHECK(cold[2] > 0.99);
  const std::vector<double> huge{1000.0, 0.0};
  CHECK(softmax(huge)[0] == doctest::Approx(1.0));
}

TEST_CASE("temperature recovers the one that generated soft targets") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 2.0);
  const double truth = 2.5;
  std::vector<double> scores, targets;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> s{g(rng), g(rng), g(rng)};
    const auto p = softmax(s, truth);
    scores.insert(scores.end(), s.begin(), s.end());
    targets.insert(targets.end(), p.begin(), p.end());
  }
  CHECK(fit_temperature(scores, targets, 3, 0.05, 20.0, 1e-6) ==
        doctest::Approx(truth).epsilon(1e-4));
}

TEST_CASE("bin cuts are midpoints of straddling order statistics") {
  std::vector<PosteriorSequence> post;
  const std::vector<double> m{0.95, 0.55, 0.9, 0.6, 0.85, 0.65, 0.8, 0.7, 0.75, 0.5};
  for (double v : m) post.push_back(PosteriorSequence::from_rows({{v, 1 - v}}));
  // sorted: .50 .55 .60 .65 .70 .75 .80 .85 .90 .95
  const auto b2 = fit_bins(post, 2);
  CHECK(b2.cuts(0)[0] == doctest::Approx(0.725));
  const auto b4 = fit_bins(post, 4);  // p = 2.5, 5, 7.5
  CHECK(b4.cuts(0)[0] == doctest::Approx(0.60));
  CHECK(b4.cuts(0)[1] == doctest::Approx(0.725));
  CHECK(b4.cuts(0)[2] == doctest::Approx(0.85));
  CHECK(b4.bin_index(0, 0.59) == 0);
  CHECK(b4.bin_index(0, 0.60) == 1);  // a value on a cut goes up
  CHECK(b4.bin_index(0, 0.99) == 3);
  CHECK(b4.scaled_bin(0, 0.99) == doctest::Approx(1.0));
  std::size_t per_bin[4] = {};
  for (double v : m) ++per_bin[b4.bin_index(0, v)];
  CHECK(per_bin[0] + per_bin[1] + per_bin[2] + per_bin[3] == 10);
  CHECK(per_bin[1] == 3);  // .60 .65 .70
}

TEST_CASE("constant posteriors make a degenerate checkpoint") {
  std::vector<PosteriorSequence> post(5, PosteriorSequence::from_rows({{0.5, 0.5}, {0.7, 0.3}}));
  post[0] = PosteriorSequence::from_rows({{0.5, 0.5}, {0.9, 0.1}});
  ScopedWarningCapture w;
  const auto b = fit_bins(post, 3);
  CHECK(b.degenerate(0));
  CHECK_FALSE(b.degenerate(1));
  CHECK(b.bin_index(0, 0.99) == 0);
  CHECK(w.contains("checkpoint 0"));
  CHECK_THROWS_AS(fit_bins(post, 6), FitError);
}

TEST_CASE("bin table save/load") {
  std::vector<PosteriorSequence> post;
  for (int i = 0; i < 20; ++i) post.push_back(PosteriorSequence::from_rows({{0.5 + i / 50.0, 0.5 - i / 50.0}}));
  const auto b = fit_bins(post, 4);
  std::stringstream buf;
  b.save(buf);
  CHECK(BinTable::load(buf) == b);
}

TEST_CASE("state features") {
  const std::vector<double> p{0.2, 0.5, 0.3};
  const auto s = state_features(p, 0, 5, 20, nullptr);
  CHECK(s.predicted == 1);
  CHECK(s.max_posterior == 0.5);
  CHECK(s.margin == doctest::Approx(0.2));
  CHECK(s.time == doctest::Approx(0.25));
  CHECK(s.confidence_bin == 0.0);
}

TEST_CASE("feature sets parse, print and encode") {
  CHECK(FeatureSet::parse("all") == FeatureSet::all());
  const auto f = FeatureSet::parse("time+max_posterior");
  CHECK(f.to_string() == FeatureSet::parse(f.to_string()).to_string());
  CHECK(f.dimension(3) == 2);
  CHECK(FeatureSet::all().dimension(3) == 7);
  CHECK_THROWS(FeatureSet::parse("max_posterior+colour"));
  TriggerState s;
  s.max_posterior = 0.7;
  s.margin = 0.4;
  s.predicted = 1;
  s.n_classes = 2;
  s.confidence_bin = 0.5;
  s.time = 0.1;
  CHECK(encode_state(s, FeatureSet::all()) == std::vector<double>{0.7, 0.4, 0, 1, 0.5, 0.1});
  CHECK(encode_state(s, f) == std::vector<double>{0.7, 0.1});
}

TEST_CASE("chain separates the synthetic classes late and round-trips") {
  SyntheticSpec spec;
  spec.n_series = 120;
  spec.noise = 0.5;
  spec.seed = 21;
  const auto d = make_synthetic(spec);
  const auto chain = fit_chain(d);
  CHECK(chain.n_checkpoints() == 20);
  const auto post = posteriors(chain, d);
  std::size_t early = 0, late = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    early += post[i].predicted(2) == d.series[i].label;
    late += post[i].predicted(19) == d.series[i].label;
    double sum = 0.0;
    for (double v : post[i].row(7)) sum += v;
    CHECK(sum == doctest::Approx(1.0));
  }
  CHECK(late >= 115);
  CHECK(early < late);

  std::stringstream buf;
  chain.save(buf);
  const auto back = PrefixClassifierChain::load(buf);
  for (std::size_t i = 0; i < 5; ++i) CHECK(back.posteriors(d.series[i]) == post[i]);
}

}
