#include <doctest.h>

#include <algorithm>
#include <set>
#include <functional>
#include <sstream>

#include "ects/error.hpp"
#include "ects/ingest.hpp"
#include "ects/log.hpp"
#include "ects/synthetic.hpp"
#include "helpers.hpp"

using namespace ects;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("tab-separated rows with numeric labels sort numerically") {
  std::istringstream in("10\t1\t2\t3\t4\n2\t5\t6\t7\t8\n10\t0\t0\t1\t1\n");
  ScopedWarningCapture quiet;
  const auto d = parse_tsv_dataset(in);
  REQUIRE(d.size() == 3);
  CHECK(d.length == 4);
  CHECK(d.class_names == std::vector<std::string>{"2", "10"});
  CHECK(d.series[0].label == 1);
  CHECK(d.series[1].label == 0);
  CHECK(d.series[1].channels[0] == std::vector<double>{5, 6, 7, 8});
  CHECK(d.minority_class == 0);
}

TEST_CASE("channels split each row evenly") {
  std::istringstream in("a,1,2,3,4,5,6\nb,6,5,4,3,2,1\n");
  TsvOptions opt;
  opt.delimiter = ',';
  opt.channels = 2;
  ScopedWarningCapture quiet;
  const auto d = parse_tsv_dataset(in, opt);
  CHECK(d.length == 3);
  CHECK(d.series[0].channels[1] == std::vector<double>{4, 5, 6});
}

TEST_CASE("malformed rows name the line") {
  std::istringstream ragged("0\t1\t2\t3\n1\t1\t2\n");
  CHECK(message_of([&] { parse_tsv_dataset(ragged, {}, "f.tsv"); }).find("row 2") !=
        std::string::npos);
  std::istringstream text("0\t1\tx\t3\n");
  const auto m = message_of([&] { parse_tsv_dataset(text, {}, "f.tsv"); });
  CHECK(m.find("'x'") != std::string::npos);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_tsv_dataset(empty), ParseError);
  std::istringstream odd("0\t1\t2\t3\n");
  TsvOptions two;
  two.channels = 2;
  CHECK_THROWS_AS(parse_tsv_dataset(odd, two), ParseError);
}

TEST_CASE("writing and reading a dataset round-trips") {
  SyntheticSpec spec;
  spec.n_series = 30;
  spec.length = 25;
  spec.seed = 3;
  const auto d = make_synthetic(spec);
  std::stringstream buf;
  write_tsv_dataset(d, buf);
  ScopedWarningCapture quiet;
  const auto back = parse_tsv_dataset(buf);
  REQUIRE(back.size() == d.size());
  CHECK(back.class_names == d.class_names);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.series[i].label == d.series[i].label);
    CHECK(back.series[i].channels == d.series[i].channels);
  }
}

TEST_CASE("splits partition the dataset and keep class shares") {
  SyntheticSpec spec;
  spec.n_series = 200;
  spec.minority_fraction = 0.25;
  spec.seed = 9;
  const auto d = make_synthetic(spec);
  SplitSpec s;
  s.seed = 4;
  const auto sp = split_dataset(d, s);

  std::vector<std::size_t> all;
  for (const auto* part : {&sp.classifier_train, &sp.trigger_train, &sp.test})
    all.insert(all.end(), part->begin(), part->end());
  std::sort(all.begin(), all.end());
  REQUIRE(all.size() == d.size());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

  // floor(0.3 * 50) minority and floor(0.3 * 150) majority series held out
  std::size_t minority_test = 0;
  for (auto i : sp.test) minority_test += d.series[i].label == 0;
  CHECK(minority_test == 15);
  CHECK(sp.test.size() == 60);

  REQUIRE(sp.validation_folds.size() == 3);
  const std::set<std::size_t> trig(sp.trigger_train.begin(), sp.trigger_train.end());
  for (const auto& f : sp.validation_folds) {
    std::set<std::size_t> seen;
    for (auto i : f.train) {
      CHECK(trig.count(i) == 1);
      seen.insert(i);
    }
    for (auto i : f.valid) CHECK(seen.insert(i).second);
    CHECK(seen.size() == trig.size());
  }

  const auto again = split_dataset(d, s);
  CHECK(again.test == sp.test);
  s.seed = 5;
  CHECK(split_dataset(d, s).test != sp.test);
}

TEST_CASE("split rejects tiny datasets and bad fractions") {
  SyntheticSpec spec;
  spec.n_series = 5;
  CHECK_THROWS_AS(split_dataset(make_synthetic(spec), {}), InputError);
  spec.n_series = 50;
  SplitSpec s;
  s.train_fraction = 1.0;
  CHECK_THROWS_AS(split_dataset(make_synthetic(spec), s), InputError);
}

TEST_CASE("posterior cache round-trips bit for bit") {
  auto eps = testing::random_episodes(7, 4, 3, 1);
  PosteriorCache c{4, 3, eps.posteriors};
  std::stringstream buf;
  write_posterior_cache(c, buf);
  CHECK(read_posterior_cache(buf) == c);
}

TEST_CASE("posterior cache errors") {
  std::istringstream no_header("0.5 0.5\n");
  CHECK_THROWS_AS(read_posterior_cache(no_header), ParseError);
  std::istringstream bad_sum("#1 1 2\n0.5 0.6\n");
  CHECK_THROWS_AS(read_posterior_cache(bad_sum), DataError);
  std::istringstream short_rows("#2 1 2\n0.5 0.5\n");
  CHECK_THROWS_AS(read_posterior_cache(short_rows), DataError);
  std::istringstream word("#1 1 2\n0.5 half\n");
  CHECK_THROWS_AS(read_posterior_cache(word), ParseError);
}

TEST_CASE("synthetic classes differ only after the onset") {
  SyntheticSpec spec;
  spec.noise = 0.0;
  spec.n_series = 20;
  const auto d = make_synthetic(spec);
  const auto onset = signal_onset(spec);
  CHECK(onset == 45);  // the signal checkpoint covers t = 46..50
  for (const auto& s : d.series) {
    CHECK(s.channels[0][onset - 1] == 0.0);
    CHECK(s.channels[0][onset] == (s.label == 1 ? 1.0 : -1.0));
  }
}

}
