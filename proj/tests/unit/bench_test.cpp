#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "../oracles.hpp"
#include "ects/bench.hpp"
#include "ects/error.hpp"
#include "ects/log.hpp"
#include "ects/synthetic.hpp"

using namespace ects;
namespace fs = std::filesystem;

namespace {

/// Normal approximation written out from the textbook formula.
double normal_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  const double n = static_cast<double>(d.size());
  std::vector<double> r(d.size());
  double tie = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double less = 0, eq = 0;
    for (double x : d) {
      less += std::abs(x) < std::abs(d[i]);
      eq += std::abs(x) == std::abs(d[i]);
    }
    r[i] = less + (eq + 1) / 2;
    tie += eq * eq - 1;  // t members of a group each add t^2 - 1
  }
  double w = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0) w += r[i];
  const double mu = n * (n + 1) / 4;
  const double var = n * (n + 1) * (2 * n + 1) / 24 - tie / 48;
  const double z = std::max(0.0, std::abs(w - mu) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

std::vector<PreparedDataset> small_sets() {
  std::vector<PreparedDataset> out;
  for (std::uint64_t s : {1u, 2u}) {
    SyntheticSpec spec;
    spec.n_series = 80;
    spec.length = 40;
    spec.seed = s;
    SplitSpec split;
    split.seed = s;
    out.push_back(prepare_dataset("d" + std::to_string(s), make_synthetic(spec), split, {}));
  }
  return out;
}

SweepConfig small_sweep() {
  SweepConfig c;
  c.methods = {"proba_threshold", "calimera", "alert"};
  c.alphas = {0.3, 0.8};
  c.train.max_epochs = 5;
  c.seed = 77;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("six positive differences give p = 2/64") {
  const std::vector<double> a{1, 2, 3, 4, 5, 6}, b(6, 0.0);
  const auto r = wilcoxon_signed_rank(a, b);
  CHECK(r.exact);
  CHECK(r.n == 6);
  CHECK(r.w_plus == 21.0);
  CHECK(r.p_value == doctest::Approx(0.03125));
}

TEST_CASE("exact p-values match enumeration, ties included") {
  std::mt19937_64 rng(5);
  for (int s = 0; s < 30; ++s) {
    const std::size_t n = 5 + s % 10;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng() % 6);
      b[i] = static_cast<double>(rng() % 6) + 0.5;
    }
    CHECK(wilcoxon_signed_rank(a, b).p_value ==
          doctest::Approx(oracle::wilcoxon_enumerate(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("large samples use the corrected normal approximation") {
  std::mt19937_64 rng(6);
  std::vector<double> a(40), b(40);
  for (std::size_t i = 0; i < 40; ++i) {
    a[i] = static_cast<double>(rng() % 9);
    b[i] = static_cast<double>(rng() % 9) + 0.7;
  }
  const auto r = wilcoxon_signed_rank(a, b);
  CHECK_FALSE(r.exact);
  CHECK(r.p_value == doctest::Approx(normal_p(a, b)).epsilon(1e-10));
}

TEST_CASE("too few differences warn and give p = 1") {
  const std::vector<double> a{1, 2, 3, 4, 5, 6}, b{1, 2, 0, 0, 0, 6};
  ScopedWarningCapture w;
  CHECK(wilcoxon_signed_rank(a, b).p_value == 1.0);
  CHECK_FALSE(w.messages().empty());
}

TEST_CASE("holm by hand") {
  const std::vector<double> p{0.01, 0.04, 0.03, 0.005};
  // sorted .005 <= .05/4, .01 <= .05/3, .03 > .05/2 stops
  CHECK(holm_correction(p, 0.05) == std::vector<bool>{true, false, false, true});
  const std::vector<double> q{0.5, 0.001};
  CHECK(holm_correction(q, 0.05) == std::vector<bool>{false, true});
  CHECK(holm_correction(std::vector<double>{}, 0.05).empty());
}

TEST_CASE("win rate counts ties as halves") {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 2, 1, 5};
  CHECK(win_rate(a, b) == doctest::Approx(2.5 / 4));
}

TEST_CASE("average ranks share ties") {
  const std::vector<double> c{3, 1, 3, 0.5};
  CHECK(average_ranks(c) == std::vector<double>{3.5, 2, 3.5, 1});
}

TEST_CASE("mean ranks and their bootstrap interval") {
  const std::vector<std::vector<double>> costs{{1, 2, 3}, {2, 1, 3}, {1, 3, 2}, {1, 2, 3}};
  const auto r = mean_ranks(costs, 4, 500, 0.9);
  CHECK(r.mean[0] == doctest::Approx(5.0 / 4));
  CHECK(r.mean[1] == doctest::Approx(8.0 / 4));
  CHECK(r.mean[2] == doctest::Approx(11.0 / 4));
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(r.lower[m] <= r.mean[m]);
    CHECK(r.upper[m] >= r.mean[m]);
  }
  CHECK(mean_ranks(costs, 4, 500, 0.9).lower == r.lower);
}

TEST_CASE("pareto front by hand and against brute force") {
  const std::vector<std::pair<double, double>> p{{1, 2}, {2, 1}, {2, 2}};
  CHECK(pareto_front(p) == std::vector<std::size_t>{0, 1});
  const std::vector<std::pair<double, double>> dup{{1, 1}, {1, 1}, {0, 3}};
  CHECK(pareto_front(dup) == std::vector<std::size_t>{2, 0, 1});
  std::mt19937_64 rng(10);
  for (int s = 0; s < 10; ++s) {
    std::vector<std::pair<double, double>> cloud;
    for (int i = 0; i < 60; ++i)
      cloud.emplace_back(static_cast<double>(rng() % 12), static_cast<double>(rng() % 12));
    auto got = pareto_front(cloud);
    std::sort(got.begin(), got.end());
    CHECK(got == oracle::pareto_brute(cloud));
  }
}

TEST_CASE("method names") {
  CHECK(is_known_method("alert_margin"));
  CHECK_FALSE(is_known_method("alert_colour"));
  CHECK(alert_method_features("alert_time")->to_string() == "time");
  CHECK_FALSE(alert_method_features("economy").has_value());
  CHECK(single_feature_alert_methods().size() == 5);
}

TEST_CASE("sweep is worker-independent and reports round-trip") {
  const auto sets = small_sets();
  auto cfg = small_sweep();
  const auto one = alpha_sweep(sets, cfg);
  cfg.workers = 3;
  const auto three = alpha_sweep(sets, cfg);
  REQUIRE(one.size() == 2 * 2 * 3);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].ok);
    CHECK(one[i].method == three[i].method);
    CHECK(one[i].report.avg_cost == three[i].report.avg_cost);
    CHECK(one[i].report.avg_cost >= one[i].oracle_avg_cost - 1e-12);
  }
  CHECK(one[0].dataset == "d1");
  CHECK(one[0].alpha == 0.3);
  CHECK(one[0].method == "proba_threshold");

  ScopedWarningCapture quiet;  // two datasets are too few for the signed-rank test
  const auto report = summarize(one, 77, 200);
  CHECK(report.tests.size() == 2 * 3);
  REQUIRE(quiet.messages().size() == 1);
  CHECK(quiet.contains("6 of 6"));
  const auto dir = fs::temp_directory_path() / "ects_bench_unit";
  fs::remove_all(dir);
  emit_report(report, dir, 77, {{"seed", "77"}});
  for (const auto& f : report_files()) CHECK(fs::exists(dir / f));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["seed"] == 77);
  CHECK(manifest["schema"] == "ects-report");
  std::istringstream runs(slurp(dir / "runs.csv"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(runs, line)) ++rows;
  CHECK(rows == one.size() + 1);
  const auto first = slurp(dir / "summary.csv");
  emit_report(summarize(three, 77, 200), dir, 77, {{"seed", "77"}});
  CHECK(slurp(dir / "summary.csv") == first);
  fs::remove_all(dir);
}

TEST_CASE("mismatched datasets are rejected for pairwise win rates") {
  BenchmarkRun a, b;
  a.ok = b.ok = true;
  a.method = "x";
  b.method = "y";
  a.dataset = "one";
  b.dataset = "two";
  a.alpha = b.alpha = 0.5;
  const std::vector<BenchmarkRun> runs{a, b};
  CHECK_THROWS_AS(pairwise_win_rate(runs, "x", "y", 0.5), InputError);
}

}
