#include "ects/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include <json.hpp>

#include "ects/error.hpp"
#include "ects/log.hpp"
#include "text_util.hpp"

namespace ects {

namespace {

constexpr const char* kLibraryVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// Methods

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> names{
      "proba_threshold",  "stopping_rule", "economy",          "calimera",
      "alert",            "alert_sr",      "alert_eco",        "alert_max_posterior",
      "alert_margin",     "alert_pred_class", "alert_confidence", "alert_time"};
  return names;
}

bool is_known_method(const std::string& name) {
  const auto& m = known_methods();
  return std::find(m.begin(), m.end(), name) != m.end();
}

std::optional<FeatureSet> alert_method_features(const std::string& name) {
  if (name == "alert") return FeatureSet::all();
  if (name == "alert_sr") return FeatureSet::parse("max_posterior+margin+time");
  if (name == "alert_eco") return FeatureSet::parse("confidence+time");
  const std::string prefix = "alert_";
  if (name.rfind(prefix, 0) == 0 && is_known_method(name))
    return FeatureSet::parse(name.substr(prefix.size()));
  return std::nullopt;
}

std::vector<std::string> single_feature_alert_methods() {
  return {"alert_max_posterior", "alert_margin", "alert_pred_class", "alert_confidence",
          "alert_time"};
}

std::vector<PosteriorSequence> PreparedDataset::posteriors_of(
    std::span<const std::size_t> idx) const {
  std::vector<PosteriorSequence> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(posteriors.at(i));
  return out;
}

std::vector<ClassIndex> PreparedDataset::labels_of(std::span<const std::size_t> idx) const {
  std::vector<ClassIndex> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(labels.at(i));
  return out;
}

namespace {

PreparedDataset prepare_common(std::string id, const SeriesDataset& dataset,
                               const SplitSpec& split) {
  PreparedDataset p;
  p.id = std::move(id);
  p.length = dataset.length;
  p.n_classes = dataset.n_classes();
  p.minority = dataset.minority_class;
  p.checkpoints = dataset.checkpoints;
  p.labels = dataset.labels();
  p.splits = split_dataset(dataset, split);
  return p;
}

void finish_bins(PreparedDataset& p, std::size_t n_bins) {
  const auto train = p.posteriors_of(p.splits.trigger_train);
  p.bins = fit_bins(train, n_bins);
}

}  // namespace

PreparedDataset prepare_dataset(std::string id, const SeriesDataset& dataset,
                                const SplitSpec& split, const ChainOptions& chain_options,
                                std::size_t n_bins) {
  auto p = prepare_common(std::move(id), dataset, split);
  const auto chain = fit_chain(subset(dataset, p.splits.classifier_train), chain_options);
  p.posteriors = posteriors(chain, dataset);
  finish_bins(p, n_bins);
  return p;
}

PreparedDataset prepare_dataset(std::string id, const SeriesDataset& dataset,
                                const PosteriorCache& cache, const SplitSpec& split,
                                std::size_t n_bins) {
  if (cache.series.size() != dataset.size())
    throw DataError("posterior cache holds " + std::to_string(cache.series.size()) +
                    " series, dataset has " + std::to_string(dataset.size()));
  if (cache.n_checkpoints != dataset.checkpoints.size())
    throw DataError("posterior cache has " + std::to_string(cache.n_checkpoints) +
                    " checkpoints, dataset grid has " +
                    std::to_string(dataset.checkpoints.size()));
  if (cache.n_classes != dataset.n_classes())
    throw DataError("posterior cache has " + std::to_string(cache.n_classes) +
                    " classes, dataset has " + std::to_string(dataset.n_classes()));
  auto p = prepare_common(std::move(id), dataset, split);
  p.posteriors = cache.series;
  finish_bins(p, n_bins);
  return p;
}

CostModel dataset_costs(const PreparedDataset& data, double alpha, const CostSettings& s) {
  return CostModel::standard(data.n_classes, data.minority, data.length, alpha, s.delay_scale,
                             s.minority_factor);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::unique_ptr<TriggerPolicy> fit_method(const std::string& method, const PreparedDataset& data,
                                          const CostModel& costs, const SweepConfig& config,
                                          std::uint64_t seed) {
  const auto ctx = data.context();
  const auto& idx = data.splits.trigger_train;
  if (auto features = alert_method_features(method)) {
    TrainConfig train = config.train;
    train.features = method == "alert" ? config.train.features : *features;
    train.seed = seed;
    auto result =
        train_alert(data.posteriors, data.labels, data.splits.validation_folds, ctx, costs, train);
    return std::make_unique<AlertPolicy>(result.policy());
  }
  const auto p = data.posteriors_of(idx);
  const auto y = data.labels_of(idx);
  if (method == "proba_threshold")
    return std::make_unique<ProbaThreshold>(proba_threshold_fit(p, y, ctx, costs));
  if (method == "stopping_rule")
    return std::make_unique<StoppingRule>(stopping_rule_fit(p, y, ctx, costs));
  if (method == "economy") return std::make_unique<EconomyModel>(economy_fit(p, y, ctx, costs));
  if (method == "calimera")
    return std::make_unique<CalimeraModel>(
        calimera_fit(p, y, ctx, costs, config.calimera_lambda));
  throw ConfigError("unknown method '" + method + "'");
}

BenchmarkRun evaluate_on_test(const TriggerPolicy& policy, const PreparedDataset& data,
                              const CostModel& costs, std::string method) {
  BenchmarkRun run;
  run.dataset = data.id;
  run.method = std::move(method);
  run.alpha = costs.alpha();
  run.length = data.length;
  const auto& idx = data.splits.test;
  const auto p = data.posteriors_of(idx);
  const auto y = data.labels_of(idx);
  const auto ctx = data.context();
  run.outcomes = run_policy(policy, p, y, ctx);
  run.report = average_cost(run.outcomes, costs);
  run.oracle = oracle_outcomes(p, y, data.checkpoints, costs);
  run.oracle_avg_cost = average_cost(run.oracle, costs).avg_cost;

  const double gap = run.report.avg_cost - run.oracle_avg_cost;
  if (run.oracle_avg_cost > 0.0)
    run.relative_gap = gap / run.oracle_avg_cost;
  else
    run.relative_gap = gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  if (gap < -1e-9 * std::max(1.0, std::abs(run.oracle_avg_cost)))
    warn("oracle dominance violated for " + run.method + " on " + run.dataset + " at alpha " +
         detail::format_double(run.alpha));

  double offset = 0.0;
  for (std::size_t i = 0; i < run.outcomes.size(); ++i)
    offset += (static_cast<double>(run.outcomes[i].trigger_time) -
               static_cast<double>(run.oracle[i].trigger_time)) /
              static_cast<double>(data.length);
  run.mean_time_offset = run.outcomes.empty() ? 0.0 : offset / run.outcomes.size();
  return run;
}

std::vector<BenchmarkRun> alpha_sweep(std::span<const PreparedDataset> datasets,
                                      const SweepConfig& config) {
  const auto alphas = config.alphas.empty() ? default_alpha_grid() : config.alphas;
  for (const auto& m : config.methods)
    if (!is_known_method(m)) throw ConfigError("unknown method '" + m + "'");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha values must lie in [0, 1]");

  struct Cell {
    std::size_t d, a, m;
  };
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < datasets.size(); ++d)
    for (std::size_t a = 0; a < alphas.size(); ++a)
      for (std::size_t m = 0; m < config.methods.size(); ++m) cells.push_back({d, a, m});

  std::vector<BenchmarkRun> runs(cells.size());
  const auto run_cell = [&](std::size_t c) {
    const auto& cell = cells[c];
    const auto& data = datasets[cell.d];
    const auto& method = config.methods[cell.m];
    const double alpha = alphas[cell.a];
    const auto seed = derive_seed(
        config.seed, {cell.d, static_cast<std::uint64_t>(std::llround(alpha * 1e6)), fnv1a(method)});
    try {
      const auto costs = dataset_costs(data, alpha, config.costs);
      const auto policy = fit_method(method, data, costs, config, seed);
      runs[c] = evaluate_on_test(*policy, data, costs, method);
    } catch (const std::exception& e) {
      BenchmarkRun failed;
      failed.dataset = data.id;
      failed.method = method;
      failed.alpha = alpha;
      failed.ok = false;
      failed.error = e.what();
      runs[c] = std::move(failed);
      warn("cell " + data.id + "/" + method + "/alpha=" + detail::format_double(alpha) +
           " failed: " + e.what());
    }
  };

  const std::size_t workers = std::min(std::max<std::size_t>(config.workers, 1), cells.size());
  if (workers <= 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) run_cell(c);
      });
    for (auto& t : pool) t.join();
  }
  return runs;
}

// ---------------------------------------------------------------------------
// Statistics

double win_rate(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("win_rate: paired samples differ in length");
  if (a.empty()) throw InputError("win_rate: no datasets");
  double wins = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i])
      wins += 1.0;
    else if (a[i] == b[i])
      wins += 0.5;
  }
  return wins / static_cast<double>(a.size());
}

namespace {

// dataset -> avg cost for one method at one alpha, successful cells only
std::map<std::string, double> costs_by_dataset(std::span<const BenchmarkRun> runs,
                                               const std::string& method, double alpha) {
  std::map<std::string, double> out;
  for (const auto& r : runs)
    if (r.ok && r.method == method && r.alpha == alpha) out[r.dataset] = r.report.avg_cost;
  return out;
}

}  // namespace

double pairwise_win_rate(std::span<const BenchmarkRun> runs, const std::string& a,
                         const std::string& b, double alpha) {
  const auto ca = costs_by_dataset(runs, a, alpha);
  const auto cb = costs_by_dataset(runs, b, alpha);
  if (ca.empty()) throw InputError("win rate: no runs for method '" + a + "'");
  if (ca.size() != cb.size() ||
      !std::equal(ca.begin(), ca.end(), cb.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; }))
    throw InputError("win rate: methods '" + a + "' and '" + b + "' cover different datasets");
  std::vector<double> va, vb;
  for (const auto& [name, cost] : ca) {
    va.push_back(cost);
    vb.push_back(cb.at(name));
  }
  return win_rate(va, vb);
}

namespace {

// Average ranks (1-based) of `values`, ties sharing the mean of their positions.
std::vector<double> tied_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("wilcoxon: paired samples differ in length");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] - b[i] != 0.0) diff.push_back(a[i] - b[i]);

  WilcoxonResult res;
  res.n = diff.size();
  if (res.n < 5) {
    warn("wilcoxon: only " + std::to_string(res.n) + " non-zero differences, reporting p = 1");
    res.p_value = 1.0;
    for (double d : diff)
      if (d > 0) res.w_plus += 1.0;  // not meaningful, but keeps the sign usable
    return res;
  }
  std::vector<double> magnitude(diff.size());
  std::transform(diff.begin(), diff.end(), magnitude.begin(), [](double d) { return std::abs(d); });
  const auto ranks = tied_ranks(magnitude);
  for (std::size_t i = 0; i < diff.size(); ++i)
    if (diff[i] > 0) res.w_plus += ranks[i];
  const double n = static_cast<double>(res.n);
  const double total = n * (n + 1.0) / 2.0;

  if (res.n <= kWilcoxonExactLimit) {
    // null distribution of W+ in doubled ranks (integers even with ties)
    std::vector<std::size_t> r2(ranks.size());
    std::size_t sum2 = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      r2[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
      sum2 += r2[i];
    }
    std::vector<double> count(sum2 + 1, 0.0);
    count[0] = 1.0;
    std::size_t reach = 0;
    for (auto r : r2) {
      for (std::size_t s = reach + 1; s-- > 0;)
        if (count[s] != 0.0) count[s + r] += count[s];
      reach += r;
    }
    const auto w2 = static_cast<std::size_t>(std::llround(2.0 * res.w_plus));
    const std::size_t low = std::min(w2, sum2 - w2);
    double tail = 0.0;
    for (std::size_t s = 0; s <= low; ++s) tail += count[s];
    res.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(res.n)));
    res.exact = true;
    return res;
  }

  res.exact = false;
  double tie_term = 0.0;
  {
    auto sorted = magnitude;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
  }
  const double mean = total / 2.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) {
    res.p_value = 1.0;
    return res;
  }
  const double z = std::max(0.0, (std::abs(res.w_plus - mean) - 0.5) / std::sqrt(var));
  res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

std::vector<bool> holm_correction(std::span<const double> p_values, double level) {
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });
  std::vector<bool> reject(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(p_values[order[i]] <= level / static_cast<double>(m - i))) break;
    reject[order[i]] = true;
  }
  return reject;
}

std::vector<double> average_ranks(std::span<const double> costs) { return tied_ranks(costs); }

namespace {

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

MeanRanks mean_ranks(const std::vector<std::vector<double>>& costs, std::uint64_t seed,
                     std::size_t resamples, double level) {
  if (costs.empty()) throw InputError("mean_ranks: no datasets");
  const std::size_t m = costs.front().size();
  if (m < 2) throw InputError("mean_ranks: need at least two methods");
  std::vector<std::vector<double>> ranks;
  for (const auto& row : costs) {
    if (row.size() != m) throw InputError("mean_ranks: ragged cost table");
    ranks.push_back(average_ranks(row));
  }
  const std::size_t d = ranks.size();
  MeanRanks out;
  out.mean.assign(m, 0.0);
  for (const auto& r : ranks)
    for (std::size_t j = 0; j < m; ++j) out.mean[j] += r[j] / static_cast<double>(d);

  out.lower = out.mean;
  out.upper = out.mean;
  if (resamples == 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, d - 1);
  std::vector<std::vector<double>> boot(m, std::vector<double>(resamples, 0.0));
  for (std::size_t b = 0; b < resamples; ++b)
    for (std::size_t i = 0; i < d; ++i) {
      const auto& r = ranks[pick(rng)];
      for (std::size_t j = 0; j < m; ++j) boot[j][b] += r[j] / static_cast<double>(d);
    }
  const double tail = (1.0 - level) / 2.0;
  for (std::size_t j = 0; j < m; ++j) {
    out.lower[j] = percentile(boot[j], tail);
    out.upper[j] = percentile(boot[j], 1.0 - tail);
  }
  return out;
}

std::vector<std::size_t> pareto_front(std::span<const std::pair<double, double>> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return points[i] < points[j]; });
  std::vector<std::size_t> front;
  double best_before = std::numeric_limits<double>::infinity();  // min y over smaller x
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    const double x = points[order[i]].first;
    while (j < order.size() && points[order[j]].first == x) ++j;
    // group [i, j) shares x and is sorted by y; only its minimum can survive
    const double y_min = points[order[i]].second;
    if (y_min < best_before)
      for (std::size_t k = i; k < j && points[order[k]].second == y_min; ++k)
        front.push_back(order[k]);
    best_before = std::min(best_before, y_min);
    i = j;
  }
  return front;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::vector<std::string> methods_in_order(std::span<const BenchmarkRun> runs) {
  std::vector<std::string> out;
  for (const auto& r : runs)
    if (std::find(out.begin(), out.end(), r.method) == out.end()) out.push_back(r.method);
  return out;
}

std::vector<double> alphas_in_order(std::span<const BenchmarkRun> runs) {
  std::vector<double> out;
  for (const auto& r : runs)
    if (std::find(out.begin(), out.end(), r.alpha) == out.end()) out.push_back(r.alpha);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

BenchmarkReport summarize(std::vector<BenchmarkRun> runs, std::uint64_t seed,
                          std::size_t resamples) {
  BenchmarkReport rep;
  rep.runs = std::move(runs);
  const auto methods = methods_in_order(rep.runs);
  const auto alphas = alphas_in_order(rep.runs);
  std::size_t underpowered = 0, n_tests = 0;

  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const double alpha = alphas[ai];
    std::vector<std::map<std::string, double>> by_method;
    for (const auto& m : methods) by_method.push_back(costs_by_dataset(rep.runs, m, alpha));

    // datasets every method finished on
    std::vector<std::string> common;
    if (!by_method.empty())
      for (const auto& [name, _] : by_method.front()) {
        bool all = true;
        for (const auto& bm : by_method) all = all && bm.count(name) > 0;
        if (all) common.push_back(name);
      }
    const auto column = [&](std::size_t mi) {
      std::vector<double> v;
      for (const auto& name : common) v.push_back(by_method[mi].at(name));
      return v;
    };

    for (std::size_t s = 0; s < methods.size(); ++s) {
      SummaryRow row;
      row.method = methods[s];
      row.alpha = alpha;
      for (const auto& r : rep.runs)
        if (r.ok && r.method == methods[s] && r.alpha == alpha) {
          row.mean_avg_cost += r.report.avg_cost;
          row.mean_relative_gap += r.relative_gap;
          ++row.n_datasets;
        }
      if (row.n_datasets > 0) {
        row.mean_avg_cost /= static_cast<double>(row.n_datasets);
        row.mean_relative_gap /= static_cast<double>(row.n_datasets);
      }
      rep.summary.push_back(row);
    }
    if (common.empty()) continue;

    for (std::size_t i = 0; i < methods.size(); ++i)
      for (std::size_t j = 0; j < methods.size(); ++j) {
        if (i == j) continue;
        rep.win_rates.push_back(
            {methods[i], methods[j], alpha, win_rate(column(i), column(j)), common.size()});
      }

    std::vector<StatTestResult> tests;
    std::vector<double> pv;
    for (std::size_t i = 0; i < methods.size(); ++i)
      for (std::size_t j = i + 1; j < methods.size(); ++j) {
        WilcoxonResult w;
        {
          // one summary line below instead of a warning per pair
          ScopedWarningCapture quiet;
          w = wilcoxon_signed_rank(column(i), column(j));
          underpowered += !quiet.messages().empty();
        }
        ++n_tests;
        StatTestResult t;
        t.method_a = methods[i];
        t.method_b = methods[j];
        t.alpha = alpha;
        t.p_value = w.p_value;
        t.n = w.n;
        const double n = static_cast<double>(w.n);
        const double w_minus = n * (n + 1.0) / 2.0 - w.w_plus;
        t.direction = w.w_plus > w_minus ? 1 : (w.w_plus < w_minus ? -1 : 0);
        tests.push_back(t);
        pv.push_back(w.p_value);
      }
    const auto reject = holm_correction(pv);
    for (std::size_t t = 0; t < tests.size(); ++t) {
      tests[t].holm_reject = reject[t];
      rep.tests.push_back(tests[t]);
    }

    if (methods.size() >= 2) {
      std::vector<std::vector<double>> table;
      for (std::size_t d = 0; d < common.size(); ++d) {
        std::vector<double> row;
        for (std::size_t mi = 0; mi < methods.size(); ++mi) row.push_back(by_method[mi].at(common[d]));
        table.push_back(std::move(row));
      }
      const auto mr = mean_ranks(table, derive_seed(seed, {0x7a4c, ai}), resamples);
      for (std::size_t mi = 0; mi < methods.size(); ++mi)
        rep.ranks.push_back(
            {alpha, methods[mi], mr.mean[mi], mr.lower[mi], mr.upper[mi], common.size()});
    }
  }

  // Pareto fronts per dataset over every (method, alpha) point
  std::vector<std::string> datasets;
  for (const auto& r : rep.runs)
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end())
      datasets.push_back(r.dataset);
  for (const auto& ds : datasets) {
    std::vector<const BenchmarkRun*> members;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rep.runs)
      if (r.ok && r.dataset == ds) {
        members.push_back(&r);
        pts.emplace_back(r.report.avg_delay_cost, r.report.avg_misclassification_cost);
      }
    std::vector<bool> on(members.size(), false);
    for (auto i : pareto_front(pts)) on[i] = true;
    for (std::size_t i = 0; i < members.size(); ++i)
      rep.fronts.push_back({ds, members[i]->method, members[i]->alpha, pts[i].first,
                            pts[i].second, on[i]});
  }
  if (underpowered > 0)
    warn("summarize: " + std::to_string(underpowered) + " of " + std::to_string(n_tests) +
         " signed-rank tests had fewer than 5 non-zero differences and report p = 1");
  return rep;
}

const std::vector<std::string>& report_files() {
  static const std::vector<std::string> files{
      "manifest.json", "runs.csv",    "summary.csv", "win_rates.csv",
      "tests.csv",     "ranks.csv",   "fronts.csv",  "scatter.csv"};
  return files;
}

namespace {

std::string csv_field(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  return s;
}

std::ofstream open_table(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void emit_report(const BenchmarkReport& report, const std::filesystem::path& dir,
                 std::uint64_t seed,
                 const std::vector<std::pair<std::string, std::string>>& settings) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create report directory " + dir.string() + ": " + ec.message());
  using detail::format_double;

  {
    auto out = open_table(dir / "runs.csv");
    out << "dataset,method,alpha,status,avg_cost,avg_delay_cost,avg_misclassification_cost,"
           "unweighted_avg_cost,mean_trigger_time,accuracy,count,oracle_avg_cost,relative_gap,"
           "mean_time_offset,error\n";
    for (const auto& r : report.runs) {
      out << csv_field(r.dataset) << ',' << r.method << ',' << format_double(r.alpha) << ','
          << (r.ok ? "ok" : "error") << ',' << format_double(r.report.avg_cost) << ','
          << format_double(r.report.avg_delay_cost) << ','
          << format_double(r.report.avg_misclassification_cost) << ','
          << format_double(r.report.unweighted_avg_cost) << ','
          << format_double(r.report.mean_trigger_time) << ',' << format_double(r.report.accuracy)
          << ',' << r.report.count << ',' << format_double(r.oracle_avg_cost) << ','
          << format_double(r.relative_gap) << ',' << format_double(r.mean_time_offset) << ','
          << csv_field(r.error) << '\n';
    }
  }
  {
    auto out = open_table(dir / "summary.csv");
    out << "method,alpha,mean_avg_cost,mean_relative_gap,n_datasets\n";
    for (const auto& s : report.summary)
      out << s.method << ',' << format_double(s.alpha) << ',' << format_double(s.mean_avg_cost)
          << ',' << format_double(s.mean_relative_gap) << ',' << s.n_datasets << '\n';
  }
  {
    auto out = open_table(dir / "win_rates.csv");
    out << "method_a,method_b,alpha,win_rate,n_datasets\n";
    for (const auto& w : report.win_rates)
      out << w.method_a << ',' << w.method_b << ',' << format_double(w.alpha) << ','
          << format_double(w.win_rate) << ',' << w.n_datasets << '\n';
  }
  {
    auto out = open_table(dir / "tests.csv");
    out << "method_a,method_b,alpha,p_value,holm_reject,direction,n\n";
    for (const auto& t : report.tests)
      out << t.method_a << ',' << t.method_b << ',' << format_double(t.alpha) << ','
          << format_double(t.p_value) << ',' << (t.holm_reject ? 1 : 0) << ',' << t.direction
          << ',' << t.n << '\n';
  }
  {
    auto out = open_table(dir / "ranks.csv");
    out << "alpha,method,mean_rank,lower,upper,n_datasets\n";
    for (const auto& r : report.ranks)
      out << format_double(r.alpha) << ',' << r.method << ',' << format_double(r.mean_rank) << ','
          << format_double(r.lower) << ',' << format_double(r.upper) << ',' << r.n_datasets
          << '\n';
  }
  {
    auto out = open_table(dir / "fronts.csv");
    out << "dataset,method,alpha,avg_delay_cost,avg_misclassification_cost,on_front\n";
    for (const auto& f : report.fronts)
      out << csv_field(f.dataset) << ',' << f.method << ',' << format_double(f.alpha) << ','
          << format_double(f.delay_cost) << ',' << format_double(f.misclassification_cost) << ','
          << (f.on_front ? 1 : 0) << '\n';
  }
  {
    auto out = open_table(dir / "scatter.csv");
    out << "dataset,method,alpha,test_position,truth,predicted,trigger_time,oracle_trigger_time,"
           "relative_offset\n";
    for (const auto& r : report.runs) {
      if (!r.ok) continue;
      for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
        const auto& o = r.outcomes[i];
        const auto& s = r.oracle[i];
        out << csv_field(r.dataset) << ',' << r.method << ',' << format_double(r.alpha) << ','
            << i << ',' << o.truth << ',' << o.predicted << ',' << o.trigger_time << ','
            << s.trigger_time << ','
            << format_double((static_cast<double>(o.trigger_time) -
                              static_cast<double>(s.trigger_time)) /
                             static_cast<double>(r.length))
            << '\n';
      }
    }
  }

  nlohmann::ordered_json manifest;
  manifest["schema"] = "ects-report";
  manifest["schema_version"] = 1;
  manifest["library_version"] = kLibraryVersion;
  manifest["seed"] = seed;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : settings) cfg[k] = v;
  manifest["settings"] = cfg;
  manifest["files"] = report_files();
  manifest["counts"] = {{"runs", report.runs.size()},
                        {"failed_runs", std::count_if(report.runs.begin(), report.runs.end(),
                                                      [](const auto& r) { return !r.ok; })},
                        {"tests", report.tests.size()},
                        {"ranks", report.ranks.size()}};
  auto out = open_table(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("write failed in " + dir.string());
}

}  // namespace ects
