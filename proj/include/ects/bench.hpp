#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ects/classifier.hpp"
#include "ects/core.hpp"
#include "ects/ingest.hpp"
#include "ects/rl.hpp"
#include "ects/triggers.hpp"

namespace ects {

// ---------------------------------------------------------------------------
// Methods

/// proba_threshold, stopping_rule, economy, calimera, alert, the single-feature
/// variants alert_<feature>, and alert_sr / alert_eco (the baselines' own state).
const std::vector<std::string>& known_methods();
bool is_known_method(const std::string& name);
/// State features of an ALERT variant; nullopt for the hand-made rules. Plain "alert"
/// maps to the full state here, fit_method lets TrainConfig::features override it.
std::optional<FeatureSet> alert_method_features(const std::string& name);
/// alert_max_posterior, alert_margin, alert_pred_class, alert_confidence, alert_time.
std::vector<std::string> single_feature_alert_methods();

/// Everything the trigger rules need from one dataset: posteriors of every series
/// under a chain fitted on the classifier split, the splits and the bins.
struct PreparedDataset {
  std::string id;
  std::size_t length = 0;
  std::size_t n_classes = 0;
  ClassIndex minority = 0;
  std::vector<std::size_t> checkpoints;
  std::vector<PosteriorSequence> posteriors;
  std::vector<ClassIndex> labels;
  DatasetSplits splits;
  BinTable bins;

  DecisionContext context() const { return {checkpoints, length, &bins}; }
  std::vector<PosteriorSequence> posteriors_of(std::span<const std::size_t> idx) const;
  std::vector<ClassIndex> labels_of(std::span<const std::size_t> idx) const;
};

/// Splits, fits the built-in chain on the classifier split and bins on trigger-train.
PreparedDataset prepare_dataset(std::string id, const SeriesDataset& dataset,
                                const SplitSpec& split, const ChainOptions& chain,
                                std::size_t n_bins = 10);
/// Same, with posteriors read from a cache instead of the built-in chain.
PreparedDataset prepare_dataset(std::string id, const SeriesDataset& dataset,
                                const PosteriorCache& cache, const SplitSpec& split,
                                std::size_t n_bins = 10);

struct CostSettings {
  double delay_scale = 100.0;
  double minority_factor = 100.0;
};

CostModel dataset_costs(const PreparedDataset& data, double alpha, const CostSettings& settings);

struct SweepConfig {
  std::vector<std::string> methods{"proba_threshold", "stopping_rule", "economy", "calimera",
                                   "alert"};
  std::vector<double> alphas;  // empty: 0.0, 0.1, ..., 1.0
  std::uint64_t seed = 0;
  TrainConfig train;
  CostSettings costs;
  double calimera_lambda = 1e-2;
  std::size_t workers = 1;
};

/// 0.0, 0.1, ..., 1.0
std::vector<double> default_alpha_grid();

/// Fits `method` on the trigger-train split of `data`.
std::unique_ptr<TriggerPolicy> fit_method(const std::string& method, const PreparedDataset& data,
                                          const CostModel& costs, const SweepConfig& config,
                                          std::uint64_t seed);

struct BenchmarkRun {
  std::string dataset;
  std::string method;
  double alpha = 0.0;
  std::size_t length = 0;  // T of the dataset
  bool ok = true;
  std::string error;
  MetricReport report;
  std::vector<EpisodeOutcome> outcomes;  // test split, in split order
  std::vector<EpisodeOutcome> oracle;    // hindsight optimum per test series
  double oracle_avg_cost = 0.0;
  /// (AvgCost - AvgCost*) / AvgCost*; 0 when both vanish, +inf when only the oracle does.
  double relative_gap = 0.0;
  /// mean over test series of (t_hat - t_star) / T
  double mean_time_offset = 0.0;
};

/// Evaluates a fitted policy on the test split and fills in the oracle columns.
BenchmarkRun evaluate_on_test(const TriggerPolicy& policy, const PreparedDataset& data,
                              const CostModel& costs, std::string method);

/// Every (dataset, alpha, method) cell: fit on trigger-train, evaluate on test. Failing
/// cells are recorded with ok = false. Output order is dataset-major, then alpha, then
/// method, independent of the worker count.
std::vector<BenchmarkRun> alpha_sweep(std::span<const PreparedDataset> datasets,
                                      const SweepConfig& config);

// ---------------------------------------------------------------------------
// Statistics

/// Fraction of datasets where a < b, exact ties counting one half.
double win_rate(std::span<const double> a, std::span<const double> b);
/// Win rate of method a over method b at `alpha`; both must cover the same datasets.
double pairwise_win_rate(std::span<const BenchmarkRun> runs, const std::string& a,
                         const std::string& b, double alpha);

inline constexpr std::size_t kWilcoxonExactLimit = 25;

struct WilcoxonResult {
  double p_value = 1.0;
  double w_plus = 0.0;  // sum of ranks of positive differences a - b
  std::size_t n = 0;    // non-zero differences
  bool exact = true;
};

/// Two-sided signed-rank test on the paired differences a - b. Zero differences are
/// dropped; ties get average ranks. Exact null distribution up to kWilcoxonExactLimit
/// non-zero pairs, normal approximation with tie and continuity correction above.
/// Fewer than 5 non-zero pairs gives p = 1 and a warning.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Holm step-down: reject the i-th smallest p (1-based) while p <= level / (m - i + 1).
/// Flags are returned in input order.
std::vector<bool> holm_correction(std::span<const double> p_values, double level = 0.05);

struct StatTestResult {
  std::string method_a;
  std::string method_b;
  double alpha = 0.0;
  double p_value = 1.0;
  bool holm_reject = false;
  int direction = 0;  // sign of W+ - W-: +1 when a costs more, -1 when b does
  std::size_t n = 0;
};

/// Average ranks (1 = lowest cost) of one row of costs.
std::vector<double> average_ranks(std::span<const double> costs);

struct MeanRanks {
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// costs[d][m]: mean rank of every method over datasets with a percentile bootstrap
/// interval (`level` coverage) over resampled datasets.
MeanRanks mean_ranks(const std::vector<std::vector<double>>& costs, std::uint64_t seed,
                     std::size_t resamples = 1000, double level = 0.9);

/// Indices of the non-dominated points (minimisation in both coordinates), ordered by
/// first coordinate then second. Duplicates of a front point are all kept.
std::vector<std::size_t> pareto_front(std::span<const std::pair<double, double>> points);

// ---------------------------------------------------------------------------
// Reports

struct WinRateRow {
  std::string method_a, method_b;
  double alpha = 0.0;
  double win_rate = 0.0;
  std::size_t n_datasets = 0;
};

struct RankRow {
  double alpha = 0.0;
  std::string method;
  double mean_rank = 0.0, lower = 0.0, upper = 0.0;
  std::size_t n_datasets = 0;
};

struct SummaryRow {
  std::string method;
  double alpha = 0.0;
  double mean_avg_cost = 0.0;
  double mean_relative_gap = 0.0;
  std::size_t n_datasets = 0;
};

struct FrontRow {
  std::string dataset, method;
  double alpha = 0.0;
  double delay_cost = 0.0, misclassification_cost = 0.0;
  bool on_front = false;
};

struct BenchmarkReport {
  std::vector<BenchmarkRun> runs;
  std::vector<WinRateRow> win_rates;
  std::vector<StatTestResult> tests;
  std::vector<RankRow> ranks;
  std::vector<SummaryRow> summary;
  std::vector<FrontRow> fronts;
};

/// Win rates and Wilcoxon tests for every ordered/unordered method pair per alpha
/// (Holm across the pairs of one alpha), mean ranks per alpha, per-dataset Pareto
/// fronts over all (method, alpha) points. Only successful cells enter the tables.
BenchmarkReport summarize(std::vector<BenchmarkRun> runs, std::uint64_t seed,
                          std::size_t resamples = 1000);

/// File names written by emit_report, manifest first.
const std::vector<std::string>& report_files();

/// Writes the CSV tables and manifest.json into `dir` (created if missing).
/// `settings` lands verbatim in the manifest.
void emit_report(const BenchmarkReport& report, const std::filesystem::path& dir,
                 std::uint64_t seed,
                 const std::vector<std::pair<std::string, std::string>>& settings);

}  // namespace ects
