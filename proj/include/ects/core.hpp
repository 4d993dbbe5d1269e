#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ects {

using ClassIndex = std::size_t;

/// A single (possibly multichannel) series with its class index.
struct LabeledSeries {
  std::vector<std::vector<double>> channels;
  ClassIndex label = 0;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

/// Fixed-length labelled series plus the checkpoint grid on which decisions are taken.
///
/// Checkpoints are absolute, 1-based prefix lengths t_1 < ... < t_K = T.
struct SeriesDataset {
  std::vector<LabeledSeries> series;
  std::size_t length = 0;
  std::vector<std::string> class_names;
  ClassIndex minority_class = 0;
  std::vector<std::size_t> checkpoints;

  std::size_t size() const { return series.size(); }
  std::size_t n_classes() const { return class_names.size(); }
  std::size_t n_channels() const { return series.empty() ? 0 : series.front().channels.size(); }
  std::vector<ClassIndex> labels() const;

  /// Validates the invariants and fills in minority class and, when empty, the
  /// default checkpoint grid.
  static SeriesDataset build(std::vector<LabeledSeries> series,
                             std::vector<std::string> class_names,
                             std::vector<std::size_t> checkpoints = {});
};

/// Independent 64-bit seed for a sub-stream, mixed through std::seed_seq.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> streams);

/// ceil(k T / steps) for k = 1..steps, deduplicated.
std::vector<std::size_t> default_checkpoints(std::size_t length, std::size_t steps = 20);

/// Least frequent label; ties go to the lowest index.
ClassIndex minority_class(std::span<const ClassIndex> labels, std::size_t n_classes);

SeriesDataset subset(const SeriesDataset& dataset, std::span<const std::size_t> indices);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> values);

/// exp((t/T) ln scale). Defaults to the exponential curve that reaches 100 at t = T.
double delay_cost(std::size_t t, std::size_t length, double scale = 100.0);

/// 0 when correct, minority_factor when the true class is the minority, 1 otherwise.
double misclassification_cost(ClassIndex predicted, ClassIndex truth, ClassIndex minority,
                              std::size_t n_classes, double minority_factor = 100.0);

/// Misclassification matrix C_m(predicted | truth), delay curve C_d(t) on t = 1..T,
/// and the weight alpha that balances them.
class CostModel {
 public:
  CostModel(std::vector<std::vector<double>> misclassification, std::vector<double> delay,
            double alpha);

  static CostModel standard(std::size_t n_classes, ClassIndex minority, std::size_t length,
                            double alpha, double delay_scale = 100.0,
                            double minority_factor = 100.0);

  std::size_t n_classes() const { return misclassification_.size(); }
  std::size_t length() const { return delay_.size(); }
  double alpha() const { return alpha_; }

  double misclassification(ClassIndex predicted, ClassIndex truth) const;
  double delay(std::size_t t) const;

  double weighted_misclassification(ClassIndex predicted, ClassIndex truth) const {
    return alpha_ * misclassification(predicted, truth);
  }
  double weighted_delay(std::size_t t) const { return (1.0 - alpha_) * delay(t); }

  /// alpha C_m + (1 - alpha) C_d(t)
  double loss(ClassIndex predicted, ClassIndex truth, std::size_t t) const {
    return weighted_misclassification(predicted, truth) + weighted_delay(t);
  }

  CostModel with_alpha(double alpha) const;
  /// Multiplies both cost components by a positive factor.
  CostModel scaled(double factor) const;

 private:
  std::vector<std::vector<double>> misclassification_;
  std::vector<double> delay_;
  double alpha_;
};

struct EpisodeOutcome {
  ClassIndex predicted = 0;
  ClassIndex truth = 0;
  std::size_t trigger_time = 0;  // absolute t of the checkpoint
  std::size_t checkpoint = 0;    // index into the checkpoint grid
};

/// Weighted loss alpha C_m + (1 - alpha) C_d.
double episode_loss(const EpisodeOutcome& outcome, const CostModel& costs);
/// Plain C_m + C_d, ignoring alpha.
double unweighted_episode_loss(const EpisodeOutcome& outcome, const CostModel& costs);

struct MetricReport {
  double avg_cost = 0.0;                    // weighted, mean of episode_loss
  double avg_delay_cost = 0.0;              // mean raw C_d
  double avg_misclassification_cost = 0.0;  // mean raw C_m
  double unweighted_avg_cost = 0.0;         // mean raw C_m + C_d
  double mean_trigger_time = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

MetricReport average_cost(std::span<const EpisodeOutcome> outcomes, const CostModel& costs);

/// One probability vector per checkpoint, stored row-major.
class PosteriorSequence {
 public:
  PosteriorSequence() = default;
  PosteriorSequence(std::size_t n_checkpoints, std::size_t n_classes);
  PosteriorSequence(std::size_t n_classes, std::vector<double> row_major);
  static PosteriorSequence from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t n_checkpoints() const { return n_classes_ == 0 ? 0 : data_.size() / n_classes_; }
  std::size_t n_classes() const { return n_classes_; }

  std::span<const double> row(std::size_t k) const {
    return {data_.data() + k * n_classes_, n_classes_};
  }
  std::span<double> row(std::size_t k) { return {data_.data() + k * n_classes_, n_classes_}; }
  ClassIndex predicted(std::size_t k) const { return argmax(row(k)); }
  double max_posterior(std::size_t k) const;

  const std::vector<double>& data() const { return data_; }
  bool operator==(const PosteriorSequence&) const = default;

 private:
  std::size_t n_classes_ = 0;
  std::vector<double> data_;
};

/// Per-series hindsight optimum: the checkpoint minimising alpha C_m(argmax_t | y) +
/// (1 - alpha) C_d(t), earliest on ties.
std::vector<EpisodeOutcome> oracle_outcomes(std::span<const PosteriorSequence> posteriors,
                                            std::span<const ClassIndex> labels,
                                            std::span<const std::size_t> checkpoints,
                                            const CostModel& costs);

/// AvgCost*: the mean of the per-series hindsight optima.
double oracle_avg_cost(std::span<const PosteriorSequence> posteriors,
                       std::span<const ClassIndex> labels,
                       std::span<const std::size_t> checkpoints, const CostModel& costs);
double oracle_avg_cost(std::span<const PosteriorSequence> posteriors,
                       const SeriesDataset& dataset, const CostModel& costs);

}  // namespace ects
