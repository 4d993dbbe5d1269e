#include "ects/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ects/error.hpp"

namespace ects {

std::vector<ClassIndex> SeriesDataset::labels() const {
  std::vector<ClassIndex> out;
  out.reserve(series.size());
  for (const auto& s : series) out.push_back(s.label);
  return out;
}

SeriesDataset SeriesDataset::build(std::vector<LabeledSeries> series,
                                   std::vector<std::string> class_names,
                                   std::vector<std::size_t> checkpoints) {
  if (series.empty()) throw InputError("dataset has no series");
  if (class_names.empty()) throw InputError("dataset has no classes");

  const std::size_t length = series.front().length();
  const std::size_t n_channels = series.front().channels.size();
  if (length < 2) throw InputError("series length must be at least 2");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (s.channels.size() != n_channels || n_channels == 0)
      throw InputError("series " + std::to_string(i) + " has a different channel count");
    for (const auto& c : s.channels)
      if (c.size() != length)
        throw InputError("series " + std::to_string(i) + " has length " +
                         std::to_string(c.size()) + ", expected " + std::to_string(length));
    if (s.label >= class_names.size())
      throw InputError("series " + std::to_string(i) + " has an unknown label");
  }

  if (checkpoints.empty()) checkpoints = default_checkpoints(length);
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (checkpoints[k] < 1 || checkpoints[k] > length)
      throw InputError("checkpoint out of range [1, T]");
    if (k > 0 && checkpoints[k] <= checkpoints[k - 1])
      throw InputError("checkpoints must be strictly increasing");
  }
  if (checkpoints.back() != length) throw InputError("last checkpoint must equal T");

  SeriesDataset d;
  d.series = std::move(series);
  d.length = length;
  d.class_names = std::move(class_names);
  d.checkpoints = std::move(checkpoints);
  const auto labels = d.labels();
  d.minority_class = ects::minority_class(labels, d.class_names.size());
  return d;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> streams) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(master),
                                   static_cast<std::uint32_t>(master >> 32)};
  for (auto s : streams) {
    words.push_back(static_cast<std::uint32_t>(s));
    words.push_back(static_cast<std::uint32_t>(s >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<std::size_t> default_checkpoints(std::size_t length, std::size_t steps) {
  if (length == 0 || steps == 0) throw InputError("checkpoint grid needs T > 0 and steps > 0");
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= steps; ++k) {
    const std::size_t t = (k * length + steps - 1) / steps;
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

ClassIndex minority_class(std::span<const ClassIndex> labels, std::size_t n_classes) {
  std::vector<std::size_t> counts(n_classes, 0);
  for (auto y : labels) {
    if (y >= n_classes) throw InputError("label outside class set");
    ++counts[y];
  }
  // Classes with zero members are still classes; the least-frequent rule applies to
  // the observed ones only.
  ClassIndex best = n_classes;
  for (ClassIndex c = 0; c < n_classes; ++c) {
    if (counts[c] == 0) continue;
    if (best == n_classes || counts[c] < counts[best]) best = c;
  }
  return best == n_classes ? 0 : best;
}

SeriesDataset subset(const SeriesDataset& dataset, std::span<const std::size_t> indices) {
  SeriesDataset d;
  d.length = dataset.length;
  d.class_names = dataset.class_names;
  d.checkpoints = dataset.checkpoints;
  d.minority_class = dataset.minority_class;
  d.series.reserve(indices.size());
  for (auto i : indices) {
    if (i >= dataset.size()) throw InputError("subset index out of range");
    d.series.push_back(dataset.series[i]);
  }
  return d;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

double delay_cost(std::size_t t, std::size_t length, double scale) {
  if (length == 0 || t < 1 || t > length)
    throw InputError("delay_cost: t=" + std::to_string(t) + " outside [1, " +
                     std::to_string(length) + "]");
  return std::exp(static_cast<double>(t) / static_cast<double>(length) * std::log(scale));
}

double misclassification_cost(ClassIndex predicted, ClassIndex truth, ClassIndex minority,
                              std::size_t n_classes, double minority_factor) {
  if (predicted >= n_classes || truth >= n_classes || minority >= n_classes)
    throw InputError("misclassification_cost: class index outside class set");
  if (predicted == truth) return 0.0;
  return truth == minority ? minority_factor : 1.0;
}

CostModel::CostModel(std::vector<std::vector<double>> misclassification,
                     std::vector<double> delay, double alpha)
    : misclassification_(std::move(misclassification)), delay_(std::move(delay)), alpha_(alpha) {
  if (!(alpha_ >= 0.0 && alpha_ <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  const std::size_t n = misclassification_.size();
  if (n < 1) throw InputError("misclassification matrix is empty");
  for (std::size_t i = 0; i < n; ++i) {
    if (misclassification_[i].size() != n) throw InputError("misclassification matrix not square");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = misclassification_[i][j];
      if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("misclassification cost must be >= 0");
      if (i == j && v != 0.0) throw InputError("misclassification matrix needs a zero diagonal");
    }
  }
  if (delay_.empty()) throw InputError("delay curve is empty");
  for (std::size_t t = 0; t < delay_.size(); ++t) {
    if (!(delay_[t] >= 0.0) || !std::isfinite(delay_[t]))
      throw InputError("delay cost must be >= 0");
    if (t > 0 && delay_[t] < delay_[t - 1]) throw InputError("delay cost must be nondecreasing");
  }
}

CostModel CostModel::standard(std::size_t n_classes, ClassIndex minority, std::size_t length,
                              double alpha, double delay_scale, double minority_factor) {
  std::vector<std::vector<double>> cm(n_classes, std::vector<double>(n_classes, 0.0));
  for (ClassIndex truth = 0; truth < n_classes; ++truth)
    for (ClassIndex pred = 0; pred < n_classes; ++pred)
      cm[pred][truth] = misclassification_cost(pred, truth, minority, n_classes, minority_factor);
  std::vector<double> cd(length);
  for (std::size_t t = 1; t <= length; ++t) cd[t - 1] = delay_cost(t, length, delay_scale);
  return CostModel(std::move(cm), std::move(cd), alpha);
}

double CostModel::misclassification(ClassIndex predicted, ClassIndex truth) const {
  if (predicted >= n_classes() || truth >= n_classes())
    throw InputError("class index outside cost matrix");
  return misclassification_[predicted][truth];
}

double CostModel::delay(std::size_t t) const {
  if (t < 1 || t > delay_.size())
    throw InputError("delay: t=" + std::to_string(t) + " outside [1, " +
                     std::to_string(delay_.size()) + "]");
  return delay_[t - 1];
}

CostModel CostModel::with_alpha(double alpha) const {
  return CostModel(misclassification_, delay_, alpha);
}

CostModel CostModel::scaled(double factor) const {
  if (!(factor > 0.0)) throw InputError("cost scale factor must be positive");
  auto cm = misclassification_;
  for (auto& row : cm)
    for (auto& v : row) v *= factor;
  auto cd = delay_;
  for (auto& v : cd) v *= factor;
  return CostModel(std::move(cm), std::move(cd), alpha_);
}

double episode_loss(const EpisodeOutcome& outcome, const CostModel& costs) {
  return costs.loss(outcome.predicted, outcome.truth, outcome.trigger_time);
}

double unweighted_episode_loss(const EpisodeOutcome& outcome, const CostModel& costs) {
  return costs.misclassification(outcome.predicted, outcome.truth) +
         costs.delay(outcome.trigger_time);
}

MetricReport average_cost(std::span<const EpisodeOutcome> outcomes, const CostModel& costs) {
  if (outcomes.empty()) throw InputError("average_cost: no outcomes");
  MetricReport r;
  double correct = 0.0;
  for (const auto& o : outcomes) {
    const double cm = costs.misclassification(o.predicted, o.truth);
    const double cd = costs.delay(o.trigger_time);
    r.avg_cost += episode_loss(o, costs);
    r.avg_misclassification_cost += cm;
    r.avg_delay_cost += cd;
    r.unweighted_avg_cost += cm + cd;
    r.mean_trigger_time += static_cast<double>(o.trigger_time);
    if (o.predicted == o.truth) correct += 1.0;
  }
  const double n = static_cast<double>(outcomes.size());
  r.avg_cost /= n;
  r.avg_misclassification_cost /= n;
  r.avg_delay_cost /= n;
  r.unweighted_avg_cost /= n;
  r.mean_trigger_time /= n;
  r.accuracy = correct / n;
  r.count = outcomes.size();
  return r;
}

PosteriorSequence::PosteriorSequence(std::size_t n_checkpoints, std::size_t n_classes)
    : n_classes_(n_classes), data_(n_checkpoints * n_classes, 0.0) {}

PosteriorSequence::PosteriorSequence(std::size_t n_classes, std::vector<double> row_major)
    : n_classes_(n_classes), data_(std::move(row_major)) {
  if (n_classes_ == 0 || data_.size() % n_classes_ != 0)
    throw InputError("posterior data size is not a multiple of the class count");
}

PosteriorSequence PosteriorSequence::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const std::size_t c = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * c);
  for (const auto& r : rows) {
    if (r.size() != c) throw InputError("posterior rows differ in length");
    data.insert(data.end(), r.begin(), r.end());
  }
  return PosteriorSequence(c, std::move(data));
}

double PosteriorSequence::max_posterior(std::size_t k) const {
  const auto r = row(k);
  return *std::max_element(r.begin(), r.end());
}

std::vector<EpisodeOutcome> oracle_outcomes(std::span<const PosteriorSequence> posteriors,
                                            std::span<const ClassIndex> labels,
                                            std::span<const std::size_t> checkpoints,
                                            const CostModel& costs) {
  if (posteriors.size() != labels.size())
    throw DataError("oracle: posterior count does not match label count");
  std::vector<EpisodeOutcome> out;
  out.reserve(posteriors.size());
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    const auto& p = posteriors[i];
    if (p.n_checkpoints() < checkpoints.size())
      throw DataError("oracle: series " + std::to_string(i) + " lacks posteriors at some checkpoints");
    EpisodeOutcome best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
      const ClassIndex pred = p.predicted(k);
      const double c = costs.loss(pred, labels[i], checkpoints[k]);
      if (c < best_cost) {
        best_cost = c;
        best = {pred, labels[i], checkpoints[k], k};
      }
    }
    out.push_back(best);
  }
  return out;
}

double oracle_avg_cost(std::span<const PosteriorSequence> posteriors,
                       std::span<const ClassIndex> labels,
                       std::span<const std::size_t> checkpoints, const CostModel& costs) {
  const auto outcomes = oracle_outcomes(posteriors, labels, checkpoints, costs);
  return average_cost(outcomes, costs).avg_cost;
}

double oracle_avg_cost(std::span<const PosteriorSequence> posteriors,
                       const SeriesDataset& dataset, const CostModel& costs) {
  const auto labels = dataset.labels();
  return oracle_avg_cost(posteriors, labels, dataset.checkpoints, costs);
}

}  // namespace ects
