#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ects/core.hpp"

namespace ects {

/// Number of summary statistics computed per channel of a prefix.
inline constexpr std::size_t kFeaturesPerChannel = 7;

/// mean, standard deviation, least-squares slope, min, max, last value and
/// mean-crossing count of every channel over the first `prefix` samples.
std::vector<double> summary_features(const LabeledSeries& series, std::size_t prefix);

std::vector<double> softmax(std::span<const double> scores, double temperature = 1.0);

/// One ridge one-vs-rest model, valid for a single prefix length.
struct CheckpointModel {
  std::size_t prefix = 0;
  std::vector<double> feature_mean;   // standardisation applied before the linear map
  std::vector<double> feature_scale;
  std::vector<double> weights;        // feature-major: weights[f * n_classes + c]
  std::vector<double> bias;           // per class
  double temperature = 1.0;
};

class PrefixClassifierChain {
 public:
  PrefixClassifierChain() = default;
  PrefixClassifierChain(std::size_t n_classes, std::size_t n_channels, std::size_t length,
                        std::vector<CheckpointModel> models);

  std::size_t n_classes() const { return n_classes_; }
  std::size_t n_channels() const { return n_channels_; }
  std::size_t length() const { return length_; }
  std::size_t n_checkpoints() const { return models_.size(); }
  const std::vector<CheckpointModel>& models() const { return models_; }
  std::vector<std::size_t> checkpoints() const;

  /// Uncalibrated one-vs-rest scores at checkpoint k.
  std::vector<double> scores(const LabeledSeries& series, std::size_t k) const;
  PosteriorSequence posteriors(const LabeledSeries& series) const;

  void save(std::ostream& out) const;
  static PrefixClassifierChain load(std::istream& in);

 private:
  std::size_t n_classes_ = 0;
  std::size_t n_channels_ = 0;
  std::size_t length_ = 0;
  std::vector<CheckpointModel> models_;
};

struct ChainOptions {
  double ridge_lambda = 1e-2;
  double temperature_min = 0.05;
  double temperature_max = 20.0;
  double temperature_tolerance = 1e-3;
};

/// Fits one ridge model per checkpoint on half of `train` and calibrates its
/// temperature on the other half.
PrefixClassifierChain fit_chain(const SeriesDataset& train, const ChainOptions& options = {});

/// Golden-section search for the temperature minimising the cross-entropy between
/// softmax(scores / T) and `targets` (rows of probabilities, one-hot for hard labels).
double fit_temperature(std::span<const double> scores, std::span<const double> targets,
                       std::size_t n_classes, double lo = 0.05, double hi = 20.0,
                       double tolerance = 1e-3);

std::vector<PosteriorSequence> posteriors(const PrefixClassifierChain& chain,
                                          const SeriesDataset& dataset);

/// Equal-frequency cut points of the maximum posterior, per checkpoint.
class BinTable {
 public:
  BinTable() = default;
  BinTable(std::size_t n_bins, std::vector<std::vector<double>> cuts,
           std::vector<bool> degenerate);

  std::size_t n_bins() const { return n_bins_; }
  std::size_t n_checkpoints() const { return cuts_.size(); }
  bool empty() const { return cuts_.empty(); }
  const std::vector<double>& cuts(std::size_t k) const { return cuts_.at(k); }
  bool degenerate(std::size_t k) const { return degenerate_.at(k); }

  /// Number of distinct cut points <= value; 0 for degenerate checkpoints.
  std::size_t bin_index(std::size_t k, double max_posterior) const;
  /// bin_index / (B - 1), or 0 when B = 1.
  double scaled_bin(std::size_t k, double max_posterior) const;

  void save(std::ostream& out) const;
  static BinTable load(std::istream& in);
  bool operator==(const BinTable&) const = default;

 private:
  std::size_t n_bins_ = 0;
  std::vector<std::vector<double>> cuts_;
  std::vector<std::vector<double>> distinct_;
  std::vector<bool> degenerate_;
};

/// Cut i (i = 1..B-1) sits at position p = i n / B of the sorted sample: the midpoint of
/// the two order statistics straddling p.
BinTable fit_bins(std::span<const PosteriorSequence> posteriors, std::size_t n_bins);

/// Features the trigger rules consume, all in [0, 1].
struct TriggerState {
  double max_posterior = 0.0;
  double margin = 0.0;
  ClassIndex predicted = 0;
  std::size_t n_classes = 0;
  double confidence_bin = 0.0;
  double time = 0.0;  // t / T
};

TriggerState state_features(std::span<const double> posterior, std::size_t checkpoint,
                            std::size_t t, std::size_t length, const BinTable* bins);

/// Which TriggerState components make up a state vector.
struct FeatureSet {
  bool max_posterior = true;
  bool margin = true;
  bool predicted_class = true;
  bool confidence = true;
  bool time = true;

  static FeatureSet all() { return {}; }
  static FeatureSet none() { return {false, false, false, false, false}; }
  /// Parses "all" or a '+'-separated list of max_posterior, margin, pred_class,
  /// confidence, time.
  static FeatureSet parse(const std::string& text);
  std::string to_string() const;
  std::size_t dimension(std::size_t n_classes) const;
  bool operator==(const FeatureSet&) const = default;
};

/// Flattens a state into the network input (predicted class one-hot encoded).
std::vector<double> encode_state(const TriggerState& state, const FeatureSet& features);
void encode_state(const TriggerState& state, const FeatureSet& features, std::span<double> out);

/// Writes the chain followed by an optional bin table; the model file the CLI uses.
void save_model_file(const std::filesystem::path& path, const PrefixClassifierChain* chain,
                     const BinTable& bins);
struct ModelFile {
  std::optional<PrefixClassifierChain> chain;
  BinTable bins;
};
ModelFile load_model_file(const std::filesystem::path& path);

}  // namespace ects
