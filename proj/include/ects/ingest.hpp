#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ects/core.hpp"

namespace ects {

struct TsvOptions {
  char delimiter = '\t';
  /// Each row holds channels * T values laid out channel after channel.
  std::size_t channels = 1;
  /// Checkpoint grid resolution (number of equally spaced decision points).
  std::size_t checkpoint_steps = 20;
};

/// Reads UCR-style rows: label first, then the measurements.
SeriesDataset parse_tsv_dataset(const std::filesystem::path& path, const TsvOptions& options = {});
SeriesDataset parse_tsv_dataset(std::istream& in, const TsvOptions& options = {},
                                const std::string& source = "<stream>");
void write_tsv_dataset(const SeriesDataset& dataset, const std::filesystem::path& path,
                       char delimiter = '\t');
void write_tsv_dataset(const SeriesDataset& dataset, std::ostream& out, char delimiter = '\t');

struct SplitSpec {
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
  double classifier_fraction_of_train = 0.5;
  double validation_fraction_of_trigger_train = 0.3;
  std::size_t n_folds = 3;
  bool stratify = true;
};

struct ValidationFold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
};

/// Index partitions into the source dataset.
struct DatasetSplits {
  std::vector<std::size_t> classifier_train;
  std::vector<std::size_t> trigger_train;
  std::vector<ValidationFold> validation_folds;  // both sides drawn from trigger_train
  std::vector<std::size_t> test;
};

/// Stratified, seeded partitioning. Held-out sizes are floored per class, so any
/// remainder lands on the training side.
DatasetSplits split_dataset(const SeriesDataset& dataset, const SplitSpec& spec);

/// Posteriors for every series at every checkpoint.
struct PosteriorCache {
  std::size_t n_checkpoints = 0;
  std::size_t n_classes = 0;
  std::vector<PosteriorSequence> series;

  bool operator==(const PosteriorCache&) const = default;
};

/// Plain text: a header line "#<series> <checkpoints> <classes>" followed by one line
/// of space-separated probabilities per (series, checkpoint).
PosteriorCache read_posterior_cache(const std::filesystem::path& path);
PosteriorCache read_posterior_cache(std::istream& in);
void write_posterior_cache(const PosteriorCache& cache, const std::filesystem::path& path);
void write_posterior_cache(const PosteriorCache& cache, std::ostream& out);

}  // namespace ects
