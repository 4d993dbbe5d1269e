#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ects/bench.hpp"
#include "ects/classifier.hpp"
#include "ects/error.hpp"
#include "ects/ingest.hpp"
#include "ects/rl.hpp"
#include "ects/synthetic.hpp"

namespace ects {

enum class ClassifierMode { Builtin, External };

/// Every setting the command-line tool understands. Keys are the field names below.
struct RunConfig {
  std::vector<std::string> datasets;
  std::vector<std::string> posteriors;  // external mode: one cache per dataset
  ClassifierMode classifier_mode = ClassifierMode::Builtin;
  std::vector<std::string> methods{"proba_threshold", "stopping_rule", "economy", "calimera",
                                   "alert"};
  std::string method = "alert";
  std::vector<double> alphas = default_alpha_grid();
  double alpha = 0.5;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string model;   // defaults to <output_dir>/model.txt
  std::string policy;  // defaults to <output_dir>/<method>.policy

  CostSettings costs;
  TsvOptions tsv;
  SplitSpec split;
  ChainOptions chain;
  std::size_t n_bins = 10;
  double calimera_lambda = 1e-2;
  std::size_t bootstrap_resamples = 1000;
  TrainConfig train;
  std::size_t workers = 1;

  SyntheticSpec synthetic;
  std::size_t surface_time_steps = 21;
  std::size_t surface_proba_steps = 21;

  /// All recognised keys in canonical order.
  static const std::vector<std::string>& keys();
  /// Throws ConfigError naming the key when it is unknown or the value does not parse.
  void set(const std::string& key, const std::string& value);
  /// Canonical key=value dump, one entry per key.
  std::vector<std::pair<std::string, std::string>> entries() const;
  /// Cross-field checks.
  void validate() const;

  SweepConfig sweep() const;
  std::filesystem::path model_path() const;
  std::filesystem::path policy_path() const;
};

/// Default configuration, with output_dir taken from ECTS_OUTPUT_DIR when set.
RunConfig default_config();

/// Applies `key = value` lines on top of `config`. '#' starts a comment.
void apply_config(RunConfig& config, std::istream& in, const std::string& source = "<config>");
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Process exit code for an error kind: config 2, io 3, parse 4, data/input 5,
/// fit/training 6.
int exit_code(ErrorKind kind);

}  // namespace ects
