// ects: command-line front end for the early-classification pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "ects/bench.hpp"
#include "ects/config.hpp"
#include "ects/error.hpp"
#include "ects/log.hpp"
#include "ects/synthetic.hpp"

namespace fs = std::filesystem;
using namespace ects;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

const std::string& first_dataset(const RunConfig& cfg) {
  if (cfg.datasets.empty()) throw ConfigError("config key 'datasets' is empty");
  return cfg.datasets.front();
}

SeriesDataset load_dataset(const RunConfig& cfg, const std::string& path) {
  return parse_tsv_dataset(path, cfg.tsv);
}

SplitSpec split_of(const RunConfig& cfg) {
  SplitSpec s = cfg.split;
  s.seed = cfg.seed;
  return s;
}

/// Posteriors, splits and bins for the first dataset, from the saved model file in
/// builtin mode or the posterior cache in external mode.
PreparedDataset prepare_downstream(const RunConfig& cfg) {
  const auto& path = first_dataset(cfg);
  const auto data = load_dataset(cfg, path);
  if (cfg.classifier_mode == ClassifierMode::External) {
    const auto cache = read_posterior_cache(cfg.posteriors.front());
    return prepare_dataset(path, data, cache, split_of(cfg), cfg.n_bins);
  }
  const auto model = load_model_file(cfg.model_path());
  if (!model.chain)
    throw DataError("model file " + cfg.model_path().string() + " holds no classifier chain");
  PosteriorCache cache;
  cache.series = posteriors(*model.chain, data);
  cache.n_checkpoints = data.checkpoints.size();
  cache.n_classes = data.n_classes();
  auto prepared = prepare_dataset(path, data, cache, split_of(cfg), cfg.n_bins);
  if (!model.bins.empty()) prepared.bins = model.bins;
  return prepared;
}

int cmd_generate(const RunConfig& cfg, const std::string& output) {
  SyntheticSpec spec = cfg.synthetic;
  spec.seed = cfg.seed;
  spec.checkpoint_steps = cfg.tsv.checkpoint_steps;
  const auto data = make_synthetic(spec);
  const fs::path out = output.empty() ? fs::path(cfg.output_dir) / "synthetic.tsv" : fs::path(output);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  write_tsv_dataset(data, out, cfg.tsv.delimiter);
  std::cout << "wrote " << out.string() << " series=" << data.size() << " length=" << data.length
            << "\n";
  return 0;
}

int cmd_fit_classifier(const RunConfig& cfg) {
  const auto& path = first_dataset(cfg);
  const auto data = load_dataset(cfg, path);
  const auto splits = split_dataset(data, split_of(cfg));
  const auto chain = fit_chain(subset(data, splits.classifier_train), cfg.chain);
  PosteriorCache cache;
  cache.series = posteriors(chain, data);
  cache.n_checkpoints = data.checkpoints.size();
  cache.n_classes = data.n_classes();
  std::vector<PosteriorSequence> trigger_train;
  for (auto i : splits.trigger_train) trigger_train.push_back(cache.series[i]);
  const auto bins = fit_bins(trigger_train, cfg.n_bins);

  ensure_dir(cfg.output_dir);
  save_model_file(cfg.model_path(), &chain, bins);
  const auto cache_path = fs::path(cfg.output_dir) / "posteriors.txt";
  write_posterior_cache(cache, cache_path);

  std::size_t correct = 0;
  for (auto i : splits.test)
    correct += cache.series[i].predicted(cache.n_checkpoints - 1) == data.series[i].label;
  std::cout << "model=" << cfg.model_path().string() << "\nposteriors=" << cache_path.string()
            << "\ntest_accuracy_full_length="
            << fmt(splits.test.empty() ? 0.0
                                       : static_cast<double>(correct) / splits.test.size())
            << "\n";
  return 0;
}

int cmd_train_trigger(const RunConfig& cfg) {
  const auto data = prepare_downstream(cfg);
  const auto costs = dataset_costs(data, cfg.alpha, cfg.costs);
  const auto policy = fit_method(cfg.method, data, costs, cfg.sweep(), cfg.seed);
  ensure_dir(cfg.policy_path().has_parent_path() ? cfg.policy_path().parent_path() : fs::path("."));
  save_policy(*policy, cfg.policy_path());
  std::cout << "method=" << cfg.method << "\nalpha=" << fmt(cfg.alpha)
            << "\npolicy=" << cfg.policy_path().string() << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  const auto data = prepare_downstream(cfg);
  const auto costs = dataset_costs(data, cfg.alpha, cfg.costs);
  const auto policy = load_policy(cfg.policy_path());
  const auto run = evaluate_on_test(*policy, data, costs, cfg.method);
  const auto& r = run.report;
  const std::vector<std::pair<std::string, std::string>> rows{
      {"method", cfg.method},
      {"alpha", fmt(cfg.alpha)},
      {"avg_cost", fmt(r.avg_cost)},
      {"avg_delay_cost", fmt(r.avg_delay_cost)},
      {"avg_misclassification_cost", fmt(r.avg_misclassification_cost)},
      {"unweighted_avg_cost", fmt(r.unweighted_avg_cost)},
      {"mean_trigger_time", fmt(r.mean_trigger_time)},
      {"accuracy", fmt(r.accuracy)},
      {"count", std::to_string(r.count)},
      {"oracle_avg_cost", fmt(run.oracle_avg_cost)},
      {"relative_gap", fmt(run.relative_gap)},
      {"mean_time_offset", fmt(run.mean_time_offset)}};
  for (const auto& [k, v] : rows) std::cout << k << '=' << v << '\n';

  ensure_dir(cfg.output_dir);
  const auto csv = fs::path(cfg.output_dir) / ("evaluate_" + cfg.method + ".csv");
  std::ofstream out(csv);
  if (!out) throw IoError("cannot write " + csv.string());
  for (std::size_t i = 0; i < rows.size(); ++i) out << (i ? "," : "") << rows[i].first;
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) out << (i ? "," : "") << rows[i].second;
  out << '\n';
  return 0;
}

int cmd_benchmark(const RunConfig& cfg) {
  if (cfg.datasets.empty()) throw ConfigError("config key 'datasets' is empty");
  std::vector<PreparedDataset> prepared;
  for (std::size_t i = 0; i < cfg.datasets.size(); ++i) {
    const auto data = load_dataset(cfg, cfg.datasets[i]);
    const auto id = fs::path(cfg.datasets[i]).stem().string();
    if (cfg.classifier_mode == ClassifierMode::External)
      prepared.push_back(prepare_dataset(id, data, read_posterior_cache(cfg.posteriors[i]),
                                         split_of(cfg), cfg.n_bins));
    else
      prepared.push_back(prepare_dataset(id, data, split_of(cfg), cfg.chain, cfg.n_bins));
  }
  auto runs = alpha_sweep(prepared, cfg.sweep());
  const auto report = summarize(std::move(runs), cfg.seed, cfg.bootstrap_resamples);
  emit_report(report, cfg.output_dir, cfg.seed, cfg.entries());
  std::size_t failed = 0;
  for (const auto& r : report.runs) failed += !r.ok;
  std::cout << "report=" << cfg.output_dir << "\nruns=" << report.runs.size()
            << "\nfailed=" << failed << "\n";
  return 0;
}

int cmd_surface(const RunConfig& cfg) {
  const auto policy = load_policy(cfg.policy_path());
  std::optional<PreparedDataset> data;
  if (!cfg.datasets.empty()) data = prepare_downstream(cfg);
  DecisionContext ctx;
  if (data) {
    ctx = data->context();
  } else {
    ctx.length = 100;
    ctx.checkpoints = default_checkpoints(ctx.length, cfg.tsv.checkpoint_steps);
  }
  SurfaceSpec spec;
  spec.time_steps = cfg.surface_time_steps;
  spec.proba_steps = cfg.surface_proba_steps;
  spec.n_classes = data ? data->n_classes : 2;
  const auto surface = decision_surface(*policy, spec, ctx);
  ensure_dir(cfg.output_dir);
  const auto path = fs::path(cfg.output_dir) / ("surface_" + cfg.method + ".csv");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  surface.write_csv(out);
  std::cout << "surface=" << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early classification of time series: classifiers, trigger rules, benchmark"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  app.add_option("-c,--config", config_file, "key=value configuration file");
  std::vector<std::string> overrides;
  app.add_option("--set", overrides, "key=value override (repeatable)");
  std::map<std::string, std::string> flag_values;
  for (const auto& key : RunConfig::keys())
    app.add_option("--" + key, flag_values[key], "config key " + key);

  auto* generate = app.add_subcommand("generate", "write a synthetic two-class dataset");
  std::string generate_output;
  generate->add_option("-o,--output", generate_output, "output TSV path");
  auto* fit = app.add_subcommand("fit-classifier", "fit the prefix classifier chain and bins");
  auto* train = app.add_subcommand("train-trigger", "fit one trigger method at one alpha");
  auto* evaluate = app.add_subcommand("evaluate", "score a saved policy on the test split");
  auto* bench = app.add_subcommand("benchmark", "alpha sweep over methods and datasets");
  auto* surface = app.add_subcommand("surface", "decision surface of a saved policy as CSV");
  auto* show = app.add_subcommand("show-config", "print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error kind=config code=2 message=\"" << one_line(e.what()) << "\"\n";
    return 2;
  }

  try {
    RunConfig cfg = default_config();
    if (!config_file.empty()) apply_config_file(cfg, config_file);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& key : RunConfig::keys())
      if (app.count("--" + key) > 0) cfg.set(key, flag_values[key]);
    cfg.validate();

    if (*generate) return cmd_generate(cfg, generate_output);
    if (*fit) return cmd_fit_classifier(cfg);
    if (*train) return cmd_train_trigger(cfg);
    if (*evaluate) return cmd_evaluate(cfg);
    if (*bench) return cmd_benchmark(cfg);
    if (*surface) return cmd_surface(cfg);
    if (*show) {
      for (const auto& [k, v] : cfg.entries()) std::cout << k << '=' << v << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error kind=" << error_kind_name(e.kind()) << " code=" << exit_code(e.kind())
              << " message=\"" << one_line(e.what()) << "\"\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error kind=internal code=1 message=\"" << one_line(e.what()) << "\"\n";
    return 1;
  }
  return 1;
}
