// Python bindings: costs, statistics, datasets and the fit/evaluate/benchmark pipeline.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>

#include "ects/bench.hpp"
#include "ects/config.hpp"
#include "ects/error.hpp"
#include "ects/ingest.hpp"
#include "ects/synthetic.hpp"

namespace py = pybind11;
using namespace ects;

namespace {

using Settings = std::map<std::string, std::string>;

RunConfig config_from(const Settings& settings) {
  RunConfig c = default_config();
  for (const auto& [k, v] : settings) c.set(k, v);
  c.validate();
  return c;
}

py::dict metrics(const BenchmarkRun& run) {
  py::dict d;
  d["method"] = run.method;
  d["alpha"] = run.alpha;
  d["avg_cost"] = run.report.avg_cost;
  d["avg_delay_cost"] = run.report.avg_delay_cost;
  d["avg_misclassification_cost"] = run.report.avg_misclassification_cost;
  d["mean_trigger_time"] = run.report.mean_trigger_time;
  d["accuracy"] = run.report.accuracy;
  d["count"] = run.report.count;
  d["oracle_avg_cost"] = run.oracle_avg_cost;
  d["relative_gap"] = run.relative_gap;
  return d;
}

py::dict dataset_dict(const SeriesDataset& d) {
  std::vector<std::vector<double>> values;
  for (const auto& s : d.series) {
    std::vector<double> row;
    for (const auto& c : s.channels) row.insert(row.end(), c.begin(), c.end());
    values.push_back(std::move(row));
  }
  py::dict out;
  out["values"] = values;
  out["labels"] = d.labels();
  out["class_names"] = d.class_names;
  out["length"] = d.length;
  out["checkpoints"] = d.checkpoints;
  out["minority_class"] = d.minority_class;
  return out;
}

PreparedDataset prepare(const RunConfig& c, const std::string& path) {
  auto split = c.split;
  split.seed = c.seed;
  const auto data = parse_tsv_dataset(path, c.tsv);
  return prepare_dataset(std::filesystem::path(path).stem().string(), data, split, c.chain,
                         c.n_bins);
}

}  // namespace

PYBIND11_MODULE(_ects, m) {
  m.doc() = "Early classification of time series: costs, trigger rules and benchmarks";

  static py::exception<Error> base(m, "EctsError", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<ParseError> parse_error(m, "ParseError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), e.what());
    } catch (const ParseError& e) {
      PyErr_SetString(parse_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(base.ptr(), e.what());
    }
  });

  m.def("delay_cost", &delay_cost, py::arg("t"), py::arg("length"), py::arg("scale") = 100.0);
  m.def("misclassification_cost", &misclassification_cost, py::arg("predicted"),
        py::arg("truth"), py::arg("minority"), py::arg("n_classes"),
        py::arg("minority_factor") = 100.0);
  m.def("default_checkpoints", &default_checkpoints, py::arg("length"), py::arg("steps") = 20);

  m.def(
      "oracle_avg_cost",
      [](const std::vector<std::vector<std::vector<double>>>& posteriors,
         const std::vector<ClassIndex>& labels, const std::vector<std::size_t>& checkpoints,
         std::size_t length, double alpha, ClassIndex minority, double delay_scale,
         double minority_factor) {
        if (posteriors.empty()) throw InputError("oracle_avg_cost: no series");
        std::vector<PosteriorSequence> seqs;
        for (const auto& rows : posteriors) seqs.push_back(PosteriorSequence::from_rows(rows));
        const auto costs = CostModel::standard(seqs.front().n_classes(), minority, length, alpha,
                                               delay_scale, minority_factor);
        return oracle_avg_cost(seqs, labels, checkpoints, costs);
      },
      py::arg("posteriors"), py::arg("labels"), py::arg("checkpoints"), py::arg("length"),
      py::arg("alpha"), py::arg("minority"), py::arg("delay_scale") = 100.0,
      py::arg("minority_factor") = 100.0,
      "Mean hindsight-optimal cost; posteriors[i][k] is the probability row of series i at "
      "checkpoint k.");

  m.def(
      "wilcoxon_signed_rank",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = wilcoxon_signed_rank(a, b);
        py::dict d;
        d["p_value"] = r.p_value;
        d["w_plus"] = r.w_plus;
        d["n"] = r.n;
        d["exact"] = r.exact;
        return d;
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "holm_correction",
      [](const std::vector<double>& p, double level) { return holm_correction(p, level); },
      py::arg("p_values"), py::arg("level") = 0.05);
  m.def(
      "win_rate", [](const std::vector<double>& a, const std::vector<double>& b) {
        return win_rate(a, b);
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "average_ranks", [](const std::vector<double>& c) { return average_ranks(c); },
      py::arg("costs"));
  m.def(
      "mean_ranks",
      [](const std::vector<std::vector<double>>& costs, std::uint64_t seed, std::size_t resamples,
         double level) {
        const auto r = mean_ranks(costs, seed, resamples, level);
        py::dict d;
        d["mean"] = r.mean;
        d["lower"] = r.lower;
        d["upper"] = r.upper;
        return d;
      },
      py::arg("costs"), py::arg("seed") = 0, py::arg("resamples") = 1000, py::arg("level") = 0.9);
  m.def(
      "pareto_front",
      [](const std::vector<std::pair<double, double>>& points) { return pareto_front(points); },
      py::arg("points"));

  m.def(
      "make_synthetic",
      [](std::size_t n_series, std::size_t length, std::size_t signal_checkpoint, double noise,
         double amplitude, double minority_fraction, std::uint64_t seed) {
        SyntheticSpec s;
        s.n_series = n_series;
        s.length = length;
        s.signal_checkpoint = signal_checkpoint;
        s.noise = noise;
        s.amplitude = amplitude;
        s.minority_fraction = minority_fraction;
        s.seed = seed;
        return dataset_dict(make_synthetic(s));
      },
      py::arg("n_series") = 200, py::arg("length") = 100, py::arg("signal_checkpoint") = 10,
      py::arg("noise") = 1.0, py::arg("amplitude") = 1.0, py::arg("minority_fraction") = 0.5,
      py::arg("seed") = 0);
  m.def(
      "write_synthetic",
      [](const std::filesystem::path& path, const Settings& settings) {
        const auto c = config_from(settings);
        auto spec = c.synthetic;
        spec.seed = c.seed;
        spec.checkpoint_steps = c.tsv.checkpoint_steps;
        write_tsv_dataset(make_synthetic(spec), path, c.tsv.delimiter);
      },
      py::arg("path"), py::arg("settings") = Settings{});
  m.def(
      "load_tsv",
      [](const std::filesystem::path& path, const Settings& settings) {
        return dataset_dict(parse_tsv_dataset(path, config_from(settings).tsv));
      },
      py::arg("path"), py::arg("settings") = Settings{});

  m.def("config_keys", &RunConfig::keys);
  m.def(
      "resolve_config", [](const Settings& settings) { return config_from(settings).entries(); },
      py::arg("settings") = Settings{},
      "Effective key/value pairs after applying `settings` on top of the defaults.");

  m.def(
      "fit_and_evaluate",
      [](const std::string& dataset, const Settings& settings) {
        const auto c = config_from(settings);
        PreparedDataset data;
        {
          py::gil_scoped_release release;
          data = prepare(c, dataset);
        }
        const auto costs = dataset_costs(data, c.alpha, c.costs);
        BenchmarkRun run;
        {
          py::gil_scoped_release release;
          const auto policy = fit_method(c.method, data, costs, c.sweep(), c.seed);
          run = evaluate_on_test(*policy, data, costs, c.method);
        }
        run.alpha = c.alpha;
        return metrics(run);
      },
      py::arg("dataset"), py::arg("settings") = Settings{},
      "Fits the chain and one trigger method (settings 'method', 'alpha') and scores the "
      "test split.");

  m.def(
      "benchmark",
      [](const std::vector<std::string>& datasets, const Settings& settings) {
        auto c = config_from(settings);
        std::vector<BenchmarkRun> runs;
        BenchmarkReport report;
        {
          py::gil_scoped_release release;
          std::vector<PreparedDataset> prepared;
          for (const auto& d : datasets) prepared.push_back(prepare(c, d));
          report = summarize(alpha_sweep(prepared, c.sweep()), c.seed, c.bootstrap_resamples);
          if (!c.output_dir.empty()) emit_report(report, c.output_dir, c.seed, c.entries());
        }
        py::list out;
        for (const auto& r : report.runs) {
          auto d = metrics(r);
          d["dataset"] = r.dataset;
          d["ok"] = r.ok;
          d["error"] = r.error;
          out.append(d);
        }
        return out;
      },
      py::arg("datasets"), py::arg("settings") = Settings{},
      "Alpha sweep over methods and datasets. Writes the report tables to settings "
      "'output_dir' and returns one dict per cell.");
}
