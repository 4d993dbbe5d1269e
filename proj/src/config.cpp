#include "ects/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>

#include "ects/error.hpp"
#include "text_util.hpp"

namespace ects {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (auto part : detail::split(value, ',')) {
    const auto t = detail::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  const auto v = detail::parse_double(value);
  if (!v || !std::isfinite(*v))
    throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
  return *v;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  const auto t = detail::trim(value);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError("config key '" + key + "': '" + value + "' is not a non-negative integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': '" + value + "' is not a boolean");
}

char to_delimiter(const std::string& key, const std::string& value) {
  if (value == "tab" || value == "\t") return '\t';
  if (value == "comma" || value == ",") return ',';
  if (value == "space" || value == "whitespace") return ' ';
  if (value == "semicolon" || value == ";") return ';';
  throw ConfigError("config key '" + key + "': unknown delimiter '" + value +
                    "' (tab, comma, space, semicolon)");
}

std::string delimiter_name(char c) {
  switch (c) {
    case '\t': return "tab";
    case ',': return "comma";
    case ' ': return "space";
    default: return "semicolon";
  }
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define ECTS_DOUBLE(path)                                                                    \
  Field {                                                                                    \
    [](RunConfig& c, const std::string& k, const std::string& v) { c.path = to_double(k, v); }, \
        [](const RunConfig& c) { return detail::format_double(c.path); }                     \
  }
#define ECTS_SIZE(path)                                                                      \
  Field {                                                                                    \
    [](RunConfig& c, const std::string& k, const std::string& v) {                           \
      c.path = static_cast<std::size_t>(to_uint(k, v));                                      \
    },                                                                                       \
        [](const RunConfig& c) { return std::to_string(c.path); }                            \
  }

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table{
      {"datasets",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.datasets = split_list(v); },
        [](const RunConfig& c) { return join(c.datasets); }}},
      {"posteriors",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          c.posteriors = split_list(v);
        },
        [](const RunConfig& c) { return join(c.posteriors); }}},
      {"classifier_mode",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "builtin")
            c.classifier_mode = ClassifierMode::Builtin;
          else if (v == "external" || v == "external-posteriors")
            c.classifier_mode = ClassifierMode::External;
          else
            throw ConfigError("config key '" + k + "': expected builtin or external, got '" + v +
                              "'");
        },
        [](const RunConfig& c) {
          return std::string(c.classifier_mode == ClassifierMode::Builtin ? "builtin"
                                                                           : "external");
        }}},
      {"methods",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          auto m = split_list(v);
          for (const auto& name : m)
            if (!is_known_method(name))
              throw ConfigError("config key '" + k + "': unknown method '" + name + "'");
          c.methods = std::move(m);
        },
        [](const RunConfig& c) { return join(c.methods); }}},
      {"method",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          if (!is_known_method(v))
            throw ConfigError("config key '" + k + "': unknown method '" + v + "'");
          c.method = v;
        },
        [](const RunConfig& c) { return c.method; }}},
      {"alphas",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          std::vector<double> a;
          for (const auto& item : split_list(v)) a.push_back(to_double(k, item));
          c.alphas = std::move(a);
        },
        [](const RunConfig& c) {
          std::vector<std::string> s;
          for (double a : c.alphas) s.push_back(detail::format_double(a));
          return join(s);
        }}},
      {"alpha", ECTS_DOUBLE(alpha)},
      {"seed",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_uint(k, v); },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"output_dir",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; },
        [](const RunConfig& c) { return c.output_dir; }}},
      {"model",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.model = v; },
        [](const RunConfig& c) { return c.model; }}},
      {"policy",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.policy = v; },
        [](const RunConfig& c) { return c.policy; }}},
      {"delay_scale", ECTS_DOUBLE(costs.delay_scale)},
      {"minority_factor", ECTS_DOUBLE(costs.minority_factor)},
      {"delimiter",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.tsv.delimiter = to_delimiter(k, v);
        },
        [](const RunConfig& c) { return delimiter_name(c.tsv.delimiter); }}},
      {"channels", ECTS_SIZE(tsv.channels)},
      {"checkpoints", ECTS_SIZE(tsv.checkpoint_steps)},
      {"train_fraction", ECTS_DOUBLE(split.train_fraction)},
      {"classifier_fraction", ECTS_DOUBLE(split.classifier_fraction_of_train)},
      {"validation_fraction", ECTS_DOUBLE(split.validation_fraction_of_trigger_train)},
      {"stratify",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.split.stratify = to_bool(k, v);
        },
        [](const RunConfig& c) { return std::string(c.split.stratify ? "true" : "false"); }}},
      {"ridge_lambda", ECTS_DOUBLE(chain.ridge_lambda)},
      {"n_bins", ECTS_SIZE(n_bins)},
      {"calimera_lambda", ECTS_DOUBLE(calimera_lambda)},
      {"bootstrap_resamples", ECTS_SIZE(bootstrap_resamples)},
      {"reward_mode",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          c.train.reward_mode = parse_reward_mode(v);
        },
        [](const RunConfig& c) { return std::string(to_string(c.train.reward_mode)); }}},
      {"learning_rate", ECTS_DOUBLE(train.learning_rate)},
      {"tau", ECTS_DOUBLE(train.tau)},
      {"gamma", ECTS_DOUBLE(train.gamma)},
      {"batch_size", ECTS_SIZE(train.batch_size)},
      {"max_epochs", ECTS_SIZE(train.max_epochs)},
      {"validate_every", ECTS_SIZE(train.validate_every)},
      {"n_splits",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.n_splits = c.split.n_folds = static_cast<std::size_t>(to_uint(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.split.n_folds); }}},
      {"hidden_dim", ECTS_SIZE(train.hidden_dim)},
      {"reward_scale", ECTS_DOUBLE(train.reward_scale)},
      {"features",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          c.train.features = FeatureSet::parse(v);
        },
        [](const RunConfig& c) { return c.train.features.to_string(); }}},
      {"workers", ECTS_SIZE(workers)},
      {"synth_series", ECTS_SIZE(synthetic.n_series)},
      {"synth_length", ECTS_SIZE(synthetic.length)},
      {"synth_signal_checkpoint", ECTS_SIZE(synthetic.signal_checkpoint)},
      {"synth_noise", ECTS_DOUBLE(synthetic.noise)},
      {"synth_amplitude", ECTS_DOUBLE(synthetic.amplitude)},
      {"synth_minority_fraction", ECTS_DOUBLE(synthetic.minority_fraction)},
      {"surface_time_steps", ECTS_SIZE(surface_time_steps)},
      {"surface_proba_steps", ECTS_SIZE(surface_proba_steps)},
  };
  return table;
}

#undef ECTS_DOUBLE
#undef ECTS_SIZE

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : fields()) out.push_back(name);
    return out;
  }();
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields())
    if (name == key) {
      try {
        field.set(*this, key, std::string(detail::trim(value)));
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
      }
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : fields()) out.emplace_back(name, field.get(*this));
  return out;
}

void RunConfig::validate() const {
  train.validate();
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alphas must lie in [0, 1]");
  if (alphas.empty()) throw ConfigError("alphas is empty");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(costs.delay_scale > 0.0)) throw ConfigError("delay_scale must be positive");
  if (!(costs.minority_factor > 0.0)) throw ConfigError("minority_factor must be positive");
  if (n_bins == 0) throw ConfigError("n_bins must be positive");
  if (tsv.channels == 0) throw ConfigError("channels must be positive");
  if (tsv.checkpoint_steps == 0) throw ConfigError("checkpoints must be positive");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1)");
  if (!(split.classifier_fraction_of_train > 0.0 && split.classifier_fraction_of_train < 1.0))
    throw ConfigError("classifier_fraction must lie in (0, 1)");
  if (!(split.validation_fraction_of_trigger_train > 0.0 &&
        split.validation_fraction_of_trigger_train < 1.0))
    throw ConfigError("validation_fraction must lie in (0, 1)");
  if (!(chain.ridge_lambda > 0.0)) throw ConfigError("ridge_lambda must be positive");
  if (!(calimera_lambda > 0.0)) throw ConfigError("calimera_lambda must be positive");
  if (methods.empty()) throw ConfigError("methods is empty");
  for (const auto& m : methods)
    if (!is_known_method(m)) throw ConfigError("config key 'methods': unknown method '" + m + "'");
  if (!is_known_method(method))
    throw ConfigError("config key 'method': unknown method '" + method + "'");
  if (workers == 0) throw ConfigError("workers must be positive");
  if (surface_time_steps < 2 || surface_proba_steps < 2)
    throw ConfigError("surface grid resolutions must be at least 2");
  if (classifier_mode == ClassifierMode::External && posteriors.size() != datasets.size())
    throw ConfigError("external classifier mode needs one posteriors file per dataset");
}

SweepConfig RunConfig::sweep() const {
  SweepConfig s;
  s.methods = methods;
  s.alphas = alphas;
  s.seed = seed;
  s.train = train;
  s.costs = costs;
  s.calimera_lambda = calimera_lambda;
  s.workers = workers;
  return s;
}

std::filesystem::path RunConfig::model_path() const {
  return model.empty() ? std::filesystem::path(output_dir) / "model.txt" : std::filesystem::path(model);
}

std::filesystem::path RunConfig::policy_path() const {
  return policy.empty() ? std::filesystem::path(output_dir) / (method + ".policy")
                        : std::filesystem::path(policy);
}

RunConfig default_config() {
  RunConfig c;
  const char* env = std::getenv("ECTS_OUTPUT_DIR");
  c.output_dir = env && *env ? env : "ects_out";
  return c;
}

void apply_config(RunConfig& config, std::istream& in, const std::string& source) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const auto body = detail::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(source + ":" + std::to_string(number) + ": expected key = value");
    const std::string key(detail::trim(body.substr(0, eq)));
    const std::string value(detail::trim(body.substr(eq + 1)));
    try {
      config.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  apply_config(config, in, path.string());
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::Parse: return 4;
    case ErrorKind::Data:
    case ErrorKind::Input: return 5;
    case ErrorKind::Fit:
    case ErrorKind::Training: return 6;
  }
  return 1;
}

}  // namespace ects
