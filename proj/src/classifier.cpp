#include "ects/classifier.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ects/error.hpp"
#include "ects/log.hpp"
#include "text_util.hpp"

namespace ects {

std::vector<double> summary_features(const LabeledSeries& series, std::size_t prefix) {
  if (prefix < 1 || prefix > series.length())
    throw InputError("summary_features: prefix length out of range");
  std::vector<double> out;
  out.reserve(series.channels.size() * kFeaturesPerChannel);
  const double n = static_cast<double>(prefix);
  for (const auto& c : series.channels) {
    double mean = 0.0, lo = c[0], hi = c[0];
    for (std::size_t i = 0; i < prefix; ++i) {
      mean += c[i];
      lo = std::min(lo, c[i]);
      hi = std::max(hi, c[i]);
    }
    mean /= n;
    double ss = 0.0, sxy = 0.0, sxx = 0.0;
    const double tbar = (n - 1.0) / 2.0;
    for (std::size_t i = 0; i < prefix; ++i) {
      const double d = c[i] - mean;
      const double dt = static_cast<double>(i) - tbar;
      ss += d * d;
      sxy += dt * d;
      sxx += dt * dt;
    }
    double crossings = 0.0;
    for (std::size_t i = 0; i + 1 < prefix; ++i)
      if ((c[i] - mean) * (c[i + 1] - mean) < 0.0) crossings += 1.0;
    out.push_back(mean);
    out.push_back(std::sqrt(ss / n));
    out.push_back(sxx > 0.0 ? sxy / sxx : 0.0);
    out.push_back(lo);
    out.push_back(hi);
    out.push_back(c[prefix - 1]);
    out.push_back(crossings);
  }
  return out;
}

std::vector<double> softmax(std::span<const double> scores, double temperature) {
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  double top = -std::numeric_limits<double>::infinity();
  for (double s : scores) top = std::max(top, s / temperature);
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] / temperature - top);
    z += out[i];
  }
  for (auto& v : out) v /= z;
  return out;
}

PrefixClassifierChain::PrefixClassifierChain(std::size_t n_classes, std::size_t n_channels,
                                             std::size_t length,
                                             std::vector<CheckpointModel> models)
    : n_classes_(n_classes), n_channels_(n_channels), length_(length), models_(std::move(models)) {
  const std::size_t f = n_channels_ * kFeaturesPerChannel;
  for (const auto& m : models_) {
    if (m.feature_mean.size() != f || m.feature_scale.size() != f ||
        m.weights.size() != f * n_classes_ || m.bias.size() != n_classes_)
      throw InputError("classifier chain: model dimensions do not match");
    if (!(m.temperature > 0.0)) throw InputError("classifier chain: temperature must be positive");
    if (m.prefix < 1 || m.prefix > length_) throw InputError("classifier chain: bad prefix");
  }
}

std::vector<std::size_t> PrefixClassifierChain::checkpoints() const {
  std::vector<std::size_t> out;
  for (const auto& m : models_) out.push_back(m.prefix);
  return out;
}

std::vector<double> PrefixClassifierChain::scores(const LabeledSeries& series,
                                                  std::size_t k) const {
  const auto& m = models_.at(k);
  const auto x = summary_features(series, m.prefix);
  std::vector<double> s = m.bias;
  for (std::size_t f = 0; f < x.size(); ++f) {
    const double z = (x[f] - m.feature_mean[f]) / m.feature_scale[f];
    for (std::size_t c = 0; c < n_classes_; ++c) s[c] += z * m.weights[f * n_classes_ + c];
  }
  return s;
}

PosteriorSequence PrefixClassifierChain::posteriors(const LabeledSeries& series) const {
  if (series.length() != length_)
    throw InputError("posteriors: series length " + std::to_string(series.length()) +
                     " does not match chain length " + std::to_string(length_));
  if (series.channels.size() != n_channels_)
    throw InputError("posteriors: channel count does not match the chain");
  PosteriorSequence out(models_.size(), n_classes_);
  for (std::size_t k = 0; k < models_.size(); ++k) {
    const auto p = softmax(scores(series, k), models_[k].temperature);
    std::copy(p.begin(), p.end(), out.row(k).begin());
  }
  return out;
}

std::vector<PosteriorSequence> posteriors(const PrefixClassifierChain& chain,
                                          const SeriesDataset& dataset) {
  std::vector<PosteriorSequence> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.series) out.push_back(chain.posteriors(s));
  return out;
}

double fit_temperature(std::span<const double> scores, std::span<const double> targets,
                       std::size_t n_classes, double lo, double hi, double tolerance) {
  if (n_classes == 0 || scores.size() != targets.size() || scores.size() % n_classes != 0)
    throw InputError("fit_temperature: score/target shapes differ");
  const std::size_t n = scores.size() / n_classes;
  const auto nll = [&](double temperature) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = scores.subspan(i * n_classes, n_classes);
      double top = -std::numeric_limits<double>::infinity();
      for (double v : s) top = std::max(top, v / temperature);
      double z = 0.0;
      for (double v : s) z += std::exp(v / temperature - top);
      const double log_z = top + std::log(z);
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double w = targets[i * n_classes + c];
        if (w != 0.0) total -= w * (s[c] / temperature - log_z);
      }
    }
    return total;
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = nll(c), fd = nll(d);
  while (b - a > tolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = nll(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = nll(d);
    }
  }
  return (a + b) / 2.0;
}

namespace {

CheckpointModel fit_checkpoint(const SeriesDataset& data, std::span<const std::size_t> fit_rows,
                               std::size_t prefix, double lambda) {
  const std::size_t n_classes = data.n_classes();
  const std::size_t n_features = data.n_channels() * kFeaturesPerChannel;
  const auto n = static_cast<Eigen::Index>(fit_rows.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(n_features));
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(n_classes));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = data.series[fit_rows[static_cast<std::size_t>(i)]];
    const auto f = summary_features(s, prefix);
    for (std::size_t j = 0; j < n_features; ++j) x(i, static_cast<Eigen::Index>(j)) = f[j];
    y(i, static_cast<Eigen::Index>(s.label)) = 1.0;
  }

  CheckpointModel m;
  m.prefix = prefix;
  m.feature_mean.resize(n_features);
  m.feature_scale.resize(n_features);
  for (std::size_t j = 0; j < n_features; ++j) {
    auto col = x.col(static_cast<Eigen::Index>(j));
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().mean());
    m.feature_mean[j] = mean;
    m.feature_scale[j] = sd > 1e-12 ? sd : 1.0;
    col = (col.array() - mean) / m.feature_scale[j];
  }
  const Eigen::RowVectorXd y_mean = y.colwise().mean();
  y.rowwise() -= y_mean;

  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd w = gram.ldlt().solve(x.transpose() * y);

  m.weights.resize(n_features * n_classes);
  for (std::size_t j = 0; j < n_features; ++j)
    for (std::size_t c = 0; c < n_classes; ++c)
      m.weights[j * n_classes + c] = w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
  m.bias.assign(y_mean.data(), y_mean.data() + n_classes);
  return m;
}

}  // namespace

PrefixClassifierChain fit_chain(const SeriesDataset& train, const ChainOptions& options) {
  if (train.size() == 0) throw FitError("fit_chain: empty training set");
  std::vector<std::size_t> per_class(train.n_classes(), 0);
  for (const auto& s : train.series) ++per_class[s.label];
  if (std::count_if(per_class.begin(), per_class.end(), [](auto c) { return c > 0; }) < 2)
    throw FitError("fit_chain: training data must contain at least two classes");

  // Alternate members of each class between the fitting and calibration halves.
  std::vector<std::size_t> fit_rows, calib_rows;
  std::vector<std::size_t> seen(train.n_classes(), 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto y = train.series[i].label;
    (seen[y]++ % 2 == 0 ? fit_rows : calib_rows).push_back(i);
  }
  if (calib_rows.empty()) calib_rows = fit_rows;

  std::vector<CheckpointModel> models;
  for (std::size_t t : train.checkpoints)
    models.push_back(fit_checkpoint(train, fit_rows, t, options.ridge_lambda));
  const std::size_t c = train.n_classes();
  PrefixClassifierChain chain(c, train.n_channels(), train.length, models);

  for (std::size_t k = 0; k < models.size(); ++k) {
    std::vector<double> scores, targets;
    scores.reserve(calib_rows.size() * c);
    targets.assign(calib_rows.size() * c, 0.0);
    for (std::size_t r = 0; r < calib_rows.size(); ++r) {
      const auto& s = train.series[calib_rows[r]];
      const auto sc = chain.scores(s, k);
      scores.insert(scores.end(), sc.begin(), sc.end());
      targets[r * c + s.label] = 1.0;
    }
    models[k].temperature =
        fit_temperature(scores, targets, c, options.temperature_min, options.temperature_max,
                        options.temperature_tolerance);
  }
  return PrefixClassifierChain(c, train.n_channels(), train.length, std::move(models));
}

void PrefixClassifierChain::save(std::ostream& out) const {
  out << "ects-chain v1\n";
  out << "classes " << n_classes_ << " channels " << n_channels_ << " length " << length_
      << " checkpoints " << models_.size() << '\n';
  const auto line = [&](const char* key, const std::vector<double>& v) {
    out << key;
    for (double x : v) out << ' ' << detail::format_double(x);
    out << '\n';
  };
  for (const auto& m : models_) {
    out << "checkpoint " << m.prefix << " temperature " << detail::format_double(m.temperature)
        << '\n';
    line("mean", m.feature_mean);
    line("scale", m.feature_scale);
    line("bias", m.bias);
    line("weights", m.weights);
  }
}

PrefixClassifierChain PrefixClassifierChain::load(std::istream& in) {
  detail::TokenReader r(in, "classifier chain");
  r.expect("ects-chain");
  r.expect("v1");
  r.expect("classes");
  const auto c = r.count();
  r.expect("channels");
  const auto ch = r.count();
  r.expect("length");
  const auto length = r.count();
  r.expect("checkpoints");
  const auto k = r.count();
  const std::size_t f = ch * kFeaturesPerChannel;
  std::vector<CheckpointModel> models(k);
  for (auto& m : models) {
    r.expect("checkpoint");
    m.prefix = r.count();
    r.expect("temperature");
    m.temperature = r.number();
    r.expect("mean");
    m.feature_mean = r.numbers(f);
    r.expect("scale");
    m.feature_scale = r.numbers(f);
    r.expect("bias");
    m.bias = r.numbers(c);
    r.expect("weights");
    m.weights = r.numbers(f * c);
  }
  return PrefixClassifierChain(c, ch, length, std::move(models));
}

BinTable::BinTable(std::size_t n_bins, std::vector<std::vector<double>> cuts,
                   std::vector<bool> degenerate)
    : n_bins_(n_bins), cuts_(std::move(cuts)), degenerate_(std::move(degenerate)) {
  if (n_bins_ == 0) throw InputError("bin table needs at least one bin");
  if (degenerate_.size() != cuts_.size()) throw InputError("bin table: shape mismatch");
  for (const auto& c : cuts_) {
    if (c.size() != n_bins_ - 1) throw InputError("bin table: expected B - 1 cut points");
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!(c[i] >= 0.0 && c[i] <= 1.0)) throw InputError("bin table: cut outside [0, 1]");
      if (i > 0 && c[i] < c[i - 1]) throw InputError("bin table: cuts must be nondecreasing");
    }
    auto d = c;
    d.erase(std::unique(d.begin(), d.end()), d.end());
    distinct_.push_back(std::move(d));
  }
}

std::size_t BinTable::bin_index(std::size_t k, double max_posterior) const {
  if (k >= cuts_.size()) throw InputError("bin table: checkpoint index out of range");
  if (degenerate_[k]) return 0;
  const auto& d = distinct_[k];
  return static_cast<std::size_t>(std::upper_bound(d.begin(), d.end(), max_posterior) - d.begin());
}

double BinTable::scaled_bin(std::size_t k, double max_posterior) const {
  if (n_bins_ <= 1) return 0.0;
  return static_cast<double>(bin_index(k, max_posterior)) / static_cast<double>(n_bins_ - 1);
}

void BinTable::save(std::ostream& out) const {
  out << "ects-bins v1\n";
  out << "bins " << n_bins_ << " checkpoints " << cuts_.size() << '\n';
  for (std::size_t k = 0; k < cuts_.size(); ++k) {
    out << "cuts " << (degenerate_[k] ? 1 : 0);
    for (double v : cuts_[k]) out << ' ' << detail::format_double(v);
    out << '\n';
  }
}

BinTable BinTable::load(std::istream& in) {
  detail::TokenReader r(in, "bin table");
  r.expect("ects-bins");
  r.expect("v1");
  r.expect("bins");
  const auto b = r.count();
  r.expect("checkpoints");
  const auto k = r.count();
  if (b == 0) throw ParseError("bin table: bin count must be positive");
  std::vector<std::vector<double>> cuts(k);
  std::vector<bool> degenerate(k);
  for (std::size_t i = 0; i < k; ++i) {
    r.expect("cuts");
    degenerate[i] = r.count() != 0;
    cuts[i] = r.numbers(b - 1);
  }
  return BinTable(b, std::move(cuts), std::move(degenerate));
}

BinTable fit_bins(std::span<const PosteriorSequence> posteriors, std::size_t n_bins) {
  if (n_bins == 0) throw FitError("fit_bins: need at least one bin");
  if (posteriors.size() < n_bins)
    throw FitError("fit_bins: " + std::to_string(posteriors.size()) + " samples for " +
                   std::to_string(n_bins) + " bins");
  const std::size_t k_count = posteriors.front().n_checkpoints();
  std::vector<std::vector<double>> cuts(k_count);
  std::vector<bool> degenerate(k_count, false);
  const std::size_t n = posteriors.size();
  std::vector<double> sample(n);
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (posteriors[i].n_checkpoints() != k_count)
        throw FitError("fit_bins: posterior sequences differ in checkpoint count");
      sample[i] = posteriors[i].max_posterior(k);
    }
    std::sort(sample.begin(), sample.end());
    for (std::size_t i = 1; i < n_bins; ++i) {
      // order statistics s[ceil(p) - 1] and s[floor(p)] around p = i n / B
      const std::size_t num = i * n;
      const std::size_t lower = (num + n_bins - 1) / n_bins - 1;
      const std::size_t upper = num / n_bins;
      cuts[k].push_back((sample[lower] + sample[upper]) / 2.0);
    }
    if (n_bins > 1 && sample.front() == sample.back()) {
      degenerate[k] = true;
      warn("fit_bins: all maximum posteriors coincide at checkpoint " + std::to_string(k) +
           "; every value maps to bin 0");
    }
  }
  return BinTable(n_bins, std::move(cuts), std::move(degenerate));
}

TriggerState state_features(std::span<const double> posterior, std::size_t checkpoint,
                            std::size_t t, std::size_t length, const BinTable* bins) {
  TriggerState s;
  s.n_classes = posterior.size();
  s.predicted = argmax(posterior);
  s.max_posterior = posterior[s.predicted];
  double second = 0.0;
  for (std::size_t c = 0; c < posterior.size(); ++c)
    if (c != s.predicted) second = std::max(second, posterior[c]);
  s.margin = posterior.size() > 1 ? s.max_posterior - second : s.max_posterior;
  s.time = static_cast<double>(t) / static_cast<double>(length);
  s.confidence_bin = (bins && !bins->empty()) ? bins->scaled_bin(checkpoint, s.max_posterior) : 0.0;
  return s;
}

FeatureSet FeatureSet::parse(const std::string& text) {
  if (text == "all" || text.empty()) return all();
  FeatureSet f = none();
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('+', start), text.size());
    const auto name = text.substr(start, end - start);
    if (name == "max_posterior") f.max_posterior = true;
    else if (name == "margin") f.margin = true;
    else if (name == "pred_class") f.predicted_class = true;
    else if (name == "confidence") f.confidence = true;
    else if (name == "time") f.time = true;
    else throw ConfigError("unknown state feature '" + name + "'");
    start = end + 1;
  }
  return f;
}

std::string FeatureSet::to_string() const {
  if (*this == all()) return "all";
  std::string out;
  const auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(max_posterior, "max_posterior");
  add(margin, "margin");
  add(predicted_class, "pred_class");
  add(confidence, "confidence");
  add(time, "time");
  return out.empty() ? "none" : out;
}

std::size_t FeatureSet::dimension(std::size_t n_classes) const {
  return (max_posterior ? 1 : 0) + (margin ? 1 : 0) + (predicted_class ? n_classes : 0) +
         (confidence ? 1 : 0) + (time ? 1 : 0);
}

void encode_state(const TriggerState& state, const FeatureSet& features, std::span<double> out) {
  if (out.size() != features.dimension(state.n_classes))
    throw InputError("encode_state: output size does not match the feature set");
  std::size_t i = 0;
  if (features.max_posterior) out[i++] = state.max_posterior;
  if (features.margin) out[i++] = state.margin;
  if (features.predicted_class)
    for (std::size_t c = 0; c < state.n_classes; ++c) out[i++] = c == state.predicted ? 1.0 : 0.0;
  if (features.confidence) out[i++] = state.confidence_bin;
  if (features.time) out[i++] = state.time;
}

std::vector<double> encode_state(const TriggerState& state, const FeatureSet& features) {
  std::vector<double> out(features.dimension(state.n_classes));
  encode_state(state, features, out);
  return out;
}

void save_model_file(const std::filesystem::path& path, const PrefixClassifierChain* chain,
                     const BinTable& bins) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file " + path.string());
  if (chain) chain->save(out);
  bins.save(out);
  if (!out) throw IoError("write failed for " + path.string());
}

ModelFile load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path.string());
  ModelFile m;
  detail::TokenReader r(in, path.string());
  if (r.peek() == "ects-chain") m.chain = PrefixClassifierChain::load(in);
  m.bins = BinTable::load(in);
  return m;
}

}  // namespace ects
