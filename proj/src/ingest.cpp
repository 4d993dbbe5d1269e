#include "ects/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "ects/error.hpp"
#include "ects/log.hpp"
#include "text_util.hpp"

namespace ects {

namespace {

// Numeric labels sort by value, anything else lexicographically.
bool label_less(const std::string& a, const std::string& b) {
  const auto va = detail::parse_double(a);
  const auto vb = detail::parse_double(b);
  if (va && vb) return *va < *vb || (*va == *vb && a < b);
  if (va != vb) return va.has_value();
  return a < b;
}

void warn_if_z_normalized(const SeriesDataset& d) {
  for (const auto& s : d.series) {
    for (const auto& c : s.channels) {
      double mean = 0.0;
      for (double v : c) mean += v;
      mean /= static_cast<double>(c.size());
      double ss = 0.0;
      for (double v : c) ss += (v - mean) * (v - mean);
      const double n = static_cast<double>(c.size());
      // either the population or the sample convention may have been used
      const double sd_pop = std::sqrt(ss / n);
      const double sd_sample = std::sqrt(ss / (n - 1.0));
      const bool unit = std::abs(sd_pop - 1.0) < 1e-2 || std::abs(sd_sample - 1.0) < 1e-2;
      if (std::abs(mean) > 1e-3 || !unit) return;
    }
  }
  warn("dataset appears z-normalized per series; normalization statistics use the full "
       "series and leak future information into every prefix");
}

}  // namespace

SeriesDataset parse_tsv_dataset(std::istream& in, const TsvOptions& options,
                                const std::string& source) {
  if (options.channels == 0) throw InputError("channel count must be positive");
  std::vector<std::string> raw_labels;
  std::vector<std::vector<double>> rows;
  std::size_t arity = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto cells = detail::split(trimmed, options.delimiter);
    const std::string where = source + ": row " + std::to_string(line_no);
    if (cells.size() < 2) throw ParseError(where + ": expected a label and measurements");
    if (arity == 0) {
      arity = cells.size();
    } else if (cells.size() != arity) {
      throw ParseError(where + ": has " + std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(arity));
    }
    const auto label = detail::trim(cells[0]);
    if (label.empty()) throw ParseError(where + ": empty label");
    std::vector<double> values;
    values.reserve(cells.size() - 1);
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const auto v = detail::parse_double(cells[j]);
      if (!v || !std::isfinite(*v))
        throw ParseError(where + ", column " + std::to_string(j + 1) + ": non-numeric cell '" +
                         std::string(cells[j]) + "'");
      values.push_back(*v);
    }
    raw_labels.emplace_back(label);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(source + ": no data rows");
  const std::size_t total = arity - 1;
  if (total % options.channels != 0)
    throw ParseError(source + ": " + std::to_string(total) + " values do not split into " +
                     std::to_string(options.channels) + " channels");
  const std::size_t length = total / options.channels;

  std::vector<std::string> names = raw_labels;
  std::sort(names.begin(), names.end(), label_less);
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::map<std::string, ClassIndex> index;
  for (std::size_t c = 0; c < names.size(); ++c) index[names[c]] = c;

  std::vector<LabeledSeries> series;
  series.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    LabeledSeries s;
    s.label = index.at(raw_labels[i]);
    for (std::size_t ch = 0; ch < options.channels; ++ch)
      s.channels.emplace_back(rows[i].begin() + static_cast<std::ptrdiff_t>(ch * length),
                              rows[i].begin() + static_cast<std::ptrdiff_t>((ch + 1) * length));
    series.push_back(std::move(s));
  }
  if (length < 2) throw ParseError(source + ": series length must be at least 2");
  auto d = SeriesDataset::build(std::move(series), std::move(names),
                                default_checkpoints(length, options.checkpoint_steps));
  warn_if_z_normalized(d);
  return d;
}

SeriesDataset parse_tsv_dataset(const std::filesystem::path& path, const TsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file " + path.string());
  return parse_tsv_dataset(in, options, path.string());
}

void write_tsv_dataset(const SeriesDataset& dataset, std::ostream& out, char delimiter) {
  const char sep = delimiter == ' ' ? ' ' : delimiter;
  for (const auto& s : dataset.series) {
    out << dataset.class_names.at(s.label);
    for (const auto& c : s.channels)
      for (double v : c) out << sep << detail::format_double(v);
    out << '\n';
  }
}

void write_tsv_dataset(const SeriesDataset& dataset, const std::filesystem::path& path,
                       char delimiter) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file " + path.string());
  write_tsv_dataset(dataset, out, delimiter);
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

using Groups = std::vector<std::vector<std::size_t>>;

std::size_t held_out_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

// Splits every group in place: the first floor(fraction * n) go to held, the rest to kept.
void take(const Groups& groups, double fraction, Groups& held, Groups& kept) {
  held.assign(groups.size(), {});
  kept.assign(groups.size(), {});
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::size_t h = held_out_count(groups[g].size(), fraction);
    held[g].assign(groups[g].begin(), groups[g].begin() + static_cast<std::ptrdiff_t>(h));
    kept[g].assign(groups[g].begin() + static_cast<std::ptrdiff_t>(h), groups[g].end());
  }
}

std::vector<std::size_t> flatten(const Groups& groups) {
  std::vector<std::size_t> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  std::sort(out.begin(), out.end());
  return out;
}

void shuffle_groups(Groups& groups, std::mt19937_64& rng) {
  for (auto& g : groups) std::shuffle(g.begin(), g.end(), rng);
}

}  // namespace

DatasetSplits split_dataset(const SeriesDataset& dataset, const SplitSpec& spec) {
  if (dataset.size() < 10)
    throw InputError("split_dataset: need at least 10 series, got " +
                     std::to_string(dataset.size()));
  for (double f : {spec.train_fraction, spec.classifier_fraction_of_train,
                   spec.validation_fraction_of_trigger_train})
    if (!(f > 0.0 && f < 1.0)) throw InputError("split fractions must lie in (0, 1)");
  if (spec.n_folds == 0) throw InputError("split_dataset: need at least one validation fold");

  bool stratify = spec.stratify;
  if (stratify) {
    std::vector<std::size_t> counts(dataset.n_classes(), 0);
    for (const auto& s : dataset.series) ++counts[s.label];
    for (auto c : counts) {
      if (c == 1) {
        warn("split_dataset: a class has a single series; falling back to unstratified splits");
        stratify = false;
        break;
      }
    }
  }

  Groups groups;
  if (stratify) {
    groups.assign(dataset.n_classes(), {});
    for (std::size_t i = 0; i < dataset.size(); ++i) groups[dataset.series[i].label].push_back(i);
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
  } else {
    groups.assign(1, {});
    for (std::size_t i = 0; i < dataset.size(); ++i) groups[0].push_back(i);
  }

  std::mt19937_64 rng(spec.seed);
  shuffle_groups(groups, rng);

  Groups test, train, trigger, classifier;
  take(groups, 1.0 - spec.train_fraction, test, train);
  take(train, 1.0 - spec.classifier_fraction_of_train, trigger, classifier);

  DatasetSplits out;
  out.test = flatten(test);
  out.classifier_train = flatten(classifier);
  out.trigger_train = flatten(trigger);

  for (std::size_t f = 0; f < spec.n_folds; ++f) {
    Groups pool = trigger;
    shuffle_groups(pool, rng);
    Groups valid, fold_train;
    take(pool, spec.validation_fraction_of_trigger_train, valid, fold_train);
    out.validation_folds.push_back({flatten(fold_train), flatten(valid)});
  }
  return out;
}

PosteriorCache read_posterior_cache(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) break;
  }
  const auto header = detail::trim(line);
  if (header.empty() || header.front() != '#')
    throw ParseError("posterior cache: missing '#<series> <checkpoints> <classes>' header");
  const auto fields = detail::split(header.substr(1), ' ');
  if (fields.size() != 3) throw ParseError("posterior cache: header needs three counts");
  std::size_t dims[3];
  for (int i = 0; i < 3; ++i) {
    const auto v = detail::parse_double(fields[static_cast<std::size_t>(i)]);
    if (!v || *v < 0 || std::floor(*v) != *v)
      throw ParseError("posterior cache: header count is not a non-negative integer");
    dims[i] = static_cast<std::size_t>(*v);
  }
  PosteriorCache cache;
  cache.n_checkpoints = dims[1];
  cache.n_classes = dims[2];
  if (cache.n_classes == 0 || cache.n_checkpoints == 0)
    throw DataError("posterior cache: checkpoint and class counts must be positive");

  std::vector<double> row_buffer;
  for (std::size_t s = 0; s < dims[0]; ++s) {
    std::vector<double> data;
    data.reserve(cache.n_checkpoints * cache.n_classes);
    for (std::size_t k = 0; k < cache.n_checkpoints; ++k) {
      std::string_view row;
      while (true) {
        if (!std::getline(in, line))
          throw DataError("posterior cache: expected " +
                          std::to_string(dims[0] * cache.n_checkpoints) + " rows, file ended early");
        ++line_no;
        row = detail::trim(line);
        if (!row.empty()) break;
      }
      const auto cells = detail::split(row, ' ');
      const std::string where = "posterior cache line " + std::to_string(line_no);
      if (cells.size() != cache.n_classes)
        throw DataError(where + ": has " + std::to_string(cells.size()) + " values, expected " +
                        std::to_string(cache.n_classes));
      row_buffer.clear();
      double sum = 0.0;
      for (auto c : cells) {
        const auto v = detail::parse_double(c);
        if (!v) throw ParseError(where + ": non-numeric value '" + std::string(c) + "'");
        if (!(*v >= 0.0 && *v <= 1.0 + 1e-6))
          throw DataError(where + ": probability outside [0, 1]");
        row_buffer.push_back(*v);
        sum += *v;
      }
      if (std::abs(sum - 1.0) > 1e-6)
        throw DataError(where + ": row sums to " + detail::format_double(sum));
      if (std::abs(sum - 1.0) > 1e-12)
        for (auto& v : row_buffer) v /= sum;
      data.insert(data.end(), row_buffer.begin(), row_buffer.end());
    }
    cache.series.emplace_back(cache.n_classes, std::move(data));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty())
      throw DataError("posterior cache: unexpected extra row at line " + std::to_string(line_no));
  }
  return cache;
}

PosteriorCache read_posterior_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open posterior cache " + path.string());
  return read_posterior_cache(in);
}

void write_posterior_cache(const PosteriorCache& cache, std::ostream& out) {
  out << '#' << cache.series.size() << ' ' << cache.n_checkpoints << ' ' << cache.n_classes
      << '\n';
  for (const auto& seq : cache.series) {
    if (seq.n_checkpoints() != cache.n_checkpoints || seq.n_classes() != cache.n_classes)
      throw DataError("posterior cache: sequence shape does not match the header");
    for (std::size_t k = 0; k < seq.n_checkpoints(); ++k) {
      const auto r = seq.row(k);
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c) out << ' ';
        out << detail::format_double(r[c]);
      }
      out << '\n';
    }
  }
}

void write_posterior_cache(const PosteriorCache& cache, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write posterior cache " + path.string());
  write_posterior_cache(cache, out);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace ects
