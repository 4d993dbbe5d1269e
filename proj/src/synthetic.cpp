#include "ects/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ects/error.hpp"

namespace ects {

std::size_t signal_onset(const SyntheticSpec& spec) {
  const auto grid = default_checkpoints(spec.length, spec.checkpoint_steps);
  if (spec.signal_checkpoint < 1 || spec.signal_checkpoint > grid.size())
    throw ConfigError("signal_checkpoint must lie in [1, " + std::to_string(grid.size()) + "]");
  // prefix of checkpoint k-1 has no signal; checkpoint k sees at least one shifted value
  return spec.signal_checkpoint == 1 ? 0 : grid[spec.signal_checkpoint - 2];
}

SeriesDataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.n_series < 2) throw ConfigError("synthetic: need at least two series");
  if (spec.length < 2) throw ConfigError("synthetic: length must be at least 2");
  if (!(spec.noise >= 0.0)) throw ConfigError("synthetic: noise must be >= 0");
  if (!(spec.minority_fraction > 0.0 && spec.minority_fraction < 1.0))
    throw ConfigError("synthetic: minority_fraction must lie in (0, 1)");
  const std::size_t onset = signal_onset(spec);

  const auto n0 = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(spec.minority_fraction * spec.n_series)), 1,
      spec.n_series - 1);
  std::vector<ClassIndex> labels(spec.n_series, 1);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n0), 0);

  std::mt19937_64 rng(spec.seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<LabeledSeries> series(spec.n_series);
  for (std::size_t i = 0; i < spec.n_series; ++i) {
    auto& s = series[i];
    s.label = labels[i];
    s.channels.assign(1, std::vector<double>(spec.length));
    const double sign = labels[i] == 1 ? 1.0 : -1.0;
    for (std::size_t t = 0; t < spec.length; ++t) {
      double x = spec.noise * noise(rng);
      if (t >= onset) x += sign * spec.amplitude;
      s.channels[0][t] = x;
    }
  }
  return SeriesDataset::build(std::move(series), {"0", "1"},
                              default_checkpoints(spec.length, spec.checkpoint_steps));
}

}  // namespace ects
