#pragma once

#include <cstdint>

#include "ects/core.hpp"

namespace ects {

/// Two-class generator: Gaussian noise everywhere, and from the first time step
/// inside checkpoint `signal_checkpoint` onwards class 1 is shifted up by
/// `amplitude` and class 0 down by it. Before that the classes are identical.
struct SyntheticSpec {
  std::size_t n_series = 200;
  std::size_t length = 100;
  std::size_t checkpoint_steps = 20;
  std::size_t signal_checkpoint = 10;  // 1-based
  double noise = 1.0;
  double amplitude = 1.0;
  double minority_fraction = 0.5;  // share of class 0
  std::uint64_t seed = 0;
};

/// First 0-based time index carrying the signal.
std::size_t signal_onset(const SyntheticSpec& spec);

SeriesDataset make_synthetic(const SyntheticSpec& spec);

}  // namespace ects
