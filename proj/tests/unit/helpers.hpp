#pragma once

#include <random>
#include <vector>

#include "ects/core.hpp"

namespace testing {

/// Random two-class posterior sequences with labels, reproducible from a seed.
struct Episodes {
  std::vector<ects::PosteriorSequence> posteriors;
  std::vector<ects::ClassIndex> labels;
};

inline Episodes random_episodes(std::size_t n, std::size_t k_count, std::size_t n_classes,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Episodes e;
  for (std::size_t i = 0; i < n; ++i) {
    ects::PosteriorSequence p(k_count, n_classes);
    for (std::size_t k = 0; k < k_count; ++k) {
      double sum = 0.0;
      for (auto& v : p.row(k)) sum += (v = u(rng));
      for (auto& v : p.row(k)) v /= sum;
    }
    e.posteriors.push_back(p);
    e.labels.push_back(rng() % n_classes);
  }
  return e;
}

inline std::vector<std::vector<double>> rows_of(const ects::PosteriorSequence& p) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < p.n_checkpoints(); ++k)
    rows.emplace_back(p.row(k).begin(), p.row(k).end());
  return rows;
}

}  // namespace testing
