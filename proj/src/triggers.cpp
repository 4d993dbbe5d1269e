#include "ects/triggers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ects/error.hpp"
#include "text_util.hpp"

namespace ects {

EpisodeOutcome run_policy(const TriggerPolicy& policy, const PosteriorSequence& posteriors,
                          ClassIndex truth, const DecisionContext& context) {
  const std::size_t k_count = context.n_checkpoints();
  if (k_count == 0) throw InputError("run_policy: empty checkpoint grid");
  if (posteriors.n_checkpoints() < k_count)
    throw DataError("run_policy: posteriors missing for some checkpoints");
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto row = posteriors.row(k);
    const bool last = k + 1 == k_count;
    if (!last) {
      const auto state =
          state_features(row, k, context.checkpoints[k], context.length, context.bins);
      if (policy.decide(state, row, k) == Decision::Wait) continue;
    }
    return {argmax(row), truth, context.checkpoints[k], k};
  }
  return {};  // unreachable: the last checkpoint always returns
}

std::vector<EpisodeOutcome> run_policy(const TriggerPolicy& policy,
                                       std::span<const PosteriorSequence> posteriors,
                                       std::span<const ClassIndex> labels,
                                       const DecisionContext& context) {
  if (posteriors.size() != labels.size())
    throw InputError("run_policy: posterior and label counts differ");
  std::vector<EpisodeOutcome> out;
  out.reserve(posteriors.size());
  for (std::size_t i = 0; i < posteriors.size(); ++i)
    out.push_back(run_policy(policy, posteriors[i], labels[i], context));
  return out;
}

namespace {

// Everything the grid searches need per (series, checkpoint), computed once.
struct EpisodeTable {
  std::size_t n_series = 0;
  std::size_t n_checkpoints = 0;
  std::vector<double> max_posterior;
  std::vector<double> margin;
  std::vector<double> time;
  std::vector<double> loss;  // weighted cost of triggering at k

  std::size_t at(std::size_t i, std::size_t k) const { return i * n_checkpoints + k; }
};

EpisodeTable tabulate(std::span<const PosteriorSequence> posteriors,
                      std::span<const ClassIndex> labels, const DecisionContext& context,
                      const CostModel& costs) {
  if (posteriors.empty()) throw InputError("trigger fit: no training series");
  if (posteriors.size() != labels.size())
    throw InputError("trigger fit: posterior and label counts differ");
  EpisodeTable t;
  t.n_series = posteriors.size();
  t.n_checkpoints = context.n_checkpoints();
  const std::size_t n = t.n_series * t.n_checkpoints;
  t.max_posterior.resize(n);
  t.margin.resize(n);
  t.time.resize(n);
  t.loss.resize(n);
  for (std::size_t i = 0; i < t.n_series; ++i) {
    if (posteriors[i].n_checkpoints() < t.n_checkpoints)
      throw DataError("trigger fit: posteriors missing for some checkpoints");
    for (std::size_t k = 0; k < t.n_checkpoints; ++k) {
      const auto row = posteriors[i].row(k);
      const auto s = state_features(row, k, context.checkpoints[k], context.length, nullptr);
      const auto j = t.at(i, k);
      t.max_posterior[j] = s.max_posterior;
      t.margin[j] = s.margin;
      t.time[j] = s.time;
      t.loss[j] = costs.loss(s.predicted, labels[i], context.checkpoints[k]);
    }
  }
  return t;
}

template <typename Fires>
double table_avg_cost(const EpisodeTable& t, Fires&& fires) {
  double total = 0.0;
  for (std::size_t i = 0; i < t.n_series; ++i) {
    std::size_t k = 0;
    while (k + 1 < t.n_checkpoints && !fires(t.at(i, k))) ++k;
    total += t.loss[t.at(i, k)];
  }
  return total / static_cast<double>(t.n_series);
}

}  // namespace

std::vector<double> threshold_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 100; ++i) g.push_back(i / 100.0);
  return g;
}

void ProbaThreshold::save(std::ostream& out) const {
  out << "ects-policy v1\ntype proba_threshold\nthreshold " << detail::format_double(threshold_)
      << '\n';
}

ProbaThreshold proba_threshold_fit(std::span<const PosteriorSequence> posteriors,
                                   std::span<const ClassIndex> labels,
                                   const DecisionContext& context, const CostModel& costs) {
  const auto table = tabulate(posteriors, labels, context, costs);
  double best_theta = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double theta : threshold_grid()) {
    const double c =
        table_avg_cost(table, [&](std::size_t j) { return table.max_posterior[j] >= theta; });
    if (c < best_cost) {
      best_cost = c;
      best_theta = theta;
    }
  }
  return ProbaThreshold(best_theta);
}

Decision StoppingRule::decide(const TriggerState& state, std::span<const double>,
                              std::size_t) const {
  const double v = params_.gamma1 * state.max_posterior + params_.gamma2 * state.margin +
                   params_.gamma3 * state.time;
  return v > 0.0 ? Decision::Trigger : Decision::Wait;
}

void StoppingRule::save(std::ostream& out) const {
  out << "ects-policy v1\ntype stopping_rule\ngammas " << detail::format_double(params_.gamma1)
      << ' ' << detail::format_double(params_.gamma2) << ' '
      << detail::format_double(params_.gamma3) << '\n';
}

std::vector<double> stopping_rule_axis() {
  std::vector<double> g;
  for (int i = -10; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

StoppingRule stopping_rule_fit(std::span<const PosteriorSequence> posteriors,
                               std::span<const ClassIndex> labels, const DecisionContext& context,
                               const CostModel& costs) {
  const auto table = tabulate(posteriors, labels, context, costs);
  const auto axis = stopping_rule_axis();
  StoppingRuleParams best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double g1 : axis)
    for (double g2 : axis)
      for (double g3 : axis) {
        const double c = table_avg_cost(table, [&](std::size_t j) {
          return g1 * table.max_posterior[j] + g2 * table.margin[j] + g3 * table.time[j] > 0.0;
        });
        if (c < best_cost) {
          best_cost = c;
          best = {g1, g2, g3};
        }
      }
  return StoppingRule(best);
}

// ---------------------------------------------------------------------------

EconomyModel::EconomyModel(BinTable bins, std::vector<std::vector<double>> transitions,
                           std::vector<std::vector<double>> expected_misclassification,
                           std::vector<double> checkpoint_delay, double alpha)
    : bins_(std::move(bins)),
      transitions_(std::move(transitions)),
      expected_misclassification_(std::move(expected_misclassification)),
      checkpoint_delay_(std::move(checkpoint_delay)),
      alpha_(alpha) {
  const std::size_t k = expected_misclassification_.size();
  const std::size_t b = bins_.n_bins();
  if (k == 0 || bins_.n_checkpoints() != k || checkpoint_delay_.size() != k ||
      transitions_.size() + 1 != k)
    throw InputError("economy model: inconsistent checkpoint counts");
  for (const auto& e : expected_misclassification_)
    if (e.size() != b) throw InputError("economy model: expected cost table shape");
  for (const auto& m : transitions_)
    if (m.size() != b * b) throw InputError("economy model: transition matrix shape");
}

std::vector<double> EconomyModel::forecast_costs(std::size_t k, std::size_t bin) const {
  const std::size_t b = n_bins();
  const std::size_t k_count = n_checkpoints();
  if (k >= k_count || bin >= b) throw InputError("economy: checkpoint or bin out of range");
  std::vector<double> dist(b, 0.0), next(b);
  dist[bin] = 1.0;
  std::vector<double> f;
  for (std::size_t tau = k; tau < k_count; ++tau) {
    double e = 0.0;
    for (std::size_t j = 0; j < b; ++j) e += dist[j] * expected_misclassification_[tau][j];
    f.push_back(alpha_ * e + (1.0 - alpha_) * checkpoint_delay_[tau]);
    if (tau + 1 < k_count) {
      const auto& m = transitions_[tau];
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j) next[j] += dist[i] * m[i * b + j];
      dist.swap(next);
    }
  }
  return f;
}

Decision EconomyModel::decide(const TriggerState& state, std::span<const double>,
                              std::size_t k) const {
  const auto f = forecast_costs(k, bins_.bin_index(k, state.max_posterior));
  const double later = f.size() > 1 ? *std::min_element(f.begin() + 1, f.end())
                                    : std::numeric_limits<double>::infinity();
  return f.front() <= later ? Decision::Trigger : Decision::Wait;
}

void EconomyModel::save(std::ostream& out) const {
  const std::size_t b = n_bins();
  out << "ects-policy v1\ntype economy\nalpha " << detail::format_double(alpha_) << '\n';
  bins_.save(out);
  out << "delay";
  for (double v : checkpoint_delay_) out << ' ' << detail::format_double(v);
  out << '\n';
  for (std::size_t k = 0; k < n_checkpoints(); ++k) {
    out << "expected";
    for (double v : expected_misclassification_[k]) out << ' ' << detail::format_double(v);
    out << '\n';
  }
  for (const auto& m : transitions_) {
    out << "transition";
    for (std::size_t i = 0; i < b * b; ++i) out << ' ' << detail::format_double(m[i]);
    out << '\n';
  }
}

EconomyModel EconomyModel::load_body(std::istream& in) {
  detail::TokenReader r(in, "economy policy");
  r.expect("alpha");
  const double alpha = r.number();
  auto bins = BinTable::load(in);
  const std::size_t k = bins.n_checkpoints();
  const std::size_t b = bins.n_bins();
  r.expect("delay");
  auto delay = r.numbers(k);
  std::vector<std::vector<double>> expected(k), transitions(k > 0 ? k - 1 : 0);
  for (auto& e : expected) {
    r.expect("expected");
    e = r.numbers(b);
  }
  for (auto& m : transitions) {
    r.expect("transition");
    m = r.numbers(b * b);
  }
  return EconomyModel(std::move(bins), std::move(transitions), std::move(expected),
                      std::move(delay), alpha);
}

EconomyModel economy_fit(std::span<const PosteriorSequence> posteriors,
                         std::span<const ClassIndex> labels, const DecisionContext& context,
                         const CostModel& costs) {
  if (!context.bins || context.bins->empty())
    throw FitError("economy_fit: bin table has not been fitted");
  const BinTable& bins = *context.bins;
  const std::size_t k_count = context.n_checkpoints();
  if (bins.n_checkpoints() != k_count)
    throw FitError("economy_fit: bin table does not match the checkpoint grid");
  if (posteriors.empty() || posteriors.size() != labels.size())
    throw InputError("economy_fit: need matching, non-empty posteriors and labels");
  const std::size_t b = bins.n_bins();
  const std::size_t c = costs.n_classes();

  std::vector<std::vector<std::size_t>> bin_of(posteriors.size(), std::vector<std::size_t>(k_count));
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    if (posteriors[i].n_checkpoints() < k_count)
      throw DataError("economy_fit: posteriors missing for some checkpoints");
    for (std::size_t k = 0; k < k_count; ++k)
      bin_of[i][k] = bins.bin_index(k, posteriors[i].max_posterior(k));
  }

  std::vector<std::vector<double>> transitions;
  for (std::size_t k = 0; k + 1 < k_count; ++k) {
    std::vector<double> m(b * b, 1.0);  // add-one smoothing
    for (std::size_t i = 0; i < posteriors.size(); ++i) m[bin_of[i][k] * b + bin_of[i][k + 1]] += 1.0;
    for (std::size_t row = 0; row < b; ++row) {
      double sum = 0.0;
      for (std::size_t j = 0; j < b; ++j) sum += m[row * b + j];
      for (std::size_t j = 0; j < b; ++j) m[row * b + j] /= sum;
    }
    transitions.push_back(std::move(m));
  }

  std::vector<std::vector<double>> expected(k_count, std::vector<double>(b));
  for (std::size_t k = 0; k < k_count; ++k) {
    // confusion[bin][truth][predicted], smoothed by one count per cell
    std::vector<double> confusion(b * c * c, 1.0);
    for (std::size_t i = 0; i < posteriors.size(); ++i) {
      const auto pred = posteriors[i].predicted(k);
      confusion[(bin_of[i][k] * c + labels[i]) * c + pred] += 1.0;
    }
    for (std::size_t bin = 0; bin < b; ++bin) {
      double total = 0.0, weighted = 0.0;
      for (std::size_t y = 0; y < c; ++y)
        for (std::size_t p = 0; p < c; ++p) {
          const double n = confusion[(bin * c + y) * c + p];
          total += n;
          weighted += n * costs.misclassification(p, y);
        }
      expected[k][bin] = weighted / total;
    }
  }

  std::vector<double> delay;
  for (auto t : context.checkpoints) delay.push_back(costs.delay(t));
  return EconomyModel(bins, std::move(transitions), std::move(expected), std::move(delay),
                      costs.alpha());
}

// ---------------------------------------------------------------------------

CalimeraTable calimera_cost_table(std::span<const PosteriorSequence> posteriors,
                                  std::span<const ClassIndex> labels,
                                  std::span<const std::size_t> checkpoints,
                                  const CostModel& costs) {
  if (posteriors.size() != labels.size())
    throw InputError("calimera: posterior and label counts differ");
  const std::size_t k_count = checkpoints.size();
  CalimeraTable t;
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    if (posteriors[i].n_checkpoints() < k_count)
      throw DataError("calimera: posteriors missing for some checkpoints");
    std::vector<double> now(k_count), future(k_count);
    for (std::size_t k = 0; k < k_count; ++k)
      now[k] = costs.loss(posteriors[i].predicted(k), labels[i], checkpoints[k]);
    future[k_count - 1] = now[k_count - 1];
    for (std::size_t k = k_count - 1; k-- > 0;) future[k] = std::min(now[k], future[k + 1]);
    t.trigger_cost.push_back(std::move(now));
    t.min_future.push_back(std::move(future));
  }
  return t;
}

std::vector<double> calimera_features(std::span<const double> posterior) {
  std::vector<double> x(posterior.begin(), posterior.end());
  const auto s = state_features(posterior, 0, 1, 1, nullptr);
  x.push_back(s.max_posterior);
  x.push_back(s.margin);
  return x;
}

double LinearRegressor::predict(std::span<const double> x) const {
  double v = bias;
  for (std::size_t i = 0; i < weights.size(); ++i) v += weights[i] * x[i];
  return v;
}

LinearRegressor fit_ridge(std::span<const double> x, std::span<const double> y, std::size_t dim,
                          double lambda) {
  if (dim == 0 || x.size() != y.size() * dim || y.empty())
    throw InputError("fit_ridge: shape mismatch");
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd a(n, d);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = x[static_cast<std::size_t>(i * d + j)];
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::RowVectorXd x_mean = a.colwise().mean();
  const double y_mean = b.mean();
  a.rowwise() -= x_mean;
  b.array() -= y_mean;
  Eigen::MatrixXd gram = a.transpose() * a;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd w = gram.ldlt().solve(a.transpose() * b);
  LinearRegressor r;
  r.weights.assign(w.data(), w.data() + dim);
  r.bias = y_mean - x_mean.dot(w);
  return r;
}

double CalimeraModel::predict_delta(std::span<const double> posterior, std::size_t k) const {
  return regressors_.at(k).predict(calimera_features(posterior));
}

Decision CalimeraModel::decide(const TriggerState&, std::span<const double> posterior,
                               std::size_t k) const {
  if (k >= regressors_.size()) return Decision::Trigger;
  return predict_delta(posterior, k) > 0.0 ? Decision::Trigger : Decision::Wait;
}

void CalimeraModel::save(std::ostream& out) const {
  out << "ects-policy v1\ntype calimera\nregressors " << regressors_.size() << '\n';
  for (const auto& r : regressors_) {
    out << "regressor " << r.weights.size() << ' ' << detail::format_double(r.bias);
    for (double w : r.weights) out << ' ' << detail::format_double(w);
    out << '\n';
  }
}

CalimeraModel calimera_fit(std::span<const PosteriorSequence> posteriors,
                           std::span<const ClassIndex> labels, const DecisionContext& context,
                           const CostModel& costs, double lambda) {
  if (posteriors.empty()) throw InputError("calimera_fit: no training series");
  const auto table = calimera_cost_table(posteriors, labels, context.checkpoints, costs);
  const std::size_t k_count = context.n_checkpoints();
  const std::size_t dim = posteriors.front().n_classes() + 2;
  std::vector<LinearRegressor> regressors;
  for (std::size_t k = 0; k + 1 < k_count; ++k) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < posteriors.size(); ++i) {
      const auto f = calimera_features(posteriors[i].row(k));
      x.insert(x.end(), f.begin(), f.end());
      y.push_back(table.min_future[i][k + 1] - table.trigger_cost[i][k]);
    }
    regressors.push_back(fit_ridge(x, y, dim, lambda));
  }
  return CalimeraModel(std::move(regressors));
}

}  // namespace ects
