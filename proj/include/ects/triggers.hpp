#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ects/classifier.hpp"
#include "ects/core.hpp"

namespace ects {

enum class Decision { Wait, Trigger };

/// What a policy needs to know about the checkpoint grid of the series it runs on.
struct DecisionContext {
  std::vector<std::size_t> checkpoints;
  std::size_t length = 0;
  const BinTable* bins = nullptr;

  std::size_t n_checkpoints() const { return checkpoints.size(); }
};

/// A trigger rule: wait or trigger at checkpoint k given the state there.
class TriggerPolicy {
 public:
  virtual ~TriggerPolicy() = default;
  virtual std::string type() const = 0;
  virtual Decision decide(const TriggerState& state, std::span<const double> posterior,
                          std::size_t k) const = 0;
  virtual void save(std::ostream& out) const = 0;
};

/// Scans checkpoints in order; the first trigger wins and the last checkpoint always
/// triggers. The prediction is the argmax posterior at the trigger checkpoint.
EpisodeOutcome run_policy(const TriggerPolicy& policy, const PosteriorSequence& posteriors,
                          ClassIndex truth, const DecisionContext& context);
std::vector<EpisodeOutcome> run_policy(const TriggerPolicy& policy,
                                       std::span<const PosteriorSequence> posteriors,
                                       std::span<const ClassIndex> labels,
                                       const DecisionContext& context);

// ---------------------------------------------------------------------------
// Proba Threshold

class ProbaThreshold final : public TriggerPolicy {
 public:
  explicit ProbaThreshold(double threshold) : threshold_(threshold) {}
  double threshold() const { return threshold_; }

  std::string type() const override { return "proba_threshold"; }
  Decision decide(const TriggerState& state, std::span<const double>, std::size_t) const override {
    return state.max_posterior >= threshold_ ? Decision::Trigger : Decision::Wait;
  }
  void save(std::ostream& out) const override;

 private:
  double threshold_;
};

/// 0.00, 0.01, ..., 1.00
std::vector<double> threshold_grid();

/// Grid search over threshold_grid() minimising training AvgCost; smallest threshold on ties.
ProbaThreshold proba_threshold_fit(std::span<const PosteriorSequence> posteriors,
                                   std::span<const ClassIndex> labels,
                                   const DecisionContext& context, const CostModel& costs);

// ---------------------------------------------------------------------------
// Stopping Rule

struct StoppingRuleParams {
  double gamma1 = 0.0;  // max posterior
  double gamma2 = 0.0;  // margin
  double gamma3 = 0.0;  // t / T
  bool operator==(const StoppingRuleParams&) const = default;
};

/// Triggers when gamma1 max_posterior + gamma2 margin + gamma3 t/T > 0.
class StoppingRule final : public TriggerPolicy {
 public:
  explicit StoppingRule(StoppingRuleParams params) : params_(params) {}
  const StoppingRuleParams& params() const { return params_; }

  std::string type() const override { return "stopping_rule"; }
  Decision decide(const TriggerState& state, std::span<const double>, std::size_t) const override;
  void save(std::ostream& out) const override;

 private:
  StoppingRuleParams params_;
};

/// -1.0, -0.9, ..., 1.0
std::vector<double> stopping_rule_axis();

/// Exhaustive search over stopping_rule_axis()^3 in lexicographic order; the
/// lexicographically smallest triple wins ties.
StoppingRule stopping_rule_fit(std::span<const PosteriorSequence> posteriors,
                               std::span<const ClassIndex> labels, const DecisionContext& context,
                               const CostModel& costs);

// ---------------------------------------------------------------------------
// Economy (confidence-bin Markov chain)

class EconomyModel final : public TriggerPolicy {
 public:
  EconomyModel(BinTable bins, std::vector<std::vector<double>> transitions,
               std::vector<std::vector<double>> expected_misclassification,
               std::vector<double> checkpoint_delay, double alpha);

  std::size_t n_bins() const { return bins_.n_bins(); }
  std::size_t n_checkpoints() const { return expected_misclassification_.size(); }
  const BinTable& bins() const { return bins_; }
  /// Row-major B x B transition matrix from checkpoint k to k + 1.
  const std::vector<double>& transition(std::size_t k) const { return transitions_.at(k); }
  /// Expected raw C_m for each bin at checkpoint k.
  const std::vector<double>& expected_misclassification(std::size_t k) const {
    return expected_misclassification_.at(k);
  }

  /// f_tau for tau = k..K-1, starting from `bin` at checkpoint k.
  std::vector<double> forecast_costs(std::size_t k, std::size_t bin) const;

  std::string type() const override { return "economy"; }
  Decision decide(const TriggerState& state, std::span<const double>, std::size_t k) const override;
  void save(std::ostream& out) const override;
  static EconomyModel load_body(std::istream& in);

 private:
  BinTable bins_;
  std::vector<std::vector<double>> transitions_;
  std::vector<std::vector<double>> expected_misclassification_;
  std::vector<double> checkpoint_delay_;
  double alpha_;
};

EconomyModel economy_fit(std::span<const PosteriorSequence> posteriors,
                         std::span<const ClassIndex> labels, const DecisionContext& context,
                         const CostModel& costs);

// ---------------------------------------------------------------------------
// Calimera (backward-induction regressors)

/// Per-series trigger-now costs and suffix minima of the training set.
struct CalimeraTable {
  std::vector<std::vector<double>> trigger_cost;  // [series][k]
  std::vector<std::vector<double>> min_future;    // min over tau >= k of trigger_cost
};

CalimeraTable calimera_cost_table(std::span<const PosteriorSequence> posteriors,
                                  std::span<const ClassIndex> labels,
                                  std::span<const std::size_t> checkpoints,
                                  const CostModel& costs);

/// All posteriors, then max posterior and margin.
std::vector<double> calimera_features(std::span<const double> posterior);

struct LinearRegressor {
  std::vector<double> weights;
  double bias = 0.0;
  double predict(std::span<const double> x) const;
};

/// Closed-form ridge with an unpenalised intercept. Rows of `x` have `dim` entries.
LinearRegressor fit_ridge(std::span<const double> x, std::span<const double> y, std::size_t dim,
                          double lambda);

/// Regresses delta_k = min_future[k+1] - trigger_cost[k] at every checkpoint but the
/// last and triggers when the prediction is positive.
class CalimeraModel final : public TriggerPolicy {
 public:
  explicit CalimeraModel(std::vector<LinearRegressor> regressors)
      : regressors_(std::move(regressors)) {}
  const std::vector<LinearRegressor>& regressors() const { return regressors_; }
  double predict_delta(std::span<const double> posterior, std::size_t k) const;

  std::string type() const override { return "calimera"; }
  Decision decide(const TriggerState& state, std::span<const double> posterior,
                  std::size_t k) const override;
  void save(std::ostream& out) const override;

 private:
  std::vector<LinearRegressor> regressors_;
};

CalimeraModel calimera_fit(std::span<const PosteriorSequence> posteriors,
                           std::span<const ClassIndex> labels, const DecisionContext& context,
                           const CostModel& costs, double lambda = 1e-2);

}  // namespace ects
