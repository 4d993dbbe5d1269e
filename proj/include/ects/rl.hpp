#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ects/classifier.hpp"
#include "ects/core.hpp"
#include "ects/ingest.hpp"
#include "ects/triggers.hpp"

namespace ects {

enum class Action : int { Wait = 0, Trigger = 1 };

/// shaped: -dC_d per wait, -C_m - dC_d on trigger. delayed: the full cost on trigger only.
enum class RewardMode { Shaped, Delayed };

RewardMode parse_reward_mode(const std::string& text);
const char* to_string(RewardMode mode);

struct Transition {
  std::vector<double> state;
  Action action = Action::Wait;
  double reward = 0.0;
  std::vector<double> next_state;  // empty when terminal
  bool terminal = false;
  bool next_forced = false;  // next state is the last checkpoint: only trigger is allowed
};

/// Offline transitions stored as flat arrays.
class TransitionSet {
 public:
  explicit TransitionSet(std::size_t state_dim = 0) : dim_(state_dim) {}

  void add(const Transition& t);
  std::size_t size() const { return actions_.size(); }
  bool empty() const { return actions_.empty(); }
  std::size_t state_dim() const { return dim_; }

  std::span<const double> state(std::size_t i) const { return {states_.data() + i * dim_, dim_}; }
  std::span<const double> next_state(std::size_t i) const {
    return {next_states_.data() + i * dim_, dim_};
  }
  Action action(std::size_t i) const { return actions_[i]; }
  double reward(std::size_t i) const { return rewards_[i]; }
  bool terminal(std::size_t i) const { return terminal_[i] != 0; }
  bool next_forced(std::size_t i) const { return next_forced_[i] != 0; }
  Transition get(std::size_t i) const;

  /// Copy with every reward multiplied by `factor`.
  TransitionSet scaled(double factor) const;

 private:
  std::size_t dim_;
  std::vector<double> states_;
  std::vector<double> next_states_;
  std::vector<Action> actions_;
  std::vector<double> rewards_;
  std::vector<unsigned char> terminal_;
  std::vector<unsigned char> next_forced_;
};

/// Every (state, action) pair of every training series: a wait and a trigger
/// transition at each checkpoint but the last, and only the trigger at the last.
TransitionSet extract_transitions(std::span<const PosteriorSequence> posteriors,
                                  std::span<const ClassIndex> labels,
                                  const DecisionContext& context, const CostModel& costs,
                                  RewardMode mode, const FeatureSet& features = FeatureSet::all());

/// input -> dense(hidden) -> layer norm (learned gain/shift) -> ReLU -> dense(2).
/// Output 0 is Q(s, wait), output 1 is Q(s, trigger).
class QNetwork {
 public:
  static constexpr std::size_t kActions = 2;
  static constexpr double kNormEpsilon = 1e-5;

  QNetwork() = default;
  /// All weights zero, layer-norm gain one.
  QNetwork(std::size_t input_dim, std::size_t hidden_dim = 32);
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases from a seeded generator.
  static QNetwork initialized(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  struct Cache {
    std::vector<double> input;
    std::vector<double> normalized;  // layer-norm output before gain/shift
    std::vector<double> activation;  // gain * normalized + shift
    std::vector<double> hidden;      // relu(activation)
    double inv_std = 0.0;
  };

  std::array<double, kActions> forward(std::span<const double> state) const;
  std::array<double, kActions> forward(std::span<const double> state, Cache& cache) const;
  /// Accumulates d(loss)/d(params) into `gradient` given d(loss)/d(outputs).
  void backward(const Cache& cache, const std::array<double, kActions>& output_gradient,
                std::span<double> gradient) const;

  /// target <- (1 - tau) target + tau source, elementwise.
  void soft_update_from(const QNetwork& source, double tau);

  void save(std::ostream& out) const;
  static QNetwork load(std::istream& in);
  bool operator==(const QNetwork&) const = default;

 private:
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  std::vector<double> params_;

  // Offsets into params_: W1 (H x D), b1 (H), gain (H), shift (H), W2 (2 x H), b2 (2).
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return hidden_dim_ * input_dim_; }
  std::size_t gain() const { return b1() + hidden_dim_; }
  std::size_t shift() const { return gain() + hidden_dim_; }
  std::size_t w2() const { return shift() + hidden_dim_; }
  std::size_t b2() const { return w2() + kActions * hidden_dim_; }
};

/// Greedy action; ties go to trigger.
Decision alert_decide(const std::array<double, QNetwork::kActions>& q);
Decision alert_decide(const QNetwork& network, std::span<const double> state);

class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(std::size_t n_params, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);
  void step(std::span<double> params, std::span<const double> gradient);
  std::size_t steps() const { return t_; }

 private:
  double lr_ = 1e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double tau = 3e-3;
  double gamma = 1.0;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 200;
  std::size_t validate_every = 5;
  std::size_t n_splits = 3;
  RewardMode reward_mode = RewardMode::Shaped;
  std::uint64_t seed = 0;
  std::size_t hidden_dim = 32;
  FeatureSet features = FeatureSet::all();
  /// Rewards are divided by this before training; 0 picks the largest possible
  /// episode cost so that Q-values live in [-1, 0].
  double reward_scale = 0.0;
  std::size_t workers = 1;

  void validate() const;
};

/// Networks, optimiser and shuffling state of one Double-DQN run.
struct DdqnState {
  QNetwork online;
  QNetwork target;
  AdamOptimizer optimizer;
  std::mt19937_64 rng;

  DdqnState(QNetwork network, const TrainConfig& config, std::uint64_t seed);
};

/// One shuffled pass over the transitions. Targets are r for terminal transitions and
/// r + gamma Q_target(s', argmax_a Q_online(s', a)) otherwise (a = trigger when s' is
/// the forced last checkpoint). Each mini-batch takes one Adam step on the mean squared
/// TD error and then soft-updates the target. Returns the mean TD loss.
double ddqn_epoch(DdqnState& state, const TransitionSet& transitions, const TrainConfig& config);

/// Greedy trigger rule backed by a Q-network.
class AlertPolicy final : public TriggerPolicy {
 public:
  AlertPolicy(QNetwork network, FeatureSet features)
      : network_(std::move(network)), features_(features) {}
  const QNetwork& network() const { return network_; }
  const FeatureSet& features() const { return features_; }

  std::string type() const override { return "alert"; }
  Decision decide(const TriggerState& state, std::span<const double> posterior,
                  std::size_t k) const override;
  void save(std::ostream& out) const override;

 private:
  QNetwork network_;
  FeatureSet features_;
};

struct ValidationPoint {
  std::size_t fold = 0;
  std::size_t epoch = 0;
  double avg_cost = 0.0;
};

struct AlertTrainingResult {
  QNetwork network;
  FeatureSet features;
  std::size_t selected_epoch = 0;
  std::size_t selected_fold = 0;
  double reward_scale = 1.0;
  std::vector<ValidationPoint> validation;

  AlertPolicy policy() const { return AlertPolicy(network, features); }
};

/// Largest weighted episode cost: max C_m weighted by alpha plus the weighted delay at T.
double max_episode_cost(const CostModel& costs, std::span<const std::size_t> checkpoints);

/// Trains one network per validation fold, scores a snapshot every `validate_every`
/// epochs, picks the epoch with the lowest mean validation AvgCost across folds and
/// returns the best fold's snapshot at that epoch. `posteriors`/`labels` are indexed by
/// the fold indices.
AlertTrainingResult train_alert(std::span<const PosteriorSequence> posteriors,
                                std::span<const ClassIndex> labels,
                                std::span<const ValidationFold> folds,
                                const DecisionContext& context, const CostModel& costs,
                                const TrainConfig& config);

struct SurfaceSpec {
  std::size_t time_steps = 21;
  std::size_t proba_steps = 21;
  double proba_min = 0.0;
  double proba_max = 1.0;
  std::size_t n_classes = 2;
  /// Remaining features; predicted class and, when `derive_margin` is false, margin and
  /// confidence are taken from here.
  TriggerState base;
  bool derive_margin = true;
};

/// decisions[i * times.size() + j] is the decision at probas[i], times[j].
struct DecisionSurface {
  std::vector<double> times;
  std::vector<double> probas;
  std::vector<int> decisions;  // 1 = trigger

  int at(std::size_t proba_index, std::size_t time_index) const {
    return decisions[proba_index * times.size() + time_index];
  }
  void write_csv(std::ostream& out) const;
};

/// Queries `policy` on a grid over (t/T, max posterior) with the other features fixed.
DecisionSurface decision_surface(const TriggerPolicy& policy, const SurfaceSpec& spec,
                                 const DecisionContext& context);

/// Reads any policy written by TriggerPolicy::save.
std::unique_ptr<TriggerPolicy> load_policy(std::istream& in);
std::unique_ptr<TriggerPolicy> load_policy(const std::filesystem::path& path);
void save_policy(const TriggerPolicy& policy, const std::filesystem::path& path);

}  // namespace ects
