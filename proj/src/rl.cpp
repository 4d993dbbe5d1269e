#include "ects/rl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <ostream>

#include "ects/error.hpp"
#include "text_util.hpp"

namespace ects {

RewardMode parse_reward_mode(const std::string& text) {
  if (text == "shaped") return RewardMode::Shaped;
  if (text == "delayed") return RewardMode::Delayed;
  throw ConfigError("unknown reward mode '" + text + "' (expected shaped or delayed)");
}

const char* to_string(RewardMode mode) {
  return mode == RewardMode::Shaped ? "shaped" : "delayed";
}

// ---------------------------------------------------------------------------
// Transitions

void TransitionSet::add(const Transition& t) {
  if (t.state.size() != dim_) throw InputError("transition: state dimension mismatch");
  if (t.action == Action::Trigger && !t.terminal)
    throw InputError("transition: trigger transitions are terminal");
  if (!t.terminal && t.next_state.size() != dim_)
    throw InputError("transition: next state dimension mismatch");
  states_.insert(states_.end(), t.state.begin(), t.state.end());
  if (t.terminal)
    next_states_.insert(next_states_.end(), dim_, 0.0);
  else
    next_states_.insert(next_states_.end(), t.next_state.begin(), t.next_state.end());
  actions_.push_back(t.action);
  rewards_.push_back(t.reward);
  terminal_.push_back(t.terminal ? 1 : 0);
  next_forced_.push_back(t.next_forced ? 1 : 0);
}

Transition TransitionSet::get(std::size_t i) const {
  Transition t;
  const auto s = state(i);
  t.state.assign(s.begin(), s.end());
  t.action = actions_[i];
  t.reward = rewards_[i];
  t.terminal = terminal(i);
  t.next_forced = next_forced(i);
  if (!t.terminal) {
    const auto n = next_state(i);
    t.next_state.assign(n.begin(), n.end());
  }
  return t;
}

TransitionSet TransitionSet::scaled(double factor) const {
  TransitionSet out = *this;
  for (auto& r : out.rewards_) r *= factor;
  return out;
}

TransitionSet extract_transitions(std::span<const PosteriorSequence> posteriors,
                                  std::span<const ClassIndex> labels,
                                  const DecisionContext& context, const CostModel& costs,
                                  RewardMode mode, const FeatureSet& features) {
  if (posteriors.size() != labels.size())
    throw InputError("extract_transitions: posterior and label counts differ");
  const std::size_t k_count = context.n_checkpoints();
  if (k_count == 0) throw InputError("extract_transitions: empty checkpoint grid");
  const double alpha = costs.alpha();
  std::vector<double> delay_step(k_count);
  for (std::size_t k = 0; k < k_count; ++k)
    delay_step[k] = costs.delay(context.checkpoints[k]) -
                    (k == 0 ? 0.0 : costs.delay(context.checkpoints[k - 1]));

  std::size_t dim = 0;
  TransitionSet out;
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    const auto& p = posteriors[i];
    if (p.n_checkpoints() < k_count)
      throw DataError("extract_transitions: posteriors missing for some checkpoints");
    std::vector<std::vector<double>> states(k_count);
    for (std::size_t k = 0; k < k_count; ++k)
      states[k] = encode_state(
          state_features(p.row(k), k, context.checkpoints[k], context.length, context.bins),
          features);
    if (out.empty() && dim == 0) {
      dim = states[0].size();
      out = TransitionSet(dim);
    }
    for (std::size_t k = 0; k < k_count; ++k) {
      const double cm = costs.misclassification(p.predicted(k), labels[i]);
      Transition trigger;
      trigger.state = states[k];
      trigger.action = Action::Trigger;
      trigger.terminal = true;
      if (mode == RewardMode::Shaped)
        trigger.reward = -alpha * cm - (1.0 - alpha) * delay_step[k];
      else
        trigger.reward = -alpha * cm - (1.0 - alpha) * costs.delay(context.checkpoints[k]);
      out.add(trigger);

      if (k + 1 < k_count) {
        Transition wait;
        wait.state = states[k];
        wait.action = Action::Wait;
        wait.reward = mode == RewardMode::Shaped ? -(1.0 - alpha) * delay_step[k] : 0.0;
        wait.next_state = states[k + 1];
        wait.next_forced = k + 2 == k_count;
        out.add(wait);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Q-network

QNetwork::QNetwork(std::size_t input_dim, std::size_t hidden_dim)
    : input_dim_(input_dim), hidden_dim_(hidden_dim) {
  if (input_dim == 0 || hidden_dim == 0) throw InputError("QNetwork: dimensions must be positive");
  params_.assign(b2() + kActions, 0.0);
  std::fill(params_.begin() + static_cast<std::ptrdiff_t>(gain()),
            params_.begin() + static_cast<std::ptrdiff_t>(shift()), 1.0);
}

QNetwork QNetwork::initialized(std::size_t input_dim, std::size_t hidden_dim,
                               std::uint64_t seed) {
  QNetwork net(input_dim, hidden_dim);
  std::mt19937_64 rng(seed);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> u1(-r1, r1), u2(-r2, r2);
  auto& p = net.params_;
  for (std::size_t i = net.w1(); i < net.gain(); ++i) p[i] = u1(rng);
  for (std::size_t i = net.w2(); i < p.size(); ++i) p[i] = u2(rng);
  return net;
}

std::array<double, QNetwork::kActions> QNetwork::forward(std::span<const double> state) const {
  Cache cache;
  return forward(state, cache);
}

std::array<double, QNetwork::kActions> QNetwork::forward(std::span<const double> state,
                                                         Cache& cache) const {
  if (state.size() != input_dim_)
    throw InputError("QNetwork: state has dimension " + std::to_string(state.size()) +
                     ", expected " + std::to_string(input_dim_));
  const std::size_t h = hidden_dim_, d = input_dim_;
  const double* p = params_.data();
  cache.input.assign(state.begin(), state.end());
  cache.normalized.resize(h);
  cache.activation.resize(h);
  cache.hidden.resize(h);

  double mean = 0.0;
  for (std::size_t j = 0; j < h; ++j) {
    double a = p[b1() + j];
    const double* row = p + w1() + j * d;
    for (std::size_t i = 0; i < d; ++i) a += row[i] * state[i];
    cache.normalized[j] = a;
    mean += a;
  }
  mean /= static_cast<double>(h);
  double var = 0.0;
  for (std::size_t j = 0; j < h; ++j) {
    const double c = cache.normalized[j] - mean;
    var += c * c;
  }
  var /= static_cast<double>(h);
  cache.inv_std = 1.0 / std::sqrt(var + kNormEpsilon);
  for (std::size_t j = 0; j < h; ++j) {
    const double n = (cache.normalized[j] - mean) * cache.inv_std;
    cache.normalized[j] = n;
    cache.activation[j] = p[gain() + j] * n + p[shift() + j];
    cache.hidden[j] = cache.activation[j] > 0.0 ? cache.activation[j] : 0.0;
  }
  std::array<double, kActions> q{};
  for (std::size_t a = 0; a < kActions; ++a) {
    double v = p[b2() + a];
    const double* row = p + w2() + a * h;
    for (std::size_t j = 0; j < h; ++j) v += row[j] * cache.hidden[j];
    q[a] = v;
  }
  return q;
}

void QNetwork::backward(const Cache& cache, const std::array<double, kActions>& output_gradient,
                        std::span<double> gradient) const {
  if (gradient.size() != params_.size()) throw InputError("QNetwork: gradient size mismatch");
  const std::size_t h = hidden_dim_, d = input_dim_;
  const double* p = params_.data();
  double* g = gradient.data();

  std::vector<double> dn(h);
  for (std::size_t j = 0; j < h; ++j) {
    double dh = 0.0;
    for (std::size_t a = 0; a < kActions; ++a) {
      g[w2() + a * h + j] += output_gradient[a] * cache.hidden[j];
      dh += output_gradient[a] * p[w2() + a * h + j];
    }
    const double dz = cache.activation[j] > 0.0 ? dh : 0.0;
    g[gain() + j] += dz * cache.normalized[j];
    g[shift() + j] += dz;
    dn[j] = dz * p[gain() + j];
  }
  for (std::size_t a = 0; a < kActions; ++a) g[b2() + a] += output_gradient[a];

  double mean_dn = 0.0, mean_dn_n = 0.0;
  for (std::size_t j = 0; j < h; ++j) {
    mean_dn += dn[j];
    mean_dn_n += dn[j] * cache.normalized[j];
  }
  mean_dn /= static_cast<double>(h);
  mean_dn_n /= static_cast<double>(h);
  for (std::size_t j = 0; j < h; ++j) {
    const double da = cache.inv_std * (dn[j] - mean_dn - cache.normalized[j] * mean_dn_n);
    g[b1() + j] += da;
    double* row = g + w1() + j * d;
    for (std::size_t i = 0; i < d; ++i) row[i] += da * cache.input[i];
  }
}

void QNetwork::soft_update_from(const QNetwork& source, double tau) {
  if (source.params_.size() != params_.size())
    throw InputError("soft update: network shapes differ");
  for (std::size_t i = 0; i < params_.size(); ++i)
    params_[i] = (1.0 - tau) * params_[i] + tau * source.params_[i];
}

void QNetwork::save(std::ostream& out) const {
  out << "ects-qnet v1\ninput " << input_dim_ << " hidden " << hidden_dim_ << " outputs "
      << kActions << '\n';
  const auto block = [&](const char* name, std::size_t begin, std::size_t end) {
    out << name;
    for (std::size_t i = begin; i < end; ++i) out << ' ' << detail::format_double(params_[i]);
    out << '\n';
  };
  block("w1", w1(), b1());
  block("b1", b1(), gain());
  block("gain", gain(), shift());
  block("shift", shift(), w2());
  block("w2", w2(), b2());
  block("b2", b2(), params_.size());
}

QNetwork QNetwork::load(std::istream& in) {
  detail::TokenReader r(in, "Q-network");
  r.expect("ects-qnet");
  r.expect("v1");
  r.expect("input");
  const auto d = r.count();
  r.expect("hidden");
  const auto h = r.count();
  r.expect("outputs");
  if (r.count() != kActions) throw ParseError("Q-network: expected two outputs");
  QNetwork net(d, h);
  const auto block = [&](const char* name, std::size_t begin, std::size_t end) {
    r.expect(name);
    for (std::size_t i = begin; i < end; ++i) net.params_[i] = r.number();
  };
  block("w1", net.w1(), net.b1());
  block("b1", net.b1(), net.gain());
  block("gain", net.gain(), net.shift());
  block("shift", net.shift(), net.w2());
  block("w2", net.w2(), net.b2());
  block("b2", net.b2(), net.params_.size());
  return net;
}

Decision alert_decide(const std::array<double, QNetwork::kActions>& q) {
  return q[1] >= q[0] ? Decision::Trigger : Decision::Wait;
}

Decision alert_decide(const QNetwork& network, std::span<const double> state) {
  return alert_decide(network.forward(state));
}

// ---------------------------------------------------------------------------
// Optimisation

AdamOptimizer::AdamOptimizer(std::size_t n_params, double learning_rate, double beta1,
                             double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(n_params, 0.0),
      v_(n_params, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> gradient) {
  if (params.size() != m_.size() || gradient.size() != m_.size())
    throw InputError("Adam: parameter count mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gradient[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gradient[i] * gradient[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (validate_every == 0) throw ConfigError("validate_every must be positive");
  if (n_splits == 0) throw ConfigError("n_splits must be positive");
  if (hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
  if (reward_scale < 0.0) throw ConfigError("reward_scale must be >= 0");
  if (features == FeatureSet::none()) throw ConfigError("state feature set is empty");
}

DdqnState::DdqnState(QNetwork network, const TrainConfig& config, std::uint64_t seed)
    : online(network),
      target(std::move(network)),
      optimizer(online.parameter_count(), config.learning_rate),
      rng(seed) {}

double ddqn_epoch(DdqnState& st, const TransitionSet& transitions, const TrainConfig& config) {
  if (transitions.empty()) throw InputError("ddqn_epoch: empty transition set");
  std::vector<std::size_t> order(transitions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), st.rng);

  std::vector<double> gradient(st.online.parameter_count());
  QNetwork::Cache cache;
  double total_loss = 0.0;
  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t end = std::min(order.size(), start + config.batch_size);
    const double inv_batch = 1.0 / static_cast<double>(end - start);
    std::fill(gradient.begin(), gradient.end(), 0.0);
    for (std::size_t b = start; b < end; ++b) {
      const std::size_t i = order[b];
      double y = transitions.reward(i);
      if (!transitions.terminal(i)) {
        const auto next = transitions.next_state(i);
        std::size_t a_next = static_cast<std::size_t>(Action::Trigger);
        if (!transitions.next_forced(i) &&
            alert_decide(st.online.forward(next)) == Decision::Wait)
          a_next = static_cast<std::size_t>(Action::Wait);
        y += config.gamma * st.target.forward(next)[a_next];
      }
      const auto q = st.online.forward(transitions.state(i), cache);
      const auto a = static_cast<std::size_t>(transitions.action(i));
      const double err = q[a] - y;
      total_loss += err * err;
      std::array<double, QNetwork::kActions> go{};
      go[a] = 2.0 * err * inv_batch;
      st.online.backward(cache, go, gradient);
    }
    st.optimizer.step(st.online.parameters(), gradient);
    st.target.soft_update_from(st.online, config.tau);
  }
  return total_loss / static_cast<double>(order.size());
}

// ---------------------------------------------------------------------------
// Policy and training protocol

Decision AlertPolicy::decide(const TriggerState& state, std::span<const double>,
                             std::size_t) const {
  return alert_decide(network_, encode_state(state, features_));
}

void AlertPolicy::save(std::ostream& out) const {
  out << "ects-policy v1\ntype alert\nfeatures " << features_.to_string() << '\n';
  network_.save(out);
}

double max_episode_cost(const CostModel& costs, std::span<const std::size_t> checkpoints) {
  double max_cm = 0.0;
  for (ClassIndex p = 0; p < costs.n_classes(); ++p)
    for (ClassIndex y = 0; y < costs.n_classes(); ++y)
      max_cm = std::max(max_cm, costs.misclassification(p, y));
  const std::size_t last = checkpoints.empty() ? costs.length() : checkpoints.back();
  const double c = costs.alpha() * max_cm + (1.0 - costs.alpha()) * costs.delay(last);
  return c > 0.0 ? c : 1.0;
}

namespace {

struct FoldRun {
  std::vector<std::size_t> epochs;
  std::vector<double> costs;
  std::vector<QNetwork> snapshots;
};

FoldRun run_fold(std::span<const PosteriorSequence> posteriors, std::span<const ClassIndex> labels,
                 const ValidationFold& fold, std::size_t fold_index,
                 const DecisionContext& context, const CostModel& costs,
                 const TrainConfig& config, double reward_scale) {
  const auto gather = [&](const std::vector<std::size_t>& idx, std::vector<PosteriorSequence>& p,
                          std::vector<ClassIndex>& y) {
    for (auto i : idx) {
      if (i >= posteriors.size()) throw InputError("train_alert: fold index out of range");
      p.push_back(posteriors[i]);
      y.push_back(labels[i]);
    }
  };
  std::vector<PosteriorSequence> train_p, valid_p;
  std::vector<ClassIndex> train_y, valid_y;
  gather(fold.train, train_p, train_y);
  gather(fold.valid, valid_p, valid_y);
  if (train_p.empty() || valid_p.empty())
    throw TrainingError("train_alert: fold " + std::to_string(fold_index) +
                        " has an empty train or validation side");

  const auto transitions =
      extract_transitions(train_p, train_y, context, costs, config.reward_mode, config.features)
          .scaled(1.0 / reward_scale);
  const std::uint64_t seed = derive_seed(config.seed, {fold_index});
  DdqnState st(QNetwork::initialized(transitions.state_dim(), config.hidden_dim, seed), config,
               derive_seed(seed, {0x5eed}));

  FoldRun run;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    ddqn_epoch(st, transitions, config);
    if (epoch % config.validate_every != 0) continue;
    const AlertPolicy policy(st.online, config.features);
    const auto outcomes = run_policy(policy, valid_p, valid_y, context);
    run.epochs.push_back(epoch);
    run.costs.push_back(average_cost(outcomes, costs).avg_cost);
    run.snapshots.push_back(st.online);
  }
  return run;
}

}  // namespace

AlertTrainingResult train_alert(std::span<const PosteriorSequence> posteriors,
                                std::span<const ClassIndex> labels,
                                std::span<const ValidationFold> folds,
                                const DecisionContext& context, const CostModel& costs,
                                const TrainConfig& config) {
  config.validate();
  if (folds.empty()) throw TrainingError("train_alert: no validation folds");
  if (posteriors.size() != labels.size())
    throw InputError("train_alert: posterior and label counts differ");
  const double scale =
      config.reward_scale > 0.0 ? config.reward_scale : max_episode_cost(costs, context.checkpoints);

  std::vector<FoldRun> runs(folds.size());
  if (config.workers > 1 && folds.size() > 1) {
    std::vector<std::future<FoldRun>> jobs;
    for (std::size_t f = 0; f < folds.size(); ++f)
      jobs.push_back(std::async(std::launch::async, [&, f] {
        return run_fold(posteriors, labels, folds[f], f, context, costs, config, scale);
      }));
    for (std::size_t f = 0; f < folds.size(); ++f) runs[f] = jobs[f].get();
  } else {
    for (std::size_t f = 0; f < folds.size(); ++f)
      runs[f] = run_fold(posteriors, labels, folds[f], f, context, costs, config, scale);
  }

  const std::size_t n_snap = runs.front().epochs.size();
  if (n_snap == 0)
    throw TrainingError("train_alert: no validation snapshot recorded (max_epochs < validate_every)");

  AlertTrainingResult result;
  result.features = config.features;
  result.reward_scale = scale;
  std::size_t best_snap = 0;
  double best_mean = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n_snap; ++s) {
    double mean = 0.0;
    for (std::size_t f = 0; f < runs.size(); ++f) {
      mean += runs[f].costs[s];
      result.validation.push_back({f, runs[f].epochs[s], runs[f].costs[s]});
    }
    mean /= static_cast<double>(runs.size());
    if (mean < best_mean) {
      best_mean = mean;
      best_snap = s;
    }
  }
  std::size_t best_fold = 0;
  for (std::size_t f = 1; f < runs.size(); ++f)
    if (runs[f].costs[best_snap] < runs[best_fold].costs[best_snap]) best_fold = f;

  result.selected_epoch = runs[best_fold].epochs[best_snap];
  result.selected_fold = best_fold;
  result.network = std::move(runs[best_fold].snapshots[best_snap]);
  return result;
}

// ---------------------------------------------------------------------------
// Decision surface and policy files

void DecisionSurface::write_csv(std::ostream& out) const {
  out << "max_posterior,time,decision\n";
  for (std::size_t i = 0; i < probas.size(); ++i)
    for (std::size_t j = 0; j < times.size(); ++j)
      out << detail::format_double(probas[i]) << ',' << detail::format_double(times[j]) << ','
          << at(i, j) << '\n';
}

DecisionSurface decision_surface(const TriggerPolicy& policy, const SurfaceSpec& spec,
                                 const DecisionContext& context) {
  if (spec.time_steps < 2 || spec.proba_steps < 2)
    throw InputError("decision_surface: grid resolutions must be at least 2");
  if (spec.n_classes < 2) throw InputError("decision_surface: need at least two classes");
  if (context.n_checkpoints() == 0 || context.length == 0)
    throw InputError("decision_surface: empty checkpoint grid");
  DecisionSurface s;
  for (std::size_t j = 0; j < spec.time_steps; ++j)
    s.times.push_back(static_cast<double>(j) / static_cast<double>(spec.time_steps - 1));
  for (std::size_t i = 0; i < spec.proba_steps; ++i)
    s.probas.push_back(spec.proba_min + (spec.proba_max - spec.proba_min) *
                                            (static_cast<double>(i) /
                                             static_cast<double>(spec.proba_steps - 1)));
  const std::size_t c = spec.n_classes;
  const ClassIndex predicted = spec.base.predicted < c ? spec.base.predicted : 0;
  for (double m : s.probas) {
    std::vector<double> posterior(c, (1.0 - m) / static_cast<double>(c - 1));
    posterior[predicted] = m;
    for (double tau : s.times) {
      // checkpoint covering this fraction of the series
      std::size_t k = 0;
      while (k + 1 < context.n_checkpoints() &&
             static_cast<double>(context.checkpoints[k]) < tau * static_cast<double>(context.length))
        ++k;
      TriggerState st = spec.base;
      st.n_classes = c;
      st.predicted = predicted;
      st.max_posterior = m;
      st.time = tau;
      if (spec.derive_margin) {
        st.margin = std::max(0.0, m - (1.0 - m) / static_cast<double>(c - 1));
        if (context.bins && !context.bins->empty())
          st.confidence_bin = context.bins->scaled_bin(k, m);
      }
      s.decisions.push_back(policy.decide(st, posterior, k) == Decision::Trigger ? 1 : 0);
    }
  }
  return s;
}

std::unique_ptr<TriggerPolicy> load_policy(std::istream& in) {
  detail::TokenReader r(in, "policy");
  r.expect("ects-policy");
  r.expect("v1");
  r.expect("type");
  const auto type = r.word();
  if (type == "proba_threshold") {
    r.expect("threshold");
    return std::make_unique<ProbaThreshold>(r.number());
  }
  if (type == "stopping_rule") {
    r.expect("gammas");
    StoppingRuleParams p;
    p.gamma1 = r.number();
    p.gamma2 = r.number();
    p.gamma3 = r.number();
    return std::make_unique<StoppingRule>(p);
  }
  if (type == "economy") return std::make_unique<EconomyModel>(EconomyModel::load_body(in));
  if (type == "calimera") {
    r.expect("regressors");
    const auto n = r.count();
    std::vector<LinearRegressor> regs(n);
    for (auto& reg : regs) {
      r.expect("regressor");
      const auto dim = r.count();
      reg.bias = r.number();
      reg.weights = r.numbers(dim);
    }
    return std::make_unique<CalimeraModel>(std::move(regs));
  }
  if (type == "alert") {
    r.expect("features");
    const auto features = FeatureSet::parse(r.word());
    return std::make_unique<AlertPolicy>(QNetwork::load(in), features);
  }
  throw ParseError("policy: unknown type '" + type + "'");
}

std::unique_ptr<TriggerPolicy> load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open policy file " + path.string());
  return load_policy(in);
}

void save_policy(const TriggerPolicy& policy, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write policy file " + path.string());
  policy.save(out);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace ects
