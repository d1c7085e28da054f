#include "arena/train/learners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "arena/errors.hpp"
#include "arena/nn/losses.hpp"
#include "arena/train/schedule.hpp"

namespace arena {

namespace {

constexpr std::size_t kEvalChunk = 512;

nn::ParameterList concat(nn::ParameterList a, const nn::ParameterList& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

ActionWeights sampling_weights(const EncodedDemos& demos, bool balanced) {
  if (balanced) return balanced_weights(action_histogram(std::span<const int>(demos.actions)));
  ActionWeights w;
  w.fill(1.0);
  return w;
}

}  // namespace

EncodedDemos encode_demos(const std::vector<DemoSample>& samples, const EncoderLimits& limits) {
  EncodedDemos out;
  out.features.reserve(samples.size());
  out.actions.reserve(samples.size());
  for (const auto& s : samples) {
    out.features.push_back(encode_observation(s.observation, limits));
    out.actions.push_back(s.action);
  }
  return out;
}

void BcConfig::validate() const {
  if (batch_size < 1) throw ConfigError("bc: batch_size must be >= 1");
  if (batches_per_epoch < 0) throw ConfigError("bc: batches_per_epoch must be >= 0");
}

ImitationMetrics evaluate_imitation(const PolicyModel& model, const EncodedDemos& demos) {
  if (demos.size() == 0) throw std::invalid_argument("evaluate_imitation: no samples");
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::vector<const EntityFeatureSet*> ptrs;
  for (std::size_t start = 0; start < demos.size(); start += kEvalChunk) {
    const std::size_t end = std::min(demos.size(), start + kEvalChunk);
    ptrs.clear();
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(&demos.features[i]);
    const nn::Tensor2 logits = model.imitation_logits(FeatureBatch(ptrs));
    const std::span<const int> targets(demos.actions.data() + start, end - start);
    loss_sum += nn::softmax_cross_entropy(logits, targets).loss * static_cast<double>(end - start);
    for (std::size_t r = 0; r < end - start; ++r) {
      const std::span<const double> row(logits.row(static_cast<Eigen::Index>(r)).data(),
                                        static_cast<std::size_t>(logits.cols()));
      if (select_greedy(row) == targets[r]) ++correct;
    }
  }
  const double n = static_cast<double>(demos.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

double majority_baseline(const EncodedDemos& demos) {
  if (demos.size() == 0) throw std::invalid_argument("majority_baseline: no samples");
  const ActionHistogram h = action_histogram(std::span<const int>(demos.actions));
  return static_cast<double>(*std::max_element(h.begin(), h.end())) /
         static_cast<double>(demos.size());
}

nn::Optimizer make_bc_optimizer(PolicyModel& model, const nn::OptimizerConfig& config) {
  return nn::Optimizer(config, concat(model.shared_parameters(), model.imitation_head_parameters()),
                       "bc");
}

nn::Optimizer make_dqn_optimizer(PolicyModel& model, const nn::OptimizerConfig& config) {
  return nn::Optimizer(config, concat(model.shared_parameters(), model.q_head_parameters()), "dqn");
}

double bc_update(PolicyModel& model, const EncodedDemos& demos, std::span<const std::size_t> rows,
                 nn::Optimizer& optimizer) {
  if (rows.empty()) throw std::invalid_argument("bc_update: empty batch");
  std::vector<const EntityFeatureSet*> ptrs;
  std::vector<int> targets;
  ptrs.reserve(rows.size());
  targets.reserve(rows.size());
  for (std::size_t r : rows) {
    ptrs.push_back(&demos.features.at(r));
    targets.push_back(demos.actions.at(r));
  }
  optimizer.zero_grad();
  ModelCache cache;
  const nn::Tensor2 feats = model.features(FeatureBatch(ptrs), &cache);
  const nn::Tensor2 logits = model.imitation_head.forward(feats);
  const nn::BatchLoss loss = nn::softmax_cross_entropy(logits, targets);
  if (!std::isfinite(loss.loss)) throw TrainingError("bc: non-finite loss");
  model.backward_features(cache, model.imitation_head.backward(feats, loss.grad));
  optimizer.step();
  return loss.loss;
}

DemoSampler::DemoSampler(const EncodedDemos& demos, bool balanced)
    : sampler_(std::span<const int>(demos.actions), sampling_weights(demos, balanced)) {}

std::size_t DemoSampler::sample(Rng& rng) const { return sampler_.sample(rng); }

std::vector<std::size_t> DemoSampler::batch(std::size_t n, Rng& rng) const {
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = sampler_.sample(rng);
  return rows;
}

double bc_epoch(PolicyModel& model, const EncodedDemos& train, const BcConfig& config,
                nn::Optimizer& optimizer, Rng& rng) {
  config.validate();
  if (train.size() == 0) throw TrainingError("bc: empty training set");
  const DemoSampler sampler(train, config.balanced);
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);
  const int batches = config.batches_per_epoch > 0
                          ? config.batches_per_epoch
                          : static_cast<int>((train.size() + bs - 1) / bs);
  double total = 0.0;
  for (int b = 0; b < batches; ++b) {
    const auto rows = sampler.batch(bs, rng);
    total += bc_update(model, train, rows, optimizer);
  }
  return total / batches;
}

void DqnConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("dqn: gamma must be in [0, 1)");
  for (double e : {epsilon_start, epsilon_end}) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("dqn: epsilon must be in [0, 1]");
  }
  if (!(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0)) {
    throw ConfigError("dqn: epsilon_decay_fraction must be in (0, 1]");
  }
  if (target_sync_interval < 1) throw ConfigError("dqn: target_sync_interval must be >= 1");
  if (batch_size < 1) throw ConfigError("dqn: batch_size must be >= 1");
  if (warmup < batch_size) throw ConfigError("dqn: warmup must be >= batch_size");
  if (buffer_capacity < static_cast<std::size_t>(warmup)) {
    throw ConfigError("dqn: buffer_capacity must be >= warmup");
  }
  if (!(huber_delta > 0.0)) throw ConfigError("dqn: huber_delta must be positive");
}

double epsilon_for_episode(const DqnConfig& c, long online_episode, long online_total) {
  const long horizon = static_cast<long>(std::lround(c.epsilon_decay_fraction * online_total));
  return linear_decay(c.epsilon_start, c.epsilon_end, online_episode, horizon);
}

double td_target(double reward, bool terminal, double max_next_q, double gamma) {
  return terminal ? reward : reward + gamma * max_next_q;
}

std::vector<double> q_targets(std::span<const Transition* const> batch, const PolicyModel& target,
                              double gamma) {
  std::vector<const EntityFeatureSet*> next;
  std::vector<std::size_t> next_row(batch.size(), 0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    if (t.terminal) continue;
    if (!t.next) throw std::invalid_argument("q_targets: non-terminal transition without next state");
    next_row[i] = next.size();
    next.push_back(t.next.get());
  }
  nn::Tensor2 next_q;
  if (!next.empty()) next_q = target.q_values(FeatureBatch(next));
  std::vector<double> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    const double max_next =
        t.terminal ? 0.0 : next_q.row(static_cast<Eigen::Index>(next_row[i])).maxCoeff();
    out[i] = td_target(t.reward, t.terminal, max_next, gamma);
    if (!std::isfinite(out[i])) throw TrainingError("dqn: non-finite target");
  }
  return out;
}

double dqn_update(PolicyModel& model, const PolicyModel& target,
                  std::span<const Transition* const> batch, const DqnConfig& config,
                  nn::Optimizer& optimizer) {
  if (batch.empty()) throw std::invalid_argument("dqn_update: empty batch");
  const std::vector<double> targets = q_targets(batch, target, config.gamma);
  std::vector<const EntityFeatureSet*> states;
  states.reserve(batch.size());
  for (const Transition* t : batch) states.push_back(t->state.get());

  optimizer.zero_grad();
  ModelCache cache;
  const nn::Tensor2 feats = model.features(FeatureBatch(states), &cache);
  const nn::Tensor2 q = model.q_head.forward(feats);
  nn::Tensor2 grad = nn::Tensor2::Zero(q.rows(), q.cols());
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const int a = batch[i]->action;
    if (a < 0 || a >= kNumActions) throw std::invalid_argument("dqn_update: action out of range");
    const nn::ScalarLoss h = nn::huber(q(r, a), targets[i], config.huber_delta);
    loss += h.loss / n;
    grad(r, a) = h.grad / n;
  }
  if (!std::isfinite(loss)) throw TrainingError("dqn: non-finite loss");
  model.backward_features(cache, model.q_head.backward(feats, grad));
  optimizer.step();
  return loss;
}

double dqn_step(PolicyModel& model, PolicyModel& target, const ReplayBuffer& buffer,
                const DqnConfig& config, nn::Optimizer& optimizer, Rng& rng) {
  if (buffer.size() < static_cast<std::size_t>(config.warmup)) {
    throw TrainingError("dqn: replay buffer below warmup (" + std::to_string(buffer.size()) +
                        " < " + std::to_string(config.warmup) + ")");
  }
  const auto batch = buffer.sample(static_cast<std::size_t>(config.batch_size), rng);
  const double loss = dqn_update(model, target, batch, config, optimizer);
  if (optimizer.steps() % config.target_sync_interval == 0) target = model;
  return loss;
}

}  // namespace arena
