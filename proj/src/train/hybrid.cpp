#include "arena/train/hybrid.hpp"

#include <map>
#include <memory>
#include <stdexcept>

#include "arena/errors.hpp"

namespace arena {

namespace {

struct OnlineEpisode {
  int length = 0;
  double reward_sum = 0.0;
  Outcome outcome = Outcome::Ongoing;
  double loss_sum = 0.0;
  int updates = 0;
};

std::shared_ptr<const EntityFeatureSet> encode_player(const GameState& s,
                                                      const EncoderLimits& limits) {
  return std::make_shared<const EntityFeatureSet>(encode_observation(observe(s, kPlayerId), limits));
}

}  // namespace

PretrainResult run_pretraining(PolicyModel& model, const EncodedDemos& train,
                               const EncodedDemos& validation, int epochs, const BcConfig& bc,
                               const nn::OptimizerConfig& opt_config, std::uint64_t seed,
                               const EpochCallback& on_epoch) {
  if (epochs < 0) throw std::invalid_argument("pretraining: epochs must be >= 0");
  bc.validate();
  PretrainResult result{TrainingLog{}, model, -1, evaluate_imitation(model, validation).loss};
  nn::Optimizer optimizer = make_bc_optimizer(model, opt_config);
  Rng rng(seed, 3);
  for (int e = 0; e < epochs; ++e) {
    const double train_loss = bc_epoch(model, train, bc, optimizer, rng);
    const ImitationMetrics val = evaluate_imitation(model, validation);
    const EpochRecord record{e, train_loss, val.loss, val.accuracy,
                             optimizer.current_learning_rate()};
    result.log.add(record);
    if (val.loss < result.best_validation_loss) {
      result.best = model;
      result.best_epoch = e;
      result.best_validation_loss = val.loss;
    }
    if (on_epoch) on_epoch(record);
  }
  return result;
}

RewardKind parse_reward_kind(const std::string& text) {
  if (text == "basic") return RewardKind::Basic;
  if (text == "advanced") return RewardKind::Advanced;
  throw std::invalid_argument("unknown reward kind '" + text + "' (expected basic or advanced)");
}

std::string to_string(RewardKind kind) {
  return kind == RewardKind::Basic ? "basic" : "advanced";
}

void HybridConfig::validate() const {
  schedule.validate();
  dqn.validate();
  offline.validate();
  optimizer.validate();
  weights.validate();
  game.validate();
}

TrainingLog run_hybrid_training(PolicyModel& model, const EncodedDemos& demos, Policy& opponent,
                                const HybridConfig& config, const EpisodeCallback& on_episode) {
  config.validate();
  const std::vector<EpisodeMode> plan = plan_schedule(config.schedule);
  long online_total = 0;
  for (EpisodeMode m : plan) online_total += (m == EpisodeMode::Online);
  if (online_total < static_cast<long>(plan.size()) && demos.size() == 0) {
    throw TrainingError("hybrid: offline episodes planned but no demonstrations given");
  }

  nn::Optimizer bc_opt = make_bc_optimizer(model, config.optimizer);
  nn::Optimizer dqn_opt = make_dqn_optimizer(model, config.optimizer);
  PolicyModel target = model;
  PolicyModel last_good = model;
  ReplayBuffer buffer(config.dqn.buffer_capacity);
  std::unique_ptr<DemoSampler> sampler;
  if (demos.size() > 0) sampler = std::make_unique<DemoSampler>(demos, config.offline.balanced);

  Rng agent_rng(config.seed, 4);
  Rng opponent_rng(config.seed, 5);
  Rng replay_rng(config.seed, 6);
  Rng demo_rng(config.seed, 7);
  TrainingLog log;
  long online_index = 0;

  for (int ep = 0; ep < static_cast<int>(plan.size()); ++ep) {
    EpisodeRecord record;
    record.episode = ep;
    record.mode = plan[ep];
    try {
      if (plan[ep] == EpisodeMode::Offline) {
        double loss = 0.0;
        for (int b = 0; b < config.offline.batches_per_epoch; ++b) {
          const auto rows =
              sampler->batch(static_cast<std::size_t>(config.offline.batch_size), demo_rng);
          loss += bc_update(model, demos, rows, bc_opt);
        }
        record.updates = config.offline.batches_per_epoch;
        record.loss = record.updates > 0 ? loss / record.updates : 0.0;
        record.learning_rate = bc_opt.current_learning_rate();
      } else {
        const double eps = epsilon_for_episode(config.dqn, online_index++, online_total);
        OnlineEpisode out;
        GameState state = build_arena(config.game, config.seed + static_cast<std::uint64_t>(ep));
        auto features = encode_player(state, model.limits());
        while (outcome(state) == Outcome::Ongoing) {
          std::map<EntityId, int> actions;
          const int a = select_epsilon(model.q_values(*features), eps, agent_rng);
          actions[kPlayerId] = a;
          for (const auto& e : state.entities) {
            if (e.id != kPlayerId) actions[e.id] = opponent.act(observe(state, e.id), opponent_rng);
          }
          StepResult res = step(state, actions);
          const StepEvents& ev = res.events.at(kPlayerId);
          const double r = config.reward == RewardKind::Advanced
                               ? advanced_reward(ev, state, res.state, kPlayerId, config.weights).total
                               : basic_reward(ev, config.weights);
          const bool terminal = outcome(res.state) != Outcome::Ongoing;
          auto next = terminal ? nullptr : encode_player(res.state, model.limits());
          buffer.push(Transition{features, a, r, next, terminal});
          if (buffer.size() >= static_cast<std::size_t>(config.dqn.warmup)) {
            out.loss_sum += dqn_step(model, target, buffer, config.dqn, dqn_opt, replay_rng);
            ++out.updates;
          }
          out.reward_sum += r;
          ++out.length;
          state = std::move(res.state);
          features = std::move(next);
        }
        record.length = out.length;
        record.reward_sum = out.reward_sum;
        record.outcome = outcome(state);
        record.updates = out.updates;
        record.loss = out.updates > 0 ? out.loss_sum / out.updates : 0.0;
        record.epsilon = eps;
        record.learning_rate = dqn_opt.current_learning_rate();
      }
    } catch (const TrainingError& e) {
      model = last_good;
      throw TrainingError("hybrid: episode " + std::to_string(ep) + " aborted: " + e.what());
    } catch (const ModelError& e) {
      model = last_good;
      throw TrainingError("hybrid: episode " + std::to_string(ep) + " aborted: " + e.what());
    }
    last_good = model;
    log.add(record);
    if (on_episode) on_episode(record, model);
  }
  return log;
}

}  // namespace arena
