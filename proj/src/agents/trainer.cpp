#include "metashape/agents/trainer.hpp"

#include <cmath>
#include <stdexcept>

namespace metashape::agents {

ExplorationSchedule LoopConfig::schedule() const {
  const long decay = static_cast<long>(std::llround(epsilon_fraction * static_cast<double>(updates))) * frames_per_update;
  return {epsilon_start, epsilon_end, std::max(1L, warmup + decay)};
}

void LoopConfig::validate() const {
  if (updates < 0 || warmup < 0) throw std::invalid_argument("LoopConfig: negative update or warm-up count");
  if (frames_per_update <= 0 || batch == 0 || capacity == 0) {
    throw std::invalid_argument("LoopConfig: frames per update, batch and capacity must be positive");
  }
  if (eval_every <= 0 || eval_episodes <= 0) throw std::invalid_argument("LoopConfig: bad evaluation cadence");
  if (!(epsilon_fraction >= 0.0 && epsilon_fraction <= 1.0)) {
    throw std::invalid_argument("LoopConfig: epsilon fraction must be in [0, 1]");
  }
  schedule().validate();
}

LoopResult run_training_loop(envs::Env& train_env, envs::Env& eval_env, const LoopConfig& config,
                             const LearnerHooks& hooks, std::uint64_t buffer_seed) {
  config.validate();
  const ExplorationSchedule schedule = config.schedule();
  ReplayBuffer buffer(config.capacity, buffer_seed);
  StepRunner runner(train_env);
  LoopResult result;

  double epsilon = schedule.epsilon(0);
  const Policy behaviour = [&](const Observation& obs) { return hooks.act(obs, epsilon); };
  const auto collect = [&](long frames) {
    for (long f = 0; f < frames; ++f) {
      epsilon = schedule.epsilon(runner.total_steps());
      runner.step(behaviour, &buffer);
    }
  };
  const auto evaluate = [&](long step) {
    result.curve.push_back({step, runner.total_steps(), evaluate_return(eval_env, hooks.greedy, config.eval_episodes)});
  };

  collect(config.warmup);
  evaluate(0);
  for (long u = 1; u <= config.updates; ++u) {
    collect(config.frames_per_update);
    hooks.update(buffer.sample(config.batch));
    if (u % config.eval_every == 0) evaluate(u);
  }
  result.env_steps = runner.total_steps();
  result.updates = config.updates;
  return result;
}

}  // namespace metashape::agents
