#include "metashape/agents/episode.hpp"

#include <stdexcept>

#include "metashape/shaping/shaping.hpp"

namespace metashape::agents {

StepRunner::StepRunner(envs::Env& env) : env_(env), obs_(env.reset()) {}

std::optional<EpisodeStats> StepRunner::step(const Policy& policy, ReplayBuffer* buffer) {
  const envs::Action action = policy(obs_);
  envs::StepResult r = env_.step(action);
  ++total_steps_;
  current_.base_return += r.base_reward;
  current_.learner_return += r.reward;
  ++current_.steps;
  if (buffer != nullptr) buffer->push(Transition{obs_, action, r.reward, r.next, r.done});
  if (!r.done) {
    obs_ = std::move(r.next);
    return std::nullopt;
  }
  EpisodeStats finished = current_;
  current_ = EpisodeStats{};
  obs_ = env_.reset();
  return finished;
}

EpisodeStats collect_episode(envs::Env& env, const Policy& policy, ReplayBuffer* buffer) {
  StepRunner runner(env);
  while (true) {
    if (auto done = runner.step(policy, buffer)) return *done;
  }
}

double evaluate_return(envs::Env& env, const Policy& policy, int episodes) {
  if (dynamic_cast<const shaping::ShapedEnv*>(&env) != nullptr) {
    throw std::logic_error("evaluate_return: evaluation must run on the unshaped environment");
  }
  if (episodes <= 0) throw std::invalid_argument("evaluate_return: need at least one episode");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) total += collect_episode(env, policy, nullptr).base_return;
  return total / episodes;
}

}  // namespace metashape::agents
