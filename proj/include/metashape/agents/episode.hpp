#pragma once

#include <functional>
#include <optional>

#include "metashape/agents/replay.hpp"
#include "metashape/envs/env.hpp"

namespace metashape::agents {

using envs::Observation;
using Policy = std::function<envs::Action(const Observation&)>;

struct EpisodeStats {
  double base_return = 0.0;     ///< task reward, what curves report
  double learner_return = 0.0;  ///< reward the learner saw (shaped or not)
  int steps = 0;
};

/// Steps an environment one transition at a time across episode boundaries,
/// so training loops can interleave updates with collection. Stored
/// transitions carry the learner-facing reward.
class StepRunner {
 public:
  explicit StepRunner(envs::Env& env);

  /// Returns the finished episode's statistics when this step ended one.
  std::optional<EpisodeStats> step(const Policy& policy, ReplayBuffer* buffer);

  long total_steps() const { return total_steps_; }
  const Observation& observation() const { return obs_; }

 private:
  envs::Env& env_;
  Observation obs_;
  EpisodeStats current_;
  long total_steps_ = 0;
};

/// Runs one full episode from reset.
EpisodeStats collect_episode(envs::Env& env, const Policy& policy, ReplayBuffer* buffer);

/// Mean base return of `episodes` rollouts. Refuses shaped environments so
/// learning curves can never see shaped rewards.
double evaluate_return(envs::Env& env, const Policy& policy, int episodes);

}  // namespace metashape::agents
