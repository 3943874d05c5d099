#pragma once

#include <functional>
#include <vector>

#include "metashape/agents/exploration.hpp"
#include "metashape/agents/episode.hpp"
#include "metashape/agents/replay.hpp"

namespace metashape::agents {

/// Collection/update cadence shared by every learner so paired runs consume
/// identical environment-step budgets.
struct LoopConfig {
  long updates = 2000;
  long warmup = 1024;          ///< frames collected before the first update
  int frames_per_update = 1;
  std::size_t batch = 64;
  std::size_t capacity = 10000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_fraction = 0.25;  ///< share of the update phase spent decaying
  long eval_every = 100;
  int eval_episodes = 1;

  /// Decay over the warm-up plus the first `epsilon_fraction` of updates.
  ExplorationSchedule schedule() const;
  long env_steps_at(long update) const { return warmup + update * frames_per_update; }
  void validate() const;
};

struct CurvePoint {
  long step = 0;       ///< updates performed
  long env_steps = 0;  ///< environment transitions consumed
  double ret = 0.0;    ///< mean unshaped evaluation return
};

struct LearnerHooks {
  /// Behaviour action given the current exploration rate.
  std::function<envs::Action(const Observation&, double epsilon)> act;
  std::function<void(const Batch&)> update;
  /// Exploitation policy used for evaluation.
  Policy greedy;
};

struct LoopResult {
  std::vector<CurvePoint> curve;
  long env_steps = 0;
  long updates = 0;
};

/// Warm-up, then `updates` rounds of collect-then-update, evaluating on
/// `eval_env` after warm-up and every `eval_every` updates.
LoopResult run_training_loop(envs::Env& train_env, envs::Env& eval_env, const LoopConfig& config,
                             const LearnerHooks& hooks, std::uint64_t buffer_seed);

}  // namespace metashape::agents
