#pragma once

#include <cstdint>

#include "metashape/agents/trainer.hpp"
#include "metashape/meta/prior.hpp"

namespace metashape::meta {

struct AdaptConfig {
  agents::LoopConfig loop;
  double lr = 1e-3;  ///< plain gradient descent step
  double gamma = 0.99;
};

struct AdaptResult {
  nn::ParamVector params;
  agents::LoopResult loop;
};

/// Adaptation with the advantage head: phi starts at theta; experience is
/// collected epsilon-greedily on A_phi into a buffer of raw rewards; every
/// update is one step of the shaped advantage TD loss followed by one step
/// of the value regression loss on the same batch.
AdaptResult meta_test_adapt(envs::Env& train_env, envs::Env& eval_env, const PriorCheckpoint& prior,
                            const AdaptConfig& config, std::uint64_t seed);

/// Direct adaptation: Q-learning on raw rewards from theta with the same
/// loop, step size and budget.
AdaptResult maml_baseline_adapt(envs::Env& train_env, envs::Env& eval_env, const PriorCheckpoint& prior,
                                const AdaptConfig& config, std::uint64_t seed);

}  // namespace metashape::meta
