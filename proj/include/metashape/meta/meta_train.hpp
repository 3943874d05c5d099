#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "metashape/envs/env.hpp"
#include "metashape/meta/losses.hpp"
#include "metashape/meta/prior.hpp"

namespace metashape::meta {

struct MetaConfig {
  double alpha = 0.01;  ///< inner SGD step
  double beta = 0.01;   ///< outer Adam step
  int inner_steps = 1;
  int tasks_per_iteration = 10;
  long iterations = 200;
  int frames_per_task = 256;
  std::size_t inner_batch = 128;
  std::size_t outer_batch = 128;
  bool second_order = true;
  /// Treat Q_phi as a constant regression target in the meta loss.
  bool stop_target_gradient = false;
  double gamma = 0.99;
  /// Collection exploration, decayed linearly over the first
  /// `epsilon_fraction` of the iterations.
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  double epsilon_fraction = 0.5;

  void validate() const;
};

struct MetaIterationLog {
  long iteration = 0;
  double meta_loss = 0.0;
  double task_loss = 0.0;  ///< mean pre-adaptation TD loss on the inner batches
  double epsilon = 0.0;
  double mean_return = 0.0;  ///< mean unshaped return of episodes finished while collecting
};

struct MetaTrainResult {
  PriorCheckpoint prior;
  std::vector<MetaIterationLog> log;
  std::vector<std::string> task_ids;  ///< every sampled training task, in order
};

/// Per-task contribution to one meta step.
struct TaskGradient {
  double meta_loss = 0.0;
  double task_loss = 0.0;
  std::vector<Tensor> grads;
};

/// Meta-loss term and its gradient w.r.t. theta for one task.
TaskGradient task_meta_gradient(const DuelingNet& net, const ParamVector& theta, const Batch& inner,
                                const Batch& outer, const MetaConfig& config);

using IterationCallback = std::function<void(const MetaIterationLog&)>;

/// Meta-learns the prior. Each iteration samples tasks, fills a fresh buffer
/// per task with epsilon-greedy experience under Q_theta, adapts, and takes
/// one Adam step on the mean meta loss. Per-task gradients are reduced in
/// task order. Throws std::runtime_error naming the iteration when the meta
/// loss stops being finite.
MetaTrainResult meta_train(const envs::TaskDistribution& tasks, const nn::MlpSpec& trunk, const MetaConfig& config,
                           std::uint64_t seed, const IterationCallback& on_iteration = {});

}  // namespace metashape::meta
