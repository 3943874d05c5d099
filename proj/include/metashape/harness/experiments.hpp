#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "metashape/agents/trainer.hpp"
#include "metashape/envs/cartpole.hpp"
#include "metashape/envs/grid.hpp"
#include "metashape/harness/config.hpp"
#include "metashape/harness/csv.hpp"
#include "metashape/meta/meta_train.hpp"

namespace metashape::harness {

using HeldoutTask = std::variant<envs::GridTask, envs::CartPoleTask>;

std::string task_id(const HeldoutTask& task);
/// Task identity with the action mode stripped, so a continuous pole and a
/// discrete pole of the same length compare equal.
std::string disjoint_key(const std::string& id);

/// Prior location for one seed; relative templates resolve under the output dir.
std::filesystem::path prior_path(const ExperimentConfig& config, std::uint64_t seed);
/// Companion list of the tasks a prior was trained on, one id per line.
std::filesystem::path training_tasks_path(const std::filesystem::path& prior);
std::vector<std::string> read_task_ids(const std::filesystem::path& path);

/// Union of training task ids over the configured seeds' priors that exist.
std::set<std::string> training_task_ids(const ExperimentConfig& config);

/// Held-out tasks from `heldout_file`, or sampled from `heldout_seed` while
/// skipping training tasks and duplicates. Throws std::invalid_argument if a
/// listed task was seen in training.
std::vector<HeldoutTask> resolve_heldout(const ExperimentConfig& config, const std::set<std::string>& training);

/// Fresh environment for a held-out task. CartPole envs use `seed` for resets.
std::unique_ptr<envs::Env> make_env(const HeldoutTask& task, std::uint64_t seed);

/// Training distribution for meta-training (CartPole always discrete).
std::unique_ptr<envs::TaskDistribution> meta_distribution(const ExperimentConfig& config);

/// Experiment id written into curve files.
std::string experiment_name(const ExperimentConfig& config);

/// Fresh plain DQN, trained on `train_env` (possibly shaped) and evaluated on
/// the unshaped `eval_env`.
agents::LoopResult run_dqn(envs::Env& train_env, envs::Env& eval_env, const ExperimentConfig& config,
                           std::uint64_t seed);
/// Fresh DDPG agent on continuous CartPole.
agents::LoopResult run_ddpg(envs::Env& train_env, envs::Env& eval_env, const ExperimentConfig& config,
                            std::uint64_t seed);

/// Meta-trains one prior per seed; writes the checkpoint, its task list and
/// `meta_log_seed<n>.csv`.
std::vector<meta::MetaTrainResult> run_meta_train(const ExperimentConfig& config, std::ostream& log);

/// Runs a meta-test or baseline kind over every (held-out task, seed) pair
/// and writes `curves_<name>.csv`, `budget_<name>.csv` and the task list.
/// Records come back ordered by task, then seed.
std::vector<CurveRecord> run_evaluation(const ExperimentConfig& config, std::ostream& log);

struct HeatmapScore {
  std::uint64_t seed = 0;
  std::string task;
  double spearman = 0.0;
};

/// Heatmaps of each seed's prior on the held-out grids plus their rank
/// correlation with negative goal distance.
std::vector<HeatmapScore> run_heatmaps(const ExperimentConfig& config, std::ostream& log);

/// Validates, dispatches on the kind and echoes the config. Returns the
/// process exit status.
int run(const ExperimentConfig& config, std::ostream& log);

/// Runs `count` jobs on up to `threads` workers (0 = hardware concurrency).
/// The first exception in job order is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job);

}  // namespace metashape::harness
