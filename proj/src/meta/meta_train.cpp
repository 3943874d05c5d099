#include "metashape/meta/meta_train.hpp"

#include <cmath>
#include <stdexcept>

#include "metashape/agents/dqn.hpp"
#include "metashape/agents/episode.hpp"
#include "metashape/agents/exploration.hpp"
#include "metashape/nn/optim.hpp"

namespace metashape::meta {

void MetaConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta > 0.0)) throw std::invalid_argument("MetaConfig: need alpha >= 0 and beta > 0");
  if (inner_steps < 1) throw std::invalid_argument("MetaConfig: inner_steps must be >= 1");
  if (tasks_per_iteration < 1 || iterations < 0 || frames_per_task < 1) {
    throw std::invalid_argument("MetaConfig: task, iteration and frame counts must be positive");
  }
  if (inner_batch == 0 || outer_batch == 0) throw std::invalid_argument("MetaConfig: batch sizes must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("MetaConfig: gamma must be in [0, 1]");
  agents::ExplorationSchedule{epsilon_start, epsilon_end, 1}.validate();
}

TaskGradient task_meta_gradient(const DuelingNet& net, const ParamVector& theta, const Batch& inner,
                                const Batch& outer, const MetaConfig& config) {
  Graph g;
  const std::vector<Var> vars = theta.bind(g);
  TaskGradient out;
  out.task_loss = task_loss(g, net, vars, inner, config.gamma).scalar();
  const std::vector<std::vector<Var>> phi{
      inner_adapt(g, net, vars, inner, config.gamma, config.alpha, config.inner_steps, config.second_order)};
  const Batch batches[] = {outer};
  Var loss = meta_loss(g, net, vars, phi, batches, config.stop_target_gradient);
  out.meta_loss = loss.scalar();
  out.grads = g.gradient_values(loss, vars);
  return out;
}

MetaTrainResult meta_train(const envs::TaskDistribution& tasks, const nn::MlpSpec& trunk, const MetaConfig& config,
                           std::uint64_t seed, const IterationCallback& on_iteration) {
  config.validate();
  if (tasks.action_space().continuous()) throw std::invalid_argument("meta_train: needs a discrete action space");
  if (tasks.observation_size() != trunk.input) {
    throw std::invalid_argument("meta_train: trunk input " + std::to_string(trunk.input) +
                                " does not match observation size " + std::to_string(tasks.observation_size()));
  }
  const DuelingNet net(trunk, tasks.action_space().discrete);
  Rng init_rng(derive_seed(seed, 0));
  Rng task_rng(derive_seed(seed, 1));
  Rng act_rng(derive_seed(seed, 2));

  MetaTrainResult result;
  result.prior.trunk = trunk;
  result.prior.actions = net.action_count();
  result.prior.theta = net.init_params(init_rng);
  result.prior.distribution = tasks.id();
  result.prior.seed = seed;
  ParamVector& theta = result.prior.theta;
  nn::OptimizerState adam = nn::OptimizerState::adam(config.beta);

  const long decay = std::max(1L, static_cast<long>(std::llround(config.epsilon_fraction * config.iterations)));
  const agents::ExplorationSchedule schedule{config.epsilon_start, config.epsilon_end, decay};

  for (long it = 0; it < config.iterations; ++it) {
    MetaIterationLog entry;
    entry.iteration = it;
    entry.epsilon = schedule.epsilon(it);
    double return_sum = 0.0;
    int episodes = 0;

    std::vector<Tensor> total;
    for (int i = 0; i < config.tasks_per_iteration; ++i) {
      std::unique_ptr<envs::Env> env = tasks.sample(task_rng);
      result.task_ids.push_back(env->task_id());
      agents::ReplayBuffer buffer(static_cast<std::size_t>(config.frames_per_task),
                                  derive_seed(seed, 1000 + static_cast<std::uint64_t>(it * config.tasks_per_iteration + i)));
      const agents::Policy policy = agents::epsilon_greedy_policy(net, theta, entry.epsilon, act_rng);
      agents::StepRunner runner(*env);
      for (int f = 0; f < config.frames_per_task; ++f) {
        if (auto done = runner.step(policy, &buffer)) {
          return_sum += done->base_return;
          ++episodes;
        }
      }
      const Batch inner = buffer.sample(config.inner_batch);
      const Batch outer = buffer.sample(config.outer_batch);
      TaskGradient tg = task_meta_gradient(net, theta, inner, outer, config);
      entry.meta_loss += tg.meta_loss;
      entry.task_loss += tg.task_loss;
      if (total.empty()) {
        total = std::move(tg.grads);
      } else {
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += tg.grads[k];
      }
    }
    const double inv = 1.0 / config.tasks_per_iteration;
    entry.meta_loss *= inv;
    entry.task_loss *= inv;
    entry.mean_return = episodes ? return_sum / episodes : 0.0;
    if (!std::isfinite(entry.meta_loss)) {
      throw std::runtime_error("meta_train: non-finite meta loss at iteration " + std::to_string(it));
    }
    for (Tensor& g : total) g *= inv;
    theta = nn::adam_step(adam, theta, total);
    result.prior.iteration = it + 1;
    result.log.push_back(entry);
    if (on_iteration) on_iteration(entry);
  }
  return result;
}

}  // namespace metashape::meta
