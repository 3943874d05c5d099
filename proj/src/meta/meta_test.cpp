#include "metashape/meta/meta_test.hpp"

#include <cmath>
#include <stdexcept>

#include "metashape/agents/dqn.hpp"
#include "metashape/agents/exploration.hpp"
#include "metashape/meta/losses.hpp"
#include "metashape/nn/optim.hpp"

namespace metashape::meta {

namespace {

void check_task(const envs::Env& env, const PriorCheckpoint& prior) {
  const envs::ActionSpace space = env.action_space();
  if (space.continuous() || space.discrete != prior.actions) {
    throw std::invalid_argument("adaptation: task action count does not match the prior's " +
                                std::to_string(prior.actions));
  }
  if (env.observation_size() != prior.trunk.input) {
    throw std::invalid_argument("adaptation: observation size does not match the prior");
  }
}

ParamVector descend(const ParamVector& params, Var loss, Graph& g, const std::vector<Var>& vars, double lr,
                    const char* what) {
  if (!std::isfinite(loss.scalar())) throw std::domain_error(std::string(what) + ": non-finite loss");
  return nn::sgd_step(params, g.gradient_values(loss, vars), lr);
}

}  // namespace

AdaptResult meta_test_adapt(envs::Env& train_env, envs::Env& eval_env, const PriorCheckpoint& prior,
                            const AdaptConfig& config, std::uint64_t seed) {
  check_task(train_env, prior);
  const auto net = prior.net();
  AdaptResult result{prior.theta, {}};
  Rng rng(derive_seed(seed, 0));
  ParamVector& phi = result.params;

  agents::LearnerHooks hooks;
  hooks.act = [&](const envs::Observation& obs, double eps) -> envs::Action {
    const nn::DuelingOutput out = nn::dueling_forward(*net, phi, obs);
    return agents::epsilon_greedy(out.advantage, eps, rng);
  };
  hooks.update = [&](const Batch& batch) {
    {
      Graph g;
      const std::vector<Var> vars = phi.bind(g);
      phi = descend(phi, advantage_td_loss(g, *net, vars, batch, config.gamma), g, vars, config.lr, "advantage step");
    }
    {
      Graph g;
      const std::vector<Var> vars = phi.bind(g);
      phi = descend(phi, value_regression_loss(g, *net, vars, batch), g, vars, config.lr, "value step");
    }
  };
  hooks.greedy = agents::greedy_policy(*net, phi);
  result.loop = agents::run_training_loop(train_env, eval_env, config.loop, hooks, derive_seed(seed, 1));
  return result;
}

AdaptResult maml_baseline_adapt(envs::Env& train_env, envs::Env& eval_env, const PriorCheckpoint& prior,
                                const AdaptConfig& config, std::uint64_t seed) {
  check_task(train_env, prior);
  const auto net = prior.net();
  AdaptResult result{prior.theta, {}};
  Rng rng(derive_seed(seed, 0));
  ParamVector& phi = result.params;

  agents::LearnerHooks hooks;
  hooks.act = [&](const envs::Observation& obs, double eps) -> envs::Action {
    return agents::epsilon_greedy(agents::q_row(*net, phi, obs), eps, rng);
  };
  hooks.update = [&](const Batch& batch) {
    Graph g;
    const std::vector<Var> vars = phi.bind(g);
    phi = descend(phi, task_loss(g, *net, vars, batch, config.gamma), g, vars, config.lr, "q-learning step");
  };
  hooks.greedy = agents::greedy_policy(*net, phi);
  result.loop = agents::run_training_loop(train_env, eval_env, config.loop, hooks, derive_seed(seed, 1));
  return result;
}

}  // namespace metashape::meta
