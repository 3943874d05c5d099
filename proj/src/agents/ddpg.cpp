#include "metashape/agents/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metashape::agents {

using ad::Graph;
using ad::Var;

DdpgAgent DdpgAgent::create(std::size_t state_size, const DdpgConfig& config, Rng& rng) {
  nn::ActorNet actor({state_size, config.actor_hidden, config.activation}, config.bound);
  nn::CriticNet critic(state_size, config.critic_hidden, config.activation);
  nn::ParamVector ap = actor.init_params(rng);
  nn::ParamVector cp = critic.init_params(rng);
  if (!(config.tau >= 0.0 && config.tau <= 1.0)) throw std::invalid_argument("DdpgAgent: tau must be in [0, 1]");
  return DdpgAgent{std::move(actor),
                   std::move(critic),
                   ap,
                   cp,
                   ap,
                   cp,
                   nn::OptimizerState::adam(config.actor_lr),
                   nn::OptimizerState::adam(config.critic_lr),
                   config.tau};
}

namespace {

Tensor row_of(const Observation& obs) {
  return Eigen::Map<const Tensor>(obs.data(), 1, static_cast<Eigen::Index>(obs.size()));
}

Tensor actor_values(const nn::ActorNet& actor, const nn::ParamVector& params, const Tensor& states) {
  Graph g;
  const std::vector<Var> vars = params.bind(g);
  return actor.actions(g, vars, g.constant(states)).value();
}

}  // namespace

double DdpgAgent::act(const Observation& obs) const { return actor_values(actor, actor_params, row_of(obs))(0, 0); }

double DdpgAgent::explore(const Observation& obs, double sigma, Rng& rng) const {
  const double a = act(obs) + std::normal_distribution<double>(0.0, sigma)(rng);
  return std::clamp(a, -actor.bound(), actor.bound());
}

void soft_update(nn::ParamVector& target, const nn::ParamVector& online, double tau) {
  if (!target.same_layout(online)) throw std::invalid_argument("soft_update: layouts differ");
  for (std::size_t i = 0; i < target.count(); ++i) {
    target[i] = tau * online[i] + (1.0 - tau) * target[i];
  }
}

DdpgLosses ddpg_update(DdpgAgent& agent, const Batch& batch, double gamma) {
  if (batch.size() == 0 || batch.forces.rows() != static_cast<Eigen::Index>(batch.size())) {
    throw std::invalid_argument("ddpg_update: need a non-empty continuous-action batch");
  }
  DdpgLosses losses;

  // Critic target from the target networks, held constant.
  Tensor target;
  {
    Graph g;
    const std::vector<Var> ta = agent.target_actor.bind(g);
    const std::vector<Var> tc = agent.target_critic.bind(g);
    Var next = g.constant(batch.next_states);
    Var q_next = agent.critic.value(g, tc, next, agent.actor.actions(g, ta, next));
    target = batch.rewards + gamma * batch.not_done.cwiseProduct(q_next.value());
  }
  {
    Graph g;
    const std::vector<Var> cv = agent.critic_params.bind(g);
    Var q = agent.critic.value(g, cv, g.constant(batch.states), g.constant(batch.forces));
    Var loss = g.mean(g.square(g.sub(q, g.constant(target))));
    losses.critic = loss.scalar();
    if (!std::isfinite(losses.critic)) throw std::domain_error("ddpg_update: non-finite critic loss");
    agent.critic_params = nn::apply_step(agent.critic_opt, agent.critic_params, g.gradient_values(loss, cv));
  }
  {
    Graph g;
    const std::vector<Var> av = agent.actor_params.bind(g);
    const std::vector<Var> cv = agent.critic_params.bind(g);
    Var s = g.constant(batch.states);
    Var loss = g.scale(g.mean(agent.critic.value(g, cv, s, agent.actor.actions(g, av, s))), -1.0);
    losses.actor = loss.scalar();
    if (!std::isfinite(losses.actor)) throw std::domain_error("ddpg_update: non-finite actor loss");
    agent.actor_params = nn::apply_step(agent.actor_opt, agent.actor_params, g.gradient_values(loss, av));
  }
  soft_update(agent.target_critic, agent.critic_params, agent.tau);
  soft_update(agent.target_actor, agent.actor_params, agent.tau);
  return losses;
}

Policy actor_policy(const DdpgAgent& agent) {
  return [&agent](const Observation& obs) -> envs::Action { return agent.act(obs); };
}

Policy noisy_actor_policy(const DdpgAgent& agent, double sigma, Rng& rng) {
  return [&agent, sigma, &rng](const Observation& obs) -> envs::Action { return agent.explore(obs, sigma, rng); };
}

}  // namespace metashape::agents
