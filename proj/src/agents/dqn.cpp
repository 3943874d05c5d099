#include "metashape/agents/dqn.hpp"

#include <cmath>
#include <stdexcept>

#include "metashape/agents/exploration.hpp"

namespace metashape::agents {

Tensor action_mask(std::span<const int> actions, std::size_t action_count) {
  Tensor mask = Tensor::Zero(static_cast<Eigen::Index>(actions.size()), static_cast<Eigen::Index>(action_count));
  for (std::size_t r = 0; r < actions.size(); ++r) {
    if (actions[r] < 0 || static_cast<std::size_t>(actions[r]) >= action_count) {
      throw std::invalid_argument("action_mask: action " + std::to_string(actions[r]) + " out of range");
    }
    mask(static_cast<Eigen::Index>(r), actions[r]) = 1.0;
  }
  return mask;
}

Var td_loss(Graph& g, const nn::QModel& model, std::span<const Var> params, const Batch& batch, double gamma) {
  if (batch.size() == 0) throw std::invalid_argument("td_loss: empty batch");
  if (batch.actions.size() != batch.size()) throw std::invalid_argument("td_loss: batch has no discrete actions");
  Var q = model.q_values(g, params, g.constant(batch.states));
  Var q_sa = g.sum_cols(g.mul(q, g.constant(action_mask(batch.actions, model.action_count()))));
  Var next_max = g.stop_gradient(g.max_reduce(model.q_values(g, params, g.constant(batch.next_states))));
  Var target = g.add(g.constant(batch.rewards), g.scale(g.mul(g.constant(batch.not_done), next_max), gamma));
  return g.mean(g.square(g.sub(q_sa, target)));
}

DqnStep dqn_update(const nn::QModel& model, const nn::ParamVector& params, const Batch& batch, double gamma,
                   nn::OptimizerState& optimizer) {
  Graph g;
  const std::vector<Var> vars = params.bind(g);
  Var loss = td_loss(g, model, vars, batch, gamma);
  const double value = loss.scalar();
  if (!std::isfinite(value)) throw std::domain_error("dqn_update: non-finite loss");
  const std::vector<Tensor> grads = g.gradient_values(loss, vars);
  return {nn::apply_step(optimizer, params, grads), value};
}

std::vector<double> q_row(const nn::QModel& model, const nn::ParamVector& params, const Observation& obs) {
  Tensor s = Eigen::Map<const Tensor>(obs.data(), 1, static_cast<Eigen::Index>(obs.size()));
  const Tensor q = model.evaluate(params, s);
  return {q.data(), q.data() + q.size()};
}

Policy greedy_policy(const nn::QModel& model, const nn::ParamVector& params) {
  return [&model, &params](const Observation& obs) -> envs::Action {
    const std::vector<double> q = q_row(model, params, obs);
    return argmax(q);
  };
}

Policy epsilon_greedy_policy(const nn::QModel& model, const nn::ParamVector& params, const double& epsilon,
                             Rng& rng) {
  return [&model, &params, &epsilon, &rng](const Observation& obs) -> envs::Action {
    const std::vector<double> q = q_row(model, params, obs);
    return epsilon_greedy(q, epsilon, rng);
  };
}

}  // namespace metashape::agents
