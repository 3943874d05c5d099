#include "metashape/meta/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "metashape/agents/dqn.hpp"
#include "metashape/nn/optim.hpp"

namespace metashape::meta {

namespace {

void require_discrete(const Batch& batch, const char* who) {
  if (batch.size() == 0) throw std::invalid_argument(std::string(who) + ": empty batch");
  if (batch.actions.size() != batch.size()) throw std::invalid_argument(std::string(who) + ": batch lacks actions");
}

Var select(Graph& g, Var values, const Batch& batch, std::size_t actions) {
  return g.sum_cols(g.mul(values, g.constant(agents::action_mask(batch.actions, actions))));
}

// A_raw - max A_raw.
Var aggregated_advantage(Graph& g, const nn::DuelingHeads& h, std::size_t actions) {
  return g.sub(h.advantage, g.broadcast_cols(g.max_reduce(h.advantage), static_cast<Eigen::Index>(actions)));
}

}  // namespace

Var task_loss(Graph& g, const DuelingNet& net, std::span<const Var> params, const Batch& batch, double gamma) {
  require_discrete(batch, "task_loss");
  return agents::td_loss(g, net, params, batch, gamma);
}

double task_loss_value(const DuelingNet& net, const ParamVector& params, const Batch& batch, double gamma) {
  Graph g;
  const std::vector<Var> vars = params.bind(g);
  return task_loss(g, net, vars, batch, gamma).scalar();
}

Var advantage_td_loss(Graph& g, const DuelingNet& net, std::span<const Var> params, const Batch& batch, double gamma) {
  require_discrete(batch, "advantage_td_loss");
  const std::size_t n = net.action_count();
  const nn::DuelingHeads now = net.heads(g, params, g.constant(batch.states));
  const nn::DuelingHeads next = net.heads(g, params, g.constant(batch.next_states));
  Var not_done = g.constant(batch.not_done);

  // Shaped reward r + gamma * V(s') - V(s); the next-state potential is data.
  Var next_potential = g.stop_gradient(g.mul(not_done, next.value));
  Var shaped = g.sub(g.add(g.constant(batch.rewards), g.scale(next_potential, gamma)), now.value);
  Var bootstrap = g.stop_gradient(g.mul(not_done, g.max_reduce(aggregated_advantage(g, next, n))));
  Var a_sa = select(g, aggregated_advantage(g, now, n), batch, n);
  return g.mean(g.square(g.sub(g.add(shaped, g.scale(bootstrap, gamma)), a_sa)));
}

Var value_regression_loss(Graph& g, const DuelingNet& net, std::span<const Var> params, const Batch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("value_regression_loss: empty batch");
  const nn::DuelingHeads h = net.heads(g, params, g.constant(batch.states));
  Var target = g.stop_gradient(g.add(g.max_reduce(aggregated_advantage(g, h, net.action_count())), h.value));
  return g.mean(g.square(g.sub(h.value, target)));
}

std::vector<Var> inner_adapt(Graph& g, const DuelingNet& net, std::span<const Var> theta, const Batch& batch,
                             double gamma, double alpha, int steps, bool second_order) {
  if (steps < 1) throw std::invalid_argument("inner_adapt: need at least one step");
  std::vector<Var> phi(theta.begin(), theta.end());
  for (int k = 0; k < steps; ++k) {
    Var loss = task_loss(g, net, phi, batch, gamma);
    if (!std::isfinite(loss.scalar())) {
      throw std::domain_error("inner_adapt: non-finite task loss at step " + std::to_string(k));
    }
    const std::vector<Var> grads = g.backward(loss, phi, second_order);
    phi = nn::sgd_step(g, phi, grads, alpha);
  }
  return phi;
}

ParamVector inner_adapt_values(const DuelingNet& net, const ParamVector& theta, const Batch& batch, double gamma,
                               double alpha, int steps) {
  if (steps < 1) throw std::invalid_argument("inner_adapt: need at least one step");
  ParamVector phi = theta;
  for (int k = 0; k < steps; ++k) {
    Graph g;
    const std::vector<Var> vars = phi.bind(g);
    Var loss = task_loss(g, net, vars, batch, gamma);
    if (!std::isfinite(loss.scalar())) {
      throw std::domain_error("inner_adapt: non-finite task loss at step " + std::to_string(k));
    }
    phi = nn::sgd_step(phi, g.gradient_values(loss, vars), alpha);
  }
  return phi;
}

Var meta_loss(Graph& g, const DuelingNet& net, std::span<const Var> theta,
              std::span<const std::vector<Var>> phis, std::span<const Batch> batches, bool stop_target) {
  if (phis.size() != batches.size() || phis.empty()) {
    throw std::invalid_argument("meta_loss: need one batch per adapted task, got " + std::to_string(phis.size()) +
                                " tasks and " + std::to_string(batches.size()) + " batches");
  }
  const std::size_t n = net.action_count();
  std::vector<Var> terms;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    require_discrete(batches[i], "meta_loss");
    Var s = g.constant(batches[i].states);
    Var q_theta = select(g, net.q_values(g, theta, s), batches[i], n);
    Var q_phi = select(g, net.q_values(g, phis[i], s), batches[i], n);
    if (stop_target) q_phi = g.stop_gradient(q_phi);
    terms.push_back(g.mean(g.square(g.sub(q_theta, q_phi))));
  }
  Var total = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) total = g.add(total, terms[i]);
  return g.scale(total, 1.0 / static_cast<double>(terms.size()));
}

}  // namespace metashape::meta
