#pragma once

#include <span>
#include <vector>

#include "metashape/agents/replay.hpp"
#include "metashape/nn/networks.hpp"
#include "metashape/nn/params.hpp"

namespace metashape::meta {

using ad::Graph;
using ad::Var;
using agents::Batch;
using nn::DuelingNet;
using nn::ParamVector;
using nn::Tensor;

/// Q-learning TD loss of the dueling Q on raw task rewards (semi-gradient
/// bootstrap, dropped on terminal transitions).
Var task_loss(Graph& g, const DuelingNet& net, std::span<const Var> params, const Batch& batch, double gamma);
double task_loss_value(const DuelingNet& net, const ParamVector& params, const Batch& batch, double gamma);

/// Advantage-head TD loss on rewards shaped by the network's own value head:
/// (r + gamma V(s') - V(s)) + gamma max_a' A(s', a') - A(s, a), with A the
/// aggregated advantage A_raw - max A_raw. V(s) carries gradient; the
/// next-state terms are targets. Terminal transitions drop both next-state
/// terms, matching the zero terminal potential.
Var advantage_td_loss(Graph& g, const DuelingNet& net, std::span<const Var> params, const Batch& batch, double gamma);

/// (V(s) - stop_gradient(max_a A(s, a) + V(s)))^2 over the batch states.
Var value_regression_loss(Graph& g, const DuelingNet& net, std::span<const Var> params, const Batch& batch);

/// N plain gradient steps on task_loss from `theta`. With `second_order`
/// the inner gradients are recorded, so the result stays a differentiable
/// function of theta; otherwise they enter as constants (first-order).
std::vector<Var> inner_adapt(Graph& g, const DuelingNet& net, std::span<const Var> theta, const Batch& batch,
                             double gamma, double alpha, int steps, bool second_order);
ParamVector inner_adapt_values(const DuelingNet& net, const ParamVector& theta, const Batch& batch, double gamma,
                               double alpha, int steps);

/// Mean over tasks of the mean over each task's batch of
/// (Q_theta(s, a) - Q_phi_i(s, a))^2 at the stored actions. With
/// `stop_target` the Q_phi_i term is a constant regression target.
Var meta_loss(Graph& g, const DuelingNet& net, std::span<const Var> theta,
              std::span<const std::vector<Var>> phis, std::span<const Batch> batches, bool stop_target);

}  // namespace metashape::meta
