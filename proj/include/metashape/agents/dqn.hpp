#pragma once

#include <span>
#include <vector>

#include "metashape/agents/episode.hpp"
#include "metashape/agents/replay.hpp"
#include "metashape/nn/networks.hpp"
#include "metashape/nn/optim.hpp"

namespace metashape::agents {

using ad::Graph;
using ad::Var;

/// One-hot rows (B x actions) selecting each transition's action.
Tensor action_mask(std::span<const int> actions, std::size_t action_count);

/// Mean squared TD error r + gamma * max_a' Q(s', a') - Q(s, a) using the
/// batch's rewards. The bootstrap is held constant (semi-gradient) and is
/// dropped on terminal transitions.
Var td_loss(Graph& g, const nn::QModel& model, std::span<const Var> params, const Batch& batch, double gamma);

struct DqnStep {
  nn::ParamVector params;
  double loss = 0.0;  ///< loss before the step
};

/// One optimizer step on td_loss; no target network. Throws
/// std::domain_error on a non-finite loss.
DqnStep dqn_update(const nn::QModel& model, const nn::ParamVector& params, const Batch& batch, double gamma,
                   nn::OptimizerState& optimizer);

/// Q-values of one observation.
std::vector<double> q_row(const nn::QModel& model, const nn::ParamVector& params, const Observation& obs);

/// Policies read the parameters through the reference at call time.
Policy greedy_policy(const nn::QModel& model, const nn::ParamVector& params);
Policy epsilon_greedy_policy(const nn::QModel& model, const nn::ParamVector& params, const double& epsilon,
                             Rng& rng);

}  // namespace metashape::agents
