#pragma once

#include <vector>

#include "metashape/agents/episode.hpp"
#include "metashape/agents/replay.hpp"
#include "metashape/nn/networks.hpp"
#include "metashape/nn/optim.hpp"

namespace metashape::agents {

struct DdpgConfig {
  std::vector<std::size_t> actor_hidden{32, 32};
  std::vector<std::size_t> critic_hidden{64, 64};
  nn::Activation activation = nn::Activation::Tanh;  ///< CartPole trunk nonlinearity
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double tau = 0.01;
  double bound = 15.0;
  double noise_sigma = 1.5;
};

struct DdpgAgent {
  nn::ActorNet actor;
  nn::CriticNet critic;
  nn::ParamVector actor_params;
  nn::ParamVector critic_params;
  nn::ParamVector target_actor;
  nn::ParamVector target_critic;
  nn::OptimizerState actor_opt;
  nn::OptimizerState critic_opt;
  double tau = 0.01;

  /// Targets start as copies of the online networks.
  static DdpgAgent create(std::size_t state_size, const DdpgConfig& config, Rng& rng);

  double act(const Observation& obs) const;
  /// act() plus Gaussian noise, clipped to the bound.
  double explore(const Observation& obs, double sigma, Rng& rng) const;
};

struct DdpgLosses {
  double critic = 0.0;
  double actor = 0.0;  ///< -mean Q(s, mu(s)) before the actor step
};

/// target <- tau * online + (1 - tau) * target.
void soft_update(nn::ParamVector& target, const nn::ParamVector& online, double tau);

/// Critic step towards r + gamma * Q'(s', mu'(s')), actor step up the
/// updated critic, then soft target updates. Throws std::domain_error on
/// non-finite losses.
DdpgLosses ddpg_update(DdpgAgent& agent, const Batch& batch, double gamma);

Policy actor_policy(const DdpgAgent& agent);
Policy noisy_actor_policy(const DdpgAgent& agent, double sigma, Rng& rng);

}  // namespace metashape::agents
