#pragma once

#include <memory>
#include <string>

#include "metashape/envs/env.hpp"

namespace metashape::envs {

enum class ActionMode { Discrete, Continuous };

/// Cart-pole constants. `half_length` is the pivot-to-centre distance, the
/// quantity varied across tasks (0.5 is the classic pole).
struct CartPolePhysics {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double tau = 0.02;
  double force_magnitude = 10.0;
  double force_bound = 15.0;
  double angle_threshold = 15.0 * 3.14159265358979323846 / 180.0;
  double position_bound = 2.4;
  int max_steps = 200;
};

struct CartPoleTask {
  double pole_length = 0.5;
  ActionMode mode = ActionMode::Discrete;

  /// Pole mass scales with length at the classic linear density 0.1 / 0.5.
  CartPolePhysics physics() const;
  std::string id() const;
};

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  int elapsed = 0;

  Observation observe() const { return {x, x_dot, theta, theta_dot}; }
};

struct CartPoleOutcome {
  CartPoleState next;
  double reward = 0.0;
  bool done = false;
};

CartPoleTask sample_cartpole_task(Rng& rng, double min_length, double max_length, ActionMode mode);

/// One Euler step. Reward 1 while the pole stays upright and the cart in
/// bounds, 0 on the failing step. Continuous forces are clipped to the bound.
CartPoleOutcome cartpole_step(const CartPoleTask& task, const CartPoleState& state, const Action& action);

class CartPoleEnv final : public Env {
 public:
  CartPoleEnv(CartPoleTask task, std::uint64_t seed);

  std::size_t observation_size() const override { return 4; }
  ActionSpace action_space() const override;
  Observation reset() override;
  StepResult step(const Action& action) override;
  std::string task_id() const override { return task_.id(); }

  const CartPoleTask& task() const { return task_; }
  const CartPoleState& state() const { return state_; }
  void set_state(const CartPoleState& s) { state_ = s; }

 private:
  CartPoleTask task_;
  Rng rng_;
  CartPoleState state_;
};

class CartPoleDistribution final : public TaskDistribution {
 public:
  CartPoleDistribution(double min_length, double max_length, ActionMode mode);

  std::unique_ptr<Env> sample(Rng& rng) const override;
  CartPoleTask sample_task(Rng& rng) const;
  std::size_t observation_size() const override { return 4; }
  ActionSpace action_space() const override;
  std::string id() const override;

 private:
  double min_length_;
  double max_length_;
  ActionMode mode_;
};

}  // namespace metashape::envs
