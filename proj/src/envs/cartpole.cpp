#include "metashape/envs/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace metashape::envs {

CartPolePhysics CartPoleTask::physics() const {
  CartPolePhysics p;
  p.half_length = pole_length;
  p.pole_mass = 0.1 * (pole_length / 0.5);
  return p;
}

std::string CartPoleTask::id() const {
  std::ostringstream s;
  s.precision(17);
  s << "cartpole:" << (mode == ActionMode::Discrete ? "discrete" : "continuous") << ":" << pole_length;
  return s.str();
}

CartPoleTask sample_cartpole_task(Rng& rng, double min_length, double max_length, ActionMode mode) {
  if (!(min_length > 0.0) || max_length < min_length) {
    throw std::invalid_argument("sample_cartpole_task: need 0 < min <= max");
  }
  CartPoleTask task;
  task.mode = mode;
  // uniform_real_distribution(a, a) is undefined.
  task.pole_length = min_length == max_length ? min_length : uniform(rng, min_length, max_length);
  return task;
}

namespace {

double applied_force(const CartPoleTask& task, const CartPolePhysics& p, const Action& action) {
  if (task.mode == ActionMode::Discrete) {
    const int* a = std::get_if<int>(&action);
    if (a == nullptr || (*a != 0 && *a != 1)) throw std::invalid_argument("cartpole: discrete action must be 0 or 1");
    return *a == 1 ? p.force_magnitude : -p.force_magnitude;
  }
  const double* a = std::get_if<double>(&action);
  if (a == nullptr || !std::isfinite(*a)) throw std::invalid_argument("cartpole: continuous action must be a finite real");
  return std::clamp(*a, -p.force_bound, p.force_bound);
}

}  // namespace

CartPoleOutcome cartpole_step(const CartPoleTask& task, const CartPoleState& s, const Action& action) {
  const CartPolePhysics p = task.physics();
  const double force = applied_force(task, p, action);

  const double total_mass = p.cart_mass + p.pole_mass;
  const double polemass_length = p.pole_mass * p.half_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);
  const double temp = (force + polemass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc = (p.gravity * sin_t - cos_t * temp) /
                           (p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

  CartPoleOutcome out;
  out.next.x = s.x + p.tau * s.x_dot;
  out.next.x_dot = s.x_dot + p.tau * x_acc;
  out.next.theta = s.theta + p.tau * s.theta_dot;
  out.next.theta_dot = s.theta_dot + p.tau * theta_acc;
  out.next.elapsed = s.elapsed + 1;

  const bool failed = std::abs(out.next.theta) > p.angle_threshold || std::abs(out.next.x) > p.position_bound;
  out.reward = failed ? 0.0 : 1.0;
  out.done = failed || out.next.elapsed >= p.max_steps;
  return out;
}

CartPoleEnv::CartPoleEnv(CartPoleTask task, std::uint64_t seed) : task_(task), rng_(seed) {}

ActionSpace CartPoleEnv::action_space() const {
  if (task_.mode == ActionMode::Discrete) return {2, 0.0};
  return {0, task_.physics().force_bound};
}

Observation CartPoleEnv::reset() {
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  state_.x = d(rng_);
  state_.x_dot = d(rng_);
  state_.theta = d(rng_);
  state_.theta_dot = d(rng_);
  state_.elapsed = 0;
  return state_.observe();
}

StepResult CartPoleEnv::step(const Action& action) {
  CartPoleOutcome o = cartpole_step(task_, state_, action);
  state_ = o.next;
  return {state_.observe(), o.reward, o.reward, o.done};
}

CartPoleDistribution::CartPoleDistribution(double min_length, double max_length, ActionMode mode)
    : min_length_(min_length), max_length_(max_length), mode_(mode) {
  if (!(min_length_ > 0.0) || max_length_ < min_length_) {
    throw std::invalid_argument("CartPoleDistribution: need 0 < min <= max");
  }
}

CartPoleTask CartPoleDistribution::sample_task(Rng& rng) const {
  return sample_cartpole_task(rng, min_length_, max_length_, mode_);
}

std::unique_ptr<Env> CartPoleDistribution::sample(Rng& rng) const {
  CartPoleTask task = sample_task(rng);
  return std::make_unique<CartPoleEnv>(task, rng());
}

ActionSpace CartPoleDistribution::action_space() const {
  if (mode_ == ActionMode::Discrete) return {2, 0.0};
  return {0, CartPolePhysics{}.force_bound};
}

std::string CartPoleDistribution::id() const {
  std::ostringstream s;
  s << "cartpole-" << (mode_ == ActionMode::Discrete ? "discrete" : "continuous") << "-" << min_length_ << "-"
    << max_length_;
  return s.str();
}

}  // namespace metashape::envs
