#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "metashape/core/random.hpp"

namespace metashape::envs {

using Observation = std::vector<double>;

/// Discrete action index or continuous force.
using Action = std::variant<int, double>;

struct ActionSpace {
  std::size_t discrete = 0;  ///< number of actions when discrete, else 0
  double bound = 0.0;        ///< |a| <= bound when continuous

  bool continuous() const { return discrete == 0; }
};

struct StepResult {
  Observation next;
  double reward = 0.0;       ///< reward seen by the learner
  double base_reward = 0.0;  ///< task reward before any shaping
  bool done = false;
};

/// One experience tuple. When `done` is set the next state is terminal by
/// convention and is never bootstrapped from.
struct Transition {
  Observation state;
  Action action;
  double reward = 0.0;
  Observation next_state;
  bool done = false;
};

/// Episodic environment. Episode state is owned by the instance.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::size_t observation_size() const = 0;
  virtual ActionSpace action_space() const = 0;
  virtual Observation reset() = 0;
  virtual StepResult step(const Action& action) = 0;
  virtual std::string task_id() const = 0;
};

/// A distribution p(T) over tasks sharing one state space.
class TaskDistribution {
 public:
  virtual ~TaskDistribution() = default;
  virtual std::unique_ptr<Env> sample(Rng& rng) const = 0;
  virtual std::size_t observation_size() const = 0;
  virtual ActionSpace action_space() const = 0;
  virtual std::string id() const = 0;
};

}  // namespace metashape::envs
