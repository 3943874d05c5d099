#pragma once

#include <span>

#include "metashape/core/random.hpp"

namespace metashape::agents {

/// Linear decay from `start` to `end` over `horizon` steps, then constant.
struct ExplorationSchedule {
  double start = 1.0;
  double end = 0.05;
  long horizon = 1;

  double epsilon(long step) const;
  void validate() const;
};

/// Lowest index among the maximal entries.
int argmax(std::span<const double> values);

/// Draws one uniform number, then a uniform action if it falls below eps,
/// so two calls on different value vectors consume the rng identically.
/// Throws std::invalid_argument on an empty action set or eps outside [0, 1].
int epsilon_greedy(std::span<const double> values, double eps, Rng& rng);

}  // namespace metashape::agents
