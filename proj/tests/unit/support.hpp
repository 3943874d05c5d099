#pragma once

// Shared fixtures for the unit tests.

#include <vector>

#include "metashape/agents/replay.hpp"
#include "metashape/core/random.hpp"
#include "metashape/envs/grid.hpp"
#include "metashape/nn/networks.hpp"

namespace metashape::testing {

inline ad::Tensor random_tensor(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
  ad::Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = uniform(rng, lo, hi);
  return t;
}

/// Batch of random dense states with random actions, rewards and terminals.
inline agents::Batch random_batch(Rng& rng, std::size_t size, std::size_t width, std::size_t actions,
                                  double done_probability = 0.2) {
  std::vector<envs::Transition> ts;
  for (std::size_t i = 0; i < size; ++i) {
    envs::Transition t;
    for (std::size_t k = 0; k < width; ++k) {
      t.state.push_back(uniform(rng, -1.0, 1.0));
      t.next_state.push_back(uniform(rng, -1.0, 1.0));
    }
    t.action = static_cast<int>(uniform_index(rng, actions));
    t.reward = uniform(rng, -1.0, 1.0);
    t.done = uniform(rng, 0.0, 1.0) < done_probability;
    ts.push_back(std::move(t));
  }
  std::vector<const envs::Transition*> ptrs;
  for (const auto& t : ts) ptrs.push_back(&t);
  return agents::make_batch(ptrs);
}

/// 1 x n corridor with the start at the left end and the goal at the right.
inline envs::GridTask chain(int n) {
  envs::GridTask t;
  t.width = n;
  t.height = 1;
  t.start = {0, 0};
  t.goal = {n - 1, 0};
  t.obstacles.assign(static_cast<std::size_t>(n), 0);
  return t;
}

}  // namespace metashape::testing
