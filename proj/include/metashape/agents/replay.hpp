#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metashape/autodiff/graph.hpp"
#include "metashape/core/random.hpp"
#include "metashape/envs/env.hpp"

namespace metashape::agents {

using ad::Tensor;
using envs::Transition;

/// Transitions stacked row-wise. Discrete batches fill `actions`; continuous
/// ones fill `forces` (B x 1).
struct Batch {
  Tensor states;
  Tensor next_states;
  std::vector<int> actions;
  Tensor forces;
  Tensor rewards;   ///< B x 1
  Tensor not_done;  ///< B x 1, 0 where the transition ended the episode

  std::size_t size() const { return static_cast<std::size_t>(states.rows()); }
};

/// Throws std::invalid_argument on an empty list or mixed action kinds.
Batch make_batch(std::span<const Transition* const> transitions);

/// Bounded FIFO with uniform sampling (with replacement) from an owned rng.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return data_.empty(); }
  void clear();

  /// Logical index 0 is the oldest stored transition.
  const Transition& operator[](std::size_t i) const;

  std::vector<std::size_t> sample_indices(std::size_t count);
  Batch sample(std::size_t count);

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  ///< physical slot of the oldest entry once full
  std::vector<Transition> data_;
  Rng rng_;
};

}  // namespace metashape::agents
