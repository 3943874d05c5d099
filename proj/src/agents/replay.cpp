#include "metashape/agents/replay.hpp"

#include <stdexcept>

namespace metashape::agents {

Batch make_batch(std::span<const Transition* const> transitions) {
  if (transitions.empty()) throw std::invalid_argument("make_batch: empty batch");
  const auto b = static_cast<Eigen::Index>(transitions.size());
  const auto width = static_cast<Eigen::Index>(transitions[0]->state.size());
  const bool discrete = std::holds_alternative<int>(transitions[0]->action);

  Batch out;
  out.states.resize(b, width);
  out.next_states.resize(b, width);
  out.rewards.resize(b, 1);
  out.not_done.resize(b, 1);
  if (discrete) {
    out.actions.reserve(transitions.size());
  } else {
    out.forces.resize(b, 1);
  }
  for (Eigen::Index r = 0; r < b; ++r) {
    const Transition& t = *transitions[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(t.state.size()) != width || t.next_state.size() != t.state.size()) {
      throw std::invalid_argument("make_batch: inconsistent state widths");
    }
    if (std::holds_alternative<int>(t.action) != discrete) throw std::invalid_argument("make_batch: mixed actions");
    out.states.row(r) = Eigen::Map<const Eigen::RowVectorXd>(t.state.data(), width);
    out.next_states.row(r) = Eigen::Map<const Eigen::RowVectorXd>(t.next_state.data(), width);
    if (discrete) {
      out.actions.push_back(std::get<int>(t.action));
    } else {
      out.forces(r, 0) = std::get<double>(t.action);
    }
    out.rewards(r, 0) = t.reward;
    out.not_done(r, 0) = t.done ? 0.0 : 1.0;
  }
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  data_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

void ReplayBuffer::clear() {
  data_.clear();
  head_ = 0;
}

const Transition& ReplayBuffer::operator[](std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("ReplayBuffer: index past contents");
  return data_[(head_ + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count) {
  if (data_.empty()) throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
  std::vector<std::size_t> idx(count);
  for (std::size_t& i : idx) i = uniform_index(rng_, data_.size());
  return idx;
}

Batch ReplayBuffer::sample(std::size_t count) {
  const std::vector<std::size_t> idx = sample_indices(count);
  std::vector<const Transition*> picked;
  picked.reserve(count);
  for (std::size_t i : idx) picked.push_back(&(*this)[i]);
  return make_batch(picked);
}

}  // namespace metashape::agents
