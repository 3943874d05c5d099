#include "metashape/shaping/shaping.hpp"

#include <cmath>
#include <stdexcept>

namespace metashape::shaping {

std::vector<double> PotentialFn::batch(const Tensor& states) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(states.rows()));
  Observation row(static_cast<std::size_t>(states.cols()));
  for (Eigen::Index r = 0; r < states.rows(); ++r) {
    for (Eigen::Index c = 0; c < states.cols(); ++c) row[static_cast<std::size_t>(c)] = states(r, c);
    out.push_back((*this)(row));
  }
  return out;
}

TabularGridPotential::TabularGridPotential(envs::GridTask task, std::vector<double> values)
    : task_(std::move(task)), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(task_.cells())) {
    throw std::invalid_argument("TabularGridPotential: need one value per cell");
  }
}

double TabularGridPotential::operator()(const Observation& state) const {
  return at(envs::decode_position(task_, state));
}

NetworkPotential::NetworkPotential(std::shared_ptr<const nn::DuelingNet> net, nn::ParamVector params)
    : net_(std::move(net)), params_(std::move(params)) {
  if (!net_) throw std::invalid_argument("NetworkPotential: null network");
}

double NetworkPotential::operator()(const Observation& state) const {
  Tensor s(1, static_cast<Eigen::Index>(state.size()));
  for (std::size_t i = 0; i < state.size(); ++i) s(0, static_cast<Eigen::Index>(i)) = state[i];
  return nn::evaluate_value(*net_, params_, s)(0, 0);
}

std::vector<double> NetworkPotential::batch(const Tensor& states) const {
  const Tensor v = nn::evaluate_value(*net_, params_, states);
  return {v.data(), v.data() + v.size()};
}

double shape_reward(double phi, double phi_next, double gamma, double reward, bool done) {
  if (!std::isfinite(phi) || (!done && !std::isfinite(phi_next))) {
    throw std::domain_error("shape_reward: non-finite potential");
  }
  return reward + (done ? 0.0 : gamma * phi_next) - phi;
}

double shape_reward(const PotentialFn& potential, double gamma, const Observation& state,
                    const Observation& next_state, double reward, bool done) {
  return shape_reward(potential(state), done ? 0.0 : potential(next_state), gamma, reward, done);
}

ShapedEnv::ShapedEnv(std::unique_ptr<envs::Env> base, std::shared_ptr<const PotentialFn> potential, double gamma)
    : base_(std::move(base)), potential_(std::move(potential)), gamma_(gamma) {
  if (!base_ || !potential_) throw std::invalid_argument("ShapedEnv: null base env or potential");
}

Observation ShapedEnv::reset() {
  current_ = base_->reset();
  return current_;
}

envs::StepResult ShapedEnv::step(const envs::Action& action) {
  envs::StepResult r = base_->step(action);
  r.reward = shape_reward(*potential_, gamma_, current_, r.next, r.base_reward, r.done);
  current_ = r.next;
  return r;
}

std::unique_ptr<ShapedEnv> wrap(std::unique_ptr<envs::Env> base, std::shared_ptr<const PotentialFn> potential,
                                double gamma) {
  return std::make_unique<ShapedEnv>(std::move(base), std::move(potential), gamma);
}

}  // namespace metashape::shaping
