#include "metashape/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace metashape::nn {

namespace {
void check_finite(std::span<const Tensor> grads, const char* who) {
  for (const Tensor& g : grads) {
    if (!g.allFinite()) throw std::domain_error(std::string(who) + ": non-finite gradient");
  }
}
}  // namespace

ParamVector sgd_step(const ParamVector& params, std::span<const Tensor> grads, double lr) {
  check_aligned(params, grads, "sgd_step");
  check_finite(grads, "sgd_step");
  std::vector<Tensor> next = params.values();
  for (std::size_t i = 0; i < next.size(); ++i) next[i] -= lr * grads[i];
  return params.with_values(next);
}

std::vector<ad::Var> sgd_step(ad::Graph& g, std::span<const ad::Var> params, std::span<const ad::Var> grads,
                              double lr) {
  if (params.size() != grads.size()) throw std::invalid_argument("sgd_step: params/grads count mismatch");
  std::vector<ad::Var> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!g.value(grads[i]).allFinite()) throw std::domain_error("sgd_step: non-finite gradient");
    out.push_back(g.sub(params[i], g.scale(grads[i], lr)));
  }
  return out;
}

OptimizerState OptimizerState::sgd(double lr) {
  OptimizerState s;
  s.kind = OptimizerKind::Sgd;
  s.lr = lr;
  return s;
}

OptimizerState OptimizerState::adam(double lr) {
  OptimizerState s;
  s.kind = OptimizerKind::Adam;
  s.lr = lr;
  return s;
}

ParamVector adam_step(OptimizerState& state, const ParamVector& params, std::span<const Tensor> grads) {
  check_aligned(params, grads, "adam_step");
  check_finite(grads, "adam_step");
  if (state.m.empty()) {
    for (std::size_t i = 0; i < params.count(); ++i) {
      state.m.push_back(Tensor::Zero(params[i].rows(), params[i].cols()));
      state.v.push_back(Tensor::Zero(params[i].rows(), params[i].cols()));
    }
  }
  check_aligned(params, state.m, "adam_step moments");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  std::vector<Tensor> next = params.values();
  for (std::size_t i = 0; i < next.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i].cwiseProduct(grads[i]);
    const auto mhat = state.m[i].array() / c1;
    const auto vhat = state.v[i].array() / c2;
    next[i].array() -= state.lr * mhat / (vhat.sqrt() + state.eps);
  }
  return params.with_values(next);
}

ParamVector apply_step(OptimizerState& state, const ParamVector& params, std::span<const Tensor> grads) {
  if (state.kind == OptimizerKind::Sgd) return sgd_step(params, grads, state.lr);
  return adam_step(state, params, grads);
}

}  // namespace metashape::nn
