#pragma once

#include <span>
#include <vector>

#include "metashape/autodiff/graph.hpp"
#include "metashape/nn/params.hpp"

namespace metashape::nn {

/// p - lr * g. Throws std::domain_error on non-finite gradients.
ParamVector sgd_step(const ParamVector& params, std::span<const Tensor> grads, double lr);

/// Graph form of the same update. The results stay differentiable functions
/// of `params` (and of `grads`, when those were recorded).
std::vector<ad::Var> sgd_step(ad::Graph& g, std::span<const ad::Var> params, std::span<const ad::Var> grads,
                              double lr);

enum class OptimizerKind { Sgd, Adam };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static OptimizerState sgd(double lr);
  static OptimizerState adam(double lr);
};

/// Bias-corrected Adam. Moments are created on the first call.
ParamVector adam_step(OptimizerState& state, const ParamVector& params, std::span<const Tensor> grads);

/// Dispatches on `state.kind`.
ParamVector apply_step(OptimizerState& state, const ParamVector& params, std::span<const Tensor> grads);

}  // namespace metashape::nn
