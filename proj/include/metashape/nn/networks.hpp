#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "metashape/autodiff/graph.hpp"
#include "metashape/core/random.hpp"
#include "metashape/nn/params.hpp"

namespace metashape::nn {

using ad::Graph;
using ad::Var;

enum class Activation { Relu, Tanh };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

/// Fully connected trunk: input -> hidden[0] -> ... -> hidden.back(), each
/// layer followed by the activation.
struct MlpSpec {
  std::size_t input = 0;
  std::vector<std::size_t> hidden;
  Activation activation = Activation::Tanh;

  std::size_t output() const { return hidden.empty() ? input : hidden.back(); }
  void validate() const;
};

/// Appends "<prefix>.<i>.weight" (in x out) and "<prefix>.<i>.bias" (1 x out)
/// for a linear layer, weights uniform in +-1/sqrt(in), bias zero.
void add_linear(ParamVector& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng);

/// Cursor over bound parameter vars; networks consume them in layout order.
class ParamCursor {
 public:
  explicit ParamCursor(std::span<const Var> vars) : vars_(vars) {}
  Var next();
  bool done() const { return pos_ == vars_.size(); }

 private:
  std::span<const Var> vars_;
  std::size_t pos_ = 0;
};

Var linear(Graph& g, ParamCursor& params, Var x);
Var mlp(Graph& g, const MlpSpec& spec, ParamCursor& params, Var x);

/// Anything that maps a batch of states to one Q-value per action.
class QModel {
 public:
  virtual ~QModel() = default;
  virtual std::size_t input_size() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual ParamVector init_params(Rng& rng) const = 0;
  virtual Var q_values(Graph& g, std::span<const Var> params, Var states) const = 0;
  /// Same numbers as `q_values`, evaluated directly (B x actions).
  virtual Tensor evaluate(const ParamVector& params, const Tensor& states) const = 0;
  virtual std::string describe() const = 0;
};

struct DuelingHeads {
  Var value;      ///< B x 1
  Var advantage;  ///< raw advantage head, B x actions
  Var q;          ///< V + A - max_a A, B x actions
};

/// Dueling Q-network with max-subtracted aggregation, Q = V + (A - max_a A),
/// so max_a Q(s, a) == V(s) exactly.
class DuelingNet final : public QModel {
 public:
  DuelingNet(MlpSpec trunk, std::size_t actions);

  std::size_t input_size() const override { return trunk_.input; }
  std::size_t action_count() const override { return actions_; }
  const MlpSpec& trunk() const { return trunk_; }

  ParamVector init_params(Rng& rng) const override;
  DuelingHeads heads(Graph& g, std::span<const Var> params, Var states) const;
  Var q_values(Graph& g, std::span<const Var> params, Var states) const override {
    return heads(g, params, states).q;
  }
  Tensor evaluate(const ParamVector& params, const Tensor& states) const override;
  std::string describe() const override;

 private:
  MlpSpec trunk_;
  std::size_t actions_;
};

/// Plain Q-network: trunk followed by one linear Q head.
class QNet final : public QModel {
 public:
  QNet(MlpSpec trunk, std::size_t actions);

  std::size_t input_size() const override { return trunk_.input; }
  std::size_t action_count() const override { return actions_; }
  ParamVector init_params(Rng& rng) const override;
  Var q_values(Graph& g, std::span<const Var> params, Var states) const override;
  Tensor evaluate(const ParamVector& params, const Tensor& states) const override;
  std::string describe() const override;

 private:
  MlpSpec trunk_;
  std::size_t actions_;
};

/// Deterministic policy: trunk, scalar linear output, tanh, scaled to +-bound.
class ActorNet {
 public:
  ActorNet(MlpSpec trunk, double bound);

  double bound() const { return bound_; }
  std::size_t input_size() const { return trunk_.input; }
  ParamVector init_params(Rng& rng) const;
  Var actions(Graph& g, std::span<const Var> params, Var states) const;

 private:
  MlpSpec trunk_;
  double bound_;
};

/// Q(s, a) for a scalar continuous action. The first layer takes the
/// concatenation [s, a], stored as separate state and action weight blocks.
class CriticNet {
 public:
  CriticNet(std::size_t state_size, std::vector<std::size_t> hidden, Activation activation);

  ParamVector init_params(Rng& rng) const;
  Var value(Graph& g, std::span<const Var> params, Var states, Var actions) const;

 private:
  std::size_t state_size_;
  std::vector<std::size_t> hidden_;
  Activation activation_;
};

struct DuelingOutput {
  double value = 0.0;
  std::vector<double> advantage;
  std::vector<double> q;
};

/// Single-state evaluation of all three heads. Throws std::domain_error on
/// non-finite outputs.
DuelingOutput dueling_forward(const DuelingNet& net, const ParamVector& params, std::span<const double> state);

/// Batched Q-values (B x actions) without keeping a graph around.
Tensor evaluate_q(const QModel& net, const ParamVector& params, const Tensor& states);

/// Batched value head (B x 1).
Tensor evaluate_value(const DuelingNet& net, const ParamVector& params, const Tensor& states);

}  // namespace metashape::nn
