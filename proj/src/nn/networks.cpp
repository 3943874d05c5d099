#include "metashape/nn/networks.hpp"

#include <cmath>
#include <stdexcept>

namespace metashape::nn {

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
  if (input == 0) throw std::invalid_argument("MlpSpec: input size must be positive");
  for (std::size_t h : hidden) {
    if (h == 0) throw std::invalid_argument("MlpSpec: hidden sizes must be positive");
  }
}

void add_linear(ParamVector& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor w(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  params.add(name + ".weight", std::move(w));
  params.add(name + ".bias", Tensor::Zero(1, static_cast<Eigen::Index>(out)));
}

Var ParamCursor::next() {
  if (pos_ >= vars_.size()) throw std::invalid_argument("network consumed more parameters than bound");
  return vars_[pos_++];
}

Var linear(Graph& g, ParamCursor& params, Var x) {
  Var w = params.next();
  Var b = params.next();
  return g.add_bias(g.matmul(x, w), b);
}

namespace {

Var activate(Graph& g, Activation a, Var x) { return a == Activation::Relu ? g.relu(x) : g.tanh(x); }

void activate_in_place(Activation a, Tensor& x) {
  if (a == Activation::Relu) {
    x = x.cwiseMax(0.0);
  } else {
    x = x.array().tanh().matrix();
  }
}

void add_trunk(ParamVector& params, const MlpSpec& spec, Rng& rng) {
  std::size_t in = spec.input;
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    add_linear(params, "trunk." + std::to_string(i), in, spec.hidden[i], rng);
    in = spec.hidden[i];
  }
}

// Direct Eigen evaluation mirroring `mlp`/`linear`; p is advanced past the
// consumed entries.
Tensor dense(const ParamVector& params, std::size_t& p, const Tensor& x) {
  Tensor y;
  ad::product(x, params[p], y);
  y.rowwise() += params[p + 1].row(0);
  p += 2;
  return y;
}

Tensor trunk_direct(const MlpSpec& spec, const ParamVector& params, std::size_t& p, const Tensor& x) {
  if (x.cols() != static_cast<Eigen::Index>(spec.input)) {
    throw std::invalid_argument("state width " + std::to_string(x.cols()) + " does not match network input " +
                                std::to_string(spec.input));
  }
  Tensor h = x;
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    h = dense(params, p, h);
    activate_in_place(spec.activation, h);
  }
  return h;
}

void check_state(const Graph& g, Var states, std::size_t input) {
  if (g.value(states).cols() != static_cast<Eigen::Index>(input)) {
    throw std::invalid_argument("state width " + std::to_string(g.value(states).cols()) +
                                " does not match network input " + std::to_string(input));
  }
}

}  // namespace

Var mlp(Graph& g, const MlpSpec& spec, ParamCursor& params, Var x) {
  Var h = x;
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) h = activate(g, spec.activation, linear(g, params, h));
  return h;
}

DuelingNet::DuelingNet(MlpSpec trunk, std::size_t actions) : trunk_(std::move(trunk)), actions_(actions) {
  trunk_.validate();
  if (actions_ == 0) throw std::invalid_argument("DuelingNet: need at least one action");
}

ParamVector DuelingNet::init_params(Rng& rng) const {
  ParamVector params;
  add_trunk(params, trunk_, rng);
  add_linear(params, "value", trunk_.output(), 1, rng);
  add_linear(params, "advantage", trunk_.output(), actions_, rng);
  return params;
}

DuelingHeads DuelingNet::heads(Graph& g, std::span<const Var> params, Var states) const {
  check_state(g, states, trunk_.input);
  ParamCursor cursor(params);
  Var h = mlp(g, trunk_, cursor, states);
  Var v = linear(g, cursor, h);
  Var a = linear(g, cursor, h);
  const Eigen::Index n = static_cast<Eigen::Index>(actions_);
  // V + (A - max A): the argmax entry is exactly V after rounding.
  Var centered = g.sub(a, g.broadcast_cols(g.max_reduce(a), n));
  Var q = g.add(g.broadcast_cols(v, n), centered);
  return {v, a, q};
}

std::string DuelingNet::describe() const {
  std::string s = "dueling in=" + std::to_string(trunk_.input) + " hidden=";
  for (std::size_t i = 0; i < trunk_.hidden.size(); ++i) s += (i ? "," : "") + std::to_string(trunk_.hidden[i]);
  return s + " act=" + to_string(trunk_.activation) + " actions=" + std::to_string(actions_);
}

QNet::QNet(MlpSpec trunk, std::size_t actions) : trunk_(std::move(trunk)), actions_(actions) {
  trunk_.validate();
  if (actions_ == 0) throw std::invalid_argument("QNet: need at least one action");
}

ParamVector QNet::init_params(Rng& rng) const {
  ParamVector params;
  add_trunk(params, trunk_, rng);
  add_linear(params, "q", trunk_.output(), actions_, rng);
  return params;
}

Var QNet::q_values(Graph& g, std::span<const Var> params, Var states) const {
  check_state(g, states, trunk_.input);
  ParamCursor cursor(params);
  return linear(g, cursor, mlp(g, trunk_, cursor, states));
}

std::string QNet::describe() const {
  std::string s = "qnet in=" + std::to_string(trunk_.input) + " hidden=";
  for (std::size_t i = 0; i < trunk_.hidden.size(); ++i) s += (i ? "," : "") + std::to_string(trunk_.hidden[i]);
  return s + " act=" + to_string(trunk_.activation) + " actions=" + std::to_string(actions_);
}

ActorNet::ActorNet(MlpSpec trunk, double bound) : trunk_(std::move(trunk)), bound_(bound) {
  trunk_.validate();
  if (!(bound_ > 0.0)) throw std::invalid_argument("ActorNet: bound must be positive");
}

ParamVector ActorNet::init_params(Rng& rng) const {
  ParamVector params;
  add_trunk(params, trunk_, rng);
  add_linear(params, "action", trunk_.output(), 1, rng);
  return params;
}

Var ActorNet::actions(Graph& g, std::span<const Var> params, Var states) const {
  check_state(g, states, trunk_.input);
  ParamCursor cursor(params);
  Var out = linear(g, cursor, mlp(g, trunk_, cursor, states));
  return g.scale(g.tanh(out), bound_);
}

CriticNet::CriticNet(std::size_t state_size, std::vector<std::size_t> hidden, Activation activation)
    : state_size_(state_size), hidden_(std::move(hidden)), activation_(activation) {
  if (state_size_ == 0 || hidden_.empty()) throw std::invalid_argument("CriticNet: need state size and hidden layers");
}

ParamVector CriticNet::init_params(Rng& rng) const {
  ParamVector params;
  // First layer over [s, a]; split so no concatenation op is needed.
  const double bound = 1.0 / std::sqrt(static_cast<double>(state_size_ + 1));
  std::uniform_real_distribution<double> dist(-bound, bound);
  const auto h0 = static_cast<Eigen::Index>(hidden_[0]);
  Tensor ws(static_cast<Eigen::Index>(state_size_), h0);
  Tensor wa(1, h0);
  for (Eigen::Index i = 0; i < ws.size(); ++i) ws.data()[i] = dist(rng);
  for (Eigen::Index i = 0; i < wa.size(); ++i) wa.data()[i] = dist(rng);
  params.add("critic.0.state_weight", std::move(ws));
  params.add("critic.0.action_weight", std::move(wa));
  params.add("critic.0.bias", Tensor::Zero(1, h0));
  for (std::size_t i = 1; i < hidden_.size(); ++i) {
    add_linear(params, "critic." + std::to_string(i), hidden_[i - 1], hidden_[i], rng);
  }
  add_linear(params, "critic.out", hidden_.back(), 1, rng);
  return params;
}

Var CriticNet::value(Graph& g, std::span<const Var> params, Var states, Var actions) const {
  check_state(g, states, state_size_);
  ParamCursor cursor(params);
  Var ws = cursor.next();
  Var wa = cursor.next();
  Var b = cursor.next();
  Var h = g.add_bias(g.add(g.matmul(states, ws), g.matmul(actions, wa)), b);
  h = activation_ == Activation::Relu ? g.relu(h) : g.tanh(h);
  for (std::size_t i = 1; i < hidden_.size(); ++i) {
    Var z = linear(g, cursor, h);
    h = activation_ == Activation::Relu ? g.relu(z) : g.tanh(z);
  }
  return linear(g, cursor, h);
}

DuelingOutput dueling_forward(const DuelingNet& net, const ParamVector& params, std::span<const double> state) {
  Tensor s(1, static_cast<Eigen::Index>(state.size()));
  for (std::size_t i = 0; i < state.size(); ++i) s(0, static_cast<Eigen::Index>(i)) = state[i];

  std::size_t p = 0;
  Tensor h = trunk_direct(net.trunk(), params, p, s);
  Tensor v = dense(params, p, h);
  Tensor a = dense(params, p, h);
  if (!v.allFinite() || !a.allFinite()) throw std::domain_error("dueling_forward: non-finite activation");

  DuelingOutput out;
  out.value = v(0, 0);
  const double amax = a.row(0).maxCoeff();
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    out.advantage.push_back(a(0, i));
    out.q.push_back(out.value + (a(0, i) - amax));
  }
  return out;
}

Tensor DuelingNet::evaluate(const ParamVector& params, const Tensor& states) const {
  std::size_t p = 0;
  Tensor h = trunk_direct(trunk_, params, p, states);
  Tensor v = dense(params, p, h);
  Tensor a = dense(params, p, h);
  Tensor q(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double amax = a.row(r).maxCoeff();
    q.row(r) = (a.row(r).array() - amax) + v(r, 0);
  }
  return q;
}

Tensor QNet::evaluate(const ParamVector& params, const Tensor& states) const {
  std::size_t p = 0;
  Tensor h = trunk_direct(trunk_, params, p, states);
  return dense(params, p, h);
}

Tensor evaluate_q(const QModel& net, const ParamVector& params, const Tensor& states) {
  return net.evaluate(params, states);
}

Tensor evaluate_value(const DuelingNet& net, const ParamVector& params, const Tensor& states) {
  std::size_t p = 0;
  Tensor h = trunk_direct(net.trunk(), params, p, states);
  return dense(params, p, h);
}

}  // namespace metashape::nn
