#include "metashape/autodiff/graph.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace metashape::ad {

void product(const Tensor& a, const Tensor& b, Tensor& out) {
  const Eigen::Index nnz = (a.array() != 0.0).count();
  if (a.size() < 1024 || nnz * 8 > a.size()) {
    out.noalias() = a * b;
    return;
  }
  out.setZero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double x = a(i, j);
      if (x != 0.0) out.row(i) += x * b.row(j);
    }
  }
}


const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Input: return "input";
    case OpKind::Constant: return "constant";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::MatMul: return "matmul";
    case OpKind::Relu: return "relu";
    case OpKind::Tanh: return "tanh";
    case OpKind::Square: return "square";
    case OpKind::Sum: return "sum";
    case OpKind::Mean: return "mean";
    case OpKind::MaxReduce: return "max_reduce";
    case OpKind::StopGradient: return "stop_gradient";
    case OpKind::Scale: return "scale";
    case OpKind::Transpose: return "transpose";
    case OpKind::BroadcastRows: return "broadcast_rows";
    case OpKind::BroadcastCols: return "broadcast_cols";
    case OpKind::BroadcastScalar: return "broadcast_scalar";
    case OpKind::SumRows: return "sum_rows";
    case OpKind::SumCols: return "sum_cols";
    case OpKind::ReluMask: return "relu_mask";
    case OpKind::ArgmaxMask: return "argmax_mask";
  }
  return "unknown";
}

const Tensor& Var::value() const { return graph->value(*this); }

double Var::scalar() const {
  const Tensor& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    std::ostringstream msg;
    msg << "node " << id << " is " << v.rows() << "x" << v.cols() << ", not a scalar";
    throw GraphError(msg.str());
  }
  return v(0, 0);
}

Var operator+(Var a, Var b) { return a.graph->add(a, b); }
Var operator-(Var a, Var b) { return a.graph->sub(a, b); }
Var operator*(Var a, Var b) { return a.graph->mul(a, b); }
Var operator*(double c, Var a) { return a.graph->scale(a, c); }
Var operator-(Var a) { return a.graph->scale(a, -1.0); }

namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

bool differentiable(OpKind kind) {
  switch (kind) {
    case OpKind::Constant:
    case OpKind::StopGradient:
    case OpKind::ReluMask:
    case OpKind::ArgmaxMask:
      return false;
    default:
      return true;
  }
}

}  // namespace

const Tensor& Graph::value(Var v) const {
  check(v);
  return nodes_[v.id].value;
}

void Graph::check(Var v) const {
  if (v.graph != this || v.id >= nodes_.size()) {
    throw GraphError("variable " + std::to_string(v.id) + " does not belong to this graph");
  }
}

Var Graph::push(Node node) {
  if (node.arity >= 1) check(Var{this, node.lhs});
  if (node.arity >= 2) check(Var{this, node.rhs});
  if (node.kind != OpKind::Input && node.kind != OpKind::Constant) evaluate(node, nodes_.size());
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Graph::evaluate(Node& node, std::size_t index) const {
  const auto fail = [&](const std::string& what) {
    std::ostringstream msg;
    msg << "node " << index << " (" << op_name(node.kind) << "): " << what;
    throw GraphError(msg.str());
  };
  const Tensor& a = nodes_[node.lhs].value;
  const Tensor& b = nodes_[node.arity >= 2 ? node.rhs : node.lhs].value;
  const auto same_shape = [&] {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      fail("shape mismatch " + shape_str(a) + " vs " + shape_str(b));
    }
  };

  switch (node.kind) {
    case OpKind::Input:
    case OpKind::Constant:
      return;
    case OpKind::Add:
      same_shape();
      node.value = a + b;
      return;
    case OpKind::Sub:
      same_shape();
      node.value = a - b;
      return;
    case OpKind::Mul:
      same_shape();
      node.value = a.cwiseProduct(b);
      return;
    case OpKind::MatMul:
      if (a.cols() != b.rows()) fail("matmul " + shape_str(a) + " * " + shape_str(b));
      product(a, b, node.value);
      return;
    case OpKind::Relu:
      node.value = a.cwiseMax(0.0);
      return;
    case OpKind::Tanh:
      node.value = a.array().tanh().matrix();
      return;
    case OpKind::Square:
      node.value = a.cwiseProduct(a);
      return;
    case OpKind::Sum:
      node.value = Tensor::Constant(1, 1, a.sum());
      return;
    case OpKind::Mean:
      if (a.size() == 0) fail("mean of empty tensor");
      node.value = Tensor::Constant(1, 1, a.mean());
      return;
    case OpKind::MaxReduce: {
      if (a.cols() == 0) fail("max_reduce over zero columns");
      node.value.resize(a.rows(), 1);
      for (Eigen::Index r = 0; r < a.rows(); ++r) node.value(r, 0) = a.row(r).maxCoeff();
      return;
    }
    case OpKind::StopGradient:
      node.value = a;
      return;
    case OpKind::Scale:
      node.value = node.factor * a;
      return;
    case OpKind::Transpose:
      node.value = a.transpose();
      return;
    case OpKind::BroadcastRows:
      if (a.rows() != 1) fail("broadcast_rows needs a 1xN row, got " + shape_str(a));
      node.value = a.replicate(node.extent, 1);
      return;
    case OpKind::BroadcastCols:
      if (a.cols() != 1) fail("broadcast_cols needs a Bx1 column, got " + shape_str(a));
      node.value = a.replicate(1, node.extent);
      return;
    case OpKind::BroadcastScalar:
      if (a.size() != 1) fail("broadcast_scalar needs 1x1, got " + shape_str(a));
      node.value = Tensor::Constant(node.extent, static_cast<Eigen::Index>(node.factor), a(0, 0));
      return;
    case OpKind::SumRows:
      node.value = a.colwise().sum();
      return;
    case OpKind::SumCols:
      node.value = a.rowwise().sum();
      return;
    case OpKind::ReluMask:
      node.value = (a.array() > 0.0).cast<double>().matrix();
      return;
    case OpKind::ArgmaxMask: {
      if (a.cols() == 0) fail("argmax_mask over zero columns");
      node.value = Tensor::Zero(a.rows(), a.cols());
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < a.cols(); ++c) {
          if (a(r, c) > a(r, best)) best = c;
        }
        node.value(r, best) = 1.0;
      }
      return;
    }
  }
}

Var Graph::input(std::string name, Tensor value) {
  Node n{OpKind::Input};
  n.value = std::move(value);
  n.name = std::move(name);
  return push(std::move(n));
}

Var Graph::input(std::string name, Eigen::Index rows, Eigen::Index cols) {
  return input(std::move(name), Tensor::Zero(rows, cols));
}

Var Graph::constant(Tensor value) {
  Node n{OpKind::Constant};
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::constant(double value) { return constant(Tensor::Constant(1, 1, value)); }

namespace {
template <class NodeT>
NodeT unary(OpKind k, Var x) {
  NodeT n{k};
  n.lhs = x.id;
  n.arity = 1;
  return n;
}
template <class NodeT>
NodeT binary(OpKind k, Var a, Var b) {
  NodeT n{k};
  n.lhs = a.id;
  n.rhs = b.id;
  n.arity = 2;
  return n;
}
}  // namespace

Var Graph::add(Var a, Var b) { return push(binary<Node>(OpKind::Add, a, b)); }
Var Graph::sub(Var a, Var b) { return push(binary<Node>(OpKind::Sub, a, b)); }
Var Graph::mul(Var a, Var b) { return push(binary<Node>(OpKind::Mul, a, b)); }
Var Graph::matmul(Var a, Var b) { return push(binary<Node>(OpKind::MatMul, a, b)); }
Var Graph::relu(Var x) { return push(unary<Node>(OpKind::Relu, x)); }
Var Graph::tanh(Var x) { return push(unary<Node>(OpKind::Tanh, x)); }
Var Graph::square(Var x) { return push(unary<Node>(OpKind::Square, x)); }
Var Graph::sum(Var x) { return push(unary<Node>(OpKind::Sum, x)); }
Var Graph::mean(Var x) { return push(unary<Node>(OpKind::Mean, x)); }
Var Graph::max_reduce(Var x) { return push(unary<Node>(OpKind::MaxReduce, x)); }
Var Graph::stop_gradient(Var x) { return push(unary<Node>(OpKind::StopGradient, x)); }
Var Graph::transpose(Var x) { return push(unary<Node>(OpKind::Transpose, x)); }
Var Graph::sum_rows(Var x) { return push(unary<Node>(OpKind::SumRows, x)); }
Var Graph::sum_cols(Var x) { return push(unary<Node>(OpKind::SumCols, x)); }
Var Graph::relu_mask(Var x) { return push(unary<Node>(OpKind::ReluMask, x)); }
Var Graph::argmax_mask(Var x) { return push(unary<Node>(OpKind::ArgmaxMask, x)); }

Var Graph::scale(Var x, double factor) {
  Node n = unary<Node>(OpKind::Scale, x);
  n.factor = factor;
  return push(std::move(n));
}

Var Graph::broadcast_rows(Var row, Eigen::Index rows) {
  Node n = unary<Node>(OpKind::BroadcastRows, row);
  n.extent = rows;
  return push(std::move(n));
}

Var Graph::broadcast_cols(Var col, Eigen::Index cols) {
  Node n = unary<Node>(OpKind::BroadcastCols, col);
  n.extent = cols;
  return push(std::move(n));
}

Var Graph::broadcast_scalar(Var s, Eigen::Index rows, Eigen::Index cols) {
  Node n = unary<Node>(OpKind::BroadcastScalar, s);
  n.extent = rows;
  n.factor = static_cast<double>(cols);
  return push(std::move(n));
}

void Graph::forward(std::span<const Binding> bindings) {
  for (const Binding& b : bindings) {
    check(b.input);
    Node& n = nodes_[b.input.id];
    if (n.kind != OpKind::Input) {
      throw GraphError("node " + std::to_string(b.input.id) + " is not an input");
    }
    if (n.value.rows() != b.value.rows() || n.value.cols() != b.value.cols()) {
      throw GraphError("input '" + n.name + "' declared " + shape_str(n.value) + ", bound " +
                       shape_str(b.value));
    }
    n.value = b.value;
  }
  // Per-node evaluation reads only lower ids, so creation order is topological.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (n.kind == OpKind::Input || n.kind == OpKind::Constant) continue;
    evaluate(n, i);
  }
}

std::vector<Var> Graph::backward(Var output, std::span<const Var> wrt, bool record) {
  check(output);
  const Tensor& out_value = nodes_[output.id].value;
  if (out_value.rows() != 1 || out_value.cols() != 1) {
    throw GraphError("backward needs a scalar output, node " + std::to_string(output.id) +
                     " is " + shape_str(out_value));
  }
  const std::size_t n = output.id + 1;
  std::vector<char> depends(n, 0);
  for (Var w : wrt) {
    if (w.graph != this || w.id >= nodes_.size()) {
      throw GraphError("backward: parameter " + std::to_string(w.id) + " is not a node of this graph");
    }
    if (w.id < n) depends[w.id] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = nodes_[i];
    if (node.arity == 0 || !differentiable(node.kind)) continue;
    if (depends[node.lhs] || (node.arity >= 2 && depends[node.rhs])) depends[i] = 1;
  }

  std::vector<std::optional<Var>> adjoint(n);
  adjoint[output.id] = constant(1.0);

  const auto give = [&](std::uint32_t target, Var contribution) {
    if (!depends[target]) return;
    adjoint[target] = adjoint[target] ? add(*adjoint[target], contribution) : contribution;
  };

  for (std::size_t idx = n; idx-- > 0;) {
    if (!depends[idx] || !adjoint[idx]) continue;
    // Copy the fields: creating nodes may reallocate the arena.
    const OpKind kind = nodes_[idx].kind;
    const Var a{this, nodes_[idx].lhs};
    const Var b{this, nodes_[idx].rhs};
    const double factor = nodes_[idx].factor;
    const Var self{this, static_cast<std::uint32_t>(idx)};
    const Var g = *adjoint[idx];
    const Eigen::Index a_rows = nodes_[a.id].value.rows();
    const Eigen::Index a_cols = nodes_[a.id].value.cols();

    switch (kind) {
      case OpKind::Input:
      case OpKind::Constant:
      case OpKind::StopGradient:
      case OpKind::ReluMask:
      case OpKind::ArgmaxMask:
        break;
      case OpKind::Add:
        give(a.id, g);
        give(b.id, g);
        break;
      case OpKind::Sub:
        give(a.id, g);
        if (depends[b.id]) give(b.id, scale(g, -1.0));
        break;
      case OpKind::Mul:
        if (depends[a.id]) give(a.id, mul(g, b));
        if (depends[b.id]) give(b.id, mul(g, a));
        break;
      case OpKind::MatMul:
        if (depends[a.id]) give(a.id, matmul(g, transpose(b)));
        if (depends[b.id]) give(b.id, matmul(transpose(a), g));
        break;
      case OpKind::Relu:
        give(a.id, mul(g, relu_mask(a)));
        break;
      case OpKind::Tanh: {
        const Eigen::Index r = nodes_[idx].value.rows();
        const Eigen::Index c = nodes_[idx].value.cols();
        Var one_minus = sub(constant(Tensor::Ones(r, c)), square(self));
        give(a.id, mul(g, one_minus));
        break;
      }
      case OpKind::Square:
        give(a.id, scale(mul(g, a), 2.0));
        break;
      case OpKind::Sum:
        give(a.id, broadcast_scalar(g, a_rows, a_cols));
        break;
      case OpKind::Mean:
        give(a.id, scale(broadcast_scalar(g, a_rows, a_cols), 1.0 / static_cast<double>(a_rows * a_cols)));
        break;
      case OpKind::MaxReduce:
        give(a.id, mul(broadcast_cols(g, a_cols), argmax_mask(a)));
        break;
      case OpKind::Scale:
        give(a.id, scale(g, factor));
        break;
      case OpKind::Transpose:
        give(a.id, transpose(g));
        break;
      case OpKind::BroadcastRows:
        give(a.id, sum_rows(g));
        break;
      case OpKind::BroadcastCols:
        give(a.id, sum_cols(g));
        break;
      case OpKind::BroadcastScalar:
        give(a.id, sum(g));
        break;
      case OpKind::SumRows:
        give(a.id, broadcast_rows(g, a_rows));
        break;
      case OpKind::SumCols:
        give(a.id, broadcast_cols(g, a_cols));
        break;
    }
  }

  std::vector<Var> grads;
  grads.reserve(wrt.size());
  for (Var w : wrt) {
    if (w.id < n && adjoint[w.id]) {
      grads.push_back(record ? *adjoint[w.id] : stop_gradient(*adjoint[w.id]));
    } else {
      const Tensor& wv = nodes_[w.id].value;
      grads.push_back(constant(Tensor::Zero(wv.rows(), wv.cols())));
    }
  }
  return grads;
}

std::vector<Tensor> Graph::gradient_values(Var output, std::span<const Var> wrt) {
  const std::size_t mark = nodes_.size();
  std::vector<Var> grads = backward(output, wrt, false);
  std::vector<Tensor> out;
  out.reserve(grads.size());
  for (Var g : grads) out.push_back(nodes_[g.id].value);
  truncate(mark);
  return out;
}

void Graph::truncate(std::size_t mark) {
  if (mark < nodes_.size()) nodes_.resize(mark);
}

}  // namespace metashape::ad
