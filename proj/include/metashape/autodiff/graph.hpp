#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace metashape::ad {

/// Dense row-major matrix. Batches are stored one sample per row.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Graph;

/// a * b. Mostly-zero left operands (one-hot state batches and their
/// transposes) take a row-sparse path; the result is the same product.
void product(const Tensor& a, const Tensor& b, Tensor& out);

enum class OpKind : std::uint8_t {
  Input,
  Constant,
  Add,
  Sub,
  Mul,
  MatMul,
  Relu,
  Tanh,
  Square,
  Sum,
  Mean,
  MaxReduce,
  StopGradient,
  Scale,
  Transpose,
  BroadcastRows,
  BroadcastCols,
  BroadcastScalar,
  SumRows,
  SumCols,
  ReluMask,
  ArgmaxMask,
};

const char* op_name(OpKind kind);

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Handle to a node. Cheap to copy; only valid while its graph is alive and
/// the node has not been discarded by a non-recording backward pass.
struct Var {
  Graph* graph = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  double scalar() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator*(double c, Var a);
Var operator-(Var a);

struct Binding {
  Var input;
  Tensor value;
};

/// Define-by-run computation graph over matrices. Node values are computed
/// when the node is created; `forward` re-evaluates the whole arena in
/// creation order after rebinding inputs, which is a valid topological order.
///
/// `backward` emits the adjoint computation as ordinary nodes, so with
/// `record` set the returned gradients can themselves be differentiated.
/// `gradient_values` is the first-order shortcut: it reads the adjoints and
/// discards the emitted nodes.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  Var input(std::string name, Tensor value);
  Var input(std::string name, Eigen::Index rows, Eigen::Index cols);
  Var constant(Tensor value);
  Var constant(double value);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var matmul(Var a, Var b);
  Var relu(Var x);
  Var tanh(Var x);
  Var square(Var x);
  /// Sum of all entries, 1x1.
  Var sum(Var x);
  /// Mean of all entries, 1x1.
  Var mean(Var x);
  /// Row-wise maximum, Bx1. Gradient goes to the first maximal entry.
  Var max_reduce(Var x);
  Var stop_gradient(Var x);
  Var scale(Var x, double factor);
  Var transpose(Var x);
  /// 1xN row repeated to `rows`xN.
  Var broadcast_rows(Var row, Eigen::Index rows);
  /// Bx1 column repeated to Bx`cols`.
  Var broadcast_cols(Var col, Eigen::Index cols);
  /// 1x1 repeated to `rows`x`cols`.
  Var broadcast_scalar(Var s, Eigen::Index rows, Eigen::Index cols);
  /// Column sums, 1xN.
  Var sum_rows(Var x);
  /// Row sums, Bx1.
  Var sum_cols(Var x);
  /// 1 where x > 0, else 0. Not differentiable (zero gradient).
  Var relu_mask(Var x);
  /// One-hot of each row's argmax, lowest index on ties. Zero gradient.
  Var argmax_mask(Var x);

  /// Row-vector bias added to every row of a matrix.
  Var add_bias(Var x, Var bias) { return add(x, broadcast_rows(bias, x.rows())); }

  /// Rebinds the given inputs and recomputes every node.
  void forward(std::span<const Binding> bindings);
  void forward() { forward({}); }

  /// Gradients of a scalar node with respect to `wrt` (any nodes of this graph).
  /// Returned vars hold tensors shaped like each input. With `record` unset
  /// the results are wrapped in stop_gradient, so they act as constants in
  /// any later backward pass.
  std::vector<Var> backward(Var output, std::span<const Var> wrt, bool record);

  /// Non-recording backward returning plain tensors.
  std::vector<Tensor> gradient_values(Var output, std::span<const Var> wrt);

  const Tensor& value(Var v) const;
  const Tensor& value(std::uint32_t id) const { return nodes_.at(id).value; }
  OpKind kind(Var v) const { return nodes_.at(v.id).kind; }
  const std::string& name(Var v) const { return nodes_.at(v.id).name; }
  std::size_t size() const { return nodes_.size(); }

  /// Drops every node created after `mark` (a previous `size()`).
  void truncate(std::size_t mark);

 private:
  struct Node {
    OpKind kind;
    std::uint32_t lhs = 0;
    std::uint32_t rhs = 0;
    std::uint8_t arity = 0;
    double factor = 1.0;
    Eigen::Index extent = 0;
    Tensor value{};
    std::string name{};
  };

  Var push(Node node);
  void evaluate(Node& node, std::size_t index) const;
  void check(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace metashape::ad
