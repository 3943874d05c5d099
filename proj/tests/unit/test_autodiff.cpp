#include <doctest.h>

#include <cmath>
#include <vector>

#include "metashape/autodiff/finite_diff.hpp"
#include "metashape/autodiff/graph.hpp"
#include "support.hpp"

using namespace metashape;
using ad::Graph;
using ad::Tensor;
using ad::Var;

namespace {

Tensor scalar(double v) { return Tensor::Constant(1, 1, v); }

std::vector<double> flat(const std::vector<Tensor>& ts) {
  std::vector<double> out;
  for (const Tensor& t : ts) out.insert(out.end(), t.data(), t.data() + t.size());
  return out;
}

// Loss of a 2-layer tanh net on fixed data, as a function of its flattened
// weights; the same closure builds a graph so both paths agree by construction.
struct TwoLayer {
  Tensor x, y;
  Eigen::Index in = 3, hidden = 5, out = 2;

  std::vector<Tensor> split(std::span<const double> p) const {
    std::vector<Tensor> ws;
    const Eigen::Index shapes[4][2] = {{in, hidden}, {1, hidden}, {hidden, out}, {1, out}};
    std::size_t k = 0;
    for (const auto& s : shapes) {
      Tensor t(s[0], s[1]);
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = p[k++];
      ws.push_back(t);
    }
    return ws;
  }

  Var loss(Graph& g, std::span<const Var> w) const {
    Var xs = g.constant(x);
    Var h = g.tanh(g.add_bias(g.matmul(xs, w[0]), w[1]));
    Var o = g.add_bias(g.matmul(h, w[2]), w[3]);
    return g.mean(g.square(g.sub(o, g.constant(y))));
  }

  double value(std::span<const double> p) const {
    Graph g;
    std::vector<Var> w;
    for (const Tensor& t : split(p)) w.push_back(g.input("w", t));
    return loss(g, w).scalar();
  }
};

}  // namespace

TEST_SUITE("autodiff") {
  TEST_CASE("forward arithmetic") {
    Graph g;
    Var x = g.input("x", scalar(2.0));
    Var y = g.input("y", scalar(3.0));
    CHECK((x * y).scalar() == 6.0);
    CHECK(g.tanh(g.constant(0.0)).scalar() == 0.0);
    Tensor row(1, 3);
    row << 1, 3, 2;
    CHECK(g.max_reduce(g.constant(row)).scalar() == 3.0);
  }

  TEST_CASE("first derivatives") {
    Graph g;
    Var x = g.input("x", scalar(2.0));
    Var y = g.input("y", scalar(3.0));
    const std::vector<Var> wrt{x, y};
    const auto grads = g.gradient_values(x * y, wrt);
    CHECK(grads[0](0, 0) == 3.0);
    CHECK(grads[1](0, 0) == 2.0);

    Graph h;
    Var z = h.input("z", scalar(0.0));
    const std::vector<Var> zw{z};
    CHECK(h.gradient_values(h.tanh(z), zw)[0](0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("second derivative of x^3 through a recorded backward pass") {
    Graph g;
    Var x = g.input("x", scalar(2.0));
    Var cube = x * x * x;
    const std::vector<Var> wrt{x};
    Var dx = g.backward(cube, wrt, true)[0];
    CHECK(dx.scalar() == doctest::Approx(12.0));
    const auto d2 = g.gradient_values(g.sum(dx), wrt);
    CHECK(d2[0](0, 0) == doctest::Approx(12.0));
  }

  TEST_CASE("stop-gradient blocks exactly") {
    Graph g;
    Var x = g.input("x", scalar(1.5));
    Var y = g.add(g.square(g.stop_gradient(x)), g.scale(x, 0.0));
    const std::vector<Var> wrt{x};
    CHECK(g.gradient_values(y, wrt)[0](0, 0) == 0.0);
    CHECK(g.value(y)(0, 0) == 2.25);
  }

  TEST_CASE("max-reduce routes the gradient to the lowest tied index") {
    Graph g;
    Tensor row(1, 2);
    row << 1, 1;
    Var x = g.input("x", row);
    const std::vector<Var> wrt{x};
    const Tensor grad = g.gradient_values(g.sum(g.max_reduce(x)), wrt)[0];
    CHECK(grad(0, 0) == 1.0);
    CHECK(grad(0, 1) == 0.0);
  }

  TEST_CASE("errors are descriptive") {
    Graph g;
    Var a = g.input("a", Tensor::Zero(2, 3));
    Var b = g.input("b", Tensor::Zero(3, 2));
    CHECK_THROWS_AS(g.add(a, b), ad::GraphError);
    const std::vector<Var> wrt{a};
    CHECK_THROWS_AS(g.backward(a, wrt, false), ad::GraphError);
    Graph other;
    Var stranger = other.input("s", Tensor::Zero(1, 1));
    const std::vector<Var> bad{stranger};
    CHECK_THROWS_AS(g.backward(g.sum(a), bad, false), ad::GraphError);
    const std::vector<ad::Binding> wrong{{a, Tensor::Zero(1, 1)}};
    CHECK_THROWS_WITH_AS(g.forward(wrong), doctest::Contains("'a'"), ad::GraphError);
  }

  TEST_CASE("forward is deterministic after rebinding") {
    Rng rng(3);
    Graph g;
    const Tensor original = testing::random_tensor(rng, 4, 3);
    Var x = g.input("x", original);
    Var w = g.input("w", testing::random_tensor(rng, 3, 2));
    Var out = g.mean(g.square(g.tanh(g.matmul(x, w))));
    const double first = out.scalar();
    const std::vector<ad::Binding> swap{{x, testing::random_tensor(rng, 4, 3)}};
    g.forward(swap);
    CHECK(out.scalar() != first);
    const std::vector<ad::Binding> back{{x, original}};
    g.forward(back);
    CHECK(out.scalar() == first);
  }

  TEST_CASE("finite differences on simple functions") {
    const std::vector<double> p{3.0};
    const auto sq = ad::finite_diff_grad([](std::span<const double> v) { return v[0] * v[0]; }, p, 1e-4);
    CHECK(sq[0] == doctest::Approx(6.0).epsilon(1e-6));
    const std::vector<double> q{2.0, 3.0};
    const auto xy = ad::finite_diff_grad([](std::span<const double> v) { return v[0] * v[1]; }, q, 1e-4);
    CHECK(xy[0] == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(xy[1] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK_THROWS_AS(ad::finite_diff_grad([](std::span<const double>) { return NAN; }, q, 1e-4), std::domain_error);
  }

  TEST_CASE("every op matches central differences") {
    Rng rng(11);
    using Builder = std::function<Var(Graph&, Var)>;
    const std::vector<std::pair<const char*, Builder>> ops{
        {"add", [](Graph& g, Var x) { return g.sum(g.add(x, g.square(x))); }},
        {"sub", [](Graph& g, Var x) { return g.sum(g.sub(g.tanh(x), x)); }},
        {"mul", [](Graph& g, Var x) { return g.sum(g.mul(x, g.tanh(x))); }},
        {"matmul", [](Graph& g, Var x) { return g.sum(g.tanh(g.matmul(x, g.transpose(x)))); }},
        {"relu", [](Graph& g, Var x) { return g.sum(g.mul(g.relu(x), x)); }},
        {"mean", [](Graph& g, Var x) { return g.mean(g.square(x)); }},
        {"max_reduce", [](Graph& g, Var x) { return g.sum(g.square(g.max_reduce(x))); }},
        {"scale", [](Graph& g, Var x) { return g.sum(g.scale(g.square(x), -2.5)); }},
        {"broadcast", [](Graph& g, Var x) {
           return g.sum(g.mul(g.broadcast_cols(g.sum_cols(x), x.cols()), g.broadcast_rows(g.sum_rows(x), x.rows())));
         }},
        {"broadcast_scalar", [](Graph& g, Var x) { return g.sum(g.mul(g.broadcast_scalar(g.mean(x), 3, 4), x)); }},
    };
    const Tensor x0 = testing::random_tensor(rng, 3, 4);
    for (const auto& [name, build] : ops) {
      CAPTURE(name);
      Graph g;
      Var x = g.input("x", x0);
      const std::vector<Var> wrt{x};
      const Tensor grad = g.gradient_values(build(g, x), wrt)[0];
      const std::vector<double> p(x0.data(), x0.data() + x0.size());
      const auto fd = ad::finite_diff_grad(
          [&](std::span<const double> v) {
            Graph h;
            Tensor t(3, 4);
            std::copy(v.begin(), v.end(), t.data());
            return build(h, h.input("x", t)).scalar();
          },
          p, 1e-4);
      const std::vector<double> ag(grad.data(), grad.data() + grad.size());
      CHECK(ad::relative_error(ag, fd) <= 1e-4);
    }
  }

  TEST_CASE("two-layer net: backward vs finite differences, first and second order") {
    Rng rng(5);
    TwoLayer net;
    net.x = testing::random_tensor(rng, 16, net.in);
    net.y = testing::random_tensor(rng, 16, net.out);
    std::vector<double> p;
    for (int i = 0; i < static_cast<int>((net.in + 1) * net.hidden + (net.hidden + 1) * net.out); ++i) {
      p.push_back(uniform(rng, -0.8, 0.8));
    }

    Graph g;
    std::vector<Var> w;
    for (const Tensor& t : net.split(p)) w.push_back(g.input("w", t));
    const auto grad = flat(g.gradient_values(net.loss(g, w), w));
    const auto fd = ad::finite_diff_grad([&](std::span<const double> v) { return net.value(v); }, p, 1e-4);
    CHECK(ad::relative_error(grad, fd) <= 1e-4);

    // d/dp L(p - alpha * dL/dp(p))
    const double alpha = 0.3;
    const auto composed = [&](std::span<const double> v) {
      Graph h;
      std::vector<Var> ws;
      for (const Tensor& t : net.split(v)) ws.push_back(h.input("w", t));
      const auto inner = h.gradient_values(net.loss(h, ws), ws);
      const auto inner_flat = flat(inner);
      std::vector<double> stepped(v.begin(), v.end());
      for (std::size_t i = 0; i < stepped.size(); ++i) stepped[i] -= alpha * inner_flat[i];
      return net.value(stepped);
    };
    Graph h;
    std::vector<Var> ws;
    for (const Tensor& t : net.split(p)) ws.push_back(h.input("w", t));
    const std::vector<Var> inner = h.backward(net.loss(h, ws), ws, true);
    std::vector<Var> stepped;
    for (std::size_t i = 0; i < ws.size(); ++i) stepped.push_back(h.sub(ws[i], h.scale(inner[i], alpha)));
    const auto meta = flat(h.gradient_values(net.loss(h, stepped), ws));
    const auto meta_fd = ad::finite_diff_grad(composed, p, 1e-4);
    CHECK(ad::relative_error(meta, meta_fd) <= 1e-3);
  }
}
