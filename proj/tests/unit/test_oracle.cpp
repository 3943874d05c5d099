#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "metashape/envs/grid.hpp"
#include "metashape/oracle/tabular.hpp"
#include "support.hpp"

using namespace metashape;
using namespace metashape::oracle;

namespace {

int state_at(const TabularMDP& mdp, envs::Cell c) { return mdp.state_of_cell[static_cast<std::size_t>(c.y * mdp.width + c.x)]; }

std::vector<double> random_phi(const TabularMDP& mdp, Rng& rng) {
  std::vector<double> phi(static_cast<std::size_t>(mdp.states));
  for (double& v : phi) v = uniform(rng, -1.0, 1.0);
  return phi;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("chains solved by hand") {
    const TabularMDP two = build_tabular(testing::chain(2), 0.9);
    CHECK(two.states == 2);
    CHECK(value_iteration(two).v[state_at(two, {0, 0})] == doctest::Approx(1.0));

    const TabularMDP three = build_tabular(testing::chain(3), 0.9);
    CHECK(three.states == 3);
    CHECK(three.is_terminal(state_at(three, {2, 0})));
    const TabularValues v = value_iteration(three, 1e-12);
    CHECK(v.v[state_at(three, {0, 0})] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(v.v[state_at(three, {1, 0})] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.v[state_at(three, {2, 0})] == 0.0);
  }

  TEST_CASE("obstacles are not states") {
    Rng rng(2);
    const envs::GridTask t = envs::sample_grid_task(rng, 8, 8, 0.3);
    const TabularMDP mdp = build_tabular(t, 0.99);
    CHECK(static_cast<std::size_t>(mdp.states) == static_cast<std::size_t>(t.cells()) - t.obstacle_count());
    for (int i = 0; i < t.cells(); ++i) CHECK((mdp.state_of_cell[i] < 0) == (t.obstacles[i] != 0));
  }

  TEST_CASE("tables agree with grid_step everywhere") {
    Rng rng(3);
    for (int m = 0; m < 30; ++m) {
      const int size = 2 + m % 9;
      const envs::GridTask t = envs::sample_grid_task(rng, size, size, 0.2);
      const TabularMDP mdp = build_tabular(t, 0.99);
      for (int s = 0; s < mdp.states; ++s) {
        if (mdp.is_terminal(s)) continue;
        for (int a = 0; a < 4; ++a) {
          const envs::GridOutcome o = envs::grid_step(t, envs::GridState{mdp.cells[s], 0}, a);
          CHECK(mdp.next[mdp.at(s, a)] == state_at(mdp, o.next.position));
          CHECK(mdp.reward[mdp.at(s, a)] == o.reward);
        }
      }
    }
  }

  TEST_CASE("value iteration residuals never increase") {
    Rng rng(4);
    for (int m = 0; m < 20; ++m) {
      const TabularMDP mdp = build_tabular(envs::sample_grid_task(rng, 8, 8, 0.2), 0.99);
      const TabularValues v = value_iteration(mdp, 1e-12);
      for (std::size_t i = 2; i < v.residuals.size(); ++i) CHECK(v.residuals[i] <= v.residuals[i - 1]);
      for (int s = 0; s < mdp.states; ++s) {
        if (mdp.is_terminal(s)) CHECK(v.v[s] == 0.0);
      }
    }
  }

  TEST_CASE("policy invariance under arbitrary potentials") {
    Rng rng(5);
    for (int m = 0; m < 100; ++m) {
      const TabularMDP mdp = build_tabular(envs::sample_grid_task(rng, 8, 8, 0.2), 0.99);
      const ShapingReport r = check_policy_invariance(mdp, random_phi(mdp, rng), 1e-8);
      CHECK_MESSAGE(r.passed, r.detail);
      CHECK(r.argmax_sets_match);
    }
    const TabularMDP mdp = build_tabular(testing::chain(4), 0.95);
    const ShapingReport zero = check_policy_invariance(mdp, std::vector<double>(4, 0.0), 1e-12);
    CHECK(zero.passed);
    CHECK(zero.max_error <= 1e-12);
  }

  TEST_CASE("phi = V* makes every shaped reward non-positive") {
    const TabularMDP three = build_tabular(testing::chain(3), 0.9);
    const TabularValues opt = value_iteration(three, 1e-12);
    const TabularMDP shaped = shaped_mdp(three, opt.v);
    const int s = state_at(three, {0, 0});
    CHECK(shaped.reward[shaped.at(s, envs::kLeft)] ==
          doctest::Approx(opt.q_at(three, s, envs::kLeft) - opt.q_at(three, s, envs::kRight)));
    CHECK(shaped.reward[shaped.at(s, envs::kLeft)] < 0.0);
    CHECK(std::abs(shaped.reward[shaped.at(s, envs::kRight)]) <= 1e-10);

    Rng rng(6);
    for (int m = 0; m < 50; ++m) {
      const ShapingReport r = check_nonpositive(build_tabular(envs::sample_grid_task(rng, 8, 8, 0.2), 0.99), 1e-10);
      CHECK_MESSAGE(r.passed, r.detail);
      CHECK(r.shaped_v_max <= 1e-8);
    }
  }

  TEST_CASE("single-state self loop: every action optimal") {
    TabularMDP mdp;
    mdp.states = 1;
    mdp.actions = 3;
    mdp.gamma = 0.9;
    mdp.next = {0, 0, 0};
    mdp.reward = {0.5, 0.5, 0.5};
    mdp.terminal = {0};
    mdp.validate();
    const ShapingReport r = check_nonpositive(mdp, 1e-10);
    CHECK(r.passed);
    const TabularValues v = value_iteration(mdp, 1e-12);
    CHECK(argmax_set(mdp, v.q, 0, 1e-9).size() == 3);
    CHECK(greedy_action(mdp, v.q, 0) == 0);
  }

  TEST_CASE("alternating adaptation") {
    const TabularMDP three = build_tabular(testing::chain(3), 0.9);
    const AlternatingResult chain = tabular_alternating_adapt(three, 50);
    CHECK(chain.distance.back() <= 1e-6);

    Rng rng(7);
    for (int m = 0; m < 20; ++m) {
      const TabularMDP mdp = build_tabular(envs::sample_grid_task(rng, 6, 6, 0.2), 0.99);
      const AlternatingResult r = tabular_alternating_adapt(mdp, 500);
      CHECK(r.distance.back() <= 1e-3);

      const TabularValues opt = value_iteration(mdp, 1e-12);
      std::vector<double> a(opt.q.size());
      for (int s = 0; s < mdp.states; ++s) {
        for (int k = 0; k < mdp.actions; ++k) a[mdp.at(s, k)] = opt.q[mdp.at(s, k)] - opt.v[s];
      }
      const AlternatingResult fixed = tabular_alternating_adapt(mdp, 1, a, opt.v);
      double residual = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) residual = std::max(residual, std::abs(fixed.a[i] - a[i]));
      for (std::size_t i = 0; i < opt.v.size(); ++i) residual = std::max(residual, std::abs(fixed.v[i] - opt.v[i]));
      CHECK(residual <= 1e-10);
    }
  }

  TEST_CASE("alternation without the rebase diverges") {
    Rng rng(8);
    const TabularMDP mdp = build_tabular(envs::sample_grid_task(rng, 6, 6, 0.0), 0.99);
    AlternatingOptions literal;
    literal.rebase = false;
    CHECK_THROWS_AS(tabular_alternating_adapt(mdp, 500, {}, {}, literal), std::runtime_error);
  }
}
