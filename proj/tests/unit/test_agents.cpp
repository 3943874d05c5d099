#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "metashape/agents/ddpg.hpp"
#include "metashape/agents/dqn.hpp"
#include "metashape/agents/episode.hpp"
#include "metashape/agents/exploration.hpp"
#include "metashape/agents/replay.hpp"
#include "metashape/agents/trainer.hpp"
#include "metashape/envs/cartpole.hpp"
#include "metashape/envs/grid.hpp"
#include "metashape/oracle/tabular.hpp"
#include "support.hpp"

using namespace metashape;
using namespace metashape::agents;

namespace {

Transition numbered(int i) {
  return Transition{{static_cast<double>(i)}, 0, 0.0, {static_cast<double>(i + 1)}, false};
}

// Every (state, action) pair of a grid MDP as one batch.
Batch exhaustive_batch(const envs::GridTask& task) {
  std::vector<Transition> ts;
  for (int i = 0; i < task.cells(); ++i) {
    const envs::Cell c = task.cell(i);
    if (!task.free(c) || c == task.goal) continue;
    for (int a = 0; a < envs::kGridActions; ++a) {
      const envs::GridOutcome o = envs::grid_step(task, envs::GridState{c, 0}, a);
      ts.push_back({envs::encode_grid(task, c), a, o.reward, envs::encode_grid(task, o.next.position), o.done});
    }
  }
  std::vector<const Transition*> ptrs;
  for (const auto& t : ts) ptrs.push_back(&t);
  return make_batch(ptrs);
}

double norm_diff(const nn::ParamVector& a, const nn::ParamVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.count(); ++i) s += (a[i] - b[i]).squaredNorm();
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("agents") {
  TEST_CASE("replay buffer evicts oldest and samples deterministically") {
    ReplayBuffer buf(3, 1);
    for (int i = 0; i < 5; ++i) buf.push(numbered(i));
    CHECK(buf.size() == 3);
    CHECK(buf[0].state[0] == 2.0);
    CHECK(buf[2].state[0] == 4.0);
    for (int k = 0; k < 200; ++k) {
      const Batch b = buf.sample(4);
      for (Eigen::Index r = 0; r < b.states.rows(); ++r) CHECK(b.states(r, 0) >= 2.0);
    }

    ReplayBuffer x(10, 42), y(10, 42);
    for (int i = 0; i < 10; ++i) {
      x.push(numbered(i));
      y.push(numbered(i));
    }
    CHECK(x.sample_indices(32) == y.sample_indices(32));
    CHECK_THROWS(ReplayBuffer(4, 0).sample(1));
  }

  TEST_CASE("batches record terminals and actions") {
    std::vector<Transition> ts{{{1.0}, 2, 0.5, {2.0}, true}, {{3.0}, 1, -1.0, {4.0}, false}};
    std::vector<const Transition*> ptrs{&ts[0], &ts[1]};
    const Batch b = make_batch(ptrs);
    CHECK(b.actions == std::vector<int>{2, 1});
    CHECK(b.not_done(0, 0) == 0.0);
    CHECK(b.not_done(1, 0) == 1.0);
    CHECK(b.rewards(0, 0) == 0.5);
    Transition cont{{1.0}, 0.5, 0.0, {1.0}, false};
    ptrs.push_back(&cont);
    CHECK_THROWS_AS(make_batch(ptrs), std::invalid_argument);
  }

  TEST_CASE("exploration schedule") {
    const ExplorationSchedule s{1.0, 0.05, 100};
    CHECK(s.epsilon(0) == 1.0);
    CHECK(s.epsilon(50) == doctest::Approx(0.525));
    CHECK(s.epsilon(100) == doctest::Approx(0.05));
    CHECK(s.epsilon(10'000) == doctest::Approx(0.05));
    CHECK_THROWS((ExplorationSchedule{1.5, 0.0, 10}.validate()));
  }

  TEST_CASE("epsilon-greedy") {
    Rng rng(1);
    const std::vector<double> v{1, 3, 2};
    CHECK(epsilon_greedy(v, 0.0, rng) == 1);
    const std::vector<double> tie{2, 2};
    CHECK(epsilon_greedy(tie, 0.0, rng) == 0);
    CHECK_THROWS(epsilon_greedy(std::vector<double>{}, 0.0, rng));
    CHECK_THROWS(epsilon_greedy(v, 1.5, rng));

    std::array<int, 4> counts{};
    const std::vector<double> four{0, 0, 0, 1};
    for (int i = 0; i < 100'000; ++i) ++counts[static_cast<std::size_t>(epsilon_greedy(four, 1.0, rng))];
    for (int c : counts) CHECK(std::abs(c / 1e5 - 0.25) <= 0.01);
  }

  TEST_CASE("epsilon-greedy on A matches epsilon-greedy on Q") {
    Rng net_rng(2);
    const nn::DuelingNet net(nn::MlpSpec{5, {8}, nn::Activation::Tanh}, 3);
    const nn::ParamVector p = net.init_params(net_rng);
    Rng a(9), b(9), states(4);
    for (int i = 0; i < 500; ++i) {
      std::vector<double> s(5);
      for (double& x : s) x = uniform(states, -1, 1);
      const nn::DuelingOutput out = nn::dueling_forward(net, p, s);
      CHECK(epsilon_greedy(out.advantage, 0.3, a) == epsilon_greedy(out.q, 0.3, b));
    }
  }

  TEST_CASE("td loss on terminal transitions has no bootstrap") {
    const nn::QNet net(nn::MlpSpec{1, {}, nn::Activation::Relu}, 2);
    Rng rng(1);
    nn::ParamVector p = net.init_params(rng);
    p[0].setZero();
    std::vector<Transition> ts{{{1.0}, 0, 1.0, {1.0}, true}};
    std::vector<const Transition*> ptrs{&ts[0]};
    nn::OptimizerState opt = nn::OptimizerState::sgd(0.1);
    CHECK(dqn_update(net, p, make_batch(ptrs), 0.99, opt).loss == doctest::Approx(1.0));
  }

  TEST_CASE("zero TD error leaves parameters unchanged") {
    const nn::QNet net(nn::MlpSpec{2, {4}, nn::Activation::Tanh}, 2);
    Rng rng(3);
    nn::ParamVector p = net.init_params(rng);
    // Terminal transitions whose reward equals the current prediction.
    std::vector<Transition> ts;
    for (int i = 0; i < 5; ++i) {
      Transition t{{uniform(rng, -1, 1), uniform(rng, -1, 1)}, i % 2, 0.0, {0.0, 0.0}, true};
      t.reward = q_row(net, p, t.state)[static_cast<std::size_t>(i % 2)];
      ts.push_back(t);
    }
    std::vector<const Transition*> ptrs;
    for (const auto& t : ts) ptrs.push_back(&t);
    nn::OptimizerState opt = nn::OptimizerState::adam(0.01);
    const DqnStep step = dqn_update(net, p, make_batch(ptrs), 0.99, opt);
    CHECK(step.loss <= 1e-30);
    CHECK(nn::max_abs_diff(step.params, p) == 0.0);
  }

  TEST_CASE("linear one-hot Q-learning on a chain reaches Q*") {
    const envs::GridTask task = testing::chain(3);
    const nn::QNet net(nn::MlpSpec{envs::grid_observation_size(3, 1), {}, nn::Activation::Relu}, 4);
    Rng rng(5);
    nn::ParamVector p = net.init_params(rng);
    const Batch batch = exhaustive_batch(task);
    nn::OptimizerState opt = nn::OptimizerState::sgd(0.5);
    for (int i = 0; i < 5000; ++i) p = dqn_update(net, p, batch, 0.9, opt).params;

    const oracle::TabularMDP mdp = oracle::build_tabular(task, 0.9);
    const oracle::TabularValues opt_values = oracle::value_iteration(mdp, 1e-12);
    for (int s = 0; s < mdp.states; ++s) {
      if (mdp.is_terminal(s)) continue;
      const std::vector<double> q = q_row(net, p, envs::encode_grid(task, mdp.cells[s]));
      for (int a = 0; a < 4; ++a) CHECK(std::abs(q[a] - opt_values.q_at(mdp, s, a)) <= 1e-3);
    }
  }

  TEST_CASE("episodes report base returns") {
    const envs::GridTask task = testing::chain(4);
    envs::GridEnv env(task);
    const Policy right = [](const Observation&) -> envs::Action { return envs::kRight; };
    const Policy left = [](const Observation&) -> envs::Action { return envs::kLeft; };
    ReplayBuffer buf(100, 0);
    const EpisodeStats win = collect_episode(env, right, &buf);
    CHECK(win.base_return == 1.0);
    CHECK(win.steps == 3);
    CHECK(buf.size() == 3);
    CHECK(buf[2].done);
    CHECK(collect_episode(env, left, nullptr).base_return == 0.0);

    envs::CartPoleEnv pole({0.5, envs::ActionMode::Continuous}, 7);
    const Policy balance = [](const Observation& o) -> envs::Action {
      return std::clamp(1.0 * o[0] + 2.0 * o[1] + 40.0 * o[2] + 8.0 * o[3], -15.0, 15.0);
    };
    CHECK(collect_episode(pole, balance, nullptr).base_return == 200.0);
  }

  TEST_CASE("training loop cadence and budget") {
    const envs::GridTask task = testing::chain(4);
    envs::GridEnv train(task), eval(task);
    LoopConfig cfg;
    cfg.updates = 300;
    cfg.warmup = 64;
    cfg.eval_every = 100;
    cfg.batch = 8;
    int updates = 0;
    LearnerHooks hooks;
    hooks.act = [](const Observation&, double) -> envs::Action { return envs::kRight; };
    hooks.update = [&](const Batch& b) {
      CHECK(b.size() == 8);
      ++updates;
    };
    hooks.greedy = [](const Observation&) -> envs::Action { return envs::kRight; };
    const LoopResult r = run_training_loop(train, eval, cfg, hooks, 1);
    CHECK(updates == 300);
    REQUIRE(r.curve.size() == 4);
    for (std::size_t i = 0; i < r.curve.size(); ++i) {
      CHECK(r.curve[i].step == static_cast<long>(i) * 100);
      CHECK(r.curve[i].env_steps == cfg.env_steps_at(r.curve[i].step));
      CHECK(r.curve[i].ret == 1.0);
    }
  }

  TEST_CASE("ddpg soft updates") {
    Rng rng(1);
    DdpgConfig cfg;
    cfg.actor_hidden = {8};
    cfg.critic_hidden = {8, 8};
    Rng data(2);
    std::vector<Transition> ts;
    for (int i = 0; i < 16; ++i) {
      ts.push_back({{uniform(data, -1, 1), uniform(data, -1, 1), uniform(data, -0.2, 0.2), uniform(data, -1, 1)},
                    uniform(data, -15, 15), 1.0,
                    {uniform(data, -1, 1), uniform(data, -1, 1), uniform(data, -0.2, 0.2), uniform(data, -1, 1)},
                    i % 5 == 0});
    }
    std::vector<const Transition*> ptrs;
    for (const auto& t : ts) ptrs.push_back(&t);
    const Batch batch = make_batch(ptrs);

    DdpgAgent full = DdpgAgent::create(4, cfg, rng);
    full.tau = 1.0;
    ddpg_update(full, batch, 0.99);
    CHECK(full.target_actor == full.actor_params);
    CHECK(full.target_critic == full.critic_params);

    DdpgAgent frozen = DdpgAgent::create(4, cfg, rng);
    frozen.tau = 0.0;
    const nn::ParamVector t0 = frozen.target_critic;
    for (int i = 0; i < 3; ++i) ddpg_update(frozen, batch, 0.99);
    CHECK(frozen.target_critic == t0);

    // Frozen online network: the target closes the gap by (1 - tau) per update.
    nn::ParamVector target = DdpgAgent::create(4, cfg, rng).critic_params;
    const nn::ParamVector online = full.critic_params;
    const double d0 = norm_diff(target, online);
    for (int k = 1; k <= 50; ++k) {
      soft_update(target, online, 0.1);
      CHECK(norm_diff(target, online) <= std::pow(0.9, k) * d0 * (1 + 1e-9));
    }
  }

  TEST_CASE("ddpg critic is a fixed point when the TD error vanishes") {
    Rng rng(3);
    DdpgConfig cfg;
    DdpgAgent agent = DdpgAgent::create(4, cfg, rng);
    // Zero output layer: Q == 0 for every input, so zero rewards give zero TD error.
    const std::size_t n = agent.critic_params.count();
    agent.critic_params[n - 2].setZero();
    agent.critic_params[n - 1].setZero();
    agent.target_critic = agent.critic_params;
    std::vector<Transition> ts(8, Transition{{0.1, 0.2, 0.0, -0.1}, 1.0, 0.0, {0.0, 0.1, 0.01, 0.0}, false});
    std::vector<const Transition*> ptrs;
    for (const auto& t : ts) ptrs.push_back(&t);
    const nn::ParamVector before = agent.critic_params;
    const DdpgLosses l = ddpg_update(agent, make_batch(ptrs), 0.99);
    CHECK(l.critic == 0.0);
    CHECK(agent.critic_params == before);
  }

  TEST_CASE("actor actions respect the bound") {
    Rng rng(4);
    DdpgConfig cfg;
    const DdpgAgent agent = DdpgAgent::create(4, cfg, rng);
    Rng noise(5);
    for (int i = 0; i < 200; ++i) {
      const Observation o{uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -1, 1), uniform(rng, -3, 3)};
      CHECK(std::abs(agent.act(o)) <= 15.0);
      CHECK(std::abs(agent.explore(o, 50.0, noise)) <= 15.0);
    }
  }
}
