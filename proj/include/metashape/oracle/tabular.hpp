#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metashape/envs/grid.hpp"

namespace metashape::oracle {

/// Finite deterministic MDP. Tables are indexed [s * actions + a].
/// Terminal states absorb with zero reward and are never bootstrapped from.
struct TabularMDP {
  int states = 0;
  int actions = 0;
  double gamma = 0.99;
  std::vector<int> next;
  std::vector<double> reward;
  std::vector<std::uint8_t> terminal;
  /// Grid provenance: cell of each state and the state of each cell (-1 for
  /// obstacles). Empty for hand-built MDPs.
  std::vector<envs::Cell> cells;
  std::vector<int> state_of_cell;
  int width = 0;
  int height = 0;

  std::size_t at(int s, int a) const { return static_cast<std::size_t>(s * actions + a); }
  bool is_terminal(int s) const { return terminal[static_cast<std::size_t>(s)] != 0; }
  /// Throws std::invalid_argument on inconsistent tables.
  void validate() const;
};

/// Every free cell becomes a state (row-major order); the goal is terminal.
/// The 50-step cap is not part of the MDP: values are infinite-horizon
/// discounted, the setting in which potential shaping preserves optimal policies.
TabularMDP build_tabular(const envs::GridTask& task, double gamma);

/// Same transitions, rewards R + gamma * phi(s') - phi(s) with phi := 0 on
/// terminal states.
TabularMDP shaped_mdp(const TabularMDP& mdp, const std::vector<double>& phi);

struct TabularValues {
  std::vector<double> v;
  std::vector<double> q;
  std::vector<double> residuals;  ///< sup-norm change per sweep
  int sweeps = 0;

  double q_at(const TabularMDP& mdp, int s, int a) const { return q[mdp.at(s, a)]; }
};

/// Synchronous sweeps until the sup-norm change is <= tolerance, then Q is
/// read off the final V. Throws std::runtime_error at the sweep cap.
TabularValues value_iteration(const TabularMDP& mdp, double tolerance = 1e-10, int max_sweeps = 1'000'000);

/// Actions within `tie_tolerance` of the row maximum, ascending.
std::vector<int> argmax_set(const TabularMDP& mdp, const std::vector<double>& q, int s, double tie_tolerance);
/// Lowest-index argmax.
int greedy_action(const TabularMDP& mdp, const std::vector<double>& q, int s);

struct ShapingReport {
  bool passed = false;
  double max_error = 0.0;  ///< worst |Q'_* - (Q_* - phi)| or worst positive R'
  int worst_state = -1;
  int worst_action = -1;
  bool argmax_sets_match = true;
  int mismatched_state = -1;
  double shaped_v_max = 0.0;  ///< max |V*_{M'}| (non-positivity check only)
  std::string detail;
};

/// Solves M and the shaped M' and compares Q*_{M'} with Q*_M - phi.
ShapingReport check_policy_invariance(const TabularMDP& mdp, const std::vector<double>& phi, double tolerance,
                                      double vi_tolerance = 1e-12, double tie_tolerance = 1e-9);

/// Shapes with phi = V*_M and checks R'(s, a) <= tol everywhere, |R'| <= tol
/// exactly on argmax actions and V*_{M'} == 0 within `value_tolerance`.
ShapingReport check_nonpositive(const TabularMDP& mdp, double tolerance, double value_tolerance = 1e-8,
                                double vi_tolerance = 1e-12, double tie_tolerance = 1e-9);

struct AlternatingResult {
  std::vector<double> a;
  std::vector<double> v;
  std::vector<double> distance;  ///< ||V - V*||_inf after each alternation
};

struct AlternatingOptions {
  /// After the V step, shift A by its row maximum so V + A (the Q estimate)
  /// is unchanged. Without it the alternation double-counts shaping and
  /// diverges; the switch exists to demonstrate that.
  bool rebase = true;
  /// Divergence is declared when the distance exceeds this value.
  double divergence_bound = 1e6;
};

/// Alternates a synchronous TD sweep on A over rewards shaped by the current
/// V with V(s) <- V(s) + max_a A(s, a). A and V default to zeros. Throws
/// std::runtime_error on divergence.
AlternatingResult tabular_alternating_adapt(const TabularMDP& mdp, int sweeps, std::vector<double> a = {},
                                            std::vector<double> v = {}, AlternatingOptions options = {});

}  // namespace metashape::oracle
