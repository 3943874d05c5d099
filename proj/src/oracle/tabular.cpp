#include "metashape/oracle/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace metashape::oracle {

void TabularMDP::validate() const {
  if (states <= 0 || actions <= 0) throw std::invalid_argument("TabularMDP: empty state or action set");
  const auto n = static_cast<std::size_t>(states * actions);
  if (next.size() != n || reward.size() != n || terminal.size() != static_cast<std::size_t>(states)) {
    throw std::invalid_argument("TabularMDP: table sizes do not match states x actions");
  }
  for (int t : next) {
    if (t < 0 || t >= states) throw std::invalid_argument("TabularMDP: transition to unknown state");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("TabularMDP: gamma must be in [0, 1]");
}

TabularMDP build_tabular(const envs::GridTask& task, double gamma) {
  task.validate();
  TabularMDP mdp;
  mdp.width = task.width;
  mdp.height = task.height;
  mdp.gamma = gamma;
  mdp.actions = envs::kGridActions;
  mdp.state_of_cell.assign(static_cast<std::size_t>(task.cells()), -1);
  for (int i = 0; i < task.cells(); ++i) {
    if (!task.obstacles[static_cast<std::size_t>(i)]) {
      mdp.state_of_cell[static_cast<std::size_t>(i)] = static_cast<int>(mdp.cells.size());
      mdp.cells.push_back(task.cell(i));
    }
  }
  mdp.states = static_cast<int>(mdp.cells.size());
  const auto n = static_cast<std::size_t>(mdp.states * mdp.actions);
  mdp.next.assign(n, 0);
  mdp.reward.assign(n, 0.0);
  mdp.terminal.assign(static_cast<std::size_t>(mdp.states), 0);
  for (int s = 0; s < mdp.states; ++s) {
    const envs::Cell c = mdp.cells[static_cast<std::size_t>(s)];
    if (c == task.goal) {
      mdp.terminal[static_cast<std::size_t>(s)] = 1;
      for (int a = 0; a < mdp.actions; ++a) mdp.next[mdp.at(s, a)] = s;
      continue;
    }
    for (int a = 0; a < mdp.actions; ++a) {
      const envs::Cell to = envs::grid_move(task, c, a);
      mdp.next[mdp.at(s, a)] = mdp.state_of_cell[static_cast<std::size_t>(task.index(to))];
      mdp.reward[mdp.at(s, a)] = to == task.goal ? 1.0 : 0.0;
    }
  }
  return mdp;
}

TabularMDP shaped_mdp(const TabularMDP& mdp, const std::vector<double>& phi) {
  if (phi.size() != static_cast<std::size_t>(mdp.states)) throw std::invalid_argument("shaped_mdp: phi size");
  TabularMDP out = mdp;
  for (int s = 0; s < mdp.states; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < mdp.actions; ++a) {
      const int t = mdp.next[mdp.at(s, a)];
      const double phi_next = mdp.is_terminal(t) ? 0.0 : phi[static_cast<std::size_t>(t)];
      if (!std::isfinite(phi[static_cast<std::size_t>(s)]) || !std::isfinite(phi_next)) {
        throw std::domain_error("shaped_mdp: non-finite potential");
      }
      out.reward[mdp.at(s, a)] = mdp.reward[mdp.at(s, a)] + mdp.gamma * phi_next - phi[static_cast<std::size_t>(s)];
    }
  }
  return out;
}

namespace {

double backup(const TabularMDP& mdp, const std::vector<double>& v, int s, int a) {
  const int t = mdp.next[mdp.at(s, a)];
  return mdp.reward[mdp.at(s, a)] + (mdp.is_terminal(t) ? 0.0 : mdp.gamma * v[static_cast<std::size_t>(t)]);
}

double row_max(const TabularMDP& mdp, const std::vector<double>& table, int s) {
  double m = table[mdp.at(s, 0)];
  for (int a = 1; a < mdp.actions; ++a) m = std::max(m, table[mdp.at(s, a)]);
  return m;
}

}  // namespace

TabularValues value_iteration(const TabularMDP& mdp, double tolerance, int max_sweeps) {
  mdp.validate();
  if (!(tolerance > 0.0)) throw std::invalid_argument("value_iteration: tolerance must be positive");
  TabularValues out;
  out.v.assign(static_cast<std::size_t>(mdp.states), 0.0);
  std::vector<double> fresh(out.v.size(), 0.0);
  while (true) {
    if (out.sweeps >= max_sweeps) {
      throw std::runtime_error("value_iteration: no convergence within " + std::to_string(max_sweeps) + " sweeps");
    }
    double change = 0.0;
    for (int s = 0; s < mdp.states; ++s) {
      double best = 0.0;
      if (!mdp.is_terminal(s)) {
        best = backup(mdp, out.v, s, 0);
        for (int a = 1; a < mdp.actions; ++a) best = std::max(best, backup(mdp, out.v, s, a));
      }
      change = std::max(change, std::abs(best - out.v[static_cast<std::size_t>(s)]));
      fresh[static_cast<std::size_t>(s)] = best;
    }
    out.v.swap(fresh);
    ++out.sweeps;
    out.residuals.push_back(change);
    if (!std::isfinite(change)) throw std::runtime_error("value_iteration: values diverged");
    if (change <= tolerance) break;
  }
  out.q.assign(static_cast<std::size_t>(mdp.states * mdp.actions), 0.0);
  for (int s = 0; s < mdp.states; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < mdp.actions; ++a) out.q[mdp.at(s, a)] = backup(mdp, out.v, s, a);
  }
  return out;
}

std::vector<int> argmax_set(const TabularMDP& mdp, const std::vector<double>& q, int s, double tie_tolerance) {
  const double m = row_max(mdp, q, s);
  std::vector<int> set;
  for (int a = 0; a < mdp.actions; ++a) {
    if (q[mdp.at(s, a)] >= m - tie_tolerance) set.push_back(a);
  }
  return set;
}

int greedy_action(const TabularMDP& mdp, const std::vector<double>& q, int s) {
  int best = 0;
  for (int a = 1; a < mdp.actions; ++a) {
    if (q[mdp.at(s, a)] > q[mdp.at(s, best)]) best = a;
  }
  return best;
}

ShapingReport check_policy_invariance(const TabularMDP& mdp, const std::vector<double>& phi, double tolerance,
                                      double vi_tolerance, double tie_tolerance) {
  const TabularValues base = value_iteration(mdp, vi_tolerance);
  const TabularValues shaped = value_iteration(shaped_mdp(mdp, phi), vi_tolerance);
  ShapingReport report;
  for (int s = 0; s < mdp.states; ++s) {
    const double offset = mdp.is_terminal(s) ? 0.0 : phi[static_cast<std::size_t>(s)];
    for (int a = 0; a < mdp.actions; ++a) {
      const double err = std::abs(shaped.q[mdp.at(s, a)] - (base.q[mdp.at(s, a)] - offset));
      if (err > report.max_error || report.worst_state < 0) {
        report.max_error = err;
        report.worst_state = s;
        report.worst_action = a;
      }
    }
    if (report.argmax_sets_match &&
        argmax_set(mdp, base.q, s, tie_tolerance) != argmax_set(mdp, shaped.q, s, tie_tolerance)) {
      report.argmax_sets_match = false;
      report.mismatched_state = s;
    }
  }
  report.passed = report.max_error <= tolerance && report.argmax_sets_match;
  report.detail = "max |Q'* - (Q* - phi)| = " + std::to_string(report.max_error) + " at (s=" +
                  std::to_string(report.worst_state) + ", a=" + std::to_string(report.worst_action) + ")";
  if (!report.argmax_sets_match) report.detail += "; argmax sets differ at s=" + std::to_string(report.mismatched_state);
  return report;
}

ShapingReport check_nonpositive(const TabularMDP& mdp, double tolerance, double value_tolerance, double vi_tolerance,
                                double tie_tolerance) {
  const TabularValues base = value_iteration(mdp, vi_tolerance);
  const TabularMDP shaped = shaped_mdp(mdp, base.v);
  ShapingReport report;
  report.max_error = -std::numeric_limits<double>::infinity();
  bool zero_pattern_ok = true;
  for (int s = 0; s < mdp.states; ++s) {
    if (mdp.is_terminal(s)) continue;
    const std::vector<int> best = argmax_set(mdp, base.q, s, tie_tolerance);
    for (int a = 0; a < mdp.actions; ++a) {
      const double r = shaped.reward[mdp.at(s, a)];
      if (r > report.max_error) {
        report.max_error = r;
        report.worst_state = s;
        report.worst_action = a;
      }
      const bool optimal = std::find(best.begin(), best.end(), a) != best.end();
      if (optimal != (std::abs(r) <= tolerance) && zero_pattern_ok) {
        zero_pattern_ok = false;
        report.mismatched_state = s;
      }
    }
  }
  if (report.worst_state < 0) report.max_error = 0.0;
  report.argmax_sets_match = zero_pattern_ok;
  const TabularValues shaped_values = value_iteration(shaped, vi_tolerance);
  for (double v : shaped_values.v) report.shaped_v_max = std::max(report.shaped_v_max, std::abs(v));
  report.passed = report.max_error <= tolerance && zero_pattern_ok && report.shaped_v_max <= value_tolerance;
  report.detail = "max R' = " + std::to_string(report.max_error) + ", max |V*'| = " +
                  std::to_string(report.shaped_v_max);
  if (!zero_pattern_ok) report.detail += "; zero-reward set differs from argmax set at s=" +
                                         std::to_string(report.mismatched_state);
  return report;
}

AlternatingResult tabular_alternating_adapt(const TabularMDP& mdp, int sweeps, std::vector<double> a,
                                            std::vector<double> v, AlternatingOptions options) {
  mdp.validate();
  const auto ns = static_cast<std::size_t>(mdp.states);
  const auto nsa = static_cast<std::size_t>(mdp.states * mdp.actions);
  if (a.empty()) a.assign(nsa, 0.0);
  if (v.empty()) v.assign(ns, 0.0);
  if (a.size() != nsa || v.size() != ns) throw std::invalid_argument("tabular_alternating_adapt: table sizes");

  const std::vector<double> v_star = value_iteration(mdp, 1e-12).v;
  AlternatingResult out;
  std::vector<double> fresh(nsa, 0.0);
  for (int k = 0; k < sweeps; ++k) {
    // TD sweep on A over rewards shaped by the current V.
    for (int s = 0; s < mdp.states; ++s) {
      for (int act = 0; act < mdp.actions; ++act) {
        if (mdp.is_terminal(s)) {
          fresh[mdp.at(s, act)] = 0.0;
          continue;
        }
        const int t = mdp.next[mdp.at(s, act)];
        const bool end = mdp.is_terminal(t);
        const double shaped = mdp.reward[mdp.at(s, act)] + (end ? 0.0 : mdp.gamma * v[static_cast<std::size_t>(t)]) -
                              v[static_cast<std::size_t>(s)];
        fresh[mdp.at(s, act)] = shaped + (end ? 0.0 : mdp.gamma * row_max(mdp, a, t));
      }
    }
    a.swap(fresh);
    // Potential step, then re-express A under the new potential.
    double distance = 0.0;
    for (int s = 0; s < mdp.states; ++s) {
      const auto i = static_cast<std::size_t>(s);
      const double m = mdp.is_terminal(s) ? 0.0 : row_max(mdp, a, s);
      v[i] += m;
      if (options.rebase) {
        for (int act = 0; act < mdp.actions; ++act) a[mdp.at(s, act)] -= m;
      }
      distance = std::max(distance, std::abs(v[i] - v_star[i]));
    }
    out.distance.push_back(distance);
    if (!std::isfinite(distance) || distance > options.divergence_bound) {
      throw std::runtime_error("tabular_alternating_adapt: diverged at alternation " + std::to_string(k + 1) +
                               " (||V - V*|| = " + std::to_string(distance) + ")");
    }
  }
  out.a = std::move(a);
  out.v = std::move(v);
  return out;
}

}  // namespace metashape::oracle
