#include "metashape/harness/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "metashape/oracle/tabular.hpp"

namespace metashape::harness {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<envs::GridTask> sample_maps(const VerifyParams& p, int count, int size, std::uint64_t stream) {
  Rng rng(derive_seed(p.seed, stream));
  std::vector<envs::GridTask> maps;
  for (int i = 0; i < count; ++i) maps.push_back(envs::sample_grid_task(rng, size, size, p.obstacle_probability));
  return maps;
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

CheckResult verify_invariance(const VerifyParams& params) {
  const auto start = Clock::now();
  CheckResult result{"policy-invariance", true, 0.0, "", 0.0};
  Rng phi_rng(derive_seed(params.seed, 11));
  int failures = 0;
  const auto maps = sample_maps(params, params.invariance_maps, params.invariance_size, 10);
  for (const envs::GridTask& task : maps) {
    const oracle::TabularMDP mdp = oracle::build_tabular(task, 0.99);
    std::vector<double> phi(static_cast<std::size_t>(mdp.states));
    for (double& v : phi) v = uniform(phi_rng, -1.0, 1.0);
    const oracle::ShapingReport r = oracle::check_policy_invariance(mdp, phi, 1e-8);
    result.worst = std::max(result.worst, r.max_error);
    if (!r.passed) ++failures;
  }
  result.passed = failures == 0;
  result.detail = std::to_string(maps.size()) + " maps, max |Q'* - (Q* - phi)| = " + sci(result.worst) + ", " +
                  std::to_string(failures) + " failing";
  result.seconds = elapsed(start);
  return result;
}

CheckResult verify_nonpositive(const VerifyParams& params) {
  const auto start = Clock::now();
  CheckResult result{"nonpositive-shaped-reward", true, -1.0, "", 0.0};
  double worst_v = 0.0;
  int failures = 0;
  const auto maps = sample_maps(params, params.invariance_maps, params.invariance_size, 10);
  for (const envs::GridTask& task : maps) {
    const oracle::ShapingReport r = oracle::check_nonpositive(oracle::build_tabular(task, 0.99), 1e-10, 1e-8);
    result.worst = std::max(result.worst, r.max_error);
    worst_v = std::max(worst_v, r.shaped_v_max);
    if (!r.passed) ++failures;
  }
  result.passed = failures == 0;
  result.detail = std::to_string(maps.size()) + " maps, max R' = " + sci(result.worst) + ", max |V*'| = " +
                  sci(worst_v) + ", " + std::to_string(failures) + " failing";
  result.seconds = elapsed(start);
  return result;
}

CheckResult verify_alternating(const VerifyParams& params) {
  const auto start = Clock::now();
  CheckResult result{"alternating-adaptation", true, 0.0, "", 0.0};
  double fixed_point = 0.0;
  int failures = 0;
  int slowest = 0;
  const auto maps = sample_maps(params, params.alternating_maps, params.alternating_size, 20);
  for (const envs::GridTask& task : maps) {
    const oracle::TabularMDP mdp = oracle::build_tabular(task, 0.99);
    const oracle::AlternatingResult run = oracle::tabular_alternating_adapt(mdp, params.alternating_sweeps);
    const double final_distance = run.distance.empty() ? INFINITY : run.distance.back();
    result.worst = std::max(result.worst, final_distance);
    if (!(final_distance <= 1e-3)) ++failures;
    const auto first = std::find_if(run.distance.begin(), run.distance.end(), [](double d) { return d <= 1e-3; });
    slowest = std::max(slowest, static_cast<int>(first - run.distance.begin()) + 1);

    // Start at the optimum: A = Q* - V*, V = V*.
    const oracle::TabularValues opt = oracle::value_iteration(mdp, 1e-12);
    std::vector<double> a(opt.q.size());
    for (int s = 0; s < mdp.states; ++s) {
      for (int act = 0; act < mdp.actions; ++act) {
        a[mdp.at(s, act)] = opt.q[mdp.at(s, act)] - opt.v[static_cast<std::size_t>(s)];
      }
    }
    const oracle::AlternatingResult stay = oracle::tabular_alternating_adapt(mdp, 1, a, opt.v);
    for (std::size_t i = 0; i < a.size(); ++i) fixed_point = std::max(fixed_point, std::abs(stay.a[i] - a[i]));
    for (std::size_t i = 0; i < opt.v.size(); ++i) {
      fixed_point = std::max(fixed_point, std::abs(stay.v[i] - opt.v[i]));
    }
  }
  result.passed = failures == 0 && fixed_point <= 1e-10;
  result.detail = std::to_string(maps.size()) + " maps, max final ||V - V*|| = " + sci(result.worst) +
                  ", slowest reached 1e-3 at alternation " + std::to_string(slowest) + ", fixed-point residual " +
                  sci(fixed_point);
  result.seconds = elapsed(start);
  return result;
}

VerifyReport run_verify(const VerifyParams& params) {
  return {{verify_invariance(params), verify_nonpositive(params), verify_alternating(params)}};
}

std::string format_report(const VerifyReport& report) {
  std::ostringstream out;
  for (const CheckResult& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << " (" << c.seconds << " s)\n";
  }
  out << (report.passed() ? "all checks passed" : "some checks failed") << '\n';
  return out.str();
}

}  // namespace metashape::harness
