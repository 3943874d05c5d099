#include "metashape/agents/exploration.hpp"

#include <algorithm>
#include <stdexcept>

namespace metashape::agents {

void ExplorationSchedule::validate() const {
  if (!(start >= 0.0 && start <= 1.0 && end >= 0.0 && end <= 1.0)) {
    throw std::invalid_argument("ExplorationSchedule: epsilon must lie in [0, 1]");
  }
  if (horizon <= 0) throw std::invalid_argument("ExplorationSchedule: horizon must be positive");
}

double ExplorationSchedule::epsilon(long step) const {
  if (step >= horizon) return end;
  const double frac = static_cast<double>(std::max(step, 0L)) / static_cast<double>(horizon);
  return start + (end - start) * frac;
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax: empty action set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

int epsilon_greedy(std::span<const double> values, double eps, Rng& rng) {
  if (values.empty()) throw std::invalid_argument("epsilon_greedy: empty action set");
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon_greedy: eps must lie in [0, 1]");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < eps) return static_cast<int>(uniform_index(rng, values.size()));
  return argmax(values);
}

}  // namespace metashape::agents
