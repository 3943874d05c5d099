#include "metashape/harness/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "metashape/harness/csv.hpp"

namespace metashape::harness {

Heatmap export_heatmap(const shaping::PotentialFn& potential, const envs::GridTask& task) {
  Heatmap map(static_cast<std::size_t>(task.cells()));
  for (int i = 0; i < task.cells(); ++i) {
    const envs::Cell c = task.cell(i);
    if (task.blocked(c)) continue;
    map[static_cast<std::size_t>(i)] = potential(envs::encode_grid(task, c));
  }
  return map;
}

Heatmap export_heatmap(const meta::PriorCheckpoint& prior, const envs::GridTask& task) {
  if (prior.trunk.input != envs::grid_observation_size(task.width, task.height)) {
    throw std::invalid_argument("export_heatmap: prior expects " + std::to_string(prior.trunk.input) +
                                " inputs, a " + std::to_string(task.width) + "x" + std::to_string(task.height) +
                                " grid encodes to " +
                                std::to_string(envs::grid_observation_size(task.width, task.height)));
  }
  return export_heatmap(*prior.potential(), task);
}

void write_heatmap(const std::filesystem::path& path, const Heatmap& map, int width) {
  if (width <= 0 || map.size() % static_cast<std::size_t>(width) != 0) {
    throw std::invalid_argument("write_heatmap: size is not a multiple of the width");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < map.size(); ++i) {
    out << (map[i] ? format_double(*map[i]) : "NA");
    out << ((i + 1) % static_cast<std::size_t>(width) == 0 ? '\n' : ',');
  }
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double distance_correlation(const Heatmap& map, const envs::GridTask& task) {
  if (map.size() != static_cast<std::size_t>(task.cells())) throw std::invalid_argument("heatmap size");
  const std::vector<int> dist = envs::bfs_distances(task, task.goal);
  std::vector<double> values, negdist;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!map[i] || dist[i] <= 0) continue;  // the terminal goal has potential 0 by convention
    values.push_back(*map[i]);
    negdist.push_back(-static_cast<double>(dist[i]));
  }
  return spearman(values, negdist);
}

}  // namespace metashape::harness
