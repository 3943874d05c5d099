#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "metashape/envs/grid.hpp"
#include "metashape/meta/prior.hpp"
#include "metashape/shaping/shaping.hpp"

namespace metashape::harness {

/// Row-major W x H values; obstacle cells are empty.
using Heatmap = std::vector<std::optional<double>>;

/// Phi evaluated on the state whose current-position channel marks each free cell.
Heatmap export_heatmap(const shaping::PotentialFn& potential, const envs::GridTask& task);
/// The prior's value head. Throws std::invalid_argument when the
/// checkpoint's input size does not match the grid encoding.
Heatmap export_heatmap(const meta::PriorCheckpoint& prior, const envs::GridTask& task);

/// CSV matrix, one grid row per line, `NA` for obstacles.
void write_heatmap(const std::filesystem::path& path, const Heatmap& map, int width);

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Spearman correlation between the heatmap and -BFS distance to the goal
/// over reachable non-goal cells.
double distance_correlation(const Heatmap& map, const envs::GridTask& task);

}  // namespace metashape::harness
