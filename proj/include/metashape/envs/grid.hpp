#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "metashape/envs/env.hpp"

namespace metashape::envs {

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr int kGridActions = 4;
inline constexpr int kGridChannels = 4;  // start, goal, current position, obstacle
inline constexpr int kGridStepCap = 50;

struct GridTask {
  int width = 0;
  int height = 0;
  Cell start;
  Cell goal;
  std::vector<std::uint8_t> obstacles;  ///< row-major, width * height
  int step_cap = kGridStepCap;

  int cells() const { return width * height; }
  int index(Cell c) const { return c.y * width + c.x; }
  Cell cell(int index) const { return {index % width, index / width}; }
  bool inside(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  bool blocked(Cell c) const { return obstacles[static_cast<std::size_t>(index(c))] != 0; }
  bool free(Cell c) const { return inside(c) && !blocked(c); }
  std::size_t obstacle_count() const;

  /// Throws std::invalid_argument unless start != goal, both free, and the
  /// goal reachable from the start.
  void validate() const;
  bool operator==(const GridTask&) const = default;
};

struct GridState {
  Cell position;
  int steps = 0;
};

struct GridOutcome {
  GridState next;
  double reward = 0.0;
  bool done = false;
};

/// Cell reached by moving; walls and obstacles leave the agent in place.
Cell grid_move(const GridTask& task, Cell from, int action);

/// Deterministic move. Reward 1 and done exactly on entering the goal; done
/// with reward 0 when the step cap is reached.
GridOutcome grid_step(const GridTask& task, const GridState& state, int action);

/// Shortest-path lengths (4-neighbourhood) from `from` to every cell, -1 when
/// unreachable or blocked.
std::vector<int> bfs_distances(const GridTask& task, Cell from);

bool solvable(const GridTask& task);

/// Start and goal uniform and distinct, every other cell an obstacle
/// independently with probability `obstacle_probability`; resampled until the
/// goal is reachable. Throws std::runtime_error after `max_attempts`.
GridTask sample_grid_task(Rng& rng, int width, int height, double obstacle_probability, int max_attempts = 10000);

/// Flattened 4-channel one-hot map, index channel * W * H + y * W + x.
Observation encode_grid(const GridTask& task, Cell position);
std::size_t grid_observation_size(int width, int height);
/// Reads the current-position channel back.
Cell decode_position(const GridTask& task, const Observation& obs);

class GridEnv final : public Env {
 public:
  explicit GridEnv(GridTask task);

  std::size_t observation_size() const override { return grid_observation_size(task_.width, task_.height); }
  ActionSpace action_space() const override { return {kGridActions, 0.0}; }
  Observation reset() override;
  StepResult step(const Action& action) override;
  std::string task_id() const override;

  const GridTask& task() const { return task_; }
  const GridState& state() const { return state_; }

 private:
  GridTask task_;
  GridState state_;
};

/// Random maps of a fixed size.
class GridDistribution final : public TaskDistribution {
 public:
  GridDistribution(int width, int height, double obstacle_probability);

  std::unique_ptr<Env> sample(Rng& rng) const override;
  GridTask sample_task(Rng& rng) const;
  std::size_t observation_size() const override { return grid_observation_size(width_, height_); }
  ActionSpace action_space() const override { return {kGridActions, 0.0}; }
  std::string id() const override;

 private:
  int width_;
  int height_;
  double probability_;
};

/// Uniform over an explicit list of maps (a single map gives a point mass).
class GridSetDistribution final : public TaskDistribution {
 public:
  explicit GridSetDistribution(std::vector<GridTask> tasks, std::string id);

  std::unique_ptr<Env> sample(Rng& rng) const override;
  std::size_t observation_size() const override;
  ActionSpace action_space() const override { return {kGridActions, 0.0}; }
  std::string id() const override { return id_; }

 private:
  std::vector<GridTask> tasks_;
  std::string id_;
};

}  // namespace metashape::envs
