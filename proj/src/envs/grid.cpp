#include "metashape/envs/grid.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "metashape/envs/grid_io.hpp"

namespace metashape::envs {

std::size_t GridTask::obstacle_count() const {
  return static_cast<std::size_t>(std::count(obstacles.begin(), obstacles.end(), std::uint8_t{1}));
}

void GridTask::validate() const {
  if (width <= 0 || height <= 0 || width * height < 2) throw std::invalid_argument("grid: need at least two cells");
  if (obstacles.size() != static_cast<std::size_t>(cells())) throw std::invalid_argument("grid: obstacle map size");
  if (!free(start) || !free(goal)) throw std::invalid_argument("grid: start and goal must be free cells");
  if (start == goal) throw std::invalid_argument("grid: start equals goal");
  if (!solvable(*this)) throw std::invalid_argument("grid: goal unreachable from start");
}

Cell grid_move(const GridTask& task, Cell from, int action) {
  Cell to = from;
  switch (action) {
    case kUp: --to.y; break;
    case kDown: ++to.y; break;
    case kLeft: --to.x; break;
    case kRight: ++to.x; break;
    default: throw std::invalid_argument("grid: action must be in [0, 4)");
  }
  return task.free(to) ? to : from;
}

GridOutcome grid_step(const GridTask& task, const GridState& state, int action) {
  GridOutcome out;
  out.next.position = grid_move(task, state.position, action);
  out.next.steps = state.steps + 1;
  if (out.next.position == task.goal) {
    out.reward = 1.0;
    out.done = true;
  } else {
    out.done = out.next.steps >= task.step_cap;
  }
  return out;
}

std::vector<int> bfs_distances(const GridTask& task, Cell from) {
  std::vector<int> dist(static_cast<std::size_t>(task.cells()), -1);
  if (!task.free(from)) return dist;
  std::deque<Cell> queue{from};
  dist[static_cast<std::size_t>(task.index(from))] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (int a = 0; a < kGridActions; ++a) {
      const Cell n = grid_move(task, c, a);
      auto& d = dist[static_cast<std::size_t>(task.index(n))];
      if (d < 0) {
        d = dist[static_cast<std::size_t>(task.index(c))] + 1;
        queue.push_back(n);
      }
    }
  }
  return dist;
}

bool solvable(const GridTask& task) {
  return bfs_distances(task, task.start)[static_cast<std::size_t>(task.index(task.goal))] >= 0;
}

GridTask sample_grid_task(Rng& rng, int width, int height, double obstacle_probability, int max_attempts) {
  if (width <= 0 || height <= 0 || width * height < 2) throw std::invalid_argument("sample_grid_task: need >= 2 cells");
  if (!(obstacle_probability >= 0.0 && obstacle_probability < 1.0)) {
    throw std::invalid_argument("sample_grid_task: probability must be in [0, 1)");
  }
  const auto n = static_cast<std::size_t>(width * height);
  std::bernoulli_distribution obstacle(obstacle_probability);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    GridTask task;
    task.width = width;
    task.height = height;
    task.obstacles.assign(n, 0);
    const std::size_t s = uniform_index(rng, n);
    std::size_t g = uniform_index(rng, n - 1);
    if (g >= s) ++g;
    task.start = task.cell(static_cast<int>(s));
    task.goal = task.cell(static_cast<int>(g));
    if (obstacle_probability > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        if (i != s && i != g) task.obstacles[i] = obstacle(rng) ? 1 : 0;
      }
    }
    if (solvable(task)) return task;
  }
  throw std::runtime_error("sample_grid_task: no solvable map after " + std::to_string(max_attempts) + " attempts");
}

std::size_t grid_observation_size(int width, int height) {
  return static_cast<std::size_t>(kGridChannels * width * height);
}

Observation encode_grid(const GridTask& task, Cell position) {
  const std::size_t plane = static_cast<std::size_t>(task.cells());
  Observation obs(plane * kGridChannels, 0.0);
  obs[static_cast<std::size_t>(task.index(task.start))] = 1.0;
  obs[plane + static_cast<std::size_t>(task.index(task.goal))] = 1.0;
  obs[2 * plane + static_cast<std::size_t>(task.index(position))] = 1.0;
  for (std::size_t i = 0; i < plane; ++i) {
    if (task.obstacles[i]) obs[3 * plane + i] = 1.0;
  }
  return obs;
}

Cell decode_position(const GridTask& task, const Observation& obs) {
  const std::size_t plane = static_cast<std::size_t>(task.cells());
  if (obs.size() != plane * kGridChannels) throw std::invalid_argument("decode_position: observation size");
  for (std::size_t i = 0; i < plane; ++i) {
    if (obs[2 * plane + i] == 1.0) return task.cell(static_cast<int>(i));
  }
  throw std::invalid_argument("decode_position: no current-position marker");
}

GridEnv::GridEnv(GridTask task) : task_(std::move(task)) {
  task_.validate();
  state_.position = task_.start;
}

Observation GridEnv::reset() {
  state_ = GridState{task_.start, 0};
  return encode_grid(task_, state_.position);
}

StepResult GridEnv::step(const Action& action) {
  const int* a = std::get_if<int>(&action);
  if (a == nullptr) throw std::invalid_argument("grid: actions are discrete");
  GridOutcome o = grid_step(task_, state_, *a);
  state_ = o.next;
  return {encode_grid(task_, state_.position), o.reward, o.reward, o.done};
}

std::string GridEnv::task_id() const { return "grid:" + task_hash_hex(task_); }

GridDistribution::GridDistribution(int width, int height, double obstacle_probability)
    : width_(width), height_(height), probability_(obstacle_probability) {}

GridTask GridDistribution::sample_task(Rng& rng) const {
  return sample_grid_task(rng, width_, height_, probability_);
}

std::unique_ptr<Env> GridDistribution::sample(Rng& rng) const {
  return std::make_unique<GridEnv>(sample_task(rng));
}

std::string GridDistribution::id() const {
  return "grid-" + std::to_string(width_) + "x" + std::to_string(height_) + "-p" + std::to_string(probability_);
}

GridSetDistribution::GridSetDistribution(std::vector<GridTask> tasks, std::string id)
    : tasks_(std::move(tasks)), id_(std::move(id)) {
  if (tasks_.empty()) throw std::invalid_argument("GridSetDistribution: empty task list");
  for (const GridTask& t : tasks_) {
    if (t.width != tasks_[0].width || t.height != tasks_[0].height) {
      throw std::invalid_argument("GridSetDistribution: maps must share a size");
    }
  }
}

std::unique_ptr<Env> GridSetDistribution::sample(Rng& rng) const {
  return std::make_unique<GridEnv>(tasks_[uniform_index(rng, tasks_.size())]);
}

std::size_t GridSetDistribution::observation_size() const {
  return grid_observation_size(tasks_[0].width, tasks_[0].height);
}

}  // namespace metashape::envs
