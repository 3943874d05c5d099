#include "metashape/envs/grid_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace metashape::envs {

std::string format_grid(const GridTask& task) {
  std::string out = std::to_string(task.width) + " " + std::to_string(task.height) + "\n";
  for (int y = 0; y < task.height; ++y) {
    for (int x = 0; x < task.width; ++x) {
      const Cell c{x, y};
      if (c == task.start) {
        out += 'S';
      } else if (c == task.goal) {
        out += 'G';
      } else {
        out += task.blocked(c) ? '#' : '.';
      }
    }
    out += '\n';
  }
  return out;
}

void write_grid(std::ostream& out, const GridTask& task) { out << format_grid(task); }

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::invalid_argument("grid map line " + std::to_string(line) + ": " + what);
}

}  // namespace

GridTask read_grid(std::istream& in) {
  std::string line;
  int line_no = 0;
  // Skip leading blank lines so task sets can be read record by record.
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty()) break;
  }
  if (line.empty()) fail(line_no, "missing `W H` header");

  GridTask task;
  std::istringstream header(line);
  std::string trailing;
  if (!(header >> task.width >> task.height) || (header >> trailing)) fail(line_no, "expected `W H`");
  if (task.width <= 0 || task.height <= 0) fail(line_no, "dimensions must be positive");
  task.obstacles.assign(static_cast<std::size_t>(task.width * task.height), 0);

  int starts = 0;
  int goals = 0;
  for (int y = 0; y < task.height; ++y) {
    if (!std::getline(in, line)) fail(line_no + 1, "expected " + std::to_string(task.height) + " rows");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != task.width) fail(line_no, "row width differs from header");
    for (int x = 0; x < task.width; ++x) {
      const Cell c{x, y};
      switch (line[static_cast<std::size_t>(x)]) {
        case '.': break;
        case '#': task.obstacles[static_cast<std::size_t>(task.index(c))] = 1; break;
        case 'S': task.start = c; ++starts; break;
        case 'G': task.goal = c; ++goals; break;
        default: fail(line_no, std::string("unexpected character '") + line[static_cast<std::size_t>(x)] + "'");
      }
    }
  }
  if (starts != 1 || goals != 1) fail(line_no, "need exactly one S and one G");
  try {
    task.validate();
  } catch (const std::invalid_argument& e) {
    fail(line_no, e.what());
  }
  return task;
}

GridTask parse_grid(const std::string& text) {
  std::istringstream in(text);
  return read_grid(in);
}

void write_task_set(const std::filesystem::path& path, const std::vector<GridTask>& tasks) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write task set " + path.string());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (i) out << '\n';
    write_grid(out, tasks[i]);
  }
  if (!out) throw std::runtime_error("failed writing task set " + path.string());
}

std::vector<GridTask> read_task_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open task set " + path.string());
  std::vector<GridTask> tasks;
  while (true) {
    in >> std::ws;
    if (in.eof()) break;
    try {
      tasks.push_back(read_grid(in));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + " record " + std::to_string(tasks.size()) + ": " + e.what());
    }
  }
  return tasks;
}

std::uint64_t task_hash(const GridTask& task) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : format_grid(task)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string task_hash_hex(const GridTask& task) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(task_hash(task)));
  return buf;
}

}  // namespace metashape::envs
