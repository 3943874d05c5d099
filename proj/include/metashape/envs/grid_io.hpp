#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "metashape/envs/grid.hpp"

namespace metashape::envs {

/// Text map format: a `W H` line followed by H rows over `.#SG`.
std::string format_grid(const GridTask& task);
void write_grid(std::ostream& out, const GridTask& task);
/// Parses one map. Throws std::invalid_argument with a line number on any
/// malformed input, including maps that fail GridTask::validate.
GridTask read_grid(std::istream& in);
GridTask parse_grid(const std::string& text);

/// Task-set files hold maps separated by blank lines.
void write_task_set(const std::filesystem::path& path, const std::vector<GridTask>& tasks);
std::vector<GridTask> read_task_set(const std::filesystem::path& path);

/// FNV-1a 64 over the canonical text form.
std::uint64_t task_hash(const GridTask& task);
std::string task_hash_hex(const GridTask& task);

}  // namespace metashape::envs
