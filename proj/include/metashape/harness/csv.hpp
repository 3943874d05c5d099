#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace metashape::harness {

/// One point of a learning curve, as stored in `experiment,task,seed,step,return` files.
struct CurveRecord {
  std::string experiment;
  std::string task;
  std::uint64_t seed = 0;
  long step = 0;
  double ret = 0.0;
  long env_steps = 0;  ///< kept in the companion budget file

  bool operator==(const CurveRecord&) const = default;
};

inline constexpr const char* kCurveHeader = "experiment,task,seed,step,return";
inline constexpr const char* kBudgetHeader = "experiment,task,seed,step,env_steps";

/// Shortest round-trip decimal, so equal doubles always print identically.
std::string format_double(double v);

void write_curves(const std::filesystem::path& path, const std::vector<CurveRecord>& records);
/// Writes the env-step count of each record under kBudgetHeader.
void write_budget(const std::filesystem::path& path, const std::vector<CurveRecord>& records);
/// Reads a curve file; env_steps are filled from `budget` when given.
std::vector<CurveRecord> read_curves(const std::filesystem::path& path, const std::filesystem::path& budget = {});

/// Splits a CSV line on commas (fields never contain commas or quotes here).
std::vector<std::string> split_csv(const std::string& line);

}  // namespace metashape::harness
