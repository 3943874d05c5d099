#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "metashape/harness/csv.hpp"

namespace metashape::harness {

struct AggregateRow {
  std::string experiment;
  long step = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  std::size_t count = 0;
};

/// Lower-interpolation percentile: element floor(p * (n - 1)) of the sorted values.
double lower_percentile(std::vector<double> values, double p);

/// Per experiment and step: median and quartiles across (task, seed) groups.
/// Throws std::invalid_argument naming the first group whose steps differ
/// from the experiment's first group or repeat. Input order does not matter.
std::vector<AggregateRow> aggregate(std::span<const CurveRecord> records);

void write_aggregate(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);

/// Rows of one experiment, in step order.
std::vector<AggregateRow> rows_for(const std::vector<AggregateRow>& rows, const std::string& experiment);

}  // namespace metashape::harness
