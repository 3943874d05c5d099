#include "metashape/harness/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <tuple>

namespace metashape::harness {

double lower_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("lower_percentile: no values");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("lower_percentile: p must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(values.size() - 1)));
  return values[idx];
}

std::vector<AggregateRow> aggregate(std::span<const CurveRecord> records) {
  // experiment -> (task, seed) -> ordered (step, return)
  using Group = std::vector<std::pair<long, double>>;
  std::map<std::string, std::map<std::pair<std::string, std::uint64_t>, Group>> groups;
  for (const CurveRecord& r : records) groups[r.experiment][{r.task, r.seed}].emplace_back(r.step, r.ret);

  std::vector<AggregateRow> rows;
  for (auto& [experiment, by_group] : groups) {
    const Group* reference = nullptr;
    for (auto& [key, points] : by_group) {
      std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      const std::string name = experiment + "/" + key.first + "/seed " + std::to_string(key.second);
      for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].first == points[i - 1].first) {
          throw std::invalid_argument("aggregate: repeated step in group " + name);
        }
      }
      if (reference == nullptr) {
        reference = &points;
        continue;
      }
      const bool aligned = points.size() == reference->size() &&
                           std::equal(points.begin(), points.end(), reference->begin(),
                                      [](const auto& a, const auto& b) { return a.first == b.first; });
      if (!aligned) throw std::invalid_argument("aggregate: misaligned step indices in group " + name);
    }
    for (std::size_t i = 0; i < reference->size(); ++i) {
      std::vector<double> values;
      values.reserve(by_group.size());
      for (const auto& [key, points] : by_group) values.push_back(points[i].second);
      rows.push_back({experiment, (*reference)[i].first, lower_percentile(values, 0.5),
                      lower_percentile(values, 0.25), lower_percentile(values, 0.75), values.size()});
    }
  }
  return rows;
}

void write_aggregate(const std::filesystem::path& path, const std::vector<AggregateRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "experiment,step,median,q25,q75,count\n";
  for (const AggregateRow& r : rows) {
    out << r.experiment << ',' << r.step << ',' << format_double(r.median) << ',' << format_double(r.q25) << ','
        << format_double(r.q75) << ',' << r.count << '\n';
  }
}

std::vector<AggregateRow> rows_for(const std::vector<AggregateRow>& rows, const std::string& experiment) {
  std::vector<AggregateRow> out;
  for (const AggregateRow& r : rows) {
    if (r.experiment == experiment) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const AggregateRow& a, const AggregateRow& b) { return a.step < b.step; });
  return out;
}

}  // namespace metashape::harness
