#include "metashape/harness/csv.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace metashape::harness {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

namespace {

void check_field(const std::string& s, const char* what) {
  if (s.find_first_of(",\n") != std::string::npos) {
    throw std::invalid_argument(std::string("csv: ") + what + " contains a comma or newline: " + s);
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::filesystem::path& path, int line) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_curves(const std::filesystem::path& path, const std::vector<CurveRecord>& records) {
  std::ofstream out = open_out(path);
  out << kCurveHeader << '\n';
  for (const CurveRecord& r : records) {
    check_field(r.experiment, "experiment");
    check_field(r.task, "task");
    out << r.experiment << ',' << r.task << ',' << r.seed << ',' << r.step << ',' << format_double(r.ret) << '\n';
  }
}

void write_budget(const std::filesystem::path& path, const std::vector<CurveRecord>& records) {
  std::ofstream out = open_out(path);
  out << kBudgetHeader << '\n';
  for (const CurveRecord& r : records) {
    out << r.experiment << ',' << r.task << ',' << r.seed << ',' << r.step << ',' << r.env_steps << '\n';
  }
}

std::vector<CurveRecord> read_curves(const std::filesystem::path& path, const std::filesystem::path& budget) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCurveHeader) {
    throw std::invalid_argument(path.string() + ": expected header '" + kCurveHeader + "'");
  }
  std::vector<CurveRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 5) throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": need 5 fields");
    CurveRecord r;
    r.experiment = f[0];
    r.task = f[1];
    r.seed = parse_number<std::uint64_t>(f[2], path, line_no);
    r.step = parse_number<long>(f[3], path, line_no);
    r.ret = parse_number<double>(f[4], path, line_no);
    records.push_back(std::move(r));
  }
  if (budget.empty()) return records;

  std::ifstream bin(budget);
  if (!bin) throw std::runtime_error("cannot open " + budget.string());
  if (!std::getline(bin, line) || line != kBudgetHeader) {
    throw std::invalid_argument(budget.string() + ": expected header '" + kBudgetHeader + "'");
  }
  std::map<std::tuple<std::string, std::string, std::uint64_t, long>, long> steps;
  line_no = 1;
  while (std::getline(bin, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 5) throw std::invalid_argument(budget.string() + ":" + std::to_string(line_no) + ": need 5 fields");
    steps[{f[0], f[1], parse_number<std::uint64_t>(f[2], budget, line_no), parse_number<long>(f[3], budget, line_no)}] =
        parse_number<long>(f[4], budget, line_no);
  }
  for (CurveRecord& r : records) {
    const auto it = steps.find({r.experiment, r.task, r.seed, r.step});
    if (it == steps.end()) throw std::invalid_argument(budget.string() + ": no budget entry for a curve point");
    r.env_steps = it->second;
  }
  return records;
}

}  // namespace metashape::harness
