#include "metashape/nn/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace metashape::nn {

namespace {

constexpr const char* kMagic = "metashape-params";
constexpr int kVersion = 1;

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  double x = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), x);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw std::runtime_error("checkpoint: bad number '" + token + "'");
  }
  return x;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << kMagic << ' ' << kVersion << '\n';
  for (const auto& [key, value] : ckpt.meta) {
    if (key.find_first_of(" \n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw std::invalid_argument("checkpoint: metadata key/value not representable: " + key);
    }
    out << "meta " << key << ' ' << value << '\n';
  }
  out << "tensors " << ckpt.params.count() << '\n';
  for (const auto& e : ckpt.params) {
    out << e.name << ' ' << e.value.rows() << ' ' << e.value.cols() << '\n';
    for (Eigen::Index i = 0; i < e.value.size(); ++i) {
      if (i) out << ' ';
      out << format_double(e.value.data()[i]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kMagic) throw std::runtime_error("checkpoint: bad header");
  if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

  Checkpoint ckpt;
  std::string word;
  while (in >> word && word == "meta") {
    std::string key;
    in >> key;
    std::string value;
    std::getline(in, value);
    if (!value.empty() && value.front() == ' ') value.erase(0, 1);
    ckpt.meta[key] = value;
  }
  if (word != "tensors") throw std::runtime_error("checkpoint: expected 'tensors'");
  std::size_t count = 0;
  in >> count;
  for (std::size_t t = 0; t < count; ++t) {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(in >> name >> rows >> cols) || rows < 0 || cols < 0) {
      throw std::runtime_error("checkpoint: bad tensor header");
    }
    Tensor value(rows, cols);
    std::string token;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      if (!(in >> token)) throw std::runtime_error("checkpoint: truncated tensor '" + name + "'");
      value.data()[i] = parse_double(token);
    }
    ckpt.params.add(std::move(name), std::move(value));
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_checkpoint(in);
}

}  // namespace metashape::nn
