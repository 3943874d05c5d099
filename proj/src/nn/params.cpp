#include "metashape/nn/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metashape::nn {

void ParamVector::add(std::string name, Tensor value) {
  for (const Entry& e : entries_) {
    if (e.name == name) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  }
  entries_.push_back({std::move(name), std::move(value)});
}

std::size_t ParamVector::total() const {
  std::size_t n = 0;
  for (const Entry& e : entries_) n += static_cast<std::size_t>(e.value.size());
  return n;
}

const Tensor& ParamVector::at(const std::string& name) const {
  for (const Entry& e : entries_) {
    if (e.name == name) return e.value;
  }
  throw std::out_of_range("no parameter named '" + name + "'");
}

std::vector<double> ParamVector::flatten() const {
  std::vector<double> flat;
  flat.reserve(total());
  for (const Entry& e : entries_) flat.insert(flat.end(), e.value.data(), e.value.data() + e.value.size());
  return flat;
}

ParamVector ParamVector::unflatten(std::span<const double> flat) const {
  if (flat.size() != total()) {
    throw std::invalid_argument("unflatten: expected " + std::to_string(total()) + " values, got " +
                                std::to_string(flat.size()));
  }
  ParamVector out = *this;
  std::size_t offset = 0;
  for (Entry& e : out.entries_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), e.value.size(), e.value.data());
    offset += static_cast<std::size_t>(e.value.size());
  }
  return out;
}

ParamVector ParamVector::with_values(std::span<const Tensor> tensors) const {
  check_aligned(*this, tensors, "with_values");
  ParamVector out = *this;
  for (std::size_t i = 0; i < tensors.size(); ++i) out.entries_[i].value = tensors[i];
  return out;
}

std::vector<Tensor> ParamVector::values() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const Entry& e : entries_) out.push_back(e.value);
  return out;
}

bool ParamVector::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const Entry& e) { return e.value.allFinite(); });
}

bool ParamVector::same_layout(const ParamVector& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& a = entries_[i];
    const Entry& b = other.entries_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
      return false;
    }
  }
  return true;
}

std::vector<ad::Var> ParamVector::bind(ad::Graph& graph) const {
  std::vector<ad::Var> vars;
  vars.reserve(entries_.size());
  for (const Entry& e : entries_) vars.push_back(graph.input(e.name, e.value));
  return vars;
}

bool ParamVector::operator==(const ParamVector& other) const {
  if (!same_layout(other)) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].value != other.entries_[i].value) return false;
  }
  return true;
}

void check_aligned(const ParamVector& params, std::span<const Tensor> grads, const char* who) {
  if (grads.size() != params.count()) {
    throw std::invalid_argument(std::string(who) + ": " + std::to_string(grads.size()) +
                                " tensors for " + std::to_string(params.count()) + " parameters");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].rows() != params[i].rows() || grads[i].cols() != params[i].cols()) {
      throw std::invalid_argument(std::string(who) + ": shape mismatch for '" + params.entry(i).name + "'");
    }
  }
}

double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  if (!a.same_layout(b)) throw std::invalid_argument("max_abs_diff: layout mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.count(); ++i) d = std::max(d, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace metashape::nn
