#pragma once

#include <span>
#include <string>
#include <vector>

#include "metashape/autodiff/graph.hpp"

namespace metashape::nn {

using ad::Tensor;

/// Ordered, named collection of parameter tensors. The flat layout follows
/// insertion order and row-major storage inside each tensor.
class ParamVector {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  void add(std::string name, Tensor value);

  std::size_t count() const { return entries_.size(); }
  std::size_t total() const;
  bool empty() const { return entries_.empty(); }

  const Entry& entry(std::size_t i) const { return entries_.at(i); }
  Tensor& operator[](std::size_t i) { return entries_.at(i).value; }
  const Tensor& operator[](std::size_t i) const { return entries_.at(i).value; }
  /// Throws std::out_of_range for unknown names.
  const Tensor& at(const std::string& name) const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::vector<double> flatten() const;
  /// Copy with the same layout and values taken from `flat`.
  ParamVector unflatten(std::span<const double> flat) const;
  /// Copy with the same layout and values taken from `tensors`.
  ParamVector with_values(std::span<const Tensor> tensors) const;
  std::vector<Tensor> values() const;

  bool all_finite() const;
  bool same_layout(const ParamVector& other) const;

  /// Creates one graph input per entry, in order.
  std::vector<ad::Var> bind(ad::Graph& graph) const;

  bool operator==(const ParamVector& other) const;

 private:
  std::vector<Entry> entries_;
};

/// Throws std::invalid_argument if the tensors do not match the layout.
void check_aligned(const ParamVector& params, std::span<const Tensor> grads, const char* who);

double max_abs_diff(const ParamVector& a, const ParamVector& b);

}  // namespace metashape::nn
