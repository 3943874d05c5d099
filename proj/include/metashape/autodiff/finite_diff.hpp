#pragma once

#include <functional>
#include <span>
#include <vector>

namespace metashape::ad {

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central-difference gradient, one coordinate at a time.
/// Throws std::domain_error if the function returns a non-finite value.
std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> point, double step);

/// ||a - b|| / max(||a||, ||b||), Euclidean norms.
double relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace metashape::ad
