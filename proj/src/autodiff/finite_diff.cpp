#include "metashape/autodiff/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace metashape::ad {

std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> point, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  std::vector<double> p(point.begin(), point.end());
  std::vector<double> grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + step;
    const double up = f(p);
    p[i] = saved - step;
    const double down = f(p);
    p[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::domain_error("finite_diff_grad: non-finite value at coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_error: size mismatch");
  double diff = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max({na, nb, 1e-300}));
  return std::sqrt(diff) / denom;
}

}  // namespace metashape::ad
