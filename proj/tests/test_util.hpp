#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

#include "rsl/rng.hpp"

namespace rsl::testing {

struct McEstimate {
  double mean;
  double stderr_;
};

/// Mean and standard error of g(X) over n draws from `draw`.
inline McEstimate monte_carlo(std::size_t n, const std::function<double()>& draw,
                              const std::function<double(double)>& g) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = g(draw());
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

/// |value - estimate| within k standard errors, with a floor for zero-variance cases.
inline bool within_sigma(double value, const McEstimate& est, double k = 3.0) {
  return std::abs(value - est.mean) <= k * est.stderr_ + 1e-12;
}

}  // namespace rsl::testing
