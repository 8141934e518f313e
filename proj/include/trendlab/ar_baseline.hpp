#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace trendlab {

// Autoregressive model on the d-times differenced series:
// y(t) = intercept + sum_k coefficients[k] * y(t - 1 - k) + e(t).
struct ArModel {
  std::size_t p = 5;
  std::size_t d = 1;
  double intercept = 0.0;
  std::vector<double> coefficients;
};

struct ArFit {
  ArModel model;
  std::vector<double> forecast;  // price levels, one per horizon step
};

// Conditional least squares fit, then a recursive forecast integrated back to levels.
ArFit fit_ar_baseline(std::span<const double> close, std::size_t p = 5, std::size_t d = 1,
                      std::size_t horizon = 7);

std::vector<double> difference(std::span<const double> xs, std::size_t d);

}  // namespace trendlab
