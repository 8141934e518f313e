#include "trendlab/ar_baseline.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "trendlab/error.hpp"

namespace trendlab {

std::vector<double> difference(std::span<const double> xs, std::size_t d) {
  std::vector<double> out(xs.begin(), xs.end());
  for (std::size_t k = 0; k < d; ++k) {
    if (out.size() < 2) return {};
    for (std::size_t t = 0; t + 1 < out.size(); ++t) out[t] = out[t + 1] - out[t];
    out.pop_back();
  }
  return out;
}

ArFit fit_ar_baseline(std::span<const double> close, std::size_t p, std::size_t d,
                      std::size_t horizon) {
  if (p < 1) throw InputError("ar baseline: lag order must be >= 1");
  if (close.size() <= p + d + 7) {
    throw InsufficientDataError("ar baseline: series too short for p = " + std::to_string(p) +
                                ", d = " + std::to_string(d));
  }
  for (double x : close) {
    if (!std::isfinite(x)) throw NumericError("ar baseline: non-finite input");
  }

  const std::vector<double> y = difference(close, d);
  const std::size_t rows = y.size() - p;
  ArFit fit;
  fit.model.p = p;
  fit.model.d = d;
  fit.model.coefficients.assign(p, 0.0);

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double spread = 0.0;
  for (double v : y) spread = std::max(spread, std::abs(v - mean));

  if (spread == 0.0) {
    // Constant differenced series: the process is its mean.
    fit.model.intercept = mean;
  } else {
    Eigen::MatrixXd design(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p + 1));
    Eigen::VectorXd target(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t t = r + p;
      design(static_cast<Eigen::Index>(r), 0) = 1.0;
      for (std::size_t k = 0; k < p; ++k) {
        design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k + 1)) = y[t - 1 - k];
      }
      target[static_cast<Eigen::Index>(r)] = y[t];
    }
    const Eigen::MatrixXd normal = design.transpose() * design;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    // rcond() misses exact zero pivots, so look at the pivots directly
    const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= 1e-12 * pivots.maxCoeff()) {
      throw ConditioningError("ar baseline: singular normal equations");
    }
    const Eigen::VectorXd beta = ldlt.solve(design.transpose() * target);
    fit.model.intercept = beta[0];
    for (std::size_t k = 0; k < p; ++k) fit.model.coefficients[k] = beta[static_cast<Eigen::Index>(k + 1)];
  }

  // Recursive forecast of the differenced series.
  std::vector<double> extended = y;
  for (std::size_t h = 0; h < horizon; ++h) {
    double next = fit.model.intercept;
    for (std::size_t k = 0; k < p; ++k) next += fit.model.coefficients[k] * extended[extended.size() - 1 - k];
    extended.push_back(next);
  }

  // Integrate back one differencing level at a time, seeding each level with
  // the last observed value at that level.
  std::vector<double> steps(extended.end() - static_cast<std::ptrdiff_t>(horizon), extended.end());
  for (std::size_t level = d; level-- > 0;) {
    const std::vector<double> observed = difference(close, level);
    double last = observed.back();
    for (auto& s : steps) {
      last += s;
      s = last;
    }
  }
  fit.forecast = std::move(steps);
  return fit;
}

}  // namespace trendlab
