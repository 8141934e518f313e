#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trendlab/labeling.hpp"

namespace trendlab {

struct ClassMetrics {
  Theta label = Theta::hold;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  std::array<ClassMetrics, 3> per_class;  // down, hold, up
};

ClassificationMetrics accuracy_and_f1(std::span<const Theta> y_true, std::span<const Theta> y_pred);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);
// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

struct Histogram {
  std::vector<double> edges;   // strictly increasing
  std::vector<double> masses;  // sum to 1

  void validate() const;
};

// Equal-width edges spanning the union range of both samples.
std::vector<double> shared_edges(std::span<const double> a, std::span<const double> b,
                                 std::size_t bins = 50);
Histogram make_histogram(std::span<const double> samples, std::span<const double> edges);

inline constexpr double kKlSmoothing = 1e-10;

// D(P || Q) in nats after adding `smoothing` to every bin and renormalizing.
double kl_divergence(const Histogram& p, const Histogram& q, double smoothing = kKlSmoothing);
double kl_divergence_of_samples(std::span<const double> actual, std::span<const double> predicted,
                                std::size_t bins = 50);

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct PcaResult {
  Eigen::MatrixXd projection;           // rows x dims
  Eigen::MatrixXd axes;                 // columns x dims, unit columns
  std::vector<double> explained;        // fraction of total variance per axis
  std::vector<std::pair<Theta, double>> class_cosine;  // mean pairwise cosine per label
};

// Principal axes by power iteration with deflation on the covariance of the
// centered columns.
PcaResult pca_cosine_eda(const Eigen::MatrixXd& x, std::size_t dims,
                         std::optional<std::span<const Theta>> labels = std::nullopt);

struct ColumnSummary {
  std::string name;
  double mean = 0.0, std = 0.0, min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
  std::size_t count = 0;
};

struct NamedColumn {
  std::string name;
  std::vector<double> values;  // NaN entries are skipped
};

std::vector<ColumnSummary> summary_stats(std::span<const NamedColumn> columns);
// Quantile by linear interpolation between order statistics of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace trendlab
