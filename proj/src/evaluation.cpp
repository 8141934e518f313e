#include "trendlab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "trendlab/error.hpp"

namespace trendlab {

ClassificationMetrics accuracy_and_f1(std::span<const Theta> y_true, std::span<const Theta> y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size()) {
    throw InputError("metrics need equal, non-zero label counts (got " +
                     std::to_string(y_true.size()) + " and " + std::to_string(y_pred.size()) + ")");
  }
  std::array<std::array<std::size_t, 3>, 3> confusion{};  // [true][pred]
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const auto t = static_cast<std::size_t>(to_int(y_true[i]) + 1);
    const auto p = static_cast<std::size_t>(to_int(y_pred[i]) + 1);
    ++confusion[t][p];
    if (t == p) ++correct;
  }
  const double n = static_cast<double>(y_true.size());
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(correct) / n;
  for (std::size_t c = 0; c < 3; ++c) {
    auto& cm = m.per_class[c];
    cm.label = static_cast<Theta>(static_cast<int>(c) - 1);
    std::size_t predicted = 0;
    for (std::size_t t = 0; t < 3; ++t) {
      cm.support += confusion[c][t];
      predicted += confusion[t][c];
    }
    const double tp = static_cast<double>(confusion[c][c]);
    cm.precision = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
    cm.recall = cm.support == 0 ? 0.0 : tp / static_cast<double>(cm.support);
    cm.f1 = cm.precision + cm.recall == 0.0 ? 0.0
                                             : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
    m.weighted_f1 += static_cast<double>(cm.support) / n * cm.f1;
  }
  return m;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double kTerm = 1e-12;
  if (lambda < 1.18) {
    // Jacobi theta form, converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
      sum += term;
      if (term < kTerm) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < kTerm) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("ks test: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double n = static_cast<double>(sa.size()), m = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_survival(std::sqrt(n * m / (n + m)) * d);
  return r;
}

void Histogram::validate() const {
  if (edges.size() < 2 || masses.size() + 1 != edges.size()) {
    throw InputError("histogram needs |edges| = |masses| + 1 >= 2");
  }
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k - 1] < edges[k])) throw InputError("histogram edges must be strictly increasing");
  }
  double total = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0)) throw InputError("histogram masses must be non-negative");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("histogram masses must sum to 1");
}

std::vector<double> shared_edges(std::span<const double> a, std::span<const double> b,
                                 std::size_t bins) {
  if (a.empty() || b.empty() || bins < 1) throw InputError("histogram: empty sample or zero bins");
  double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
  }
  edges.back() = hi;
  return edges;
}

Histogram make_histogram(std::span<const double> samples, std::span<const double> edges) {
  if (samples.empty()) throw InputError("histogram: empty sample");
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.masses.assign(edges.size() - 1, 0.0);
  for (double x : samples) {
    if (x < edges.front() || x > edges.back()) throw InputError("histogram: sample outside the edges");
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::size_t bin = static_cast<std::size_t>(it - edges.begin()) - 1;
    bin = std::min(bin, h.masses.size() - 1);  // right edge is closed
    h.masses[bin] += 1.0;
  }
  for (auto& m : h.masses) m /= static_cast<double>(samples.size());
  h.validate();
  return h;
}

double kl_divergence(const Histogram& p, const Histogram& q, double smoothing) {
  p.validate();
  q.validate();
  if (p.edges != q.edges) throw InputError("kl divergence: histograms have different bin edges");
  if (smoothing < 0.0) throw InputError("kl divergence: negative smoothing");
  const double k = static_cast<double>(p.masses.size());
  const double zp = 1.0 + k * smoothing, zq = 1.0 + k * smoothing;
  double sum = 0.0;
  for (std::size_t b = 0; b < p.masses.size(); ++b) {
    const double pb = (p.masses[b] + smoothing) / zp;
    const double qb = (q.masses[b] + smoothing) / zq;
    if (pb <= 0.0) continue;
    if (qb <= 0.0) throw NumericError("kl divergence is infinite: Q has an empty bin where P has mass");
    sum += pb * std::log(pb / qb);
  }
  return std::max(sum, 0.0);
}

double kl_divergence_of_samples(std::span<const double> actual, std::span<const double> predicted,
                                std::size_t bins) {
  const auto edges = shared_edges(actual, predicted, bins);
  return kl_divergence(make_histogram(actual, edges), make_histogram(predicted, edges));
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  if (x.size() <= max_lag) throw InputError("autocorrelation: series not longer than max_lag");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (denom <= 0.0) throw DegenerateError("autocorrelation: zero-variance series");
  std::vector<double> acf(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < x.size(); ++t) num += (x[t] - mean) * (x[t + k] - mean);
    acf[k] = num / denom;
  }
  return acf;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ShapeError("cosine similarity: length mismatch");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw DegenerateError("cosine similarity: zero vector");
  return a.dot(b) / (na * nb);
}

PcaResult pca_cosine_eda(const Eigen::MatrixXd& x, std::size_t dims,
                         std::optional<std::span<const Theta>> labels) {
  if (x.rows() < 2) throw InputError("pca: need at least two rows");
  if (dims < 1 || dims > static_cast<std::size_t>(x.cols())) {
    throw InputError("pca: dims must lie in [1, " + std::to_string(x.cols()) + "]");
  }
  if (labels && labels->size() != static_cast<std::size_t>(x.rows())) {
    throw ShapeError("pca: label count does not match the row count");
  }
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  const double total = cov.trace();
  if (!(total > 0.0)) throw DegenerateError("pca: zero-variance matrix");

  PcaResult r;
  r.axes.resize(x.cols(), static_cast<Eigen::Index>(dims));
  for (std::size_t k = 0; k < dims; ++k) {
    // Deterministic start that is not orthogonal to any axis in practice.
    Eigen::VectorXd v(x.cols());
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = 1.0 + 0.1 * static_cast<double>(j + 1);
    v.normalize();
    double eigenvalue = 0.0;
    for (int it = 0; it < 10000; ++it) {
      Eigen::VectorXd next = cov * v;
      const double norm = next.norm();
      if (norm < 1e-300) {
        eigenvalue = 0.0;
        break;
      }
      next /= norm;
      if (next.dot(v) < 0.0) next = -next;
      const double change = (next - v).norm();
      v = next;
      eigenvalue = norm;
      if (change < 1e-10) break;
    }
    eigenvalue = v.dot(cov * v);
    r.axes.col(static_cast<Eigen::Index>(k)) = v;
    r.explained.push_back(std::max(eigenvalue, 0.0) / total);
    cov -= eigenvalue * v * v.transpose();
  }
  r.projection = centered * r.axes;

  if (labels) {
    for (auto label : {Theta::down, Theta::hold, Theta::up}) {
      std::vector<Eigen::Index> rows;
      for (std::size_t i = 0; i < labels->size(); ++i) {
        if ((*labels)[i] == label) rows.push_back(static_cast<Eigen::Index>(i));
      }
      if (rows.size() < 2) continue;
      double sum = 0.0;
      std::size_t pairs = 0;
      for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
          const Eigen::VectorXd va = r.projection.row(rows[a]).transpose();
          const Eigen::VectorXd vb = r.projection.row(rows[b]).transpose();
          if (va.norm() == 0.0 || vb.norm() == 0.0) continue;
          sum += cosine_similarity(va, vb);
          ++pairs;
        }
      }
      if (pairs > 0) r.class_cosine.emplace_back(label, sum / static_cast<double>(pairs));
    }
  }
  return r;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InputError("quantile of an empty column");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<ColumnSummary> summary_stats(std::span<const NamedColumn> columns) {
  std::vector<ColumnSummary> out;
  for (const auto& col : columns) {
    std::vector<double> v;
    for (double x : col.values) {
      if (!std::isnan(x)) v.push_back(x);
    }
    if (v.empty()) throw InputError("summary: column '" + col.name + "' is empty");
    std::sort(v.begin(), v.end());
    ColumnSummary s;
    s.name = col.name;
    s.count = v.size();
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    s.min = v.front();
    s.max = v.back();
    s.q25 = quantile_sorted(v, 0.25);
    s.median = quantile_sorted(v, 0.5);
    s.q75 = quantile_sorted(v, 0.75);
    out.push_back(s);
  }
  return out;
}

}  // namespace trendlab
