#include "trendlab/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>

#include "trendlab/error.hpp"
#include "trendlab/text.hpp"

namespace trendlab {

std::size_t argmax_prefer_hold(const std::array<double, kClassCount>& scores) {
  const double best = *std::max_element(scores.begin(), scores.end());
  if (scores[class_index(Theta::hold)] == best) return class_index(Theta::hold);
  return scores[class_index(Theta::down)] == best ? class_index(Theta::down)
                                                  : class_index(Theta::up);
}

std::size_t Tree::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  std::size_t k = 0;
  while (!nodes[k].is_leaf()) {
    const auto& n = nodes[k];
    k = static_cast<std::size_t>(row[n.feature] <= n.threshold ? n.left : n.right);
  }
  return k;
}

const TreeNode& Tree::leaf(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  return nodes[leaf_index(row)];
}

Theta Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  return class_theta(argmax_prefer_hold(leaf(row).counts));
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    best = std::max(best, d[k]);
    if (!nodes[k].is_leaf()) {
      d[static_cast<std::size_t>(nodes[k].left)] = d[k] + 1;
      d[static_cast<std::size_t>(nodes[k].right)] = d[k] + 1;
    }
  }
  return best;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

bool better(const Split& candidate, const std::optional<Split>& best) {
  if (!best) return true;
  constexpr double kTie = 1e-12;
  if (candidate.impurity < best->impurity - kTie) return true;
  if (candidate.impurity > best->impurity + kTie) return false;
  if (candidate.feature != best->feature) return candidate.feature < best->feature;
  return candidate.threshold < best->threshold;
}

// Impurity accumulators: Gini on class counts, or squared error on targets.
struct GiniStats {
  std::array<double, kClassCount> counts{};
  double n = 0.0;
  void add(int cls) { counts[static_cast<std::size_t>(cls)] += 1.0; n += 1.0; }
  void remove(int cls) { counts[static_cast<std::size_t>(cls)] -= 1.0; n -= 1.0; }
  // n * gini
  double weighted() const {
    if (n == 0.0) return 0.0;
    double sq = 0.0;
    for (double c : counts) sq += c * c;
    return n - sq / n;
  }
};

struct SquaredStats {
  double sum = 0.0, sumsq = 0.0, n = 0.0;
  void add(double y) { sum += y; sumsq += y * y; n += 1.0; }
  void remove(double y) { sum -= y; sumsq -= y * y; n -= 1.0; }
  double weighted() const { return n == 0.0 ? 0.0 : std::max(0.0, sumsq - sum * sum / n); }
};

template <class Stats, class Label>
class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const Label> labels, const TreeConfig& cfg,
              std::mt19937_64& rng)
      : x_(x), labels_(labels), cfg_(cfg), rng_(rng) {}

  Tree build(std::vector<std::size_t> samples) {
    grow(std::move(samples), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> samples, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    Stats total;
    for (auto s : samples) total.add(labels_[s]);
    {
      auto& node = tree_.nodes.back();
      node.samples = samples.size();
      fill_node(node, total, samples);
    }
    const bool pure = total.weighted() <= 1e-12;
    const bool depth_limit = cfg_.max_depth != 0 && depth >= cfg_.max_depth;
    if (pure || samples.size() < cfg_.min_samples_split || depth_limit) return id;

    const auto split = best_split(samples);
    if (!split) return id;

    std::vector<std::size_t> left, right;
    for (auto s : samples) {
      (x_(static_cast<Eigen::Index>(s), split->feature) <= split->threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  void fill_node(TreeNode& node, const Stats& total, const std::vector<std::size_t>&) {
    if constexpr (std::is_same_v<Stats, GiniStats>) {
      node.counts = total.counts;
    } else {
      node.value = total.n > 0.0 ? total.sum / total.n : 0.0;
    }
  }

  std::optional<Split> best_split(const std::vector<std::size_t>& samples) {
    const auto n_features = static_cast<std::size_t>(x_.cols());
    std::vector<std::size_t> order(n_features);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t wanted =
        cfg_.max_features == 0 ? n_features : std::min(cfg_.max_features, n_features);
    if (wanted < n_features) {
      for (std::size_t k = n_features; k > 1; --k) {
        std::uniform_int_distribution<std::size_t> pick(0, k - 1);
        std::swap(order[k - 1], order[pick(rng_)]);
      }
    }

    std::optional<Split> best;
    std::size_t examined = 0;
    std::vector<std::pair<double, std::size_t>> sorted(samples.size());
    for (std::size_t f : order) {
      if (examined == wanted) break;
      const auto col = static_cast<Eigen::Index>(f);
      for (std::size_t k = 0; k < samples.size(); ++k) {
        sorted[k] = {x_(static_cast<Eigen::Index>(samples[k]), col), samples[k]};
      }
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;
      ++examined;

      Stats left, right;
      for (const auto& [v, s] : sorted) right.add(labels_[s]);
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        left.add(labels_[sorted[k].second]);
        right.remove(labels_[sorted[k].second]);
        const double lo = sorted[k].first, hi = sorted[k + 1].first;
        if (!(lo < hi)) continue;
        double threshold = lo + (hi - lo) / 2.0;
        if (threshold >= hi) threshold = lo;
        const Split candidate{static_cast<int>(f), threshold,
                              (left.weighted() + right.weighted()) / static_cast<double>(sorted.size())};
        if (better(candidate, best)) best = candidate;
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  std::span<const Label> labels_;
  const TreeConfig& cfg_;
  std::mt19937_64& rng_;
  Tree tree_;
};

void check_inputs(const Eigen::MatrixXd& x, std::size_t labels, std::span<const std::size_t> samples) {
  if (samples.empty()) throw InputError("tree: no training samples");
  if (static_cast<std::size_t>(x.rows()) != labels) throw ShapeError("tree: label count mismatch");
  for (auto s : samples) {
    if (s >= labels) throw InputError("tree: sample index out of range");
  }
}

}  // namespace

Tree grow_classification_tree(const Eigen::MatrixXd& x, std::span<const int> classes,
                              std::span<const std::size_t> samples, const TreeConfig& cfg,
                              std::mt19937_64& rng) {
  check_inputs(x, classes.size(), samples);
  for (int c : classes) {
    if (c < 0 || c >= static_cast<int>(kClassCount)) throw InputError("tree: class index out of range");
  }
  TreeBuilder<GiniStats, int> builder(x, classes, cfg, rng);
  return builder.build({samples.begin(), samples.end()});
}

Tree grow_regression_tree(const Eigen::MatrixXd& x, std::span<const double> target,
                          std::span<const std::size_t> samples, const TreeConfig& cfg,
                          std::mt19937_64& rng) {
  check_inputs(x, target.size(), samples);
  TreeBuilder<SquaredStats, double> builder(x, target, cfg, rng);
  return builder.build({samples.begin(), samples.end()});
}

void dump_tree(std::ostream& out, const Tree& tree, std::span<const std::string> feature_names) {
  const auto name = [&](int f) {
    return static_cast<std::size_t>(f) < feature_names.size() ? feature_names[static_cast<std::size_t>(f)]
                                                               : "x" + std::to_string(f);
  };
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [k, depth] = stack.back();
    stack.pop_back();
    const auto& n = tree.nodes[k];
    out << std::string(2 * depth, ' ');
    if (n.is_leaf()) {
      out << "leaf samples=" << n.samples << " counts=[" << format_double(n.counts[0]) << ','
          << format_double(n.counts[1]) << ',' << format_double(n.counts[2])
          << "] value=" << format_double(n.value) << '\n';
    } else {
      out << name(n.feature) << " <= " << format_double(n.threshold) << " samples=" << n.samples << '\n';
      stack.emplace_back(static_cast<std::size_t>(n.right), depth + 1);
      stack.emplace_back(static_cast<std::size_t>(n.left), depth + 1);
    }
  }
}

}  // namespace trendlab
