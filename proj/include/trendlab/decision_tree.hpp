#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trendlab/labeling.hpp"

namespace trendlab {

inline constexpr std::size_t kClassCount = 3;

inline std::size_t class_index(Theta t) { return static_cast<std::size_t>(to_int(t) + 1); }
inline Theta class_theta(std::size_t k) { return static_cast<Theta>(static_cast<int>(k) - 1); }

// Index of the largest score. Ties prefer hold, then the lower label.
std::size_t argmax_prefer_hold(const std::array<double, kClassCount>& scores);

struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0.0;  // rows with x[feature] <= threshold go left
  int left = -1;
  int right = -1;
  std::array<double, kClassCount> counts{};  // training class counts reaching the node
  double value = 0.0;                        // regression output
  std::size_t samples = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  std::size_t leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Theta predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

struct TreeConfig {
  std::size_t max_depth = 0;  // 0: unlimited
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0: every feature at every split
};

// CART on Gini impurity. `samples` lists training row indices and may repeat
// rows (bootstrap draws). Constant candidate features do not count toward
// max_features. Ties go to the lowest feature index, then the smallest
// threshold; thresholds are midpoints between consecutive distinct values.
Tree grow_classification_tree(const Eigen::MatrixXd& x, std::span<const int> classes,
                              std::span<const std::size_t> samples, const TreeConfig& cfg,
                              std::mt19937_64& rng);

// CART on squared error; leaf value is the mean target.
Tree grow_regression_tree(const Eigen::MatrixXd& x, std::span<const double> target,
                          std::span<const std::size_t> samples, const TreeConfig& cfg,
                          std::mt19937_64& rng);

void dump_tree(std::ostream& out, const Tree& tree, std::span<const std::string> feature_names);

}  // namespace trendlab
