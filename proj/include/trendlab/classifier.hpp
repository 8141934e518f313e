#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trendlab/decision_tree.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/random.hpp"

namespace trendlab {

struct LabeledDataset {
  Eigen::MatrixXd x;
  std::vector<Theta> y;
  std::vector<std::string> feature_names;

  std::size_t rows() const { return y.size(); }
  void validate() const;
  static LabeledDataset from_frame(const FeatureFrame& frame);
};

enum class ClassifierKind { forest, svm, gbt };
std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view name);

struct ForestConfig {
  std::size_t trees = 100;
  std::size_t max_features = 0;  // 0: ceil(sqrt(n_features))
  std::size_t max_depth = 0;     // 0: unlimited
  std::size_t min_samples_split = 2;
  bool bootstrap = true;
};

struct SvmConfig {
  double lambda = 1e-2;
  std::size_t epochs = 200;
};

struct GbtConfig {
  std::size_t stages = 100;
  std::size_t max_depth = 3;
  double shrinkage = 0.1;
  std::size_t min_samples_split = 2;
};

struct ClassifierConfig {
  ForestConfig forest;
  SvmConfig svm;
  GbtConfig gbt;
};

struct ForestModel {
  std::vector<Tree> trees;
};

// One-vs-rest linear SVM on standardized features with a regularized bias
// column. weights row k scores classes[k].
struct SvmModel {
  std::vector<Theta> classes;
  Eigen::MatrixXd weights;  // classes x (features + 1)
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  std::vector<std::vector<double>> objective;  // [class][epoch], averaged iterate
};

struct GbtModel {
  std::vector<Theta> classes;
  std::vector<double> initial;            // per class log prior
  std::vector<std::vector<Tree>> stages;  // [stage][class]
  double shrinkage = 0.1;
};

struct ClassifierModel {
  ClassifierKind kind = ClassifierKind::forest;
  ClassifierConfig config;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_names;
  std::size_t n_features = 0;
  std::optional<Theta> constant;  // set when training saw a single class
  std::variant<ForestModel, SvmModel, GbtModel> body;
};

// Rows are put in a canonical order before training, so the result does not
// depend on the order rows were supplied in.
ClassifierModel train_classifier(const LabeledDataset& data, ClassifierKind kind,
                                 const ClassifierConfig& cfg, std::uint64_t seed);
std::vector<Theta> predict_labels(const ClassifierModel& model, const Eigen::MatrixXd& x);

// Objective of a one-vs-rest SVM problem; labels are +1/-1, rows already
// augmented with the bias column.
double svm_objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& x_aug,
                     const std::vector<double>& labels, double lambda);

void dump_classifier(std::ostream& out, const ClassifierModel& model);
void save_classifier(const std::filesystem::path& path, const ClassifierModel& model);
ClassifierModel load_classifier(const std::filesystem::path& path);

}  // namespace trendlab
