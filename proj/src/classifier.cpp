#include "trendlab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "trendlab/error.hpp"

namespace trendlab {

void LabeledDataset::validate() const {
  if (y.empty()) throw InputError("dataset is empty");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ShapeError("dataset has " + std::to_string(x.rows()) + " feature rows but " +
                     std::to_string(y.size()) + " labels");
  }
  if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(x.cols())) {
    throw ShapeError("feature name count does not match the column count");
  }
  if (!x.allFinite()) throw NumericError("dataset contains non-finite features");
}

LabeledDataset LabeledDataset::from_frame(const FeatureFrame& frame) {
  LabeledDataset d;
  d.x = frame.values;
  d.y = frame.target;
  for (auto n : kFeatureNames) d.feature_names.emplace_back(n);
  return d;
}

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::forest: return "forest";
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::gbt: return "gbt";
  }
  return "unknown";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  for (auto k : {ClassifierKind::forest, ClassifierKind::svm, ClassifierKind::gbt}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown classifier kind '" + std::string(name) + "'");
}

double svm_objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& x_aug,
                     const std::vector<double>& labels, double lambda) {
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < x_aug.rows(); ++i) {
    hinge += std::max(0.0, 1.0 - labels[static_cast<std::size_t>(i)] * x_aug.row(i).dot(w));
  }
  return 0.5 * lambda * w.squaredNorm() + hinge / static_cast<double>(x_aug.rows());
}

namespace {

LabeledDataset canonical_order(const LabeledDataset& data) {
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto cols = data.x.cols();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double va = data.x(static_cast<Eigen::Index>(a), c);
      const double vb = data.x(static_cast<Eigen::Index>(b), c);
      if (va != vb) return va < vb;
    }
    return to_int(data.y[a]) < to_int(data.y[b]);
  });
  LabeledDataset out;
  out.feature_names = data.feature_names;
  out.x.resize(data.x.rows(), cols);
  for (std::size_t r = 0; r < order.size(); ++r) {
    out.x.row(static_cast<Eigen::Index>(r)) = data.x.row(static_cast<Eigen::Index>(order[r]));
    out.y.push_back(data.y[order[r]]);
  }
  return out;
}

std::vector<Theta> present_classes(const std::vector<Theta>& y) {
  std::vector<Theta> out;
  for (auto t : {Theta::down, Theta::hold, Theta::up}) {
    if (std::find(y.begin(), y.end(), t) != y.end()) out.push_back(t);
  }
  return out;
}

ForestModel train_forest(const LabeledDataset& d, const ForestConfig& cfg, std::uint64_t seed) {
  if (cfg.trees < 1) throw InputError("forest: need at least one tree");
  const auto n = d.rows();
  std::vector<int> classes(n);
  for (std::size_t i = 0; i < n; ++i) classes[i] = static_cast<int>(class_index(d.y[i]));
  TreeConfig tree_cfg;
  tree_cfg.max_depth = cfg.max_depth;
  tree_cfg.min_samples_split = cfg.min_samples_split;
  tree_cfg.max_features =
      cfg.max_features != 0
          ? cfg.max_features
          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d.x.cols()))));

  ForestModel forest;
  std::vector<std::size_t> samples(n);
  for (std::size_t t = 0; t < cfg.trees; ++t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    if (cfg.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& s : samples) s = pick(rng);
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    forest.trees.push_back(grow_classification_tree(d.x, classes, samples, tree_cfg, rng));
  }
  return forest;
}

// Pegasos-style stochastic subgradient descent with iterate averaging.
SvmModel train_svm(const LabeledDataset& d, const SvmConfig& cfg, std::uint64_t seed) {
  if (!(cfg.lambda > 0.0) || cfg.epochs < 1) throw InputError("svm: invalid configuration");
  SvmModel model;
  model.classes = present_classes(d.y);
  const auto n = static_cast<Eigen::Index>(d.rows());
  const auto p = d.x.cols();
  model.mean = d.x.colwise().mean().transpose();
  model.scale = ((d.x.rowwise() - model.mean.transpose()).colwise().squaredNorm().transpose() /
                 static_cast<double>(n))
                    .cwiseSqrt();
  for (Eigen::Index c = 0; c < p; ++c) {
    if (model.scale[c] < 1e-12) model.scale[c] = 1.0;
  }
  Eigen::MatrixXd x_aug(n, p + 1);
  x_aug.leftCols(p) = ((d.x.rowwise() - model.mean.transpose()).array().rowwise() /
                       model.scale.transpose().array())
                          .matrix();
  x_aug.col(p).setOnes();

  model.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.classes.size()), p + 1);
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < model.classes.size(); ++k) {
    std::vector<double> labels(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = d.y[i] == model.classes[k] ? 1.0 : -1.0;
    std::mt19937_64 rng(derive_seed(seed, k));
    std::iota(order.begin(), order.end(), std::size_t{0});
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p + 1);
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(p + 1);
    std::vector<double> curve;
    double step = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (std::size_t j = order.size(); j > 1; --j) {
        std::uniform_int_distribution<std::size_t> pick(0, j - 1);
        std::swap(order[j - 1], order[pick(rng)]);
      }
      for (auto i : order) {
        step += 1.0;
        const double eta = 1.0 / (cfg.lambda * step);
        const auto row = x_aug.row(static_cast<Eigen::Index>(i));
        const double margin = labels[i] * row.dot(w);
        w *= 1.0 - eta * cfg.lambda;
        if (margin < 1.0) w += (eta * labels[i]) * row.transpose();
        avg += (w - avg) / step;
      }
      curve.push_back(svm_objective(avg, x_aug, labels, cfg.lambda));
    }
    model.weights.row(static_cast<Eigen::Index>(k)) = avg.transpose();
    model.objective.push_back(std::move(curve));
  }
  return model;
}

GbtModel train_gbt(const LabeledDataset& d, const GbtConfig& cfg, std::uint64_t seed) {
  if (cfg.stages < 1 || cfg.max_depth < 1 || !(cfg.shrinkage > 0.0)) {
    throw InputError("gbt: invalid configuration");
  }
  GbtModel model;
  model.classes = present_classes(d.y);
  model.shrinkage = cfg.shrinkage;
  const std::size_t n = d.rows();
  const std::size_t k_count = model.classes.size();
  const double k_d = static_cast<double>(k_count);

  std::vector<std::vector<double>> onehot(k_count, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < k_count; ++k) {
    double count = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d.y[i] == model.classes[k]) {
        onehot[k][i] = 1.0;
        count += 1.0;
      }
    }
    model.initial.push_back(std::log(count / static_cast<double>(n)));
  }

  std::vector<std::vector<double>> score(k_count, std::vector<double>(n));
  for (std::size_t k = 0; k < k_count; ++k) std::fill(score[k].begin(), score[k].end(), model.initial[k]);

  TreeConfig tree_cfg;
  tree_cfg.max_depth = cfg.max_depth;
  tree_cfg.min_samples_split = cfg.min_samples_split;
  std::vector<std::size_t> samples(n);
  std::iota(samples.begin(), samples.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::vector<double> residual(n);
  std::vector<std::vector<double>> prob(k_count, std::vector<double>(n));

  for (std::size_t stage = 0; stage < cfg.stages; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -INFINITY;
      for (std::size_t k = 0; k < k_count; ++k) mx = std::max(mx, score[k][i]);
      double z = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) z += std::exp(score[k][i] - mx);
      for (std::size_t k = 0; k < k_count; ++k) prob[k][i] = std::exp(score[k][i] - mx) / z;
    }
    std::vector<Tree> trees;
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t i = 0; i < n; ++i) residual[i] = onehot[k][i] - prob[k][i];
      Tree tree = grow_regression_tree(d.x, residual, samples, tree_cfg, rng);
      // Newton step per leaf for the multinomial deviance.
      std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
      std::vector<std::size_t> leaf_of(n);
      for (std::size_t i = 0; i < n; ++i) {
        leaf_of[i] = tree.leaf_index(d.x.row(static_cast<Eigen::Index>(i)));
        const double r = residual[i];
        num[leaf_of[i]] += r;
        den[leaf_of[i]] += std::abs(r) * (1.0 - std::abs(r));
      }
      for (std::size_t j = 0; j < tree.nodes.size(); ++j) {
        if (!tree.nodes[j].is_leaf()) continue;
        tree.nodes[j].value = den[j] < 1e-12 ? 0.0 : (k_d - 1.0) / k_d * num[j] / den[j];
      }
      for (std::size_t i = 0; i < n; ++i) score[k][i] += cfg.shrinkage * tree.nodes[leaf_of[i]].value;
      trees.push_back(std::move(tree));
    }
    model.stages.push_back(std::move(trees));
  }
  return model;
}

Theta pick_class(const std::vector<Theta>& classes, const std::vector<double>& scores) {
  std::array<double, kClassCount> full;
  full.fill(-INFINITY);
  for (std::size_t k = 0; k < classes.size(); ++k) full[class_index(classes[k])] = scores[k];
  return class_theta(argmax_prefer_hold(full));
}

}  // namespace

ClassifierModel train_classifier(const LabeledDataset& data, ClassifierKind kind,
                                 const ClassifierConfig& cfg, std::uint64_t seed) {
  data.validate();
  const LabeledDataset d = canonical_order(data);
  ClassifierModel model;
  model.kind = kind;
  model.config = cfg;
  model.seed = seed;
  model.feature_names = d.feature_names;
  model.n_features = static_cast<std::size_t>(d.x.cols());

  const auto classes = present_classes(d.y);
  if (classes.size() == 1) model.constant = classes.front();

  switch (kind) {
    case ClassifierKind::forest:
      model.body = train_forest(d, cfg.forest, seed);
      break;
    case ClassifierKind::svm:
      model.body = model.constant ? SvmModel{classes, {}, {}, {}, {}} : train_svm(d, cfg.svm, seed);
      break;
    case ClassifierKind::gbt:
      model.body = model.constant ? GbtModel{classes, {0.0}, {}, cfg.gbt.shrinkage}
                                  : train_gbt(d, cfg.gbt, seed);
      break;
  }
  return model;
}

std::vector<Theta> predict_labels(const ClassifierModel& model, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != model.n_features) {
    throw ShapeError("classifier expects " + std::to_string(model.n_features) + " features, got " +
                     std::to_string(x.cols()));
  }
  if (!x.allFinite()) throw NumericError("classifier input contains non-finite values");
  std::vector<Theta> out(static_cast<std::size_t>(x.rows()), Theta::hold);
  if (model.constant) {
    std::fill(out.begin(), out.end(), *model.constant);
    return out;
  }
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    Theta label = Theta::hold;
    if (const auto* forest = std::get_if<ForestModel>(&model.body)) {
      std::array<double, kClassCount> votes{};
      for (const auto& tree : forest->trees) votes[class_index(tree.predict(row))] += 1.0;
      label = class_theta(argmax_prefer_hold(votes));
    } else if (const auto* svm = std::get_if<SvmModel>(&model.body)) {
      const auto p = x.cols();
      Eigen::VectorXd aug(p + 1);
      aug.head(p) = (row.transpose() - svm->mean).cwiseQuotient(svm->scale);
      aug[p] = 1.0;
      const Eigen::VectorXd s = svm->weights * aug;
      label = pick_class(svm->classes, {s.data(), s.data() + s.size()});
    } else if (const auto* gbt = std::get_if<GbtModel>(&model.body)) {
      std::vector<double> score = gbt->initial;
      for (const auto& stage : gbt->stages) {
        for (std::size_t k = 0; k < stage.size(); ++k) score[k] += gbt->shrinkage * stage[k].leaf(row).value;
      }
      label = pick_class(gbt->classes, score);
    }
    out[static_cast<std::size_t>(r)] = label;
  }
  return out;
}

void dump_classifier(std::ostream& out, const ClassifierModel& model) {
  out << "kind " << to_string(model.kind) << " features " << model.n_features << '\n';
  if (model.constant) {
    out << "constant " << to_int(*model.constant) << '\n';
    return;
  }
  if (const auto* forest = std::get_if<ForestModel>(&model.body)) {
    for (std::size_t t = 0; t < forest->trees.size(); ++t) {
      out << "tree " << t << '\n';
      dump_tree(out, forest->trees[t], model.feature_names);
    }
  } else if (const auto* gbt = std::get_if<GbtModel>(&model.body)) {
    for (std::size_t s = 0; s < gbt->stages.size(); ++s) {
      for (std::size_t k = 0; k < gbt->stages[s].size(); ++k) {
        out << "stage " << s << " class " << to_int(gbt->classes[k]) << '\n';
        dump_tree(out, gbt->stages[s][k], model.feature_names);
      }
    }
  } else if (const auto* svm = std::get_if<SvmModel>(&model.body)) {
    for (std::size_t k = 0; k < svm->classes.size(); ++k) {
      out << "class " << to_int(svm->classes[k]) << " weights";
      for (Eigen::Index c = 0; c < svm->weights.cols(); ++c) out << ' ' << svm->weights(static_cast<Eigen::Index>(k), c);
      out << '\n';
    }
  }
}

}  // namespace trendlab
