#include "trendlab/model_io.hpp"

#include <fstream>

#include "trendlab/classifier.hpp"
#include "trendlab/config.hpp"
#include "trendlab/error.hpp"
#include "trendlab/lstm.hpp"

namespace trendlab {

using nlohmann::json;

json model_envelope(std::string_view type) {
  json doc;
  doc["format"] = kModelFormat;
  doc["version"] = kModelVersion;
  doc["type"] = type;
  return doc;
}

void check_envelope(const json& doc, std::string_view type) {
  if (!doc.is_object() || doc.value("format", "") != kModelFormat) {
    throw FormatError("not a trendlab model file");
  }
  const int version = doc.value("version", -1);
  if (version != kModelVersion) {
    throw FormatError("model version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kModelVersion) + ")");
  }
  if (doc.value("type", "") != type) {
    throw FormatError("model type '" + doc.value("type", "") + "' where '" + std::string(type) +
                      "' was expected");
  }
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols) {
      throw FormatError("ragged matrix in model file");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

json tree_to_json(const Tree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.counts[0], n.counts[1], n.counts[2],
                     n.value, n.samples});
  }
  return nodes;
}

Tree tree_from_json(const json& j) {
  Tree tree;
  for (const auto& a : j) {
    if (a.size() != 9) throw FormatError("malformed tree node");
    TreeNode n;
    n.feature = a[0].get<int>();
    n.threshold = a[1].get<double>();
    n.left = a[2].get<int>();
    n.right = a[3].get<int>();
    n.counts = {a[4].get<double>(), a[5].get<double>(), a[6].get<double>()};
    n.value = a[7].get<double>();
    n.samples = a[8].get<std::size_t>();
    tree.nodes.push_back(n);
  }
  const auto size = static_cast<int>(tree.nodes.size());
  for (const auto& n : tree.nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)) {
      throw FormatError("tree node points outside the tree");
    }
  }
  if (tree.nodes.empty()) throw FormatError("empty tree");
  return tree;
}

json thetas_to_json(const std::vector<Theta>& ts) {
  json a = json::array();
  for (auto t : ts) a.push_back(to_int(t));
  return a;
}

std::vector<Theta> thetas_from_json(const json& j) {
  std::vector<Theta> out;
  for (const auto& v : j) out.push_back(theta_from_int(v.get<int>()));
  return out;
}

}  // namespace

void save_forecaster(const std::filesystem::path& path, const LstmModel& model) {
  json doc = model_envelope("lstm-forecaster");
  doc["config"] = to_json(model.config);
  doc["normalization"] = {{"feature_mean", vector_to_json(model.norm.feature_mean)},
                          {"feature_std", vector_to_json(model.norm.feature_std)},
                          {"target_mean", model.norm.target_mean},
                          {"target_std", model.norm.target_std},
                          {"anchor_feature", model.norm.anchor_feature}};
  json layers = json::array();
  for (const auto& l : model.net.layers) {
    json layer;
    const char* gate_names[] = {"g", "i", "f", "o"};
    for (std::size_t k = 0; k < 4; ++k) {
      layer[std::string("w_x") + gate_names[k]] = matrix_to_json(l.w_x[k]);
      layer[std::string("w_h") + gate_names[k]] = matrix_to_json(l.w_h[k]);
      layer[std::string("b_") + gate_names[k]] = vector_to_json(l.b[k]);
    }
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  doc["head"] = {{"w", matrix_to_json(model.net.head.w)}, {"b", vector_to_json(model.net.head.b)}};
  doc["loss_curve"] = model.loss_curve;
  write_json(path, doc);
}

LstmModel load_forecaster(const std::filesystem::path& path) {
  const json doc = read_json(path);
  check_envelope(doc, "lstm-forecaster");
  try {
    LstmModel model;
    model.config = train_config_from_json(doc.at("config"));
    const auto& cfg = model.config;
    const auto& n = doc.at("normalization");
    model.norm.feature_mean = vector_from_json(n.at("feature_mean"));
    model.norm.feature_std = vector_from_json(n.at("feature_std"));
    model.norm.target_mean = n.at("target_mean").get<double>();
    model.norm.target_std = n.at("target_std").get<double>();
    model.norm.anchor_feature = n.at("anchor_feature").get<int>();
    const char* gate_names[] = {"g", "i", "f", "o"};
    for (const auto& l : doc.at("layers")) {
      LstmLayerParams p;
      for (std::size_t k = 0; k < 4; ++k) {
        p.w_x[k] = matrix_from_json(l.at(std::string("w_x") + gate_names[k]));
        p.w_h[k] = matrix_from_json(l.at(std::string("w_h") + gate_names[k]));
        p.b[k] = vector_from_json(l.at(std::string("b_") + gate_names[k]));
      }
      model.net.layers.push_back(std::move(p));
    }
    model.net.head.w = matrix_from_json(doc.at("head").at("w"));
    model.net.head.b = vector_from_json(doc.at("head").at("b"));
    model.loss_curve = doc.at("loss_curve").get<std::vector<double>>();
    if (model.net.layers.size() != cfg.layers ||
        model.net.input_dim() != cfg.features.size() ||
        model.net.outputs() != cfg.horizon ||
        model.norm.feature_mean.size() != static_cast<Eigen::Index>(cfg.features.size()) ||
        model.norm.anchor_feature >= static_cast<int>(cfg.features.size())) {
      throw FormatError("forecaster tensors do not match the stored configuration");
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_classifier(const std::filesystem::path& path, const ClassifierModel& model) {
  json doc = model_envelope("classifier");
  doc["kind"] = to_string(model.kind);
  doc["seed"] = model.seed;
  doc["n_features"] = model.n_features;
  doc["feature_names"] = model.feature_names;
  doc["config"] = to_json(model.config);
  doc["constant"] = model.constant ? json(to_int(*model.constant)) : json(nullptr);
  if (const auto* forest = std::get_if<ForestModel>(&model.body)) {
    json trees = json::array();
    for (const auto& t : forest->trees) trees.push_back(tree_to_json(t));
    doc["trees"] = std::move(trees);
  } else if (const auto* svm = std::get_if<SvmModel>(&model.body)) {
    doc["classes"] = thetas_to_json(svm->classes);
    doc["weights"] = matrix_to_json(svm->weights);
    doc["mean"] = vector_to_json(svm->mean);
    doc["scale"] = vector_to_json(svm->scale);
  } else if (const auto* gbt = std::get_if<GbtModel>(&model.body)) {
    doc["classes"] = thetas_to_json(gbt->classes);
    doc["initial"] = gbt->initial;
    doc["shrinkage"] = gbt->shrinkage;
    json stages = json::array();
    for (const auto& stage : gbt->stages) {
      json s = json::array();
      for (const auto& t : stage) s.push_back(tree_to_json(t));
      stages.push_back(std::move(s));
    }
    doc["stages"] = std::move(stages);
  }
  write_json(path, doc);
}

ClassifierModel load_classifier(const std::filesystem::path& path) {
  const json doc = read_json(path);
  check_envelope(doc, "classifier");
  try {
    ClassifierModel model;
    model.kind = parse_classifier_kind(doc.at("kind").get<std::string>());
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.n_features = doc.at("n_features").get<std::size_t>();
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    model.config = classifier_config_from_json(doc.at("config"));
    if (!doc.at("constant").is_null()) model.constant = theta_from_int(doc.at("constant").get<int>());
    switch (model.kind) {
      case ClassifierKind::forest: {
        ForestModel forest;
        for (const auto& t : doc.at("trees")) forest.trees.push_back(tree_from_json(t));
        if (forest.trees.empty()) throw FormatError("forest has no trees");
        model.body = std::move(forest);
        break;
      }
      case ClassifierKind::svm: {
        SvmModel svm;
        svm.classes = thetas_from_json(doc.at("classes"));
        svm.weights = matrix_from_json(doc.at("weights"));
        svm.mean = vector_from_json(doc.at("mean"));
        svm.scale = vector_from_json(doc.at("scale"));
        if (!model.constant && static_cast<std::size_t>(svm.weights.rows()) != svm.classes.size()) {
          throw FormatError("svm needs one weight vector per class");
        }
        model.body = std::move(svm);
        break;
      }
      case ClassifierKind::gbt: {
        GbtModel gbt;
        gbt.classes = thetas_from_json(doc.at("classes"));
        gbt.initial = doc.at("initial").get<std::vector<double>>();
        gbt.shrinkage = doc.at("shrinkage").get<double>();
        for (const auto& s : doc.at("stages")) {
          std::vector<Tree> stage;
          for (const auto& t : s) stage.push_back(tree_from_json(t));
          gbt.stages.push_back(std::move(stage));
        }
        model.body = std::move(gbt);
        break;
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace trendlab
