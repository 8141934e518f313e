#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trendlab/bns.hpp"
#include "trendlab/classifier.hpp"
#include "trendlab/date.hpp"
#include "trendlab/evaluation.hpp"
#include "trendlab/indicators.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/lstm.hpp"

namespace trendlab {

// Section readers accept partial objects: absent keys keep their defaults,
// unknown keys raise ConfigError.
nlohmann::json to_json(const IndicatorConfig& cfg);
IndicatorConfig indicator_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LabelConfig& cfg);
LabelConfig label_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClassifierConfig& cfg);
ClassifierConfig classifier_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BnsParams& p);
BnsParams bns_params_from_json(const nlohmann::json& j);

struct StockSource {
  std::string name;
  std::filesystem::path path;
};

// Test period: consecutive windows of `window_len` rows. Either a named preset,
// an explicit [start, end] range (as many whole windows as fit), or `windows`
// windows starting after `train_cutoff` (or at the end of the data when no
// cutoff is given).
struct TestPlan {
  std::string label = "test";
  std::size_t windows = 4;
  std::size_t window_len = 7;
  std::optional<Date> start;
  std::optional<Date> end;
};

enum class RetrainMode { once, rolling };

struct EvaluationOptions {
  std::size_t kl_bins = 50;
  double kl_smoothing = kKlSmoothing;
  std::size_t ar_order = 5;
  std::size_t ar_difference = 1;
};

struct SimulationOptions {
  bool enabled = true;
  BnsParams params;
  bool estimate_lambda = true;  // Lambda from the training labels
  std::size_t paths = 1;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::filesystem::path output_dir = "out";
  std::vector<StockSource> stocks;
  std::optional<Date> train_cutoff;
  TestPlan test;
  IndicatorConfig indicators;
  LabelConfig labels;
  TrainConfig forecaster;
  std::vector<ClassifierKind> classifiers = {ClassifierKind::forest, ClassifierKind::svm,
                                             ClassifierKind::gbt};
  ClassifierConfig classifier;
  RetrainMode retrain = RetrainMode::once;
  std::size_t rolling_rows = 30;
  EvaluationOptions evaluation;
  SimulationOptions simulation;

  // Relative stock paths resolve against `base_dir`.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);
  // Every field, defaults included.
  nlohmann::json to_json() const;
  // Structural checks plus existence of every stock file.
  void validate() const;
  const StockSource& stock(std::string_view name) const;
};

// Named test ranges: "spring2021" (2021-02-22 to 2021-04-26) and "summer2021"
// (2021-04-27 to 2021-06-25).
TestPlan test_preset(std::string_view name);

}  // namespace trendlab
