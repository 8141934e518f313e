#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "trendlab/ar_baseline.hpp"
#include "trendlab/classifier.hpp"
#include "trendlab/config.hpp"
#include "trendlab/evaluation.hpp"
#include "trendlab/lstm.hpp"
#include "trendlab/marketdata.hpp"

namespace trendlab {

// Rows [train_end) train the models; test windows are the `windows`
// consecutive blocks of `window_len` rows starting at `test_begin`.
struct TestSplit {
  std::size_t train_end = 0;
  std::size_t test_begin = 0;
  std::size_t windows = 0;
  std::size_t window_len = 0;

  std::size_t test_end() const { return test_begin + windows * window_len; }
};

TestSplit resolve_test_split(const OhlcvSeries& series, const PipelineConfig& cfg);

// Trained on rows [0, train_end) past the forecaster warm-up.
LstmModel fit_stock_forecaster(const OhlcvSeries& series, const TestSplit& split,
                               const PipelineConfig& cfg);
// Feature rows of [0, end) feed the classifier; `last_rows` > 0 keeps only
// the most recent ones.
ClassifierModel fit_stock_classifier(const OhlcvSeries& series, std::size_t end, ClassifierKind kind,
                                     const PipelineConfig& cfg, std::size_t last_rows = 0);

struct WindowForecast {
  std::size_t begin = 0;  // first forecast row
  std::vector<double> lstm;
  std::vector<double> ar;
};

std::vector<WindowForecast> forecast_test_windows(const LstmModel& model, const OhlcvSeries& series,
                                                  const TestSplit& split, const PipelineConfig& cfg);

// Classification features for the forecast rows, computed on the actual
// history up to the window followed by the forecast closes.
Eigen::MatrixXd forecast_feature_rows(const OhlcvSeries& series, const WindowForecast& window,
                                      const PipelineConfig& cfg);

struct StockOutcome {
  std::string name;
  TestSplit split;
  std::vector<Date> test_dates;
  std::vector<double> actual, lstm, ar;
  std::vector<double> persistence;  // last actual close before each row's window
  std::vector<Theta> target;
  std::vector<std::pair<ClassifierKind, std::vector<Theta>>> predicted;
  std::vector<double> loss_curve;
};

// Forecast, classify and collect the test rows for one stock.
StockOutcome evaluate_stock(const std::string& name, const OhlcvSeries& series, const TestSplit& split,
                            const LstmModel& forecaster,
                            std::span<const ClassifierModel> once_models, const PipelineConfig& cfg);

nlohmann::json stock_report(const StockOutcome& outcome, const PipelineConfig& cfg);

// Every indicator over the whole series, one column each.
void write_indicators(std::ostream& out, const OhlcvSeries& series, const PipelineConfig& cfg);
// MACD, RSI, TRIX and Bollinger signals plus the target, one column each.
void write_indicator_signals(std::ostream& out, const OhlcvSeries& series, const PipelineConfig& cfg);

// Descriptive columns in table order: Open, High, Low, Close, Adj Close,
// Volume, SMA close, EMA close, up, down, RSI close. The moving averages use
// labels.sma_period.
std::vector<NamedColumn> eda_columns(const OhlcvSeries& series, const PipelineConfig& cfg);
// One row per statistic (count, mean, std, min, 25%, 50%, 75%, max), one column per input column.
void write_summary_csv(std::ostream& out, std::span<const ColumnSummary> summary);

struct StockSummary {
  std::string name;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  double kl_entropy = 0.0;
  std::vector<std::pair<ClassifierKind, ClassificationMetrics>> classifiers;
};

struct RunReport {
  std::string test_label;
  std::vector<StockSummary> stocks;
  nlohmann::json document;

  static RunReport from_json(const nlohmann::json& doc);
  static RunReport load(const std::filesystem::path& path);
};

// Runs every stage for every stock and writes the report, models and plot
// CSVs under cfg.output_dir. A failing stage raises StageError and leaves a
// STALE marker in the output directory.
RunReport run_pipeline(const PipelineConfig& cfg);

// Accuracy, weighted F1 (stocks x classifiers) and goodness-of-fit
// (stock, ks_p_value, kl_entropy) CSVs, one set per test label.
std::vector<std::filesystem::path> emit_tables(std::span<const RunReport> reports,
                                               const std::filesystem::path& out_dir);

}  // namespace trendlab
