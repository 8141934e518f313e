#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "trendlab/indicators.hpp"
#include "trendlab/marketdata.hpp"

namespace trendlab {

// Short-term trend regime: expected downward, stable or upward movement.
enum class Theta : std::int8_t { down = -1, hold = 0, up = 1 };

inline int to_int(Theta t) { return static_cast<int>(t); }
Theta theta_from_int(int value);

enum class SignalSource { macd, rsi, trix, bbands, target };
std::string_view to_string(SignalSource source);
SignalSource parse_signal_source(std::string_view name);

struct Signal {
  Theta theta = Theta::hold;
  SignalSource source = SignalSource::target;
  bool warmup = false;  // position had no defined input; theta is hold
};

// Series an indicator rule may read. Only the ones a rule needs must be set.
struct IndicatorBundle {
  const IndicatorSeries* macd_line = nullptr;
  const IndicatorSeries* macd_signal = nullptr;
  const IndicatorSeries* rsi = nullptr;
  const IndicatorSeries* trix = nullptr;
  const IndicatorSeries* bb_upper = nullptr;
  const IndicatorSeries* bb_lower = nullptr;
  std::span<const double> close;
};

struct SignalOptions {
  double rsi_overbought = 70.0;
  double rsi_oversold = 30.0;
  // Upward MACD/TRIX crossings sell by default; this flips both crossing rules.
  bool invert_crossing = false;
};

std::vector<Signal> indicator_signal(SignalSource kind, const IndicatorBundle& inputs,
                                     const SignalOptions& options = {});

struct TargetOptions {
  std::size_t horizon = 15;
  double margin = 0.1;
  // Reverses the label polarity (a rise beyond the margin becomes a sell).
  bool prose_polarity = false;
};

// theta(t) from close(t) versus close(t - horizon); boundaries map to hold.
std::vector<Signal> target_theta(std::span<const double> close, const TargetOptions& options = {});

inline constexpr std::size_t kFeatureCount = 13;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "close",   "sma20",    "macd_sign", "macd_signal_line", "macd_line", "macd_diff", "bb_sign",
    "bb_upper", "bb_lower", "rsi_sign",  "rsi_close",        "trix_sign", "trix_line"};

struct LabelConfig {
  SignalOptions signals;
  TargetOptions target;
  PriceField price = PriceField::close;
  std::size_t sma_period = 20;
};

// Classification features; only rows past every warm-up and with a defined
// target survive.
struct FeatureFrame {
  std::vector<Date> dates;
  std::vector<std::size_t> source_rows;  // row index in the input series
  Eigen::MatrixXd values;                // rows x kFeatureCount
  std::vector<Theta> target;

  std::size_t rows() const { return dates.size(); }
};

FeatureFrame build_feature_matrix(const OhlcvSeries& series, const IndicatorConfig& cfg,
                                  const LabelConfig& labels = {});

// First row index at which every classification feature and the target are defined.
std::size_t feature_warmup(const IndicatorConfig& cfg, const LabelConfig& labels = {});

void write_feature_csv(std::ostream& out, const FeatureFrame& frame);
void write_signal_csv(std::ostream& out, std::span<const Date> dates,
                      std::span<const std::vector<Signal>> columns);

}  // namespace trendlab
