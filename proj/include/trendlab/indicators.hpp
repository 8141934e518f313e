#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trendlab/date.hpp"

namespace trendlab {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Indicator values aligned 1:1 with the source prices. Positions below
// `warmup_len` are not yet stable; undefined positions hold kMissing (NaN).
struct IndicatorSeries {
  std::vector<double> values;
  std::size_t warmup_len = 0;

  std::size_t size() const { return values.size(); }
  bool stable(std::size_t i) const;
  std::optional<double> at(std::size_t i) const;
};

struct IndicatorConfig {
  std::size_t macd_fast = 12;
  std::size_t macd_slow = 26;
  std::size_t macd_signal = 9;
  std::size_t rsi_period = 14;
  std::size_t trix_period = 15;
  std::size_t bb_period = 20;
  double bb_width = 2.0;
  std::size_t momentum_lag = 10;
  std::size_t vol_window = 10;

  void validate() const;
};

struct MacdLines {
  IndicatorSeries macd_line;
  IndicatorSeries signal_line;
};

struct BollingerBands {
  IndicatorSeries upper;
  IndicatorSeries lower;
  IndicatorSeries mid;
};

struct MomentumVolatility {
  IndicatorSeries momentum;
  IndicatorSeries volatility;
};

struct GainsLosses {
  IndicatorSeries up;    // max(change, 0)
  IndicatorSeries down;  // min(change, 0)
};

IndicatorSeries sma(std::span<const double> prices, std::size_t period);
// Seeded at the first observation with alpha = 2 / (period + 1).
IndicatorSeries ema(std::span<const double> prices, std::size_t period);
MacdLines macd(std::span<const double> prices, const IndicatorConfig& cfg = {});
// Simple trailing averages of gains and losses; RSI = 100 - 100 / (1 + RS).
IndicatorSeries rsi(std::span<const double> prices, std::size_t period = 14);
// One-step relative change of the triple-smoothed EMA (raw ratio, not percent).
IndicatorSeries trix(std::span<const double> prices, std::size_t period = 15);
// Mid = SMA, bands at +/- k population standard deviations.
BollingerBands bollinger(std::span<const double> prices, std::size_t period = 20, double k = 2.0);
MomentumVolatility momentum_and_volatility(std::span<const double> prices, std::size_t momentum_lag,
                                           std::size_t vol_window);
GainsLosses daily_gains_losses(std::span<const double> prices);

struct NamedIndicator {
  std::string name;
  const IndicatorSeries* series;
};

// Date-indexed CSV, one column per indicator, empty cells where a value is
// missing or still in warm-up.
void write_indicator_csv(std::ostream& out, std::span<const Date> dates,
                         std::span<const NamedIndicator> columns);

}  // namespace trendlab
