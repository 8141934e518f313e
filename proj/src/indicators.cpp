#include "trendlab/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "trendlab/error.hpp"
#include "trendlab/text.hpp"

namespace trendlab {

bool IndicatorSeries::stable(std::size_t i) const {
  return i < values.size() && i >= warmup_len && !std::isnan(values[i]);
}

std::optional<double> IndicatorSeries::at(std::size_t i) const {
  if (!stable(i)) return std::nullopt;
  return values[i];
}

void IndicatorConfig::validate() const {
  const std::size_t periods[] = {macd_fast,  macd_slow, macd_signal,  rsi_period, trix_period,
                                 bb_period, momentum_lag, vol_window};
  for (auto p : periods) {
    if (p < 1) throw InputError("indicator periods must be >= 1");
  }
  if (!(bb_width > 0.0)) throw InputError("Bollinger width must be > 0");
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InsufficientDataError(what);
}

double population_std(std::span<const double> xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

}  // namespace

IndicatorSeries sma(std::span<const double> prices, std::size_t period) {
  require(period >= 1 && period <= prices.size(), "sma: period exceeds series length");
  IndicatorSeries out{std::vector<double>(prices.size(), kMissing), period - 1};
  double window_sum = 0.0;
  for (std::size_t t = 0; t < prices.size(); ++t) {
    window_sum += prices[t];
    if (t >= period) window_sum -= prices[t - period];
    // Re-sum periodically so the running total cannot drift.
    if (t + 1 >= period && t % 256 == 0) {
      window_sum = 0.0;
      for (std::size_t k = t + 1 - period; k <= t; ++k) window_sum += prices[k];
    }
    if (t + 1 >= period) out.values[t] = window_sum / static_cast<double>(period);
  }
  return out;
}

IndicatorSeries ema(std::span<const double> prices, std::size_t period) {
  require(!prices.empty(), "ema: empty input");
  if (period < 1) throw InputError("ema: period must be >= 1");
  const double alpha = 2.0 / (static_cast<double>(period) + 1.0);
  IndicatorSeries out{std::vector<double>(prices.size()), period - 1};
  out.values[0] = prices[0];
  for (std::size_t t = 1; t < prices.size(); ++t) {
    out.values[t] = out.values[t - 1] + alpha * (prices[t] - out.values[t - 1]);
  }
  return out;
}

MacdLines macd(std::span<const double> prices, const IndicatorConfig& cfg) {
  require(prices.size() >= cfg.macd_slow + cfg.macd_signal,
          "macd: series shorter than slow + signal periods");
  const auto fast = ema(prices, cfg.macd_fast);
  const auto slow = ema(prices, cfg.macd_slow);
  IndicatorSeries line{std::vector<double>(prices.size()),
                       std::max(cfg.macd_fast, cfg.macd_slow) - 1};
  for (std::size_t t = 0; t < prices.size(); ++t) line.values[t] = fast.values[t] - slow.values[t];
  auto signal = ema(line.values, cfg.macd_signal);
  signal.warmup_len = cfg.macd_slow + cfg.macd_signal - 2;
  return {std::move(line), std::move(signal)};
}

IndicatorSeries rsi(std::span<const double> prices, std::size_t period) {
  require(period >= 1 && prices.size() >= period + 1, "rsi: series shorter than period + 1");
  IndicatorSeries out{std::vector<double>(prices.size(), kMissing), period};
  for (std::size_t t = period; t < prices.size(); ++t) {
    double gain = 0.0, loss = 0.0;
    for (std::size_t s = t + 1 - period; s <= t; ++s) {
      const double change = prices[s] - prices[s - 1];
      if (change > 0.0) gain += change;
      else loss -= change;
    }
    gain /= static_cast<double>(period);
    loss /= static_cast<double>(period);
    if (loss == 0.0) {
      out.values[t] = gain > 0.0 ? 100.0 : 50.0;
    } else {
      out.values[t] = 100.0 - 100.0 / (1.0 + gain / loss);
    }
  }
  return out;
}

IndicatorSeries trix(std::span<const double> prices, std::size_t period) {
  require(prices.size() >= 2, "trix: need at least two prices");
  const auto triple = ema(ema(ema(prices, period).values, period).values, period);
  IndicatorSeries out{std::vector<double>(prices.size(), kMissing), 3 * (period - 1) + 1};
  for (std::size_t t = 1; t < prices.size(); ++t) {
    const double prev = triple.values[t - 1];
    if (std::abs(prev) < 1e-12) throw DegenerateError("trix: triple EMA is zero");
    out.values[t] = (triple.values[t] - prev) / prev;
  }
  return out;
}

BollingerBands bollinger(std::span<const double> prices, std::size_t period, double k) {
  require(period >= 1 && period <= prices.size(), "bollinger: period exceeds series length");
  if (k < 0.0) throw InputError("bollinger: width must be non-negative");
  BollingerBands out;
  out.mid = sma(prices, period);
  out.upper = IndicatorSeries{std::vector<double>(prices.size(), kMissing), period - 1};
  out.lower = out.upper;
  for (std::size_t t = period - 1; t < prices.size(); ++t) {
    const double sd = population_std(prices.subspan(t + 1 - period, period));
    out.upper.values[t] = out.mid.values[t] + k * sd;
    out.lower.values[t] = out.mid.values[t] - k * sd;
  }
  return out;
}

MomentumVolatility momentum_and_volatility(std::span<const double> prices, std::size_t momentum_lag,
                                           std::size_t vol_window) {
  if (momentum_lag < 1 || vol_window < 1) throw InputError("lag and window must be >= 1");
  require(prices.size() > std::max(momentum_lag, vol_window),
          "momentum/volatility: series too short");
  MomentumVolatility out{{std::vector<double>(prices.size(), kMissing), momentum_lag},
                         {std::vector<double>(prices.size(), kMissing), vol_window}};
  for (std::size_t t = momentum_lag; t < prices.size(); ++t) {
    out.momentum.values[t] = prices[t] - prices[t - momentum_lag];
  }
  std::vector<double> returns(prices.size(), 0.0);
  for (std::size_t t = 1; t < prices.size(); ++t) returns[t] = prices[t] / prices[t - 1] - 1.0;
  for (std::size_t t = vol_window; t < prices.size(); ++t) {
    out.volatility.values[t] =
        population_std(std::span<const double>(returns).subspan(t + 1 - vol_window, vol_window));
  }
  return out;
}

GainsLosses daily_gains_losses(std::span<const double> prices) {
  require(prices.size() >= 2, "gains/losses: need at least two prices");
  GainsLosses out{{std::vector<double>(prices.size(), kMissing), 1},
                  {std::vector<double>(prices.size(), kMissing), 1}};
  for (std::size_t t = 1; t < prices.size(); ++t) {
    const double change = prices[t] - prices[t - 1];
    out.up.values[t] = std::max(change, 0.0);
    out.down.values[t] = std::min(change, 0.0);
  }
  return out;
}

void write_indicator_csv(std::ostream& out, std::span<const Date> dates,
                         std::span<const NamedIndicator> columns) {
  out << "date";
  for (const auto& c : columns) {
    if (c.series->size() != dates.size()) {
      throw InputError("indicator '" + c.name + "' is not aligned to the dates");
    }
    out << ',' << c.name;
  }
  out << '\n';
  for (std::size_t i = 0; i < dates.size(); ++i) {
    out << format_date(dates[i]);
    for (const auto& c : columns) {
      out << ',';
      if (auto v = c.series->at(i)) out << format_double(*v);
    }
    out << '\n';
  }
}

}  // namespace trendlab
