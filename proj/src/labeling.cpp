#include "trendlab/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "trendlab/error.hpp"
#include "trendlab/text.hpp"

namespace trendlab {

Theta theta_from_int(int value) {
  if (value < -1 || value > 1) throw InputError("theta must be -1, 0 or +1, got " + std::to_string(value));
  return static_cast<Theta>(value);
}

std::string_view to_string(SignalSource source) {
  switch (source) {
    case SignalSource::macd: return "macd";
    case SignalSource::rsi: return "rsi";
    case SignalSource::trix: return "trix";
    case SignalSource::bbands: return "bbands";
    case SignalSource::target: return "target";
  }
  return "unknown";
}

SignalSource parse_signal_source(std::string_view name) {
  for (auto s : {SignalSource::macd, SignalSource::rsi, SignalSource::trix, SignalSource::bbands,
                 SignalSource::target}) {
    if (to_string(s) == name) return s;
  }
  throw InputError("unknown signal rule '" + std::string(name) + "'");
}

namespace {

const IndicatorSeries& need(const IndicatorSeries* s, const char* name, std::size_t n) {
  if (s == nullptr) throw InputError(std::string("missing required series '") + name + "'");
  if (s->size() != n) throw InputError(std::string("series '") + name + "' is not aligned");
  return *s;
}

// Sell on the first step above the reference, buy on the first step below,
// hold while the side is unchanged. Undefined positions reset the state.
std::vector<Signal> crossing_signals(const IndicatorSeries& line, const IndicatorSeries* reference,
                                     SignalSource source, bool invert) {
  const std::size_t n = line.size();
  std::vector<Signal> out(n, Signal{Theta::hold, source, false});
  int side = 0;  // +1 above, -1 below, 0 unknown
  for (std::size_t t = 0; t < n; ++t) {
    const bool defined = line.stable(t) && (reference == nullptr || reference->stable(t));
    if (!defined) {
      out[t].warmup = true;
      side = 0;
      continue;
    }
    const double diff = line.values[t] - (reference ? reference->values[t] : 0.0);
    const int now = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : side);
    if (side != 0 && now != side) {
      const bool went_up = now > 0;
      out[t].theta = (went_up != invert) ? Theta::down : Theta::up;
    }
    side = now;
  }
  return out;
}

}  // namespace

std::vector<Signal> indicator_signal(SignalSource kind, const IndicatorBundle& in,
                                     const SignalOptions& options) {
  switch (kind) {
    case SignalSource::macd: {
      if (in.macd_line == nullptr) throw InputError("missing required series 'macd_line'");
      const auto n = in.macd_line->size();
      const auto& signal = need(in.macd_signal, "macd_signal", n);
      return crossing_signals(*in.macd_line, &signal, kind, options.invert_crossing);
    }
    case SignalSource::trix: {
      if (in.trix == nullptr) throw InputError("missing required series 'trix'");
      return crossing_signals(*in.trix, nullptr, kind, options.invert_crossing);
    }
    case SignalSource::rsi: {
      if (in.rsi == nullptr) throw InputError("missing required series 'rsi'");
      std::vector<Signal> out(in.rsi->size(), Signal{Theta::hold, kind, false});
      for (std::size_t t = 0; t < out.size(); ++t) {
        const auto v = in.rsi->at(t);
        if (!v) {
          out[t].warmup = true;
        } else if (*v > options.rsi_overbought) {
          out[t].theta = Theta::down;
        } else if (*v < options.rsi_oversold) {
          out[t].theta = Theta::up;
        }
      }
      return out;
    }
    case SignalSource::bbands: {
      if (in.bb_upper == nullptr) throw InputError("missing required series 'bb_upper'");
      const auto n = in.bb_upper->size();
      const auto& lower = need(in.bb_lower, "bb_lower", n);
      if (in.close.size() != n) throw InputError("missing or misaligned close prices");
      std::vector<Signal> out(n, Signal{Theta::hold, kind, false});
      for (std::size_t t = 0; t < n; ++t) {
        if (!in.bb_upper->stable(t) || !lower.stable(t)) {
          out[t].warmup = true;
        } else if (in.close[t] > in.bb_upper->values[t]) {
          out[t].theta = Theta::down;
        } else if (in.close[t] < lower.values[t]) {
          out[t].theta = Theta::up;
        }
      }
      return out;
    }
    case SignalSource::target:
      break;
  }
  throw InputError("'target' is not an indicator rule; use target_theta");
}

std::vector<Signal> target_theta(std::span<const double> close, const TargetOptions& options) {
  if (close.size() <= options.horizon) {
    throw InsufficientDataError("target: series not longer than the horizon");
  }
  if (options.horizon < 1 || options.margin < 0.0) throw InputError("invalid target options");
  std::vector<Signal> out(close.size(), Signal{Theta::hold, SignalSource::target, false});
  for (std::size_t t = 0; t < close.size(); ++t) {
    if (t < options.horizon) {
      out[t].warmup = true;
      continue;
    }
    const double base = close[t - options.horizon];
    const double change = close[t] - base;
    Theta theta = Theta::hold;
    if (change > options.margin * base) theta = Theta::up;
    else if (change < -options.margin * base) theta = Theta::down;
    if (options.prose_polarity) theta = static_cast<Theta>(-to_int(theta));
    out[t].theta = theta;
  }
  return out;
}

std::size_t feature_warmup(const IndicatorConfig& cfg, const LabelConfig& labels) {
  return std::max({labels.sma_period - 1, std::max(cfg.macd_fast, cfg.macd_slow) - 1,
                   cfg.macd_slow + cfg.macd_signal - 2, cfg.bb_period - 1, cfg.rsi_period,
                   3 * (cfg.trix_period - 1) + 1, labels.target.horizon});
}

FeatureFrame build_feature_matrix(const OhlcvSeries& series, const IndicatorConfig& cfg,
                                  const LabelConfig& labels) {
  cfg.validate();
  const auto& close = series.prices(labels.price);
  const std::size_t n = close.size();
  const std::size_t warmup = feature_warmup(cfg, labels);
  if (n <= warmup) {
    throw InsufficientDataError("feature matrix: " + std::to_string(n) +
                                " rows do not cover the " + std::to_string(warmup) +
                                "-row indicator warm-up");
  }
  if (n < labels.sma_period || n < cfg.macd_slow + cfg.macd_signal || n < cfg.bb_period) {
    throw InsufficientDataError("feature matrix: series too short");
  }

  const auto sma_line = sma(close, labels.sma_period);
  const auto macd_lines = macd(close, cfg);
  const auto rsi_line = rsi(close, cfg.rsi_period);
  const auto trix_line = trix(close, cfg.trix_period);
  const auto bands = bollinger(close, cfg.bb_period, cfg.bb_width);

  IndicatorBundle bundle;
  bundle.macd_line = &macd_lines.macd_line;
  bundle.macd_signal = &macd_lines.signal_line;
  bundle.rsi = &rsi_line;
  bundle.trix = &trix_line;
  bundle.bb_upper = &bands.upper;
  bundle.bb_lower = &bands.lower;
  bundle.close = close;

  const auto macd_sig = indicator_signal(SignalSource::macd, bundle, labels.signals);
  const auto rsi_sig = indicator_signal(SignalSource::rsi, bundle, labels.signals);
  const auto trix_sig = indicator_signal(SignalSource::trix, bundle, labels.signals);
  const auto bb_sig = indicator_signal(SignalSource::bbands, bundle, labels.signals);
  const auto target = target_theta(close, labels.target);

  FeatureFrame frame;
  frame.values.resize(static_cast<Eigen::Index>(n - warmup), kFeatureCount);
  for (std::size_t t = warmup; t < n; ++t) {
    const auto r = static_cast<Eigen::Index>(t - warmup);
    const double row[kFeatureCount] = {close[t],
                                       sma_line.values[t],
                                       static_cast<double>(to_int(macd_sig[t].theta)),
                                       macd_lines.signal_line.values[t],
                                       macd_lines.macd_line.values[t],
                                       macd_lines.signal_line.values[t] - macd_lines.macd_line.values[t],
                                       static_cast<double>(to_int(bb_sig[t].theta)),
                                       bands.upper.values[t],
                                       bands.lower.values[t],
                                       static_cast<double>(to_int(rsi_sig[t].theta)),
                                       rsi_line.values[t],
                                       static_cast<double>(to_int(trix_sig[t].theta)),
                                       trix_line.values[t]};
    for (std::size_t c = 0; c < kFeatureCount; ++c) frame.values(r, static_cast<Eigen::Index>(c)) = row[c];
    frame.dates.push_back(series.dates()[t]);
    frame.source_rows.push_back(t);
    frame.target.push_back(target[t].theta);
  }
  return frame;
}

void write_feature_csv(std::ostream& out, const FeatureFrame& frame) {
  out << "date";
  for (auto name : kFeatureNames) out << ',' << name;
  out << ",target\n";
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    out << format_date(frame.dates[r]);
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      out << ',' << format_double(frame.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    out << ',' << to_int(frame.target[r]) << '\n';
  }
}

void write_signal_csv(std::ostream& out, std::span<const Date> dates,
                      std::span<const std::vector<Signal>> columns) {
  out << "date";
  for (const auto& col : columns) {
    if (col.size() != dates.size()) throw InputError("signal column not aligned to dates");
    out << ',' << (col.empty() ? "signal" : to_string(col.front().source));
  }
  out << '\n';
  for (std::size_t i = 0; i < dates.size(); ++i) {
    out << format_date(dates[i]);
    for (const auto& col : columns) {
      out << ',';
      if (!col[i].warmup) out << to_int(col[i].theta);
    }
    out << '\n';
  }
}

}  // namespace trendlab
