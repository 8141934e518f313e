#include "trendlab/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "trendlab/bns.hpp"
#include "trendlab/error.hpp"
#include "trendlab/indicators.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/random.hpp"
#include "trendlab/text.hpp"

namespace trendlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSimulationStream = 0x51u;

template <typename F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

template <typename F>
void write_file(const fs::path& path, F&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  body(out);
  if (!out) throw InputError("write failed for " + path.string());
}

std::span<const double> head(const std::vector<double>& v, std::size_t n) { return {v.data(), n}; }

double mse(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return a.empty() ? 0.0 : sum / static_cast<double>(a.size());
}

json metrics_json(const ClassificationMetrics& m) {
  json per_class = json::array();
  for (const auto& c : m.per_class) {
    per_class.push_back({{"label", to_int(c.label)},
                         {"precision", c.precision},
                         {"recall", c.recall},
                         {"f1", c.f1},
                         {"support", c.support}});
  }
  return {{"accuracy", m.accuracy}, {"weighted_f1", m.weighted_f1}, {"per_class", per_class}};
}

ClassificationMetrics metrics_from_json(const json& j) {
  ClassificationMetrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.weighted_f1 = j.at("weighted_f1").get<double>();
  const auto& pc = j.at("per_class");
  for (std::size_t c = 0; c < m.per_class.size() && c < pc.size(); ++c) {
    auto& out = m.per_class[c];
    out.label = theta_from_int(pc[c].at("label").get<int>());
    out.precision = pc[c].at("precision").get<double>();
    out.recall = pc[c].at("recall").get<double>();
    out.f1 = pc[c].at("f1").get<double>();
    out.support = pc[c].at("support").get<std::size_t>();
  }
  return m;
}

}  // namespace

void write_indicator_signals(std::ostream& out, const OhlcvSeries& series, const PipelineConfig& cfg) {
  const auto& close = series.prices(cfg.labels.price);
  const auto m = macd(close, cfg.indicators);
  const auto r = rsi(close, cfg.indicators.rsi_period);
  const auto t = trix(close, cfg.indicators.trix_period);
  const auto bb = bollinger(close, cfg.indicators.bb_period, cfg.indicators.bb_width);
  IndicatorBundle bundle;
  bundle.macd_line = &m.macd_line;
  bundle.macd_signal = &m.signal_line;
  bundle.rsi = &r;
  bundle.trix = &t;
  bundle.bb_upper = &bb.upper;
  bundle.bb_lower = &bb.lower;
  bundle.close = close;
  std::vector<std::vector<Signal>> columns;
  for (auto kind : {SignalSource::macd, SignalSource::rsi, SignalSource::trix, SignalSource::bbands}) {
    columns.push_back(indicator_signal(kind, bundle, cfg.labels.signals));
  }
  columns.push_back(target_theta(close, cfg.labels.target));
  write_signal_csv(out, series.dates(), columns);
}

void write_indicators(std::ostream& out, const OhlcvSeries& series, const PipelineConfig& cfg) {
  const auto& c = cfg.indicators;
  const auto& close = series.prices(cfg.labels.price);
  const auto s = sma(close, cfg.labels.sma_period);
  const auto fast = ema(close, c.macd_fast);
  const auto slow = ema(close, c.macd_slow);
  const auto m = macd(close, c);
  const auto r = rsi(close, c.rsi_period);
  const auto t = trix(close, c.trix_period);
  const auto bb = bollinger(close, c.bb_period, c.bb_width);
  const auto mv = momentum_and_volatility(close, c.momentum_lag, c.vol_window);
  const auto gl = daily_gains_losses(close);
  const NamedIndicator columns[] = {{"sma", &s},           {"ema_fast", &fast},   {"ema_slow", &slow},
                                    {"macd", &m.macd_line}, {"macd_signal", &m.signal_line},
                                    {"rsi", &r},           {"trix", &t},          {"bb_mid", &bb.mid},
                                    {"bb_upper", &bb.upper}, {"bb_lower", &bb.lower},
                                    {"momentum", &mv.momentum}, {"volatility", &mv.volatility},
                                    {"up", &gl.up},        {"down", &gl.down}};
  write_indicator_csv(out, series.dates(), columns);
}

std::vector<NamedColumn> eda_columns(const OhlcvSeries& series, const PipelineConfig& cfg) {
  const auto& close = series.prices(cfg.labels.price);
  const auto gl = daily_gains_losses(close);
  return {{"Open", series.open()},
          {"High", series.high()},
          {"Low", series.low()},
          {"Close", series.close()},
          {"Adj Close", series.adj_close()},
          {"Volume", series.volume()},
          {"SMA close", sma(close, cfg.labels.sma_period).values},
          {"EMA close", ema(close, cfg.labels.sma_period).values},
          {"up", gl.up.values},
          {"down", gl.down.values},
          {"RSI close", rsi(close, cfg.indicators.rsi_period).values}};
}

void write_summary_csv(std::ostream& out, std::span<const ColumnSummary> summary) {
  out << "stat";
  for (const auto& c : summary) out << ',' << c.name;
  out << '\n';
  auto row = [&](const char* name, auto get) {
    out << name;
    for (const auto& c : summary) out << ',' << format_double(get(c));
    out << '\n';
  };
  row("count", [](const ColumnSummary& c) { return static_cast<double>(c.count); });
  row("mean", [](const ColumnSummary& c) { return c.mean; });
  row("std", [](const ColumnSummary& c) { return c.std; });
  row("min", [](const ColumnSummary& c) { return c.min; });
  row("25%", [](const ColumnSummary& c) { return c.q25; });
  row("50%", [](const ColumnSummary& c) { return c.median; });
  row("75%", [](const ColumnSummary& c) { return c.q75; });
  row("max", [](const ColumnSummary& c) { return c.max; });
}

TestSplit resolve_test_split(const OhlcvSeries& series, const PipelineConfig& cfg) {
  const std::size_t n = series.size();
  const std::size_t len = cfg.test.window_len;
  TestSplit split;
  split.window_len = len;
  split.windows = cfg.test.windows;
  if (cfg.test.start) {
    const auto& dates = series.dates();
    const auto it = std::lower_bound(dates.begin(), dates.end(), *cfg.test.start);
    if (it == dates.end()) throw RangeError("test start " + format_date(*cfg.test.start) + " is after the data");
    split.test_begin = static_cast<std::size_t>(it - dates.begin());
    if (cfg.test.end) {
      const auto stop = std::upper_bound(dates.begin(), dates.end(), *cfg.test.end);
      split.windows = static_cast<std::size_t>(stop - it) / len;
      if (split.windows == 0) {
        throw InsufficientDataError("test range " + format_date(*cfg.test.start) + ".." +
                                    format_date(*cfg.test.end) + " holds fewer than " +
                                    std::to_string(len) + " rows");
      }
    }
  } else if (cfg.train_cutoff) {
    const std::size_t last = series.last_index_on_or_before(*cfg.train_cutoff);
    if (last == n) throw RangeError("train cutoff " + format_date(*cfg.train_cutoff) + " precedes the data");
    split.test_begin = last + 1;
  } else {
    if (n < split.windows * len) throw InsufficientDataError("series shorter than the test period");
    split.test_begin = n - split.windows * len;
  }
  if (split.test_end() > n) {
    throw InsufficientDataError("test windows need rows up to " + std::to_string(split.test_end()) +
                                " but the series has " + std::to_string(n));
  }
  split.train_end = split.test_begin;
  if (cfg.train_cutoff) {
    const std::size_t last = series.last_index_on_or_before(*cfg.train_cutoff);
    if (last == n) throw RangeError("train cutoff " + format_date(*cfg.train_cutoff) + " precedes the data");
    split.train_end = std::min(last + 1, split.test_begin);
  }
  const std::size_t need = forecaster_warmup(cfg.forecaster.features, cfg.indicators) +
                           cfg.forecaster.input_len + cfg.forecaster.horizon;
  if (split.train_end < need || split.train_end <= feature_warmup(cfg.indicators, cfg.labels)) {
    throw InsufficientDataError("training split has " + std::to_string(split.train_end) +
                                " rows; the warm-ups and one forecast window need more");
  }
  return split;
}

LstmModel fit_stock_forecaster(const OhlcvSeries& series, const TestSplit& split, const PipelineConfig& cfg) {
  const OhlcvSeries train = series.slice(0, split.train_end);
  const auto features = forecaster_features(train, cfg.forecaster.features, cfg.indicators, cfg.labels.price);
  const std::size_t warm = forecaster_warmup(cfg.forecaster.features, cfg.indicators);
  WindowConfig wc;
  wc.input_len = cfg.forecaster.input_len;
  wc.horizon = cfg.forecaster.horizon;
  wc.target = cfg.labels.price;
  const auto samples =
      sliding_windows(train.slice(warm, train.size()), features.slice(warm, train.size()), wc);
  if (samples.empty()) throw InsufficientDataError("no forecaster training windows");
  return train_forecaster(samples, cfg.forecaster);
}

ClassifierModel fit_stock_classifier(const OhlcvSeries& series, std::size_t end, ClassifierKind kind,
                                     const PipelineConfig& cfg, std::size_t last_rows) {
  const FeatureFrame frame = build_feature_matrix(series.slice(0, end), cfg.indicators, cfg.labels);
  LabeledDataset data = LabeledDataset::from_frame(frame);
  if (last_rows > 0 && data.rows() > last_rows) {
    const std::size_t drop = data.rows() - last_rows;
    data.x = data.x.bottomRows(static_cast<Eigen::Index>(last_rows)).eval();
    data.y.erase(data.y.begin(), data.y.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  return train_classifier(data, kind, cfg.classifier, cfg.seed);
}

std::vector<WindowForecast> forecast_test_windows(const LstmModel& model, const OhlcvSeries& series,
                                                  const TestSplit& split, const PipelineConfig& cfg) {
  const auto& mc = model.config;
  const auto features = forecaster_features(series, mc.features, cfg.indicators, cfg.labels.price);
  const std::size_t warm = forecaster_warmup(mc.features, cfg.indicators);
  const auto& prices = series.prices(cfg.labels.price);
  std::vector<WindowForecast> out;
  for (std::size_t k = 0; k < split.windows; ++k) {
    WindowForecast w;
    w.begin = split.test_begin + k * split.window_len;
    if (w.begin < mc.input_len + warm) {
      throw InsufficientDataError("test window at row " + std::to_string(w.begin) +
                                  " lacks a full input history");
    }
    const Eigen::MatrixXd inputs = features.values.middleRows(
        static_cast<Eigen::Index>(w.begin - mc.input_len), static_cast<Eigen::Index>(mc.input_len));
    const Eigen::VectorXd f = forecast_horizon(model, inputs);
    w.lstm.assign(f.data(), f.data() + f.size());
    w.lstm.resize(split.window_len);
    w.ar = fit_ar_baseline(head(prices, w.begin), cfg.evaluation.ar_order, cfg.evaluation.ar_difference,
                           split.window_len)
               .forecast;
    out.push_back(std::move(w));
  }
  return out;
}

Eigen::MatrixXd forecast_feature_rows(const OhlcvSeries& series, const WindowForecast& window,
                                      const PipelineConfig& cfg) {
  const std::size_t len = window.lstm.size();
  const auto& prices = series.prices(cfg.labels.price);
  std::vector<Date> dates(series.dates().begin(),
                          series.dates().begin() + static_cast<std::ptrdiff_t>(window.begin + len));
  std::vector<double> closes(prices.begin(), prices.begin() + static_cast<std::ptrdiff_t>(window.begin));
  for (double v : window.lstm) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw NumericError("forecast for " + format_date(dates[closes.size()]) + " is not a positive price (" +
                         format_double(v) + ")");
    }
    closes.push_back(v);
  }
  const auto extended = OhlcvSeries::from_closes(std::move(dates), std::move(closes));
  const FeatureFrame frame = build_feature_matrix(extended, cfg.indicators, cfg.labels);
  if (frame.rows() < len || frame.source_rows[frame.rows() - len] != window.begin) {
    throw InsufficientDataError("forecast rows fall inside the indicator warm-up");
  }
  return frame.values.bottomRows(static_cast<Eigen::Index>(len));
}

StockOutcome evaluate_stock(const std::string& name, const OhlcvSeries& series, const TestSplit& split,
                            const LstmModel& forecaster, std::span<const ClassifierModel> once_models,
                            const PipelineConfig& cfg) {
  StockOutcome o;
  o.name = name;
  o.split = split;
  o.loss_curve = forecaster.loss_curve;
  const auto& prices = series.prices(cfg.labels.price);
  const auto target = target_theta(prices, cfg.labels.target);
  const auto windows = forecast_test_windows(forecaster, series, split, cfg);
  std::vector<Eigen::MatrixXd> rows;
  for (const auto& w : windows) {
    for (std::size_t i = 0; i < w.lstm.size(); ++i) {
      o.test_dates.push_back(series.dates()[w.begin + i]);
      o.actual.push_back(prices[w.begin + i]);
      o.lstm.push_back(w.lstm[i]);
      o.ar.push_back(w.ar[i]);
      o.persistence.push_back(prices[w.begin - 1]);
      o.target.push_back(target[w.begin + i].theta);
    }
    rows.push_back(forecast_feature_rows(series, w, cfg));
  }
  for (std::size_t k = 0; k < cfg.classifiers.size(); ++k) {
    const ClassifierKind kind = cfg.classifiers[k];
    std::vector<Theta> predicted;
    for (std::size_t w = 0; w < windows.size(); ++w) {
      std::vector<Theta> p;
      if (cfg.retrain == RetrainMode::once) {
        p = predict_labels(once_models[k], rows[w]);
      } else {
        const auto model = fit_stock_classifier(series, windows[w].begin, kind, cfg, cfg.rolling_rows);
        p = predict_labels(model, rows[w]);
      }
      predicted.insert(predicted.end(), p.begin(), p.end());
    }
    o.predicted.emplace_back(kind, std::move(predicted));
  }
  return o;
}

json stock_report(const StockOutcome& o, const PipelineConfig& cfg) {
  json j;
  j["name"] = o.name;
  j["train_rows"] = o.split.train_end;
  j["test_start"] = format_date(o.test_dates.front());
  j["test_end"] = format_date(o.test_dates.back());
  j["windows"] = o.split.windows;
  j["window_len"] = o.split.window_len;

  j["forecaster"] = {{"epochs", o.loss_curve.size()},
                     {"final_loss", o.loss_curve.empty() ? 0.0 : o.loss_curve.back()},
                     {"mse", mse(o.lstm, o.actual)},
                     {"ar_mse", mse(o.ar, o.actual)},
                     {"persistence_mse", mse(o.persistence, o.actual)}};

  const auto ks = ks_two_sample(o.lstm, o.actual);
  const auto edges = shared_edges(o.actual, o.lstm, cfg.evaluation.kl_bins);
  const double kl = kl_divergence(make_histogram(o.actual, edges), make_histogram(o.lstm, edges),
                                  cfg.evaluation.kl_smoothing);
  j["ks_statistic"] = ks.statistic;
  j["ks_p_value"] = ks.p_value;
  j["kl_entropy"] = kl;

  json classifiers = json::object();
  for (const auto& [kind, predicted] : o.predicted) {
    classifiers[std::string(to_string(kind))] = metrics_json(accuracy_and_f1(o.target, predicted));
  }
  j["classifiers"] = classifiers;
  return j;
}

RunReport RunReport::from_json(const json& doc) {
  RunReport r;
  try {
    if (doc.at("format").get<std::string>() != "trendlab-report") throw FormatError("not a run report");
    r.test_label = doc.at("test_label").get<std::string>();
    for (const auto& s : doc.at("stocks")) {
      StockSummary st;
      st.name = s.at("name").get<std::string>();
      st.ks_statistic = s.at("ks_statistic").get<double>();
      st.ks_p_value = s.at("ks_p_value").get<double>();
      st.kl_entropy = s.at("kl_entropy").get<double>();
      for (const auto& kind : doc.at("classifier_order")) {
        const auto name = kind.get<std::string>();
        st.classifiers.emplace_back(parse_classifier_kind(name), metrics_from_json(s.at("classifiers").at(name)));
      }
      r.stocks.push_back(std::move(st));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("run report: ") + e.what());
  }
  r.document = doc;
  return r;
}

RunReport RunReport::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

RunReport run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const fs::path out = cfg.output_dir;
  const fs::path stale = out / "STALE";
  stage("setup", [&] {
    fs::create_directories(out);
    fs::remove(out / "report.json");
    write_file(stale, [](std::ostream& s) { s << "run in progress\n"; });
    return 0;
  });

  try {
    json stocks = json::array();
    std::vector<Theta> pooled_target, pooled_primary;
    const ClassifierKind primary = cfg.classifiers.front();
    for (const auto& src : cfg.stocks) {
      const std::string tag = "[" + src.name + "]";
      const fs::path dir = out / src.name;
      stage("setup" + tag, [&] { return fs::create_directories(dir); });

      const OhlcvSeries series = stage("ingest" + tag, [&] { return read_ohlcv_csv(src.path); });
      const TestSplit split = stage("split" + tag, [&] { return resolve_test_split(series, cfg); });

      const LstmModel forecaster = stage("train-forecaster" + tag, [&] {
        auto model = fit_stock_forecaster(series, split, cfg);
        save_forecaster(dir / "forecaster.json", model);
        write_file(dir / "loss.csv", [&](std::ostream& s) { write_loss_csv(s, model.loss_curve); });
        return model;
      });

      const std::vector<ClassifierModel> once_models = stage("train-classifier" + tag, [&] {
        write_file(dir / "features.csv", [&](std::ostream& s) {
          write_feature_csv(s, build_feature_matrix(series.slice(0, split.train_end), cfg.indicators, cfg.labels));
        });
        std::vector<ClassifierModel> models;
        if (cfg.retrain == RetrainMode::once) {
          for (auto kind : cfg.classifiers) {
            models.push_back(fit_stock_classifier(series, split.train_end, kind, cfg));
            save_classifier(dir / ("classifier_" + std::string(to_string(kind)) + ".json"), models.back());
          }
        }
        return models;
      });

      const StockOutcome outcome = stage("classify" + tag, [&] {
        return evaluate_stock(src.name, series, split, forecaster, once_models, cfg);
      });

      json report = stage("evaluate" + tag, [&] {
        write_file(dir / "forecast.csv", [&](std::ostream& s) {
          s << "date,window,actual,lstm,ar\n";
          for (std::size_t i = 0; i < outcome.test_dates.size(); ++i) {
            s << format_date(outcome.test_dates[i]) << ',' << i / split.window_len + 1 << ','
              << format_double(outcome.actual[i]) << ',' << format_double(outcome.lstm[i]) << ','
              << format_double(outcome.ar[i]) << '\n';
          }
        });
        write_file(dir / "signals.csv", [&](std::ostream& s) {
          s << "date,target";
          for (const auto& p : outcome.predicted) s << ',' << to_string(p.first);
          s << '\n';
          for (std::size_t i = 0; i < outcome.test_dates.size(); ++i) {
            s << format_date(outcome.test_dates[i]) << ',' << to_int(outcome.target[i]);
            for (const auto& p : outcome.predicted) s << ',' << to_int(p.second[i]);
            s << '\n';
          }
        });
        write_file(dir / "indicator_signals.csv",
                   [&](std::ostream& s) { write_indicator_signals(s, series, cfg); });
        write_file(dir / "summary.csv", [&](std::ostream& s) {
          const auto columns = eda_columns(series.slice(0, split.train_end), cfg);
          write_summary_csv(s, summary_stats(columns));
        });
        return stock_report(outcome, cfg);
      });

      pooled_target.insert(pooled_target.end(), outcome.target.begin(), outcome.target.end());
      pooled_primary.insert(pooled_primary.end(), outcome.predicted.front().second.begin(),
                            outcome.predicted.front().second.end());

      if (cfg.simulation.enabled) {
        report["simulation"] = stage("simulate" + tag, [&] {
          BnsParams params = cfg.simulation.params;
          const auto& prices = series.prices(cfg.labels.price);
          const OhlcvSeries train = series.slice(0, split.train_end);
          std::vector<Theta> labels;
          for (const auto& s : target_theta(train.prices(cfg.labels.price), cfg.labels.target)) {
            labels.push_back(s.theta);
          }
          LambdaEstimate est;
          if (cfg.simulation.estimate_lambda) {
            est = estimate_big_lambda(train, labels, params, cfg.labels.price);
            params.Lambda = est.Lambda;
          }
          params.S0 = prices[split.test_begin - 1];
          const auto& regimes = outcome.predicted.front().second;
          double terminal = 0.0;
          BnsPath first;
          for (std::size_t p = 0; p < cfg.simulation.paths; ++p) {
            auto path = simulate_bns_path(params, regimes, regimes.size(),
                                          derive_seed(cfg.seed, kSimulationStream + p));
            terminal += path.S.back();
            if (p == 0) first = std::move(path);
          }
          write_file(dir / "bns_path.csv", [&](std::ostream& s) {
            s << "step,date,theta,S,X,sigma_sq\n";
            for (std::size_t i = 0; i < first.S.size(); ++i) {
              const Date d = i == 0 ? series.dates()[split.test_begin - 1] : outcome.test_dates[i - 1];
              s << i << ',' << format_date(d) << ',' << (i == 0 ? 0 : to_int(regimes[i - 1])) << ','
                << format_double(first.S[i]) << ',' << format_double(first.X[i]) << ','
                << format_double(first.sigma_sq[i]) << '\n';
            }
          });
          return json{{"Lambda", params.Lambda},
                      {"lambda_estimated", cfg.simulation.estimate_lambda},
                      {"lambda_warning", est.warning},
                      {"up_count", est.up_count},
                      {"mean_up_return", est.mean_up_return},
                      {"steps", regimes.size()},
                      {"paths", cfg.simulation.paths},
                      {"jumps_first_path", first.jumps.size()},
                      {"terminal_price_mean", terminal / static_cast<double>(cfg.simulation.paths)}};
        });
      }
      stocks.push_back(std::move(report));
    }

    json doc;
    doc["format"] = "trendlab-report";
    doc["version"] = 1;
    doc["test_label"] = cfg.test.label;
    doc["seed"] = cfg.seed;
    doc["config"] = cfg.to_json();
    json order = json::array();
    for (auto k : cfg.classifiers) order.push_back(to_string(k));
    doc["classifier_order"] = order;
    doc["summary_classifier"] = to_string(primary);
    const auto pooled = accuracy_and_f1(pooled_target, pooled_primary);
    doc["accuracy"] = pooled.accuracy;
    doc["weighted_f1"] = pooled.weighted_f1;
    double ks_d = 0.0, ks_p = 0.0, kl = 0.0;
    for (const auto& s : stocks) {
      ks_d += s["ks_statistic"].get<double>();
      ks_p += s["ks_p_value"].get<double>();
      kl += s["kl_entropy"].get<double>();
    }
    const double n = static_cast<double>(stocks.size());
    doc["ks_statistic"] = ks_d / n;
    doc["ks_p_value"] = ks_p / n;
    doc["kl_entropy"] = kl / n;
    doc["stocks"] = std::move(stocks);

    RunReport report = RunReport::from_json(doc);
    stage("report", [&] {
      write_file(out / "report.json", [&](std::ostream& s) { s << doc.dump(2) << '\n'; });
      const RunReport one[] = {report};
      emit_tables(one, out / "tables");
      return 0;
    });
    fs::remove(stale);
    return report;
  } catch (const StageError& e) {
    std::ofstream s(stale, std::ios::binary);
    s << "stage: " << e.stage() << "\ncause: " << e.what() << '\n';
    throw;
  }
}

std::vector<fs::path> emit_tables(std::span<const RunReport> reports, const fs::path& out_dir) {
  if (reports.empty()) throw AggregationError("tables: no reports given");
  std::set<std::string> first;
  for (const auto& s : reports.front().stocks) first.insert(s.name);
  std::set<std::string> labels;
  for (const auto& r : reports) {
    std::set<std::string> names;
    for (const auto& s : r.stocks) {
      if (!names.insert(s.name).second) {
        throw AggregationError("tables: stock '" + s.name + "' appears twice in report '" + r.test_label + "'");
      }
    }
    if (names != first) {
      throw AggregationError("tables: report '" + r.test_label + "' covers a different set of stocks");
    }
    if (!labels.insert(r.test_label).second) {
      throw AggregationError("tables: two reports share the test label '" + r.test_label + "'");
    }
  }
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const auto& r : reports) {
    for (const char* metric : {"accuracy", "f1"}) {
      const fs::path path = out_dir / (std::string(metric) + "_" + r.test_label + ".csv");
      write_file(path, [&](std::ostream& s) {
        s << "stock";
        if (!r.stocks.empty()) {
          for (const auto& c : r.stocks.front().classifiers) s << ',' << to_string(c.first);
        }
        s << '\n';
        for (const auto& st : r.stocks) {
          s << st.name;
          for (const auto& c : st.classifiers) {
            s << ',' << format_double(metric[0] == 'a' ? c.second.accuracy : c.second.weighted_f1);
          }
          s << '\n';
        }
      });
      written.push_back(path);
    }
    const fs::path fit = out_dir / ("fit_" + r.test_label + ".csv");
    write_file(fit, [&](std::ostream& s) {
      s << "stock,ks_p_value,kl_entropy\n";
      for (const auto& st : r.stocks) {
        s << st.name << ',' << format_double(st.ks_p_value) << ',' << format_double(st.kl_entropy) << '\n';
      }
    });
    written.push_back(fit);
  }
  return written;
}

}  // namespace trendlab
