// Command-line front end: one verb per pipeline stage plus `run` and `tables`.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trendlab/bns.hpp"
#include "trendlab/config.hpp"
#include "trendlab/error.hpp"
#include "trendlab/pipeline.hpp"
#include "trendlab/text.hpp"

namespace fs = std::filesystem;
using namespace trendlab;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string stock;
};

void add_common(CLI::App* app, CommonOptions& opts, bool config_required = true) {
  auto* c = app->add_option("--config", opts.config, "pipeline config (JSON)");
  if (config_required) c->required();
  app->add_option("--seed", opts.seed, "overrides the config seed");
  app->add_option("--out", opts.out, "output directory (overrides the config)");
  app->add_option("--stock", opts.stock, "restrict to one configured stock");
}

PipelineConfig load_config(const CommonOptions& opts) {
  PipelineConfig cfg = PipelineConfig::load(opts.config);
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.seed_set = true;
    cfg.forecaster.seed = *opts.seed;
  }
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  if (!opts.stock.empty()) {
    const StockSource one = cfg.stock(opts.stock);
    cfg.stocks = {one};
  }
  cfg.validate();
  return cfg;
}

template <typename F>
void stage(const std::string& name, F&& f) {
  try {
    f();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

// Runs `body` once per configured stock with that stock's series and output directory.
template <typename F>
void for_each_stock(const PipelineConfig& cfg, const std::string& verb, F&& body) {
  for (const auto& src : cfg.stocks) {
    stage(verb + "[" + src.name + "]", [&] {
      const OhlcvSeries series = read_ohlcv_csv(src.path);
      const fs::path dir = cfg.output_dir / src.name;
      fs::create_directories(dir);
      body(src, series, dir);
    });
  }
}

std::vector<ClassifierModel> load_once_models(const PipelineConfig& cfg, const fs::path& dir) {
  std::vector<ClassifierModel> models;
  if (cfg.retrain == RetrainMode::once) {
    for (auto kind : cfg.classifiers) {
      models.push_back(load_classifier(dir / ("classifier_" + std::string(to_string(kind)) + ".json")));
    }
  }
  return models;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trendlab: indicator features, LSTM forecasts, trend classifiers and regime simulation"};
  app.require_subcommand(1);

  CommonOptions opts;
  auto* ingest = app.add_subcommand("ingest", "validate OHLCV files and write them back normalized");
  auto* features = app.add_subcommand("features", "compute indicator columns");
  auto* label = app.add_subcommand("label", "build the classification features, signals and targets");
  auto* train_fc = app.add_subcommand("train-forecaster", "train the LSTM forecaster on the training split");
  auto* forecast = app.add_subcommand("forecast", "forecast every test window with a trained forecaster");
  auto* train_cl = app.add_subcommand("train-classifier", "train the configured classifiers");
  auto* classify = app.add_subcommand("classify", "classify the forecast test windows");
  auto* evaluate = app.add_subcommand("evaluate", "score forecasts and classifications");
  auto* run = app.add_subcommand("run", "run every stage end to end");
  for (auto* sub : {ingest, features, label, train_fc, forecast, train_cl, classify, evaluate, run}) {
    add_common(sub, opts);
  }

  auto* simulate = app.add_subcommand("simulate", "simulate a regime-driven price path");
  add_common(simulate, opts, false);
  std::size_t steps = 600, min_block = 30, max_block = 60;
  std::string regimes = "planted", start = "2018-01-02";
  std::vector<std::string> overrides;
  simulate->add_option("--steps", steps, "number of steps");
  simulate->add_option("--regimes", regimes, "planted, hold, up or down")->capture_default_str();
  simulate->add_option("--min-block", min_block, "shortest planted regime block");
  simulate->add_option("--max-block", max_block, "longest planted regime block");
  std::string tail;
  simulate->add_option("--tail", tail, "fixed closing blocks, e.g. up:30,down:30");
  simulate->add_option("--start", start, "date of the first bar")->capture_default_str();
  simulate->add_option("--set", overrides, "parameter override KEY=VALUE (S0, B, Lambda, rho, ...)");

  std::vector<std::string> report_files;
  std::string tables_out = "tables";
  auto* tables = app.add_subcommand("tables", "merge run reports into accuracy / F1 / fit tables");
  tables->add_option("reports", report_files, "report.json files")->required()->check(CLI::ExistingFile);
  tables->add_option("--out", tables_out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const auto cfg = load_config(opts);
      for_each_stock(cfg, "ingest", [&](const StockSource& src, const OhlcvSeries& s, const fs::path& dir) {
        auto out = open_out(dir / "ohlcv.csv");
        write_ohlcv_csv(out, s);
        std::cout << src.name << ": " << s.size() << " rows " << format_date(s.dates().front()) << ".."
                  << format_date(s.dates().back()) << '\n';
      });
    } else if (*features) {
      const auto cfg = load_config(opts);
      for_each_stock(cfg, "features", [&](const StockSource&, const OhlcvSeries& s, const fs::path& dir) {
        auto out = open_out(dir / "indicators.csv");
        write_indicators(out, s, cfg);
        auto summary = open_out(dir / "summary.csv");
        write_summary_csv(summary, summary_stats(eda_columns(s, cfg)));
      });
    } else if (*label) {
      const auto cfg = load_config(opts);
      for_each_stock(cfg, "label", [&](const StockSource& src, const OhlcvSeries& s, const fs::path& dir) {
        const auto frame = build_feature_matrix(s, cfg.indicators, cfg.labels);
        auto out = open_out(dir / "features.csv");
        write_feature_csv(out, frame);
        auto sig = open_out(dir / "indicator_signals.csv");
        write_indicator_signals(sig, s, cfg);
        std::cout << src.name << ": " << frame.rows() << " labeled rows\n";
      });
    } else if (*train_fc) {
      const auto cfg = load_config(opts);
      for_each_stock(cfg, "train-forecaster",
                     [&](const StockSource& src, const OhlcvSeries& s, const fs::path& dir) {
                       const auto split = resolve_test_split(s, cfg);
                       const auto model = fit_stock_forecaster(s, split, cfg);
                       save_forecaster(dir / "forecaster.json", model);
                       auto out = open_out(dir / "loss.csv");
                       write_loss_csv(out, model.loss_curve);
                       std::cout << src.name << ": final loss " << format_double(model.loss_curve.back()) << '\n';
                     });
    } else if (*forecast) {
      const auto cfg = load_config(opts);
      for_each_stock(cfg, "forecast", [&](const StockSource&, const OhlcvSeries& s, const fs::path& dir) {
        const auto split = resolve_test_split(s, cfg);
        const auto model = load_forecaster(dir / "forecaster.json");
        const auto& prices = s.prices(cfg.labels.price);
        auto out = open_out(dir / "forecast.csv");
        out << "date,window,actual,lstm,ar\n";
        std::size_t k = 0;
        for (const auto& w : forecast_test_windows(model, s, split, cfg)) {
          ++k;
          for (std::size_t i = 0; i < w.lstm.size(); ++i) {
            out << format_date(s.dates()[w.begin + i]) << ',' << k << ',' << format_double(prices[w.begin + i])
                << ',' << format_double(w.lstm[i]) << ',' << format_double(w.ar[i]) << '\n';
          }
        }
      });
    } else if (*train_cl) {
      const auto cfg = load_config(opts);
      for_each_stock(cfg, "train-classifier",
                     [&](const StockSource& src, const OhlcvSeries& s, const fs::path& dir) {
                       const auto split = resolve_test_split(s, cfg);
                       for (auto kind : cfg.classifiers) {
                         const auto model = fit_stock_classifier(s, split.train_end, kind, cfg);
                         save_classifier(dir / ("classifier_" + std::string(to_string(kind)) + ".json"), model);
                         std::cout << src.name << ": trained " << to_string(kind) << '\n';
                       }
                     });
    } else if (*classify || *evaluate) {
      const auto cfg = load_config(opts);
      const std::string verb = *classify ? "classify" : "evaluate";
      for_each_stock(cfg, verb, [&](const StockSource& src, const OhlcvSeries& s, const fs::path& dir) {
        const auto split = resolve_test_split(s, cfg);
        const auto forecaster = load_forecaster(dir / "forecaster.json");
        const auto models = load_once_models(cfg, dir);
        const auto outcome = evaluate_stock(src.name, s, split, forecaster, models, cfg);
        if (*classify) {
          auto out = open_out(dir / "signals.csv");
          out << "date,target";
          for (const auto& p : outcome.predicted) out << ',' << to_string(p.first);
          out << '\n';
          for (std::size_t i = 0; i < outcome.test_dates.size(); ++i) {
            out << format_date(outcome.test_dates[i]) << ',' << to_int(outcome.target[i]);
            for (const auto& p : outcome.predicted) out << ',' << to_int(p.second[i]);
            out << '\n';
          }
        } else {
          const auto report = stock_report(outcome, cfg);
          auto out = open_out(dir / "evaluation.json");
          out << report.dump(2) << '\n';
          std::cout << report.dump(2) << '\n';
        }
      });
    } else if (*run) {
      const auto cfg = load_config(opts);
      const auto report = run_pipeline(cfg);
      const auto& d = report.document;
      std::cout << "accuracy " << format_double(d["accuracy"].get<double>()) << "\nweighted_f1 "
                << format_double(d["weighted_f1"].get<double>()) << "\nks_statistic "
                << format_double(d["ks_statistic"].get<double>()) << "\nks_p_value "
                << format_double(d["ks_p_value"].get<double>()) << "\nkl_entropy "
                << format_double(d["kl_entropy"].get<double>()) << "\nreport "
                << (cfg.output_dir / "report.json").string() << '\n';
    } else if (*simulate) {
      stage("simulate", [&] {
        BnsParams params;
        std::uint64_t seed = 0;
        fs::path out_dir = "simulation";
        if (!opts.config.empty()) {
          const auto cfg = PipelineConfig::load(opts.config);
          params = cfg.simulation.params;
          seed = cfg.seed;
          out_dir = cfg.output_dir;
        }
        if (opts.seed) seed = *opts.seed;
        if (!opts.out.empty()) out_dir = opts.out;
        nlohmann::json p = to_json(params);
        for (const auto& kv : overrides) {
          const auto eq = kv.find('=');
          const auto value = eq == std::string::npos ? std::nullopt : parse_double(kv.substr(eq + 1));
          if (!value) throw ConfigError("--set expects KEY=NUMBER, got '" + kv + "'");
          p[kv.substr(0, eq)] = *value;
        }
        params = bns_params_from_json(p);

        std::vector<Theta> path_regimes;
        BnsPath path;
        OhlcvSeries bars;
        if (regimes == "planted") {
          RegimePlan plan{steps, min_block, max_block, {}};
          try {
            plan.tail = parse_regime_blocks(tail);
          } catch (const ParameterError& e) {
            throw ConfigError(std::string("--tail: ") + e.what());
          }
          auto planted = simulate_planted(params, plan, seed, parse_date(start));
          path_regimes = std::move(planted.regimes);
          path = std::move(planted.path);
          bars = std::move(planted.bars);
        } else if (regimes == "hold" || regimes == "up" || regimes == "down") {
          const Theta t = regimes == "hold" ? Theta::hold : regimes == "up" ? Theta::up : Theta::down;
          path_regimes.assign(steps, t);
          path = simulate_bns_path(params, path_regimes, steps, derive_seed(seed, 2));
          bars = bns_path_to_ohlcv(path, parse_date(start));
        } else {
          throw ConfigError("--regimes: expected planted, hold, up or down");
        }
        auto ohlcv = open_out(out_dir / "ohlcv.csv");
        write_ohlcv_csv(ohlcv, bars);
        auto csv = open_out(out_dir / "path.csv");
        csv << "step,date,theta,S,X,sigma_sq\n";
        for (std::size_t i = 0; i < path.S.size(); ++i) {
          csv << i << ',' << format_date(bars.dates()[i]) << ','
              << (i < path_regimes.size() ? to_int(path_regimes[i]) : 0) << ',' << format_double(path.S[i])
              << ',' << format_double(path.X[i]) << ',' << format_double(path.sigma_sq[i]) << '\n';
        }
        std::cout << "simulated " << steps << " steps, " << path.jumps.size() << " jumps, S_T "
                  << format_double(path.S.back()) << '\n';
      });
    } else if (*tables) {
      stage("tables", [&] {
        std::vector<RunReport> reports;
        for (const auto& f : report_files) reports.push_back(RunReport::load(f));
        for (const auto& p : emit_tables(reports, tables_out)) std::cout << p.string() << '\n';
      });
    }
  } catch (const ConfigError& e) {
    std::cerr << "error [config]: " << e.what() << '\n';
    return 2;
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
