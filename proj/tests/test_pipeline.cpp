#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "trendlab/config.hpp"
#include "trendlab/error.hpp"
#include "trendlab/pipeline.hpp"

using namespace trendlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = fs::path(TRENDLAB_DATA_DIR) / "synthetic_bns.csv";

json fast_config(const fs::path& out) {
  return json{{"seed", 3},
              {"output_dir", out.string()},
              {"stocks", {{{"name", "SYN"}, {"path", kData.string()}}}},
              {"forecaster", {{"epochs", 2}, {"hidden", 6}, {"layers", 1}}},
              {"classifier",
               {{"forest", {{"trees", 15}}}, {"svm", {{"epochs", 20}}}, {"gbt", {{"stages", 10}}}}}};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = s.str();
  }
  return files;
}

StockSummary summary(const std::string& name, std::span<const ClassifierKind> kinds) {
  StockSummary s;
  s.name = name;
  s.ks_p_value = 0.5;
  s.kl_entropy = 0.01;
  for (auto k : kinds) {
    ClassificationMetrics m;
    m.accuracy = 0.75;
    m.weighted_f1 = 0.7;
    s.classifiers.emplace_back(k, m);
  }
  return s;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("config defaults and partial sections") {
  const auto cfg = PipelineConfig::from_json(fast_config("out"), "/base");
  CHECK(cfg.seed == 3);
  CHECK(cfg.forecaster.seed == 3);
  CHECK(cfg.forecaster.epochs == 2);
  CHECK(cfg.forecaster.layers == 1);
  CHECK(cfg.forecaster.learning_rate == 1e-3);
  CHECK(cfg.classifier.forest.trees == 15);
  CHECK(cfg.classifier.forest.bootstrap);
  CHECK(cfg.test.windows == 4);
  CHECK(cfg.test.window_len == 7);
  CHECK(cfg.output_dir == fs::path("/base/out"));
  CHECK(cfg.classifiers.size() == 3);
  CHECK_NOTHROW(cfg.validate());
  // every default is written back
  const auto again = PipelineConfig::from_json(cfg.to_json(), "/elsewhere");
  CHECK(again.to_json() == cfg.to_json());
}

TEST_CASE("config errors") {
  auto load = [](json j) { return PipelineConfig::from_json(j, "."); };
  auto j = fast_config("out");
  j["classifiers"] = {"forest", "knn"};
  CHECK_THROWS_AS(load(j), ConfigError);
  j = fast_config("out");
  j["forecaster"]["hiden"] = 3;
  CHECK_THROWS_AS(load(j), ConfigError);
  j = fast_config("out");
  j.erase("seed");
  CHECK_THROWS_AS(load(j).validate(), ConfigError);
  j = fast_config("out");
  j["stocks"][0]["path"] = "/no/such/file.csv";
  CHECK_THROWS_AS(load(j).validate(), ConfigError);
  j = fast_config("out");
  j["stocks"].push_back(j["stocks"][0]);
  CHECK_THROWS_AS(load(j).validate(), ConfigError);
  j = fast_config("out");
  j["test"] = {{"window_len", 5}};
  CHECK_THROWS_AS(load(j).validate(), ConfigError);
  j = fast_config("out");
  j["train_cutoff"] = "2021-03-01";
  j["test"] = {{"start", "2021-02-01"}};
  CHECK_THROWS_AS(load(j).validate(), ConfigError);
  j = fast_config("out");
  j["simulation"] = {{"params", {{"rho", 0.5}}}};
  CHECK_THROWS_AS(load(j).validate(), ConfigError);
  j = fast_config("out");
  j["test"] = {{"preset", "winter1999"}};
  CHECK_THROWS_AS(load(j), ConfigError);
}

TEST_CASE("named test presets") {
  const auto t4 = test_preset("spring2021");
  CHECK(format_date(*t4.start) == "2021-02-22");
  CHECK(format_date(*t4.end) == "2021-04-26");
  const auto t6 = test_preset("summer2021");
  CHECK(format_date(*t6.start) == "2021-04-27");
  CHECK(format_date(*t6.end) == "2021-06-25");
}

TEST_CASE("test split resolution") {
  const auto series = testutil::closes(oracle::random_walk(300, 1));
  auto cfg = PipelineConfig::from_json(fast_config("out"), ".");
  auto split = resolve_test_split(series, cfg);
  CHECK(split.windows == 4);
  CHECK(split.window_len == 7);
  CHECK(split.test_end() == 300);
  CHECK(split.test_begin == 272);
  CHECK(split.train_end == 272);

  cfg.train_cutoff = series.dates()[199];
  split = resolve_test_split(series, cfg);
  CHECK(split.train_end == 200);
  CHECK(split.test_begin == 200);

  cfg.train_cutoff.reset();
  cfg.test.start = series.dates()[250];
  cfg.test.end = series.dates()[299];
  split = resolve_test_split(series, cfg);
  CHECK(split.test_begin == 250);
  CHECK(split.windows == 7);  // 50 rows hold 7 whole windows

  const auto tiny = testutil::closes(oracle::random_walk(60, 1));
  cfg.test.start.reset();
  cfg.test.end.reset();
  CHECK_THROWS_AS(resolve_test_split(tiny, cfg), InsufficientDataError);
}

TEST_CASE("run writes the report and artifacts") {
  const auto dir = testutil::scratch_dir("run");
  const auto cfg = PipelineConfig::from_json(fast_config(dir), ".");
  const auto report = run_pipeline(cfg);
  const auto doc = json::parse(std::ifstream(dir / "report.json"));
  for (const char* key : {"accuracy", "weighted_f1", "ks_statistic", "ks_p_value", "kl_entropy", "config", "seed"}) {
    CHECK(doc.contains(key));
  }
  CHECK(doc["config"] == cfg.to_json());
  CHECK(report.stocks.size() == 1);
  CHECK(report.stocks[0].classifiers.size() == 3);
  CHECK_FALSE(fs::exists(dir / "STALE"));
  for (const char* f : {"forecaster.json", "loss.csv", "features.csv", "classifier_forest.json", "classifier_svm.json",
                        "classifier_gbt.json", "forecast.csv", "signals.csv", "indicator_signals.csv",
                        "summary.csv", "bns_path.csv"}) {
    CHECK(fs::exists(dir / "SYN" / f));
  }
  const auto forecast = lines(dir / "SYN" / "forecast.csv");
  CHECK(forecast.size() == 1 + 28);
  const auto summary = lines(dir / "SYN" / "summary.csv");
  REQUIRE(summary.size() == 9);
  CHECK(summary[0] == "stat,Open,High,Low,Close,Adj Close,Volume,SMA close,EMA close,up,down,RSI close");
  const auto reloaded = RunReport::load(dir / "report.json");
  CHECK(reloaded.stocks[0].classifiers[0].second.accuracy == report.stocks[0].classifiers[0].second.accuracy);
  const auto m = report.stocks[0].classifiers[0].second;
  CHECK(doc["accuracy"].get<double>() == m.accuracy);
  CHECK(doc["weighted_f1"].get<double>() == m.weighted_f1);
}

TEST_CASE("rerun into a cleared directory reproduces every artifact") {
  const auto dir = testutil::scratch_dir("determinism");
  const auto cfg = PipelineConfig::from_json(fast_config(dir), ".");
  run_pipeline(cfg);
  const auto first = snapshot(dir);
  fs::remove_all(dir);
  run_pipeline(cfg);
  const auto second = snapshot(dir);
  CHECK(first.size() == second.size());
  for (const auto& [name, bytes] : first) {
    INFO(name);
    CHECK(second.count(name) == 1);
    if (second.count(name)) CHECK(second.at(name) == bytes);
  }
}

TEST_CASE("rolling retrain mode runs") {
  const auto dir = testutil::scratch_dir("rolling");
  auto j = fast_config(dir);
  j["retrain"] = "rolling";
  j["classifiers"] = {"forest"};
  const auto report = run_pipeline(PipelineConfig::from_json(j, "."));
  CHECK(report.stocks[0].classifiers.size() == 1);
}

TEST_CASE("failing stage is named and leaves a stale marker") {
  const auto dir = testutil::scratch_dir("stale");
  write_ohlcv_csv(dir / "short.csv", testutil::closes(oracle::random_walk(50, 2)));
  auto j = fast_config(dir / "out");
  j["stocks"] = {{{"name", "TINY"}, {"path", (dir / "short.csv").string()}}};
  try {
    run_pipeline(PipelineConfig::from_json(j, "."));
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "split[TINY]");
  }
  CHECK(fs::exists(dir / "out" / "STALE"));
  CHECK_FALSE(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("tables for several stocks and classifiers") {
  const auto dir = testutil::scratch_dir("tables");
  const std::vector<ClassifierKind> all{ClassifierKind::forest, ClassifierKind::svm, ClassifierKind::gbt};
  RunReport a, b;
  a.test_label = "spring2021";
  b.test_label = "summer2021";
  for (const char* s : {"AAPL", "AMZN", "GOOG", "MSFT"}) {
    a.stocks.push_back(summary(s, all));
    b.stocks.push_back(summary(s, all));
  }
  const std::vector<RunReport> reports{a, b};
  const auto files = emit_tables(reports, dir);
  CHECK(files.size() == 6);
  const auto acc = lines(dir / "accuracy_spring2021.csv");
  REQUIRE(acc.size() == 5);
  CHECK(acc[0] == "stock,forest,svm,gbt");
  CHECK(acc[1] == "AAPL,0.75,0.75,0.75");
  CHECK(lines(dir / "f1_summer2021.csv")[4] == "MSFT,0.7,0.7,0.7");
  const auto fit = lines(dir / "fit_spring2021.csv");
  CHECK(fit[0] == "stock,ks_p_value,kl_entropy");
  CHECK(fit[2] == "AMZN,0.5,0.01");
}

TEST_CASE("single stock single classifier table") {
  const auto dir = testutil::scratch_dir("tables1");
  RunReport r;
  r.test_label = "one";
  const std::vector<ClassifierKind> forest{ClassifierKind::forest};
  r.stocks.push_back(summary("SYN", forest));
  emit_tables(std::vector<RunReport>{r}, dir);
  CHECK(lines(dir / "accuracy_one.csv") == std::vector<std::string>{"stock,forest", "SYN,0.75"});
  CHECK(lines(dir / "f1_one.csv") == std::vector<std::string>{"stock,forest", "SYN,0.7"});
}

TEST_CASE("table aggregation errors") {
  const auto dir = testutil::scratch_dir("tables_bad");
  const std::vector<ClassifierKind> forest{ClassifierKind::forest};
  RunReport a, b;
  a.test_label = "x";
  b.test_label = "y";
  a.stocks.push_back(summary("AAPL", forest));
  b.stocks.push_back(summary("MSFT", forest));
  CHECK_THROWS_AS(emit_tables(std::vector<RunReport>{a, b}, dir), AggregationError);
  b.stocks = a.stocks;
  b.test_label = "x";
  CHECK_THROWS_AS(emit_tables(std::vector<RunReport>{a, b}, dir), AggregationError);
  CHECK_THROWS_AS(emit_tables(std::vector<RunReport>{}, dir), AggregationError);
}

TEST_CASE("command line exit codes") {
  const auto dir = testutil::scratch_dir("cli");
  const std::string cli = TRENDLAB_CLI;
  auto j = fast_config(dir / "out");
  j["classifiers"] = {"knn"};
  std::ofstream(dir / "bad.json") << j.dump();
  auto status = std::system((cli + " run --config " + (dir / "bad.json").string() + " > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 2);
  CHECK_FALSE(fs::exists(dir / "out"));

  status = std::system((cli + " simulate --out " + (dir / "sim").string() +
                        " --steps 40 --regimes down --seed 4 > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(read_ohlcv_csv(dir / "sim" / "ohlcv.csv").size() == 41);

  write_ohlcv_csv(dir / "short.csv", testutil::closes(oracle::random_walk(50, 2)));
  j = fast_config(dir / "out2");
  j["stocks"] = {{{"name", "TINY"}, {"path", (dir / "short.csv").string()}}};
  std::ofstream(dir / "short.json") << j.dump();
  status = std::system((cli + " run --config " + (dir / "short.json").string() + " 2> " +
                        (dir / "err.txt").string() + " > /dev/null").c_str());
  CHECK(WEXITSTATUS(status) == 1);
  const auto err = lines(dir / "err.txt");
  REQUIRE_FALSE(err.empty());
  CHECK(err[0].find("split[TINY]") != std::string::npos);
}
