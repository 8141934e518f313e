#include "trendlab/config.hpp"

#include <fstream>
#include <set>

#include "trendlab/error.hpp"

namespace trendlab {

using nlohmann::json;

namespace {

// Reads keys from one object, remembering which were seen so leftovers can
// be reported.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return name_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(name_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

template <typename F>
auto wrap(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Date date_from(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a YYYY-MM-DD string");
  return wrap(where, [&] { return parse_date(j.get<std::string>()); });
}

}  // namespace

json to_json(const IndicatorConfig& c) {
  return {{"macd_fast", c.macd_fast},     {"macd_slow", c.macd_slow}, {"macd_signal", c.macd_signal},
          {"rsi_period", c.rsi_period},   {"trix_period", c.trix_period}, {"bb_period", c.bb_period},
          {"bb_width", c.bb_width},       {"momentum_lag", c.momentum_lag}, {"vol_window", c.vol_window}};
}

IndicatorConfig indicator_config_from_json(const json& j) {
  IndicatorConfig c;
  Section s(j, "indicators");
  s.get("macd_fast", c.macd_fast);
  s.get("macd_slow", c.macd_slow);
  s.get("macd_signal", c.macd_signal);
  s.get("rsi_period", c.rsi_period);
  s.get("trix_period", c.trix_period);
  s.get("bb_period", c.bb_period);
  s.get("bb_width", c.bb_width);
  s.get("momentum_lag", c.momentum_lag);
  s.get("vol_window", c.vol_window);
  s.finish();
  wrap("indicators", [&] { c.validate(); return 0; });
  return c;
}

json to_json(const LabelConfig& c) {
  return {{"rsi_overbought", c.signals.rsi_overbought},
          {"rsi_oversold", c.signals.rsi_oversold},
          {"invert_crossing", c.signals.invert_crossing},
          {"horizon", c.target.horizon},
          {"margin", c.target.margin},
          {"prose_polarity", c.target.prose_polarity},
          {"price", to_string(c.price)},
          {"sma_period", c.sma_period}};
}

LabelConfig label_config_from_json(const json& j) {
  LabelConfig c;
  Section s(j, "labels");
  s.get("rsi_overbought", c.signals.rsi_overbought);
  s.get("rsi_oversold", c.signals.rsi_oversold);
  s.get("invert_crossing", c.signals.invert_crossing);
  s.get("horizon", c.target.horizon);
  s.get("margin", c.target.margin);
  s.get("prose_polarity", c.target.prose_polarity);
  std::string price(to_string(c.price));
  s.get("price", price);
  c.price = wrap("labels.price", [&] { return parse_price_field(price); });
  s.get("sma_period", c.sma_period);
  s.finish();
  if (c.target.horizon < 1) throw ConfigError("labels.horizon must be >= 1");
  if (!(c.target.margin >= 0.0)) throw ConfigError("labels.margin must be >= 0");
  if (c.sma_period < 1) throw ConfigError("labels.sma_period must be >= 1");
  if (!(c.signals.rsi_oversold <= c.signals.rsi_overbought)) {
    throw ConfigError("labels: rsi_oversold must not exceed rsi_overbought");
  }
  return c;
}

json to_json(const TrainConfig& c) {
  json features = json::array();
  for (auto f : c.features) features.push_back(to_string(f));
  return {{"layers", c.layers},
          {"hidden", c.hidden},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"batch", c.batch},
          {"seed", c.seed},
          {"features", features},
          {"optimizer", c.optimizer == OptimizerKind::adam ? "adam" : "sgd"},
          {"input_len", c.input_len},
          {"horizon", c.horizon},
          {"forget_bias", c.forget_bias},
          {"target_scale", c.target_scale == TargetScale::anchored ? "anchored" : "level"}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  Section s(j, "forecaster");
  s.get("layers", c.layers);
  s.get("hidden", c.hidden);
  s.get("epochs", c.epochs);
  s.get("learning_rate", c.learning_rate);
  s.get("batch", c.batch);
  s.get("seed", c.seed);
  if (const json* f = s.child("features")) {
    if (!f->is_array()) throw ConfigError("forecaster.features: expected an array");
    c.features.clear();
    for (const auto& name : *f) {
      if (!name.is_string()) throw ConfigError("forecaster.features: expected names");
      c.features.push_back(
          wrap("forecaster.features", [&] { return parse_forecast_feature(name.get<std::string>()); }));
    }
  }
  std::string opt = c.optimizer == OptimizerKind::adam ? "adam" : "sgd";
  s.get("optimizer", opt);
  if (opt == "adam") {
    c.optimizer = OptimizerKind::adam;
  } else if (opt == "sgd") {
    c.optimizer = OptimizerKind::sgd;
  } else {
    throw ConfigError("forecaster.optimizer: expected adam or sgd, got '" + opt + "'");
  }
  s.get("input_len", c.input_len);
  s.get("horizon", c.horizon);
  s.get("forget_bias", c.forget_bias);
  std::string scale = c.target_scale == TargetScale::anchored ? "anchored" : "level";
  s.get("target_scale", scale);
  if (scale == "anchored") {
    c.target_scale = TargetScale::anchored;
  } else if (scale == "level") {
    c.target_scale = TargetScale::level;
  } else {
    throw ConfigError("forecaster.target_scale: expected anchored or level, got '" + scale + "'");
  }
  s.finish();
  wrap("forecaster", [&] { c.validate(); return 0; });
  return c;
}

json to_json(const ClassifierConfig& c) {
  return {{"forest",
           {{"trees", c.forest.trees},
            {"max_features", c.forest.max_features},
            {"max_depth", c.forest.max_depth},
            {"min_samples_split", c.forest.min_samples_split},
            {"bootstrap", c.forest.bootstrap}}},
          {"svm", {{"lambda", c.svm.lambda}, {"epochs", c.svm.epochs}}},
          {"gbt",
           {{"stages", c.gbt.stages},
            {"max_depth", c.gbt.max_depth},
            {"shrinkage", c.gbt.shrinkage},
            {"min_samples_split", c.gbt.min_samples_split}}}};
}

ClassifierConfig classifier_config_from_json(const json& j) {
  ClassifierConfig c;
  Section s(j, "classifier");
  if (const json* f = s.child("forest")) {
    Section fs(*f, "classifier.forest");
    fs.get("trees", c.forest.trees);
    fs.get("max_features", c.forest.max_features);
    fs.get("max_depth", c.forest.max_depth);
    fs.get("min_samples_split", c.forest.min_samples_split);
    fs.get("bootstrap", c.forest.bootstrap);
    fs.finish();
  }
  if (const json* v = s.child("svm")) {
    Section vs(*v, "classifier.svm");
    vs.get("lambda", c.svm.lambda);
    vs.get("epochs", c.svm.epochs);
    vs.finish();
  }
  if (const json* g = s.child("gbt")) {
    Section gs(*g, "classifier.gbt");
    gs.get("stages", c.gbt.stages);
    gs.get("max_depth", c.gbt.max_depth);
    gs.get("shrinkage", c.gbt.shrinkage);
    gs.get("min_samples_split", c.gbt.min_samples_split);
    gs.finish();
  }
  s.finish();
  if (c.forest.trees < 1) throw ConfigError("classifier.forest.trees must be >= 1");
  if (c.forest.min_samples_split < 2) throw ConfigError("classifier.forest.min_samples_split must be >= 2");
  if (!(c.svm.lambda > 0.0)) throw ConfigError("classifier.svm.lambda must be > 0");
  if (c.svm.epochs < 1) throw ConfigError("classifier.svm.epochs must be >= 1");
  if (c.gbt.stages < 1) throw ConfigError("classifier.gbt.stages must be >= 1");
  if (c.gbt.max_depth < 1) throw ConfigError("classifier.gbt.max_depth must be >= 1");
  if (!(c.gbt.shrinkage > 0.0)) throw ConfigError("classifier.gbt.shrinkage must be > 0");
  if (c.gbt.min_samples_split < 2) throw ConfigError("classifier.gbt.min_samples_split must be >= 2");
  return c;
}

json to_json(const BnsParams& p) {
  return {{"S0", p.S0},
          {"B", p.B},
          {"Lambda", p.Lambda},
          {"rho", p.rho},
          {"lambda_rate", p.lambda_rate},
          {"sigma0_sq", p.sigma0_sq},
          {"jump_rate", p.jump_rate},
          {"jump_mean", p.jump_mean},
          {"dt", p.dt}};
}

BnsParams bns_params_from_json(const json& j) {
  BnsParams p;
  Section s(j, "bns");
  s.get("S0", p.S0);
  s.get("B", p.B);
  s.get("Lambda", p.Lambda);
  s.get("rho", p.rho);
  s.get("lambda_rate", p.lambda_rate);
  s.get("sigma0_sq", p.sigma0_sq);
  s.get("jump_rate", p.jump_rate);
  s.get("jump_mean", p.jump_mean);
  s.get("dt", p.dt);
  s.finish();
  wrap("bns", [&] { p.validate(); return 0; });
  return p;
}

TestPlan test_preset(std::string_view name) {
  TestPlan plan;
  plan.label = std::string(name);
  if (name == "spring2021") {
    plan.start = parse_date("2021-02-22");
    plan.end = parse_date("2021-04-26");
  } else if (name == "summer2021") {
    plan.start = parse_date("2021-04-27");
    plan.end = parse_date("2021-06-25");
  } else {
    throw ConfigError("test.preset: unknown preset '" + std::string(name) + "' (expected spring2021 or summer2021)");
  }
  return plan;
}

PipelineConfig PipelineConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  Section s(j, "config");
  if (const json* seed = s.child("seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0)) {
      throw ConfigError("config.seed: expected a non-negative integer");
    }
    c.seed = seed->get<std::uint64_t>();
    c.seed_set = true;
  }
  std::string out = c.output_dir.string();
  s.get("output_dir", out);
  c.output_dir = out;
  if (c.output_dir.is_relative()) c.output_dir = base_dir / c.output_dir;

  if (const json* stocks = s.child("stocks")) {
    if (!stocks->is_array()) throw ConfigError("config.stocks: expected an array");
    for (const auto& entry : *stocks) {
      Section ss(entry, "config.stocks[]");
      StockSource src;
      std::string path;
      ss.get("name", src.name);
      ss.get("path", path);
      ss.finish();
      if (src.name.empty() || path.empty()) throw ConfigError("config.stocks[]: name and path are required");
      src.path = path;
      if (src.path.is_relative()) src.path = base_dir / src.path;
      c.stocks.push_back(std::move(src));
    }
  }
  if (const json* cutoff = s.child("train_cutoff")) c.train_cutoff = date_from(*cutoff, "config.train_cutoff");

  if (const json* t = s.child("test")) {
    Section ts(*t, "config.test");
    std::string preset;
    ts.get("preset", preset);
    if (!preset.empty()) c.test = test_preset(preset);
    ts.get("label", c.test.label);
    ts.get("windows", c.test.windows);
    ts.get("window_len", c.test.window_len);
    if (const json* d = ts.child("start")) c.test.start = date_from(*d, "config.test.start");
    if (const json* d = ts.child("end")) c.test.end = date_from(*d, "config.test.end");
    ts.finish();
  }
  if (const json* x = s.child("indicators")) c.indicators = indicator_config_from_json(*x);
  if (const json* x = s.child("labels")) c.labels = label_config_from_json(*x);
  if (const json* x = s.child("forecaster")) c.forecaster = train_config_from_json(*x);
  if (const json* x = s.child("classifiers")) {
    if (!x->is_array()) throw ConfigError("config.classifiers: expected an array of names");
    c.classifiers.clear();
    for (const auto& name : *x) {
      if (!name.is_string()) throw ConfigError("config.classifiers: expected names");
      c.classifiers.push_back(parse_classifier_kind(name.get<std::string>()));
    }
  }
  if (const json* x = s.child("classifier")) c.classifier = classifier_config_from_json(*x);
  std::string retrain = "once";
  s.get("retrain", retrain);
  if (retrain == "once") {
    c.retrain = RetrainMode::once;
  } else if (retrain == "rolling") {
    c.retrain = RetrainMode::rolling;
  } else {
    throw ConfigError("config.retrain: expected once or rolling, got '" + retrain + "'");
  }
  s.get("rolling_rows", c.rolling_rows);
  if (const json* e = s.child("evaluation")) {
    Section es(*e, "config.evaluation");
    es.get("kl_bins", c.evaluation.kl_bins);
    es.get("kl_smoothing", c.evaluation.kl_smoothing);
    es.get("ar_order", c.evaluation.ar_order);
    es.get("ar_difference", c.evaluation.ar_difference);
    es.finish();
  }
  if (const json* b = s.child("simulation")) {
    Section bs(*b, "config.simulation");
    bs.get("enabled", c.simulation.enabled);
    bs.get("estimate_lambda", c.simulation.estimate_lambda);
    bs.get("paths", c.simulation.paths);
    if (const json* p = bs.child("params")) c.simulation.params = bns_params_from_json(*p);
    bs.finish();
  }
  s.finish();
  // The forecaster seed follows the global seed unless set explicitly.
  const json* fc = j.contains("forecaster") ? &j.at("forecaster") : nullptr;
  if (!(fc && fc->is_object() && fc->contains("seed"))) c.forecaster.seed = c.seed;
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

json PipelineConfig::to_json() const {
  json stock_list = json::array();
  for (const auto& st : stocks) stock_list.push_back({{"name", st.name}, {"path", st.path.string()}});
  json kinds = json::array();
  for (auto k : classifiers) kinds.push_back(trendlab::to_string(k));
  json test_j = {{"label", test.label}, {"windows", test.windows}, {"window_len", test.window_len}};
  test_j["start"] = test.start ? json(format_date(*test.start)) : json(nullptr);
  test_j["end"] = test.end ? json(format_date(*test.end)) : json(nullptr);
  return {{"seed", seed},
          {"output_dir", output_dir.string()},
          {"stocks", stock_list},
          {"train_cutoff", train_cutoff ? json(format_date(*train_cutoff)) : json(nullptr)},
          {"test", test_j},
          {"indicators", trendlab::to_json(indicators)},
          {"labels", trendlab::to_json(labels)},
          {"forecaster", trendlab::to_json(forecaster)},
          {"classifiers", kinds},
          {"classifier", trendlab::to_json(classifier)},
          {"retrain", retrain == RetrainMode::once ? "once" : "rolling"},
          {"rolling_rows", rolling_rows},
          {"evaluation",
           {{"kl_bins", evaluation.kl_bins},
            {"kl_smoothing", evaluation.kl_smoothing},
            {"ar_order", evaluation.ar_order},
            {"ar_difference", evaluation.ar_difference}}},
          {"simulation",
           {{"enabled", simulation.enabled},
            {"estimate_lambda", simulation.estimate_lambda},
            {"paths", simulation.paths},
            {"params", trendlab::to_json(simulation.params)}}}};
}

void PipelineConfig::validate() const {
  if (!seed_set) throw ConfigError("config.seed is required");
  if (stocks.empty()) throw ConfigError("config.stocks: at least one stock is required");
  std::set<std::string> names;
  for (const auto& st : stocks) {
    if (!names.insert(st.name).second) throw ConfigError("config.stocks: duplicate name '" + st.name + "'");
    if (!std::filesystem::is_regular_file(st.path)) {
      throw ConfigError("config.stocks: file for '" + st.name + "' not found: " + st.path.string());
    }
  }
  if (classifiers.empty()) throw ConfigError("config.classifiers: at least one kind is required");
  if (test.window_len < 1 || test.windows < 1) throw ConfigError("config.test: windows and window_len must be >= 1");
  if (test.window_len != forecaster.horizon) {
    throw ConfigError("config.test.window_len must equal forecaster.horizon (" +
                      std::to_string(forecaster.horizon) + ")");
  }
  if (test.start && test.end && !(*test.start <= *test.end)) {
    throw ConfigError("config.test: start must not be after end");
  }
  if (train_cutoff && test.start && !(*train_cutoff < *test.start)) {
    throw ConfigError("config.train_cutoff must precede config.test.start");
  }
  if (rolling_rows < 2) throw ConfigError("config.rolling_rows must be >= 2");
  if (evaluation.kl_bins < 1) throw ConfigError("config.evaluation.kl_bins must be >= 1");
  if (!(evaluation.kl_smoothing >= 0.0)) throw ConfigError("config.evaluation.kl_smoothing must be >= 0");
  if (simulation.paths < 1) throw ConfigError("config.simulation.paths must be >= 1");
  wrap("config.simulation.params", [&] { simulation.params.validate(); return 0; });
}

const StockSource& PipelineConfig::stock(std::string_view name) const {
  for (const auto& st : stocks) {
    if (st.name == name) return st;
  }
  throw ConfigError("no stock named '" + std::string(name) + "' in the config");
}

}  // namespace trendlab
