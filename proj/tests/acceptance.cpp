// Acceptance checks 1-9. One line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "checks.hpp"
#include "helpers.hpp"
#include "trendlab/bns.hpp"
#include "trendlab/classifier.hpp"
#include "trendlab/config.hpp"
#include "trendlab/evaluation.hpp"
#include "trendlab/pipeline.hpp"
#include "trendlab/text.hpp"

using namespace trendlab;
namespace fs = std::filesystem;

namespace {

const fs::path kConfig = fs::path(TRENDLAB_CONFIG_DIR) / "synthetic.json";
const fs::path kBundled = fs::path(TRENDLAB_DATA_DIR) / "synthetic_bns.csv";

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Planted series for criterion 7: the last 60 steps are a 25-step hold block
// and a 35-step up block, so the 28 test rows start a week into an up regime.
RegimePlan e2e_plan() {
  RegimePlan plan;
  plan.n_steps = 600;
  plan.tail = parse_regime_blocks("hold:25,up:35");
  return plan;
}

Outcome indicators() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) worst = std::max(worst, checks::indicator_oracle_deviation(1000, seed));
  o.detail << "max |deviation| " << fmt(worst) << " over 3 seeded 1000-point walks";
  o.require(worst <= 1e-9, "deviation > 1e-9");
  return o;
}

Outcome gradient() {
  Outcome o;
  const auto g = checks::lstm_gradient_check(3, 4, 1, 10, 7, 1e-5);
  o.detail << g.parameters << " parameters, max relative error " << fmt(g.max_rel_error);
  o.require(g.max_rel_error <= 1e-4, "relative error > 1e-4");
  return o;
}

Outcome sine() {
  Outcome o;
  const auto r = checks::sine_learning(200, 16, 3, 0);
  const double ratio = r.persistence_mse / r.lstm_mse;
  o.detail << "held-out MSE " << fmt(r.lstm_mse) << " vs persistence " << fmt(r.persistence_mse) << " (ratio "
           << fmt(ratio) << ", " << r.test_windows << " windows)";
  o.require(ratio >= 2.0, "ratio < 2");
  return o;
}

Outcome classifiers() {
  Outcome o;
  auto data = [](const Eigen::MatrixXd& x, const std::vector<Theta>& y) {
    LabeledDataset d;
    d.x = x;
    d.y = y;
    for (Eigen::Index c = 0; c < x.cols(); ++c) d.feature_names.push_back("f" + std::to_string(c));
    return d;
  };
  auto acc = [](const std::vector<Theta>& a, const std::vector<Theta>& b) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
    return static_cast<double>(hit) / static_cast<double>(a.size());
  };

  // (a) random labels on distinct points are consistent by construction
  double worst_train = 1.0;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> lab(-1, 1);
  for (int rep = 0; rep < 3; ++rep) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(200, 13);
    std::vector<Theta> y;
    for (int i = 0; i < 200; ++i) y.push_back(theta_from_int(lab(rng)));
    const auto m = train_classifier(data(x, y), ClassifierKind::forest, {}, static_cast<std::uint64_t>(rep));
    worst_train = std::min(worst_train, acc(predict_labels(m, x), y));
  }
  const auto blobs200 = checks::gaussian_blobs(67, 0.5, 3);
  const Eigen::MatrixXd bx = blobs200.x.topRows(200);
  const std::vector<Theta> by(blobs200.y.begin(), blobs200.y.begin() + 200);
  worst_train = std::min(worst_train, acc(predict_labels(train_classifier(data(bx, by), ClassifierKind::forest, {}, 1), bx), by));
  o.detail << "(a) forest training accuracy " << fmt(worst_train);
  o.require(worst_train == 1.0, "training accuracy < 1");

  // (b)
  const auto train = checks::gaussian_blobs(100, 0.5, 10), test = checks::gaussian_blobs(100, 0.5, 11);
  o.detail << "; (b) blob test accuracy";
  for (auto kind : {ClassifierKind::forest, ClassifierKind::svm, ClassifierKind::gbt}) {
    const double a = acc(predict_labels(train_classifier(data(train.x, train.y), kind, {}, 5), test.x), test.y);
    o.detail << ' ' << to_string(kind) << ' ' << fmt(a);
    o.require(a >= 0.9, std::string(to_string(kind)) + " below 0.90");
  }

  // (c)
  std::uniform_int_distribution<int> bit(0, 1), cls(0, 2), size(2, 8);
  std::size_t mismatches = 0, cases = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const int n = size(rng);
    Eigen::MatrixXd x(n, 2);
    std::vector<int> c;
    for (int i = 0; i < n; ++i) {
      x(i, 0) = bit(rng);
      x(i, 1) = bit(rng);
      c.push_back(cls(rng));
    }
    std::vector<std::size_t> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::mt19937_64 tree_rng(rep);
    const Tree t = grow_classification_tree(x, c, rows, {}, tree_rng);
    std::map<std::pair<double, double>, std::array<double, 3>> cells;
    for (int i = 0; i < n; ++i) cells[{x(i, 0), x(i, 1)}][static_cast<std::size_t>(c[static_cast<std::size_t>(i)])] += 1;
    bool same = true;
    for (int i = 0; i < n; ++i) same &= t.predict(x.row(i)) == class_theta(argmax_prefer_hold(cells[{x(i, 0), x(i, 1)}]));
    if (!t.nodes[0].is_leaf()) {
      same &= std::abs(checks::weighted_child_gini(x, c, t.nodes[0].feature, t.nodes[0].threshold) -
                       checks::best_gini_split(x, c)) < 1e-12;
    }
    ++cases;
    mismatches += !same;
  }
  o.detail << "; (c) " << cases - mismatches << "/" << cases << " small trees at the Gini optimum";
  o.require(mismatches == 0, "tree differs from the exhaustive optimum");
  return o;
}

Outcome statistics() {
  Outcome o;
  const std::vector<double> a{0.3, 1.7, 2.2, 2.2, 5.0};
  const auto same = ks_two_sample(a, a);
  o.detail << "KS identical D " << fmt(same.statistic) << " p " << fmt(same.p_value);
  o.require(same.statistic == 0.0 && same.p_value == 1.0, "identical samples");

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z0(0.0, 1.0), z3(3.0, 1.0);
  std::vector<double> x(200), y(200);
  for (auto& v : x) v = z0(rng);
  for (auto& v : y) v = z3(rng);
  const auto shifted = ks_two_sample(x, y);
  o.detail << "; N(0,1) vs N(3,1) p " << fmt(shifted.p_value);
  o.require(shifted.p_value < 1e-6, "shifted normals p >= 1e-6");

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t negative = 0, zero_off_identity = 0, nonzero_identity = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    Histogram p, q;
    const int k = 2 + trial % 20;
    double sp = 0.0, sq = 0.0;
    for (int i = 0; i <= k; ++i) {
      p.edges.push_back(i);
      q.edges.push_back(i);
    }
    for (int i = 0; i < k; ++i) {
      p.masses.push_back(u(rng));
      q.masses.push_back(u(rng));
      sp += p.masses.back();
      sq += q.masses.back();
    }
    for (auto& m : p.masses) m /= sp;
    for (auto& m : q.masses) m /= sq;
    const double d = kl_divergence(p, q);
    negative += d < 0.0;
    zero_off_identity += d == 0.0;
    nonzero_identity += std::abs(kl_divergence(p, p)) > 1e-12;
  }
  o.detail << "; KL over 10000 pairs: " << negative << " negative, " << zero_off_identity << " zero off identity, "
           << nonzero_identity << " nonzero at identity";
  o.require(negative == 0 && zero_off_identity == 0 && nonzero_identity == 0, "KL property");

  const std::vector<Theta> t{Theta::up, Theta::up, Theta::hold, Theta::hold};
  const std::vector<Theta> pr{Theta::up, Theta::hold, Theta::hold, Theta::hold};
  const auto m = accuracy_and_f1(t, pr);
  o.detail << "; hand case accuracy " << fmt(m.accuracy) << " F1 " << fmt(m.weighted_f1);
  o.require(std::abs(m.accuracy - 0.75) <= 1e-4 && std::abs(m.weighted_f1 - 0.7333) <= 1e-4, "F1 hand case");
  return o;
}

Outcome monte_carlo() {
  Outcome o;
  BnsParams p;
  p.B = 0.1;
  p.jump_rate = 0.0;
  p.sigma0_sq = 0.04;
  p.lambda_rate = 1e-8;  // variance must stay at 0.04; lambda itself has to be positive
  const std::vector<Theta> hold(252, Theta::hold);
  const auto xt = monte_carlo_terminal_x(p, hold, 252, 100000, 42);
  const double n = static_cast<double>(xt.size());
  const double mean = std::accumulate(xt.begin(), xt.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : xt) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  o.detail << "mean X_T " << fmt(mean) << " (SE " << fmt(se) << ", target 0.08)";
  o.require(std::abs(mean - 0.08) <= 3.0 * se, "mean outside 3 SE");

  BnsParams sv;  // lambda 2, a 5, mean jump 0.02
  const std::size_t steps = 200 * 252;
  const auto path = simulate_bns_path(sv, std::vector<Theta>(steps, Theta::hold), steps, 7);
  const double avg = std::accumulate(path.sigma_sq.begin(), path.sigma_sq.end(), 0.0) /
                     static_cast<double>(path.sigma_sq.size());
  o.detail << "; sigma^2 time average " << fmt(avg) << " (target 0.1)";
  o.require(std::abs(avg - 0.1) <= 0.01, "stationary level off by more than 10%");

  std::size_t x_jumps = 0, jumps = 0;
  for (auto theta : {Theta::hold, Theta::up}) {
    const auto pth = simulate_bns_path(sv, std::vector<Theta>(2520, theta), 2520, 11);
    jumps += pth.jumps.size();
    for (const auto& j : pth.jumps) x_jumps += j.x_increment != 0.0;
  }
  o.detail << "; hold/up paths: " << jumps << " variance jumps, " << x_jumps << " reach X";
  o.require(jumps > 0 && x_jumps == 0, "jumps in X outside the down regime");
  return o;
}

struct E2e {
  fs::path dir;
  PipelineConfig cfg;
};

E2e e2e_setup() {
  E2e e;
  e.dir = testutil::scratch_dir("acceptance_e2e");
  e.cfg = PipelineConfig::load(kConfig);
  const auto planted = simulate_planted(e.cfg.simulation.params, e2e_plan(), e.cfg.seed, parse_date("2018-01-02"));
  write_ohlcv_csv(e.dir / "synthetic_bns.csv", planted.bars);
  e.cfg.stocks = {{"SYN", e.dir / "synthetic_bns.csv"}};
  e.cfg.output_dir = e.dir / "out";
  return e;
}

Outcome end_to_end(const E2e& e) {
  Outcome o;
  const bool bundled = slurp(e.dir / "synthetic_bns.csv") == slurp(kBundled);
  o.detail << "series " << (bundled ? "matches" : "differs from") << " data/synthetic_bns.csv; ";
  o.require(bundled, "regenerated series differs from the bundled file");
  const auto report = run_pipeline(e.cfg);
  const auto& doc = report.document;
  const double acc = doc.at("accuracy").get<double>(), f1 = doc.at("weighted_f1").get<double>();
  o.detail << doc.at("summary_classifier").get<std::string>() << " accuracy " << fmt(acc) << " weighted F1 " << fmt(f1)
           << " (";
  for (const auto& [kind, m] : report.stocks[0].classifiers) {
    o.detail << to_string(kind) << ' ' << fmt(m.accuracy) << '/' << fmt(m.weighted_f1) << ' ';
  }
  const auto& fc = doc.at("stocks")[0].at("forecaster");
  o.detail << "; LSTM MSE " << fmt(fc.at("mse").get<double>()) << " vs persistence "
           << fmt(fc.at("persistence_mse").get<double>()) << ")";
  o.require(acc >= 0.80, "accuracy < 0.80");
  o.require(f1 >= 0.75, "weighted F1 < 0.75");
  return o;
}

Outcome determinism(const E2e& e) {
  Outcome o;
  std::map<std::string, std::string> first;
  for (const auto& f : fs::recursive_directory_iterator(e.cfg.output_dir)) {
    if (f.is_regular_file()) first[fs::relative(f.path(), e.cfg.output_dir).string()] = slurp(f.path());
  }
  fs::remove_all(e.cfg.output_dir);
  run_pipeline(e.cfg);
  std::size_t differ = 0, seen = 0;
  for (const auto& f : fs::recursive_directory_iterator(e.cfg.output_dir)) {
    if (!f.is_regular_file()) continue;
    ++seen;
    const auto key = fs::relative(f.path(), e.cfg.output_dir).string();
    differ += !first.count(key) || first[key] != slurp(f.path());
  }
  const bool report_same = first.count("report.json") && first["report.json"] == slurp(e.cfg.output_dir / "report.json");
  o.detail << "report.json " << (report_same ? "byte-identical" : "differs") << "; " << seen - differ << "/" << seen
           << " artifacts identical after clearing the output directory";
  o.require(report_same, "report differs");
  o.require(differ == 0 && seen == first.size(), "artifacts differ");
  return o;
}

Outcome table_layout() {
  Outcome o;
  const auto dir = testutil::scratch_dir("acceptance_tables");
  auto cfg = PipelineConfig::load(kConfig);
  cfg.stocks.clear();
  for (std::uint64_t s = 1; s <= 4; ++s) {
    const auto planted = simulate_planted(cfg.simulation.params, e2e_plan(), s, parse_date("2018-01-02"));
    const auto path = dir / ("S" + std::to_string(s) + ".csv");
    write_ohlcv_csv(path, planted.bars);
    cfg.stocks.push_back({"S" + std::to_string(s), path});
  }
  cfg.output_dir = dir / "out";
  cfg.simulation.enabled = false;
  const auto report = run_pipeline(cfg);

  const auto acc = csv_lines(dir / "out" / "tables" / "accuracy_synthetic.csv");
  const auto f1 = csv_lines(dir / "out" / "tables" / "f1_synthetic.csv");
  const auto fit = csv_lines(dir / "out" / "tables" / "fit_synthetic.csv");
  auto shape_ok = [](const std::vector<std::string>& t, const std::string& header, std::size_t cells) {
    if (t.size() != 5 || t[0] != header) return false;
    for (std::size_t r = 1; r < t.size(); ++r) {
      const auto f = split_csv_line(t[r]);
      if (f.size() != cells || f[0] != "S" + std::to_string(r)) return false;
      for (std::size_t c = 1; c < f.size(); ++c) {
        if (!parse_double(f[c])) return false;
      }
    }
    return true;
  };
  const bool a_ok = shape_ok(acc, "stock,forest,svm,gbt", 4), f_ok = shape_ok(f1, "stock,forest,svm,gbt", 4);
  const bool fit_ok = shape_ok(fit, "stock,ks_p_value,kl_entropy", 3);
  o.detail << "accuracy " << (a_ok ? "4x3" : "malformed") << ", F1 " << (f_ok ? "4x3" : "malformed")
           << ", fit table " << (fit_ok ? "4 x (p-value, entropy)" : "malformed");
  o.require(a_ok && f_ok && fit_ok, "table layout");

  // the same tables from report files through the aggregation path
  const auto reloaded = RunReport::load(dir / "out" / "report.json");
  const auto again = emit_tables(std::vector<RunReport>{reloaded}, dir / "again");
  bool same = again.size() == 3;
  for (const auto& p : again) same = same && slurp(p) == slurp(dir / "out" / "tables" / p.filename());
  o.detail << "; re-emitted from report.json " << (same ? "identical" : "different");
  o.require(same, "tables from the saved report differ");
  o.detail << "; 4-stock summary accuracy " << fmt(report.document.at("accuracy").get<double>());
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  std::optional<E2e> e2e;
  const std::vector<Criterion> criteria{
      {1, "indicator oracle suite", 1.0, indicators},
      {2, "LSTM gradient check", 10.0, gradient},
      {3, "LSTM learning check", 120.0, sine},
      {4, "classifier suite", 30.0, classifiers},
      {5, "statistics suite", 0.0, statistics},
      {6, "BN-S Monte Carlo", 120.0, monte_carlo},
      {7, "end-to-end synthetic run", 300.0,
       [&] {
         e2e = e2e_setup();
         return end_to_end(*e2e);
       }},
      {8, "determinism", 0.0, [&] { return determinism(*e2e); }},
      {9, "report table layout", 0.0, table_layout},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0.0 && secs >= c.limit_s) {
      o.pass = false;
      o.detail << " [failed: runtime limit " << fmt(c.limit_s) << " s]";
    }
    failed += !o.pass;
    std::printf("%s criterion %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
