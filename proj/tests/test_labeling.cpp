#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "trendlab/error.hpp"
#include "trendlab/labeling.hpp"

using namespace trendlab;

namespace {

IndicatorSeries series_of(std::vector<double> v) { return IndicatorSeries{std::move(v), 0}; }

std::vector<int> thetas(const std::vector<Signal>& s) {
  std::vector<int> out;
  for (const auto& x : s) out.push_back(to_int(x.theta));
  return out;
}

}  // namespace

TEST_CASE("rsi rule is per position with strict thresholds") {
  const auto r = series_of({50, 75, 75, 25, 70, 30, 70.0001});
  IndicatorBundle b;
  b.rsi = &r;
  CHECK(thetas(indicator_signal(SignalSource::rsi, b)) == std::vector<int>{0, -1, -1, 1, 0, 0, -1});
}

TEST_CASE("macd first-crossing rule") {
  const auto line = series_of({-1, 1, 2, -1});
  const auto sig = series_of({0, 0, 0, 0});
  IndicatorBundle b;
  b.macd_line = &line;
  b.macd_signal = &sig;
  CHECK(thetas(indicator_signal(SignalSource::macd, b)) == std::vector<int>{0, -1, 0, 1});
  SignalOptions flipped;
  flipped.invert_crossing = true;
  CHECK(thetas(indicator_signal(SignalSource::macd, b, flipped)) == std::vector<int>{0, 1, 0, -1});
}

TEST_CASE("trix crossings against zero and warm-up flags") {
  IndicatorSeries tx{{kMissing, kMissing, 0.5, -0.2, -0.1, 0.3}, 2};
  IndicatorBundle b;
  b.trix = &tx;
  const auto s = indicator_signal(SignalSource::trix, b);
  CHECK(thetas(s) == std::vector<int>{0, 0, 0, 1, 0, -1});
  CHECK(s[0].warmup);
  CHECK(s[1].warmup);
  CHECK_FALSE(s[2].warmup);
  CHECK(s[3].source == SignalSource::trix);
}

TEST_CASE("bollinger rule") {
  const auto up = series_of({20, 20, 20});
  const auto lo = series_of({12, 12, 12});
  const std::vector<double> close{10, 25, 15};
  IndicatorBundle b;
  b.bb_upper = &up;
  b.bb_lower = &lo;
  b.close = close;
  CHECK(thetas(indicator_signal(SignalSource::bbands, b)) == std::vector<int>{1, -1, 0});
}

TEST_CASE("missing series is an input error") {
  IndicatorBundle b;
  CHECK_THROWS_AS(indicator_signal(SignalSource::macd, b), InputError);
  CHECK_THROWS_AS(indicator_signal(SignalSource::rsi, b), InputError);
  CHECK_THROWS_AS(indicator_signal(SignalSource::trix, b), InputError);
  CHECK_THROWS_AS(indicator_signal(SignalSource::bbands, b), InputError);
}

TEST_CASE("target rule examples") {
  auto at_end = [](double now, TargetOptions opt = {}) {
    std::vector<double> c(16, 100.0);
    c.back() = now;
    return to_int(target_theta(c, opt).back().theta);
  };
  CHECK(at_end(121) == 1);
  CHECK(at_end(110) == 0);
  CHECK(at_end(90) == 0);
  CHECK(at_end(85) == -1);
  CHECK(at_end(110.0001) == 1);
  TargetOptions prose;
  prose.prose_polarity = true;
  CHECK(at_end(121, prose) == -1);
  CHECK(at_end(85, prose) == 1);

  std::vector<double> c(16, 100.0);
  const auto t = target_theta(c);
  for (std::size_t i = 0; i < 15; ++i) CHECK(t[i].warmup);
  CHECK_FALSE(t[15].warmup);
  CHECK_THROWS_AS(target_theta(std::vector<double>(15, 1.0)), InsufficientDataError);
}

TEST_CASE("target is invariant under price scaling") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = oracle::random_walk(200, seed);
    for (auto& v : p) v *= 1.0 + 0.05 * static_cast<double>(seed);  // widen moves a little
    std::vector<double> scaled;
    for (double v : p) scaled.push_back(v * 4.0);
    CHECK(thetas(target_theta(p)) == thetas(target_theta(scaled)));
  }
}

TEST_CASE("feature matrix shape and warm-up") {
  const auto s = testutil::closes(oracle::random_walk(120, 6));
  const auto f = build_feature_matrix(s, {});
  CHECK(f.values.cols() == 13);
  CHECK(kFeatureNames.size() == 13);
  CHECK(feature_warmup({}) == 43);
  CHECK(f.rows() == 120 - 43);
  CHECK(f.source_rows.front() == 43);
  CHECK(f.dates.front() == s.dates()[43]);
}

TEST_CASE("forty-row series") {
  const auto s = testutil::closes(oracle::random_walk(40, 1));
  CHECK_THROWS_AS(build_feature_matrix(s, {}), InsufficientDataError);
  IndicatorConfig short_trix;
  short_trix.trix_period = 5;
  // warm-ups: sma 19, macd line 25, signal 33, bb 19, rsi 14, trix 13, target 15 -> rows 33..39
  const auto f = build_feature_matrix(s, short_trix);
  CHECK(f.rows() == 7);
  CHECK(f.source_rows.front() == 33);
}

TEST_CASE("constant price series features") {
  const auto s = testutil::closes(std::vector<double>(80, 25.0));
  const auto f = build_feature_matrix(s, {});
  for (Eigen::Index r = 0; r < f.values.rows(); ++r) {
    CHECK(f.values(r, 0) == 25.0);
    CHECK(f.values(r, 1) == doctest::Approx(25.0));
    CHECK(f.values(r, 2) == 0.0);
    CHECK(f.values(r, 3) == 0.0);
    CHECK(f.values(r, 4) == 0.0);
    CHECK(f.values(r, 5) == 0.0);
    CHECK(f.values(r, 6) == 0.0);
    CHECK(f.values(r, 7) == doctest::Approx(25.0));
    CHECK(f.values(r, 8) == doctest::Approx(25.0));
    CHECK(f.values(r, 9) == 0.0);
    CHECK(f.values(r, 11) == 0.0);
    CHECK(f.target[static_cast<std::size_t>(r)] == Theta::hold);
  }
}

TEST_CASE("feature sign columns match recomputed signals") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = oracle::random_walk(300, seed + 40);
    const auto s = testutil::closes(p);
    const IndicatorConfig cfg;
    const auto f = build_feature_matrix(s, cfg);
    const auto m = macd(p, cfg);
    const auto r = rsi(p, cfg.rsi_period);
    const auto t = trix(p, cfg.trix_period);
    const auto bb = bollinger(p, cfg.bb_period, cfg.bb_width);
    IndicatorBundle b{&m.macd_line, &m.signal_line, &r, &t, &bb.upper, &bb.lower, p};
    const auto ms = indicator_signal(SignalSource::macd, b);
    const auto rs = indicator_signal(SignalSource::rsi, b);
    const auto ts = indicator_signal(SignalSource::trix, b);
    const auto bs = indicator_signal(SignalSource::bbands, b);
    const auto target = target_theta(p);
    for (std::size_t row = 0; row < f.rows(); ++row) {
      const auto src = f.source_rows[row];
      const auto i = static_cast<Eigen::Index>(row);
      CHECK(f.values(i, 2) == to_int(ms[src].theta));
      CHECK(f.values(i, 6) == to_int(bs[src].theta));
      CHECK(f.values(i, 9) == to_int(rs[src].theta));
      CHECK(f.values(i, 11) == to_int(ts[src].theta));
      CHECK(f.values(i, 5) == doctest::Approx(f.values(i, 3) - f.values(i, 4)));
      CHECK(f.target[row] == target[src].theta);
    }
  }
}

TEST_CASE("macd and trix signals alternate in sign") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = oracle::random_walk(400, seed + 100);
    const auto m = macd(p);
    const auto t = trix(p, 15);
    IndicatorBundle b;
    b.macd_line = &m.macd_line;
    b.macd_signal = &m.signal_line;
    b.trix = &t;
    for (auto kind : {SignalSource::macd, SignalSource::trix}) {
      int last = 0;
      for (const auto& s : indicator_signal(kind, b)) {
        const int v = to_int(s.theta);
        if (v == 0) continue;
        CHECK(v != last);
        last = v;
      }
    }
  }
}

TEST_CASE("feature csv layout") {
  const auto s = testutil::closes(oracle::random_walk(50, 2));
  const auto f = build_feature_matrix(s, {});
  std::ostringstream out;
  write_feature_csv(out, f);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "date,close,sma20,macd_sign,macd_signal_line,macd_line,macd_diff,bb_sign,bb_upper,bb_lower,"
        "rsi_sign,rsi_close,trix_sign,trix_line,target");
}

TEST_CASE("theta and rule names") {
  CHECK(theta_from_int(-1) == Theta::down);
  CHECK_THROWS_AS(theta_from_int(2), InputError);
  CHECK(parse_signal_source("bbands") == SignalSource::bbands);
  CHECK(to_string(SignalSource::macd) == "macd");
  CHECK_THROWS_AS(parse_signal_source("obv"), InputError);
}
