#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "trendlab/bns.hpp"
#include "trendlab/error.hpp"
#include "trendlab/random.hpp"

using namespace trendlab;

namespace {

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

std::vector<Theta> repeat(Theta t, std::size_t n) { return std::vector<Theta>(n, t); }

}  // namespace

TEST_CASE("degenerate path is deterministic drift") {
  BnsParams p;
  p.jump_rate = 0.0;
  p.sigma0_sq = 0.0;
  p.B = 0.1;
  p.Lambda = 0.3;
  std::vector<Theta> regimes;
  for (int i = 0; i < 90; ++i) regimes.push_back(theta_from_int(i % 3 - 1));
  const auto path = simulate_bns_path(p, regimes, regimes.size(), 4);
  double x = 0.0;
  for (std::size_t i = 0; i < regimes.size(); ++i) {
    x += p.drift(regimes[i]) * p.dt;
    CHECK(path.X[i + 1] == doctest::Approx(x).epsilon(1e-12));
    CHECK(path.sigma_sq[i + 1] == 0.0);
    CHECK(path.S[i + 1] == doctest::Approx(p.S0 * std::exp(path.X[i + 1])).epsilon(1e-12));
  }
  CHECK(path.jumps.empty());
  CHECK(p.drift(Theta::up) == doctest::Approx(0.1 + 0.09));
  CHECK(p.drift(Theta::down) == 0.1);
  // a second seed changes nothing when there is no randomness left
  CHECK(simulate_bns_path(p, regimes, regimes.size(), 5).X == path.X);
}

TEST_CASE("jumps never reach X outside the down regime") {
  BnsParams p;
  p.jump_rate = 50.0;
  for (auto theta : {Theta::hold, Theta::up}) {
    const auto path = simulate_bns_path(p, repeat(theta, 500), 500, 8);
    REQUIRE_FALSE(path.jumps.empty());
    for (const auto& j : path.jumps) CHECK(j.x_increment == 0.0);
  }
  CHECK(p.jump_loading(Theta::hold) == 0.0);
  CHECK(p.jump_loading(Theta::up) == 0.0);
  CHECK(p.jump_loading(Theta::down) == p.rho);
}

TEST_CASE("down-regime jumps push X down") {
  BnsParams p;
  p.jump_rate = 50.0;
  const auto path = simulate_bns_path(p, repeat(Theta::down, 500), 500, 9);
  REQUIRE(path.jumps.size() > 10);
  for (const auto& j : path.jumps) {
    CHECK(j.size > 0.0);
    CHECK(j.x_increment <= 0.0);
    CHECK(j.x_increment == doctest::Approx(p.rho * j.size));
  }
}

TEST_CASE("variance stays positive and decays between jumps") {
  BnsParams p;
  p.jump_rate = 0.5;
  p.lambda_rate = 40.0;
  const auto path = simulate_bns_path(p, repeat(Theta::down, 2000), 2000, 3);
  for (double v : path.sigma_sq) CHECK(v > 0.0);
  BnsParams quiet = p;
  quiet.jump_rate = 0.0;
  const auto decay = simulate_bns_path(quiet, repeat(Theta::hold, 10), 10, 3);
  for (std::size_t i = 1; i < decay.sigma_sq.size(); ++i) {
    CHECK(decay.sigma_sq[i] == doctest::Approx(decay.sigma_sq[i - 1] * std::exp(-quiet.lambda_rate * quiet.dt)));
  }
}

TEST_CASE("stationary variance level") {
  BnsParams p;  // lambda 2, a 5, mean jump 0.02
  const std::size_t n = 200 * 252;
  const auto path = simulate_bns_path(p, repeat(Theta::hold, n), n, 1);
  const double avg = std::accumulate(path.sigma_sq.begin(), path.sigma_sq.end(), 0.0) /
                     static_cast<double>(path.sigma_sq.size());
  INFO("time average " << avg);
  CHECK(std::abs(avg - 0.1) <= 0.01);
}

TEST_CASE("constant-volatility mean of X_T") {
  BnsParams p;
  p.jump_rate = 0.0;
  p.sigma0_sq = 0.04;
  p.lambda_rate = 1e-8;
  p.B = 0.1;
  const auto x = monte_carlo_terminal_x(p, repeat(Theta::hold, 252), 252, 20000, 5);
  const auto s = mean_se(x);
  CHECK(std::abs(s.mean - 0.08) <= 3.0 * s.se);
  // sd of X_T is sigma sqrt(T) = 0.2
  CHECK(s.se * std::sqrt(20000.0) == doctest::Approx(0.2).epsilon(0.03));
}

TEST_CASE("standard error shrinks like one over root n") {
  BnsParams p;
  p.dt = 1.0 / 52.0;
  const auto regimes = repeat(Theta::down, 52);
  const auto base = mean_se(monte_carlo_terminal_x(p, regimes, 52, 4000, 12));
  const auto twice = mean_se(monte_carlo_terminal_x(p, regimes, 52, 8000, 12));
  const auto four = mean_se(monte_carlo_terminal_x(p, regimes, 52, 16000, 12));
  CHECK(twice.se == doctest::Approx(base.se / std::sqrt(2.0)).epsilon(0.1));
  CHECK(four.se == doctest::Approx(base.se / 2.0).epsilon(0.1));
}

TEST_CASE("monte carlo paths are seeded per path") {
  BnsParams p;
  const auto regimes = repeat(Theta::down, 20);
  const auto a = monte_carlo_terminal_x(p, regimes, 20, 50, 3);
  const auto b = monte_carlo_terminal_x(p, regimes, 20, 80, 3);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
  CHECK(simulate_bns_path(p, regimes, 20, derive_seed(3, 7)).X.back() == a[7]);
}

TEST_CASE("lambda estimate recovers the injected drift") {
  BnsParams p;
  p.B = 0.05;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 1e-3);
  std::vector<double> close{100.0};
  std::vector<Theta> theta;
  for (int t = 0; t < 1000; ++t) {
    close.push_back(close.back() * std::exp((p.B + 0.09) * p.dt + noise(rng)));
    theta.push_back(Theta::up);
  }
  theta.push_back(Theta::hold);
  const auto series = testutil::closes(close);
  const auto est = estimate_big_lambda(series, theta, p);
  CHECK(est.Lambda >= 0.25);
  CHECK(est.Lambda <= 0.35);
  CHECK(est.up_count == 1000);
  CHECK_FALSE(est.warning);

  std::vector<double> flat{100.0};
  for (int t = 0; t < 50; ++t) flat.push_back(flat.back() * std::exp(p.B * p.dt));
  const auto none = estimate_big_lambda(testutil::closes(flat), std::vector<Theta>(51, Theta::up), p);
  CHECK(none.Lambda == doctest::Approx(0.0).epsilon(1e-6));

  const auto holds = estimate_big_lambda(series, std::vector<Theta>(series.size(), Theta::hold), p);
  CHECK(holds.Lambda == 0.0);
  CHECK(holds.warning);
  CHECK_THROWS_AS(estimate_big_lambda(series, std::vector<Theta>(3, Theta::up), p), AlignmentError);
}

TEST_CASE("parameter validation") {
  auto bad = [](auto edit) {
    BnsParams p;
    edit(p);
    return p;
  };
  CHECK_THROWS_AS(bad([](BnsParams& p) { p.rho = 0.1; }).validate(), ParameterError);
  CHECK_THROWS_AS(bad([](BnsParams& p) { p.lambda_rate = 0.0; }).validate(), ParameterError);
  CHECK_THROWS_AS(bad([](BnsParams& p) { p.dt = 0.0; }).validate(), ParameterError);
  CHECK_THROWS_AS(bad([](BnsParams& p) { p.jump_rate = -1.0; }).validate(), ParameterError);
  CHECK_THROWS_AS(bad([](BnsParams& p) { p.jump_mean = 0.0; }).validate(), ParameterError);
  CHECK_THROWS_AS(bad([](BnsParams& p) { p.sigma0_sq = -0.1; }).validate(), ParameterError);
  CHECK_THROWS_AS(bad([](BnsParams& p) { p.Lambda = -0.1; }).validate(), ParameterError);
  CHECK_THROWS_AS(simulate_bns_path(BnsParams{}, repeat(Theta::hold, 3), 4, 1), ParameterError);
}

TEST_CASE("planted regimes and ohlcv export") {
  RegimePlan plan;
  plan.n_steps = 300;
  plan.tail = {{Theta::up, 20}, {Theta::down, 10}};
  const auto r = planted_regimes(plan, 4);
  REQUIRE(r.size() == 300);
  for (std::size_t i = 270; i < 290; ++i) CHECK(r[i] == Theta::up);
  for (std::size_t i = 290; i < 300; ++i) CHECK(r[i] == Theta::down);
  CHECK(r.front() == Theta::hold);
  CHECK(planted_regimes(plan, 4) == r);
  plan.tail = {{Theta::up, 400}};
  CHECK_THROWS_AS(planted_regimes(plan, 4), ParameterError);

  const auto path = simulate_bns_path(BnsParams{}, repeat(Theta::hold, 10), 10, 1);
  const auto bars = bns_path_to_ohlcv(path, parse_date("2021-01-02"));  // a Saturday
  REQUIRE(bars.size() == 11);
  CHECK(format_date(bars.dates()[0]) == "2021-01-04");
  for (const auto& d : bars.dates()) CHECK(is_weekday(d));
  CHECK(bars.close() == path.S);
  CHECK(bars.open() == path.S);
}
