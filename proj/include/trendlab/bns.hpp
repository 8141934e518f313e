#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "trendlab/date.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/marketdata.hpp"

namespace trendlab {

// Regime-modulated stochastic volatility with a compound-Poisson subordinator.
// Rates are per year; dt is in years.
struct BnsParams {
  double S0 = 100.0;
  double B = 0.05;
  double Lambda = 0.0;       // regime drift boost, enters as Lambda^2 when theta = +1
  double rho = -0.5;         // jump loading, applied to X only when theta = -1
  double lambda_rate = 2.0;  // variance mean reversion
  double sigma0_sq = 0.04;
  double jump_rate = 5.0;    // a: jumps per unit subordinator time
  double jump_mean = 0.02;   // 1/b: mean exponential jump size
  double dt = 1.0 / 252.0;

  void validate() const;
  double drift(Theta theta) const;
  double jump_loading(Theta theta) const;
};

struct JumpEvent {
  double time = 0.0;
  double size = 0.0;         // subordinator increment, added to sigma^2
  double x_increment = 0.0;  // rho(theta) * size
};

struct BnsPath {
  std::vector<double> S, X, sigma_sq;  // n_steps + 1 points, index 0 is t = 0
  std::vector<JumpEvent> jumps;
};

// regimes[i] governs the step from t_i to t_{i+1}.
BnsPath simulate_bns_path(const BnsParams& params, std::span<const Theta> regimes, std::size_t n_steps,
                          std::uint64_t seed);

// X_T of n_paths independent paths; path k uses derive_seed(seed, k).
std::vector<double> monte_carlo_terminal_x(const BnsParams& params, std::span<const Theta> regimes,
                                           std::size_t n_steps, std::size_t n_paths, std::uint64_t seed);

struct LambdaEstimate {
  double Lambda = 0.0;
  double mean_up_return = 0.0;  // annualized
  std::size_t up_count = 0;
  bool warning = false;         // no +1 labels, Lambda fell back to 0
};

// Lambda^2 = max(0, mean annualized forward log return over +1 positions - B).
LambdaEstimate estimate_big_lambda(const OhlcvSeries& series, std::span<const Theta> theta,
                                   const BnsParams& params, PriceField field = PriceField::close);

struct RegimePlan {
  std::size_t n_steps = 600;
  std::size_t min_block = 30;
  std::size_t max_block = 60;
  // Fixed blocks that end the path, e.g. to put a known regime change inside a test period.
  std::vector<std::pair<Theta, std::size_t>> tail;
};

// Blocks of random length cycling hold -> up -> hold -> down, then the tail.
std::vector<Theta> planted_regimes(const RegimePlan& plan, std::uint64_t seed);

// Close-only bars on consecutive business days starting at `start`
// (rolled forward if it falls on a weekend).
OhlcvSeries bns_path_to_ohlcv(const BnsPath& path, const Date& start);

struct PlantedSeries {
  std::vector<Theta> regimes;
  BnsPath path;
  OhlcvSeries bars;
};

// Planted regimes drawn with derive_seed(seed, 1), path with derive_seed(seed, 2).
PlantedSeries simulate_planted(const BnsParams& params, const RegimePlan& plan, std::uint64_t seed,
                               const Date& start);

// "up:30,down:30" -> tail blocks. Throws ParameterError.
std::vector<std::pair<Theta, std::size_t>> parse_regime_blocks(std::string_view text);

}  // namespace trendlab
