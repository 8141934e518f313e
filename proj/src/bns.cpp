#include "trendlab/bns.hpp"

#include <cmath>
#include <random>
#include <string>

#include "trendlab/error.hpp"
#include "trendlab/random.hpp"
#include "trendlab/text.hpp"

namespace trendlab {

void BnsParams::validate() const {
  auto fail = [](const std::string& what) { throw ParameterError("bns: " + what); };
  if (!(std::isfinite(S0) && S0 > 0.0)) fail("S0 must be positive");
  if (!std::isfinite(B)) fail("B must be finite");
  if (!(std::isfinite(Lambda) && Lambda >= 0.0)) fail("Lambda must be >= 0");
  if (!(std::isfinite(rho) && rho <= 0.0)) fail("rho must be <= 0");
  if (!(std::isfinite(lambda_rate) && lambda_rate > 0.0)) fail("lambda_rate must be > 0");
  if (!(std::isfinite(sigma0_sq) && sigma0_sq >= 0.0)) fail("sigma0_sq must be >= 0");
  if (!(std::isfinite(jump_rate) && jump_rate >= 0.0)) fail("jump_rate must be >= 0");
  if (!(std::isfinite(jump_mean) && jump_mean > 0.0)) fail("jump_mean must be > 0");
  if (!(std::isfinite(dt) && dt > 0.0)) fail("dt must be > 0");
}

double BnsParams::drift(Theta theta) const { return theta == Theta::up ? B + Lambda * Lambda : B; }

double BnsParams::jump_loading(Theta theta) const { return theta == Theta::down ? rho : 0.0; }

BnsPath simulate_bns_path(const BnsParams& params, std::span<const Theta> regimes, std::size_t n_steps,
                          std::uint64_t seed) {
  params.validate();
  if (regimes.size() != n_steps) {
    throw ParameterError("bns: regime path has " + std::to_string(regimes.size()) + " entries for " +
                         std::to_string(n_steps) + " steps");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> jump_size(1.0 / params.jump_mean);
  const double arrival = params.lambda_rate * params.jump_rate;
  std::exponential_distribution<double> gap(arrival > 0.0 ? arrival : 1.0);

  BnsPath path;
  path.S.resize(n_steps + 1);
  path.X.resize(n_steps + 1);
  path.sigma_sq.resize(n_steps + 1);
  path.S[0] = params.S0;
  path.X[0] = 0.0;
  path.sigma_sq[0] = params.sigma0_sq;

  const double dt = params.dt;
  const double decay = std::exp(-params.lambda_rate * dt);
  double next_jump = arrival > 0.0 ? gap(rng) : INFINITY;
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t1 = static_cast<double>(i + 1) * dt;
    const Theta theta = regimes[i];
    const double loading = params.jump_loading(theta);
    const double var = path.sigma_sq[i];

    double z = normal(rng);
    double jump_sum = 0.0, jump_var = 0.0;
    while (next_jump <= t1) {
      const double size = jump_size(rng);
      jump_sum += size;
      jump_var += size * std::exp(-params.lambda_rate * (t1 - next_jump));
      path.jumps.push_back({next_jump, size, loading * size});
      next_jump += gap(rng);
    }
    path.sigma_sq[i + 1] = var * decay + jump_var;
    path.X[i + 1] = path.X[i] + (params.drift(theta) - 0.5 * var) * dt + std::sqrt(var * dt) * z +
                    loading * jump_sum;
    path.S[i + 1] = params.S0 * std::exp(path.X[i + 1]);
  }
  return path;
}

std::vector<double> monte_carlo_terminal_x(const BnsParams& params, std::span<const Theta> regimes,
                                           std::size_t n_steps, std::size_t n_paths, std::uint64_t seed) {
  std::vector<double> out(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) {
    out[k] = simulate_bns_path(params, regimes, n_steps, derive_seed(seed, k)).X.back();
  }
  return out;
}

LambdaEstimate estimate_big_lambda(const OhlcvSeries& series, std::span<const Theta> theta,
                                   const BnsParams& params, PriceField field) {
  params.validate();
  if (theta.size() != series.size()) {
    throw AlignmentError("lambda estimate: " + std::to_string(theta.size()) + " labels for " +
                         std::to_string(series.size()) + " rows");
  }
  const auto& price = series.prices(field);
  LambdaEstimate est;
  double sum = 0.0;
  for (std::size_t t = 0; t + 1 < price.size(); ++t) {
    if (theta[t] != Theta::up) continue;
    sum += std::log(price[t + 1] / price[t]);
    ++est.up_count;
  }
  if (est.up_count == 0) {
    est.warning = true;
    return est;
  }
  est.mean_up_return = sum / static_cast<double>(est.up_count) / params.dt;
  est.Lambda = std::sqrt(std::max(0.0, est.mean_up_return - params.B));
  return est;
}

std::vector<Theta> planted_regimes(const RegimePlan& plan, std::uint64_t seed) {
  if (plan.min_block < 1 || plan.max_block < plan.min_block) {
    throw ParameterError("regime plan: need 1 <= min_block <= max_block");
  }
  std::size_t tail_len = 0;
  for (const auto& block : plan.tail) tail_len += block.second;
  if (tail_len > plan.n_steps) throw ParameterError("regime plan: tail longer than the path");
  const std::size_t body = plan.n_steps - tail_len;
  static constexpr Theta kCycle[] = {Theta::hold, Theta::up, Theta::hold, Theta::down};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(plan.min_block, plan.max_block);
  std::vector<Theta> out;
  out.reserve(plan.n_steps);
  for (std::size_t k = 0; out.size() < body; ++k) {
    const std::size_t len = length(rng);
    for (std::size_t j = 0; j < len && out.size() < body; ++j) out.push_back(kCycle[k % 4]);
  }
  for (const auto& [theta, len] : plan.tail) out.insert(out.end(), len, theta);
  return out;
}

OhlcvSeries bns_path_to_ohlcv(const BnsPath& path, const Date& start) {
  std::vector<Date> dates;
  dates.reserve(path.S.size());
  Date d = is_weekday(start) ? start : next_business_day(start);
  for (std::size_t i = 0; i < path.S.size(); ++i) {
    dates.push_back(d);
    d = next_business_day(d);
  }
  return OhlcvSeries::from_closes(std::move(dates), path.S);
}

PlantedSeries simulate_planted(const BnsParams& params, const RegimePlan& plan, std::uint64_t seed,
                               const Date& start) {
  PlantedSeries out;
  out.regimes = planted_regimes(plan, derive_seed(seed, 1));
  out.path = simulate_bns_path(params, out.regimes, plan.n_steps, derive_seed(seed, 2));
  out.bars = bns_path_to_ohlcv(out.path, start);
  return out;
}

std::vector<std::pair<Theta, std::size_t>> parse_regime_blocks(std::string_view text) {
  std::vector<std::pair<Theta, std::size_t>> blocks;
  for (const auto block : split_csv_line(text)) {
    if (trim(block).empty()) continue;
    const auto colon = block.find(':');
    if (colon == std::string_view::npos) throw ParameterError("regime block '" + std::string(block) + "' has no length");
    const auto name = trim(block.substr(0, colon));
    const auto len = parse_double(trim(block.substr(colon + 1)));
    if (!len || *len < 1 || *len != std::floor(*len)) {
      throw ParameterError("regime block '" + std::string(block) + "' needs a positive whole length");
    }
    Theta t;
    if (name == "hold") {
      t = Theta::hold;
    } else if (name == "up") {
      t = Theta::up;
    } else if (name == "down") {
      t = Theta::down;
    } else {
      throw ParameterError("regime block '" + std::string(block) + "': expected hold, up or down");
    }
    blocks.emplace_back(t, static_cast<std::size_t>(*len));
  }
  return blocks;
}

}  // namespace trendlab
