#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "trendlab/indicators.hpp"
#include "trendlab/marketdata.hpp"

namespace trendlab {

// Gate order used for every per-gate array below.
enum Gate : std::size_t { kGateG = 0, kGateI = 1, kGateF = 2, kGateO = 3 };

// One LSTM layer. Row-vector convention: pre-activation = x W_x + h W_h + b,
// so W_x is input_dim x hidden and W_h is hidden x hidden.
struct LstmLayerParams {
  std::array<Eigen::MatrixXd, 4> w_x;
  std::array<Eigen::MatrixXd, 4> w_h;
  std::array<Eigen::VectorXd, 4> b;

  static LstmLayerParams zeros(std::size_t input_dim, std::size_t hidden);
  std::size_t input_dim() const { return static_cast<std::size_t>(w_x[0].rows()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w_h[0].rows()); }
};

struct LstmState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;

  static LstmState zeros(std::size_t hidden);
};

// g = tanh(.), i/f/o = logistic(.), c' = f*c + i*g, h' = o*tanh(c').
LstmState lstm_cell_forward(const Eigen::VectorXd& x, const LstmState& state,
                            const LstmLayerParams& params);

struct DenseHead {
  Eigen::MatrixXd w;  // hidden x outputs
  Eigen::VectorXd b;  // outputs
};

// Stacked LSTM layers whose final top-layer hidden state feeds a dense head.
struct LstmNetwork {
  std::vector<LstmLayerParams> layers;
  DenseHead head;

  static LstmNetwork zeros(std::size_t input_dim, std::size_t hidden, std::size_t layers,
                           std::size_t outputs);
  std::size_t input_dim() const { return layers.front().input_dim(); }
  std::size_t outputs() const { return static_cast<std::size_t>(head.b.size()); }

  // Parameter tensors in a fixed order, flattened.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;
};

// A batch of sequences: steps[t] is input_dim x batch.
using SequenceBatch = std::vector<Eigen::MatrixXd>;

// Outputs (outputs x batch).
Eigen::MatrixXd network_forward(const LstmNetwork& net, const SequenceBatch& batch);
// Hidden states of every layer for every step: [layer][step] is hidden x batch.
std::vector<std::vector<Eigen::MatrixXd>> network_hidden_states(const LstmNetwork& net,
                                                                const SequenceBatch& batch);

// Mean squared error over all outputs and batch columns, with gradients
// accumulated by backpropagation through time into `grad` (same shapes as net).
double mse_loss_and_gradient(const LstmNetwork& net, const SequenceBatch& batch,
                             const Eigen::MatrixXd& targets, LstmNetwork& grad);
double mse_loss(const LstmNetwork& net, const SequenceBatch& batch, const Eigen::MatrixXd& targets);

enum class ForecastFeature { close, momentum, volatility };
std::string_view to_string(ForecastFeature f);
ForecastFeature parse_forecast_feature(std::string_view name);

enum class OptimizerKind { adam, sgd };

// level: inputs and targets are z-scored as given. anchored: the close input
// and the targets are first expressed as relative changes from the window's
// last close, so forecasts follow the series outside the training price range.
// Anchored needs the close feature.
enum class TargetScale { level, anchored };

struct TrainConfig {
  std::size_t layers = 3;
  std::size_t hidden = 32;
  std::size_t epochs = 25;
  double learning_rate = 1e-3;
  std::size_t batch = 16;
  std::uint64_t seed = 0;
  std::vector<ForecastFeature> features = {ForecastFeature::close, ForecastFeature::momentum,
                                           ForecastFeature::volatility};
  OptimizerKind optimizer = OptimizerKind::adam;
  std::size_t input_len = 30;
  std::size_t horizon = 7;
  double forget_bias = 1.0;
  TargetScale target_scale = TargetScale::anchored;

  void validate() const;
};

// z-score statistics from the training windows.
struct Normalization {
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_std;
  double target_mean = 0.0;
  double target_std = 1.0;
  int anchor_feature = -1;  // input column holding the close in anchored mode, else -1

  // Close of the window's last row (anchored mode), else 0.
  double anchor(const Eigen::MatrixXd& window) const;
  // Raw window -> network inputs and back.
  Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& window) const;
  Eigen::MatrixXd denormalize_inputs(const Eigen::MatrixXd& rows, double anchor) const;
  double normalize_target(double v, double anchor) const;
  double denormalize_target(double z, double anchor) const;
};

struct LstmModel {
  TrainConfig config;
  Normalization norm;
  LstmNetwork net;
  std::vector<double> loss_curve;  // mean training MSE per epoch (normalized units)
};

LstmNetwork init_network(std::size_t input_dim, const TrainConfig& cfg);

LstmModel train_forecaster(std::span<const WindowSample> samples, const TrainConfig& cfg);
Eigen::VectorXd forecast_horizon(const LstmModel& model, const WindowSample& window);
Eigen::VectorXd forecast_horizon(const LstmModel& model, const Eigen::MatrixXd& inputs);

// Close, momentum and volatility columns over the whole series (NaN in warm-up).
AlignedFeatures forecaster_features(const OhlcvSeries& series,
                                    std::span<const ForecastFeature> features,
                                    const IndicatorConfig& cfg, PriceField price = PriceField::close);
// First row at which every requested feature is defined.
std::size_t forecaster_warmup(std::span<const ForecastFeature> features, const IndicatorConfig& cfg);

void save_forecaster(const std::filesystem::path& path, const LstmModel& model);
LstmModel load_forecaster(const std::filesystem::path& path);
void write_loss_csv(std::ostream& out, std::span<const double> loss_curve);

}  // namespace trendlab
