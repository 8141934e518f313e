#include "trendlab/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "trendlab/error.hpp"
#include "trendlab/text.hpp"

namespace trendlab {

namespace {

Eigen::MatrixXd logistic(const Eigen::MatrixXd& z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

Eigen::MatrixXd tanh_of(const Eigen::MatrixXd& z) { return z.array().tanh().matrix(); }

}  // namespace

LstmLayerParams LstmLayerParams::zeros(std::size_t input_dim, std::size_t hidden) {
  LstmLayerParams p;
  const auto in = static_cast<Eigen::Index>(input_dim);
  const auto h = static_cast<Eigen::Index>(hidden);
  for (std::size_t k = 0; k < 4; ++k) {
    p.w_x[k] = Eigen::MatrixXd::Zero(in, h);
    p.w_h[k] = Eigen::MatrixXd::Zero(h, h);
    p.b[k] = Eigen::VectorXd::Zero(h);
  }
  return p;
}

LstmState LstmState::zeros(std::size_t hidden) {
  const auto h = static_cast<Eigen::Index>(hidden);
  return {Eigen::VectorXd::Zero(h), Eigen::VectorXd::Zero(h)};
}

LstmState lstm_cell_forward(const Eigen::VectorXd& x, const LstmState& state,
                            const LstmLayerParams& p) {
  const auto hidden = static_cast<Eigen::Index>(p.hidden_dim());
  if (x.size() != static_cast<Eigen::Index>(p.input_dim())) {
    throw ShapeError("lstm cell: input has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(p.input_dim()));
  }
  if (state.h.size() != hidden || state.c.size() != hidden) {
    throw ShapeError("lstm cell: state dimension does not match the hidden size");
  }
  if (!x.allFinite() || !state.h.allFinite() || !state.c.allFinite()) {
    throw NumericError("lstm cell: non-finite input or state");
  }
  std::array<Eigen::VectorXd, 4> z;
  for (std::size_t k = 0; k < 4; ++k) {
    z[k] = p.w_x[k].transpose() * x + p.w_h[k].transpose() * state.h + p.b[k];
  }
  const Eigen::ArrayXd g = z[kGateG].array().tanh();
  const Eigen::ArrayXd i = (1.0 + (-z[kGateI].array()).exp()).inverse();
  const Eigen::ArrayXd f = (1.0 + (-z[kGateF].array()).exp()).inverse();
  const Eigen::ArrayXd o = (1.0 + (-z[kGateO].array()).exp()).inverse();
  LstmState next;
  next.c = (f * state.c.array() + i * g).matrix();
  next.h = (o * next.c.array().tanh()).matrix();
  return next;
}

LstmNetwork LstmNetwork::zeros(std::size_t input_dim, std::size_t hidden, std::size_t layers,
                               std::size_t outputs) {
  LstmNetwork net;
  for (std::size_t l = 0; l < layers; ++l) {
    net.layers.push_back(LstmLayerParams::zeros(l == 0 ? input_dim : hidden, hidden));
  }
  net.head.w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(hidden),
                                     static_cast<Eigen::Index>(outputs));
  net.head.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outputs));
  return net;
}

std::vector<std::span<double>> LstmNetwork::tensors() {
  std::vector<std::span<double>> out;
  const auto add = [&](auto& m) { out.emplace_back(m.data(), static_cast<std::size_t>(m.size())); };
  for (auto& layer : layers) {
    for (std::size_t k = 0; k < 4; ++k) {
      add(layer.w_x[k]);
      add(layer.w_h[k]);
      add(layer.b[k]);
    }
  }
  add(head.w);
  add(head.b);
  return out;
}

std::vector<std::span<const double>> LstmNetwork::tensors() const {
  auto mutable_spans = const_cast<LstmNetwork*>(this)->tensors();
  return {mutable_spans.begin(), mutable_spans.end()};
}

// Activations kept for the backward pass; [layer][step] matrices are hidden x batch.
struct ForwardTrace {
  std::vector<std::vector<Eigen::MatrixXd>> g, i, f, o, c, tanh_c, h;
  Eigen::MatrixXd output;
};

namespace {

void check_batch(const LstmNetwork& net, const SequenceBatch& batch) {
  if (net.layers.empty()) throw ShapeError("network has no layers");
  if (batch.empty()) throw ShapeError("empty sequence");
  for (const auto& step : batch) {
    if (step.rows() != static_cast<Eigen::Index>(net.input_dim()) || step.cols() != batch[0].cols()) {
      throw ShapeError("sequence step shape does not match the network input");
    }
  }
}

ForwardTrace run_forward(const LstmNetwork& net, const SequenceBatch& batch) {
  check_batch(net, batch);
  const std::size_t steps = batch.size();
  const Eigen::Index cols = batch[0].cols();
  ForwardTrace tr;
  const std::size_t layers = net.layers.size();
  for (auto* v : {&tr.g, &tr.i, &tr.f, &tr.o, &tr.c, &tr.tanh_c, &tr.h}) {
    v->assign(layers, std::vector<Eigen::MatrixXd>(steps));
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& p = net.layers[l];
    const auto hidden = static_cast<Eigen::Index>(p.hidden_dim());
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(hidden, cols);
    for (std::size_t t = 0; t < steps; ++t) {
      const Eigen::MatrixXd& x = l == 0 ? batch[t] : tr.h[l - 1][t];
      const Eigen::MatrixXd& h_prev = t == 0 ? zero : tr.h[l][t - 1];
      const Eigen::MatrixXd& c_prev = t == 0 ? zero : tr.c[l][t - 1];
      std::array<Eigen::MatrixXd, 4> z;
      for (std::size_t k = 0; k < 4; ++k) {
        z[k] = p.w_x[k].transpose() * x + p.w_h[k].transpose() * h_prev;
        z[k].colwise() += p.b[k];
      }
      tr.g[l][t] = tanh_of(z[kGateG]);
      tr.i[l][t] = logistic(z[kGateI]);
      tr.f[l][t] = logistic(z[kGateF]);
      tr.o[l][t] = logistic(z[kGateO]);
      tr.c[l][t] = tr.f[l][t].cwiseProduct(c_prev) + tr.i[l][t].cwiseProduct(tr.g[l][t]);
      tr.tanh_c[l][t] = tanh_of(tr.c[l][t]);
      tr.h[l][t] = tr.o[l][t].cwiseProduct(tr.tanh_c[l][t]);
    }
  }
  tr.output = net.head.w.transpose() * tr.h.back().back();
  tr.output.colwise() += net.head.b;
  return tr;
}

void zero_like(const LstmNetwork& net, LstmNetwork& grad) {
  grad = net;
  for (auto t : grad.tensors()) std::fill(t.begin(), t.end(), 0.0);
}

}  // namespace

Eigen::MatrixXd network_forward(const LstmNetwork& net, const SequenceBatch& batch) {
  return run_forward(net, batch).output;
}

std::vector<std::vector<Eigen::MatrixXd>> network_hidden_states(const LstmNetwork& net,
                                                                const SequenceBatch& batch) {
  return run_forward(net, batch).h;
}

double mse_loss(const LstmNetwork& net, const SequenceBatch& batch, const Eigen::MatrixXd& targets) {
  const Eigen::MatrixXd out = network_forward(net, batch);
  if (out.rows() != targets.rows() || out.cols() != targets.cols()) {
    throw ShapeError("target shape does not match network output");
  }
  return (out - targets).squaredNorm() / static_cast<double>(out.size());
}

double mse_loss_and_gradient(const LstmNetwork& net, const SequenceBatch& batch,
                             const Eigen::MatrixXd& targets, LstmNetwork& grad) {
  const ForwardTrace tr = run_forward(net, batch);
  if (tr.output.rows() != targets.rows() || tr.output.cols() != targets.cols()) {
    throw ShapeError("target shape does not match network output");
  }
  zero_like(net, grad);
  const Eigen::MatrixXd residual = tr.output - targets;
  const double loss = residual.squaredNorm() / static_cast<double>(residual.size());
  const Eigen::MatrixXd d_out = residual * (2.0 / static_cast<double>(residual.size()));

  const std::size_t layers = net.layers.size();
  const std::size_t steps = batch.size();
  const Eigen::Index cols = batch[0].cols();

  grad.head.w = tr.h.back().back() * d_out.transpose();
  grad.head.b = d_out.rowwise().sum();

  // Gradient arriving at each step's hidden output from the layer above.
  std::vector<Eigen::MatrixXd> d_from_above(steps);
  for (std::size_t l = layers; l-- > 0;) {
    const auto& p = net.layers[l];
    auto& gp = grad.layers[l];
    const auto hidden = static_cast<Eigen::Index>(p.hidden_dim());
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(hidden, cols);
    std::vector<Eigen::MatrixXd> d_input(steps);
    Eigen::MatrixXd dh_next = zero;
    Eigen::MatrixXd dc_next = zero;
    for (std::size_t t = steps; t-- > 0;) {
      Eigen::MatrixXd dh = dh_next;
      if (l + 1 == layers) {
        if (t + 1 == steps) dh += net.head.w * d_out;
      } else {
        dh += d_from_above[t];
      }
      const auto& g = tr.g[l][t].array();
      const auto& i = tr.i[l][t].array();
      const auto& f = tr.f[l][t].array();
      const auto& o = tr.o[l][t].array();
      const auto& tc = tr.tanh_c[l][t].array();
      const Eigen::MatrixXd& c_prev = t == 0 ? zero : tr.c[l][t - 1];
      const Eigen::MatrixXd& h_prev = t == 0 ? zero : tr.h[l][t - 1];
      const Eigen::MatrixXd& x = l == 0 ? batch[t] : tr.h[l - 1][t];

      const Eigen::ArrayXXd dc = dc_next.array() + dh.array() * o * (1.0 - tc.square());
      std::array<Eigen::MatrixXd, 4> dz;
      dz[kGateO] = (dh.array() * tc * o * (1.0 - o)).matrix();
      dz[kGateF] = (dc * c_prev.array() * f * (1.0 - f)).matrix();
      dz[kGateI] = (dc * g * i * (1.0 - i)).matrix();
      dz[kGateG] = (dc * i * (1.0 - g.square())).matrix();
      dc_next = (dc * f).matrix();

      dh_next = zero;
      d_input[t] = Eigen::MatrixXd::Zero(x.rows(), cols);
      for (std::size_t k = 0; k < 4; ++k) {
        gp.w_x[k].noalias() += x * dz[k].transpose();
        gp.w_h[k].noalias() += h_prev * dz[k].transpose();
        gp.b[k] += dz[k].rowwise().sum();
        dh_next.noalias() += p.w_h[k] * dz[k];
        d_input[t].noalias() += p.w_x[k] * dz[k];
      }
    }
    d_from_above = std::move(d_input);
  }
  return loss;
}

std::string_view to_string(ForecastFeature f) {
  switch (f) {
    case ForecastFeature::close: return "close";
    case ForecastFeature::momentum: return "momentum";
    case ForecastFeature::volatility: return "volatility";
  }
  return "unknown";
}

ForecastFeature parse_forecast_feature(std::string_view name) {
  for (auto f : {ForecastFeature::close, ForecastFeature::momentum, ForecastFeature::volatility}) {
    if (to_string(f) == name) return f;
  }
  throw InputError("unknown forecaster feature '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (layers < 1) throw InputError("forecaster: layers must be >= 1");
  if (hidden < 1) throw InputError("forecaster: hidden size must be >= 1");
  if (epochs < 1) throw InputError("forecaster: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw InputError("forecaster: learning rate must be > 0");
  if (batch < 1) throw InputError("forecaster: batch must be >= 1");
  if (features.empty()) throw InputError("forecaster: at least one feature required");
  if (input_len < 1 || horizon < 1) throw InputError("forecaster: window lengths must be >= 1");
  if (target_scale == TargetScale::anchored &&
      std::find(features.begin(), features.end(), ForecastFeature::close) == features.end()) {
    throw InputError("forecaster: anchored targets need the close feature");
  }
}

double Normalization::anchor(const Eigen::MatrixXd& window) const {
  if (anchor_feature < 0) return 0.0;
  const double a = window(window.rows() - 1, anchor_feature);
  if (!(a > 0.0)) throw NumericError("anchored scaling needs a positive last close");
  return a;
}

namespace {

Eigen::MatrixXd relative_inputs(const Eigen::MatrixXd& window, int anchor_feature) {
  Eigen::MatrixXd out = window;
  if (anchor_feature >= 0) {
    const double a = window(window.rows() - 1, anchor_feature);
    if (!(a > 0.0)) throw NumericError("anchored scaling needs a positive last close");
    out.col(anchor_feature) = (window.col(anchor_feature).array() / a - 1.0).matrix();
  }
  return out;
}

double relative_target(double v, double anchor, int anchor_feature) {
  return anchor_feature >= 0 ? v / anchor - 1.0 : v;
}

}  // namespace

Eigen::MatrixXd Normalization::normalize_inputs(const Eigen::MatrixXd& window) const {
  return ((relative_inputs(window, anchor_feature).rowwise() - feature_mean.transpose()).array().rowwise() /
          feature_std.transpose().array())
      .matrix();
}

Eigen::MatrixXd Normalization::denormalize_inputs(const Eigen::MatrixXd& rows, double anchor) const {
  Eigen::MatrixXd out = (rows.array().rowwise() * feature_std.transpose().array()).matrix().rowwise() +
                        feature_mean.transpose();
  if (anchor_feature >= 0) out.col(anchor_feature) = ((out.col(anchor_feature).array() + 1.0) * anchor).matrix();
  return out;
}

double Normalization::normalize_target(double v, double anchor) const {
  return (relative_target(v, anchor, anchor_feature) - target_mean) / target_std;
}

double Normalization::denormalize_target(double z, double anchor) const {
  const double x = z * target_std + target_mean;
  return anchor_feature >= 0 ? anchor * (1.0 + x) : x;
}

LstmNetwork init_network(std::size_t input_dim, const TrainConfig& cfg) {
  LstmNetwork net = LstmNetwork::zeros(input_dim, cfg.hidden, cfg.layers, cfg.horizon);
  std::mt19937_64 rng(cfg.seed);
  const auto fill = [&](Eigen::MatrixXd& m, double range) {
    std::uniform_real_distribution<double> u(-range, range);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  };
  for (auto& layer : net.layers) {
    const double range = 1.0 / std::sqrt(static_cast<double>(layer.input_dim() + layer.hidden_dim()));
    for (std::size_t k = 0; k < 4; ++k) {
      fill(layer.w_x[k], range);
      fill(layer.w_h[k], range);
    }
    layer.b[kGateF].setConstant(cfg.forget_bias);
  }
  fill(net.head.w, 1.0 / std::sqrt(static_cast<double>(cfg.hidden)));
  return net;
}

namespace {

Normalization fit_normalization(std::span<const WindowSample> samples, const TrainConfig& cfg) {
  const Eigen::Index nf = samples.front().inputs.cols();
  Normalization norm;
  if (cfg.target_scale == TargetScale::anchored) {
    const auto it = std::find(cfg.features.begin(), cfg.features.end(), ForecastFeature::close);
    norm.anchor_feature = static_cast<int>(it - cfg.features.begin());
  }
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::VectorXd> targets;
  for (const auto& s : samples) {
    inputs.push_back(relative_inputs(s.inputs, norm.anchor_feature));
    const double a = norm.anchor(s.inputs);
    targets.push_back(s.targets.unaryExpr([&](double v) { return relative_target(v, a, norm.anchor_feature); }));
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(nf), sq = Eigen::VectorXd::Zero(nf);
  double count = 0.0, tsum = 0.0, tsq = 0.0, tcount = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    sum += inputs[k].colwise().sum().transpose();
    count += static_cast<double>(inputs[k].rows());
    tsum += targets[k].sum();
    tcount += static_cast<double>(targets[k].size());
  }
  norm.feature_mean = sum / count;
  norm.target_mean = tsum / tcount;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    sq += (inputs[k].rowwise() - norm.feature_mean.transpose()).colwise().squaredNorm().transpose();
    tsq += (targets[k].array() - norm.target_mean).square().sum();
  }
  norm.feature_std = (sq / count).cwiseSqrt();
  for (Eigen::Index k = 0; k < nf; ++k) {
    if (norm.feature_std[k] < 1e-12) norm.feature_std[k] = 1.0;
  }
  norm.target_std = std::sqrt(tsq / tcount);
  if (norm.target_std < 1e-12) norm.target_std = 1.0;
  return norm;
}

class Adam {
 public:
  Adam(const LstmNetwork& net, double lr) : lr_(lr) {
    for (auto t : net.tensors()) {
      m_.emplace_back(t.size(), 0.0);
      v_.emplace_back(t.size(), 0.0);
    }
  }

  void step(LstmNetwork& net, const LstmNetwork& grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    auto params = net.tensors();
    const auto grads = grad.tensors();
    for (std::size_t k = 0; k < params.size(); ++k) {
      for (std::size_t j = 0; j < params[k].size(); ++j) {
        const double g = grads[k][j];
        m_[k][j] = kBeta1 * m_[k][j] + (1.0 - kBeta1) * g;
        v_[k][j] = kBeta2 * v_[k][j] + (1.0 - kBeta2) * g * g;
        params[k][j] -= lr_ * (m_[k][j] / bc1) / (std::sqrt(v_[k][j] / bc2) + kEps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

SequenceBatch make_batch(std::span<const Eigen::MatrixXd> inputs, std::span<const std::size_t> idx) {
  const Eigen::Index steps = inputs[idx[0]].rows();
  const Eigen::Index nf = inputs[idx[0]].cols();
  SequenceBatch batch(static_cast<std::size_t>(steps),
                      Eigen::MatrixXd(nf, static_cast<Eigen::Index>(idx.size())));
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const auto& seq = inputs[idx[b]];
    for (Eigen::Index t = 0; t < steps; ++t) {
      batch[static_cast<std::size_t>(t)].col(static_cast<Eigen::Index>(b)) = seq.row(t).transpose();
    }
  }
  return batch;
}

}  // namespace

LstmModel train_forecaster(std::span<const WindowSample> samples, const TrainConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw InputError("train_forecaster: no training samples");
  const auto nf = static_cast<Eigen::Index>(cfg.features.size());
  for (const auto& s : samples) {
    if (s.inputs.rows() != static_cast<Eigen::Index>(cfg.input_len) || s.inputs.cols() != nf ||
        s.targets.size() != static_cast<Eigen::Index>(cfg.horizon)) {
      throw ShapeError("train_forecaster: sample shape does not match the configuration");
    }
    if (!s.inputs.allFinite() || !s.targets.allFinite()) {
      throw NumericError("train_forecaster: non-finite sample values");
    }
  }

  LstmModel model;
  model.config = cfg;
  model.norm = fit_normalization(samples, cfg);
  model.net = init_network(static_cast<std::size_t>(nf), cfg);

  std::vector<Eigen::MatrixXd> inputs;
  Eigen::MatrixXd targets(static_cast<Eigen::Index>(cfg.horizon),
                          static_cast<Eigen::Index>(samples.size()));
  for (std::size_t s = 0; s < samples.size(); ++s) {
    inputs.push_back(model.norm.normalize_inputs(samples[s].inputs));
    const double anchor = model.norm.anchor(samples[s].inputs);
    for (Eigen::Index h = 0; h < targets.rows(); ++h) {
      targets(h, static_cast<Eigen::Index>(s)) = model.norm.normalize_target(samples[s].targets[h], anchor);
    }
  }

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Adam adam(model.net, cfg.learning_rate);
  LstmNetwork grad;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t k = order.size(); k > 1; --k) {
      std::uniform_int_distribution<std::size_t> pick(0, k - 1);
      std::swap(order[k - 1], order[pick(rng)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const SequenceBatch batch = make_batch(inputs, idx);
      Eigen::MatrixXd batch_targets(targets.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t b = 0; b < idx.size(); ++b) {
        batch_targets.col(static_cast<Eigen::Index>(b)) = targets.col(static_cast<Eigen::Index>(idx[b]));
      }
      const double loss = mse_loss_and_gradient(model.net, batch, batch_targets, grad);
      if (!std::isfinite(loss)) throw TrainingError(epoch, "training loss is not finite");
      epoch_loss += loss * static_cast<double>(idx.size());
      if (cfg.optimizer == OptimizerKind::adam) {
        adam.step(model.net, grad);
      } else {
        auto params = model.net.tensors();
        const auto grads = grad.tensors();
        for (std::size_t t = 0; t < params.size(); ++t) {
          for (std::size_t j = 0; j < params[t].size(); ++j) params[t][j] -= cfg.learning_rate * grads[t][j];
        }
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) throw TrainingError(epoch, "training loss is not finite");
    model.loss_curve.push_back(epoch_loss);
  }
  return model;
}

Eigen::VectorXd forecast_horizon(const LstmModel& model, const Eigen::MatrixXd& inputs) {
  const auto& cfg = model.config;
  if (inputs.rows() != static_cast<Eigen::Index>(cfg.input_len)) {
    throw ShapeError("forecast: window has " + std::to_string(inputs.rows()) + " rows, expected " +
                     std::to_string(cfg.input_len));
  }
  if (inputs.cols() != static_cast<Eigen::Index>(cfg.features.size())) {
    throw ShapeError("forecast: window has " + std::to_string(inputs.cols()) +
                     " features, model expects " + std::to_string(cfg.features.size()));
  }
  if (!inputs.allFinite()) throw NumericError("forecast: non-finite window values");
  const Eigen::MatrixXd normalized = model.norm.normalize_inputs(inputs);
  SequenceBatch batch;
  for (Eigen::Index t = 0; t < normalized.rows(); ++t) batch.push_back(normalized.row(t).transpose());
  const Eigen::MatrixXd out = network_forward(model.net, batch);
  Eigen::VectorXd forecast(out.rows());
  const double anchor = model.norm.anchor(inputs);
  for (Eigen::Index h = 0; h < out.rows(); ++h) forecast[h] = model.norm.denormalize_target(out(h, 0), anchor);
  return forecast;
}

Eigen::VectorXd forecast_horizon(const LstmModel& model, const WindowSample& window) {
  return forecast_horizon(model, window.inputs);
}

std::size_t forecaster_warmup(std::span<const ForecastFeature> features, const IndicatorConfig& cfg) {
  std::size_t warmup = 0;
  for (auto f : features) {
    if (f == ForecastFeature::momentum) warmup = std::max(warmup, cfg.momentum_lag);
    if (f == ForecastFeature::volatility) warmup = std::max(warmup, cfg.vol_window);
  }
  return warmup;
}

AlignedFeatures forecaster_features(const OhlcvSeries& series,
                                    std::span<const ForecastFeature> features,
                                    const IndicatorConfig& cfg, PriceField price) {
  if (features.empty()) throw InputError("forecaster features: empty feature list");
  const auto& close = series.prices(price);
  AlignedFeatures out;
  out.dates = series.dates();
  out.values.resize(static_cast<Eigen::Index>(series.size()), static_cast<Eigen::Index>(features.size()));
  const bool needs_mv = std::any_of(features.begin(), features.end(),
                                    [](auto f) { return f != ForecastFeature::close; });
  MomentumVolatility mv;
  if (needs_mv) mv = momentum_and_volatility(close, cfg.momentum_lag, cfg.vol_window);
  for (std::size_t c = 0; c < features.size(); ++c) {
    out.names.emplace_back(to_string(features[c]));
    for (std::size_t t = 0; t < series.size(); ++t) {
      double v = close[t];
      if (features[c] == ForecastFeature::momentum) v = mv.momentum.values[t];
      if (features[c] == ForecastFeature::volatility) v = mv.volatility.values[t];
      out.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return out;
}

void write_loss_csv(std::ostream& out, std::span<const double> loss_curve) {
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < loss_curve.size(); ++e) {
    out << e + 1 << ',' << format_double(loss_curve[e]) << '\n';
  }
}

}  // namespace trendlab
