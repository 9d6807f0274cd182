#include "enose/regress.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "text_io.hpp"

namespace enose::mlp {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Activations per layer for one input; acts[0] is the input itself.
std::vector<std::vector<double>> forward_all(const Network& net, std::span<const double> x) {
  std::vector<std::vector<double>> acts;
  acts.reserve(net.layers.size() + 1);
  acts.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const bool output = l + 1 == net.layers.size();
    std::vector<double> a(layer.bias.size());
    for (std::size_t o = 0; o < a.size(); ++o) {
      const double z = layer.bias[o] + dot(layer.weights.row(o), acts.back());
      a[o] = output ? z : sigmoid(z);
    }
    acts.push_back(std::move(a));
  }
  return acts;
}

// Accumulates scale * d(1/2 err^2)/d(params) into grads (same shapes as net).
void backprop(const Network& net, const std::vector<std::vector<double>>& acts, double err,
              double scale, std::vector<Layer>& grads) {
  std::vector<double> delta{err};
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& layer = net.layers[l];
    const auto& input = acts[l];
    auto& g = grads[l];
    for (std::size_t o = 0; o < delta.size(); ++o) {
      g.bias[o] += scale * delta[o];
      auto row = g.weights.row(o);
      for (std::size_t i = 0; i < input.size(); ++i) row[i] += scale * delta[o] * input[i];
    }
    if (l == 0) break;
    std::vector<double> prev(input.size(), 0.0);
    for (std::size_t o = 0; o < delta.size(); ++o) {
      const auto w = layer.weights.row(o);
      for (std::size_t i = 0; i < input.size(); ++i) prev[i] += w[i] * delta[o];
    }
    for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= input[i] * (1.0 - input[i]);
    delta = std::move(prev);
  }
}

std::vector<Layer> zero_like(const Network& net) {
  std::vector<Layer> g;
  for (const auto& l : net.layers)
    g.push_back({Matrix(l.weights.rows(), l.weights.cols()), std::vector<double>(l.bias.size(), 0.0)});
  return g;
}

}  // namespace

void MlpConfig::validate() const {
  if (input_dim == 0) throw std::invalid_argument("MlpConfig: input_dim must be >= 1");
  for (auto h : hidden_layers)
    if (h == 0) throw std::invalid_argument("MlpConfig: hidden layer sizes must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("MlpConfig: learning rate must be > 0");
  if (epochs < 1) throw std::invalid_argument("MlpConfig: epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("MlpConfig: patience must be >= 1");
  if (!(min_improvement >= 0.0)) throw std::invalid_argument("MlpConfig: min_improvement must be >= 0");
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.rows() * l.weights.cols() + l.bias.size();
  return n;
}

double Network::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("mlp forward: input dimension mismatch");
  return forward_all(*this, x).back().front();
}

std::vector<double> Network::parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (const auto& l : layers) {
    p.insert(p.end(), l.weights.data().begin(), l.weights.data().end());
    p.insert(p.end(), l.bias.begin(), l.bias.end());
  }
  return p;
}

void Network::set_parameters(std::span<const double> p) {
  if (p.size() != parameter_count()) throw std::invalid_argument("set_parameters: size mismatch");
  std::size_t k = 0;
  for (auto& l : layers) {
    for (auto& w : l.weights.data()) w = p[k++];
    for (auto& b : l.bias) b = p[k++];
  }
}

Network init_network(std::size_t input_dim, std::span<const std::size_t> hidden, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Network net;
  std::size_t fan_in = input_dim;
  auto add = [&](std::size_t out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Layer l{Matrix(out, fan_in), std::vector<double>(out)};
    for (auto& w : l.weights.data()) w = u(rng);
    for (auto& b : l.bias) b = u(rng);
    net.layers.push_back(std::move(l));
    fan_in = out;
  };
  for (auto h : hidden) add(h);
  add(1);
  return net;
}

LossGradient loss_and_gradient(const Network& net, const Matrix& x, std::span<const double> targets) {
  if (x.rows() != targets.size() || x.rows() == 0)
    throw std::invalid_argument("loss_and_gradient: batch/target mismatch");
  auto grads = zero_like(net);
  const double scale = 1.0 / static_cast<double>(x.rows());
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto acts = forward_all(net, x.row(i));
    const double err = acts.back().front() - targets[i];
    loss += 0.5 * err * err * scale;
    backprop(net, acts, err, scale, grads);
  }
  Network g;
  g.layers = std::move(grads);
  return {loss, g.parameters()};
}

double mlp_forward(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.input_scaler.dim())
    throw std::invalid_argument("mlp_forward: expected " + std::to_string(model.input_scaler.dim()) +
                                " inputs, got " + std::to_string(x.size()));
  const auto z = model.input_scaler.apply(x);
  return model.target_min + model.target_span * model.network.forward(z);
}

std::vector<double> mlp_predict(const MlpModel& model, const Matrix& x) {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = mlp_forward(model, x.row(i));
  return out;
}

MlpModel mlp_train(const Matrix& x, std::span<const double> targets_ppm, const MlpConfig& config) {
  config.validate();
  const std::size_t n = x.rows();
  if (n == 0) throw std::invalid_argument("mlp_train: empty training set");
  if (targets_ppm.size() != n) throw std::invalid_argument("mlp_train: target count mismatch");
  if (x.cols() != config.input_dim)
    throw std::invalid_argument("mlp_train: input has " + std::to_string(x.cols()) +
                                " columns, config expects " + std::to_string(config.input_dim));
  for (double t : targets_ppm)
    if (!std::isfinite(t)) throw std::invalid_argument("mlp_train: non-finite target");

  MlpModel model;
  model.input_scaler = prep::fit_standardizer(x);
  const Matrix z = model.input_scaler.apply(x);
  const auto [lo, hi] = std::minmax_element(targets_ppm.begin(), targets_ppm.end());
  model.target_min = *lo;
  model.target_span = *hi > *lo ? *hi - *lo : 1.0;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = (targets_ppm[i] - model.target_min) / model.target_span;

  model.network = init_network(config.input_dim, config.hidden_layers, config.seed);
  auto& net = model.network;

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  auto epoch_mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = net.forward(z.row(i)) - t[i];
      s += e * e;
    }
    return s / static_cast<double>(n);
  };

  auto grads = zero_like(net);
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      for (auto& g : grads) {
        std::fill(g.weights.data().begin(), g.weights.data().end(), 0.0);
        std::fill(g.bias.begin(), g.bias.end(), 0.0);
      }
      const auto acts = forward_all(net, z.row(idx));
      const double err = acts.back().front() - t[idx];
      backprop(net, acts, err, 1.0, grads);
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto w = net.layers[l].weights.data();
        const auto gw = grads[l].weights.data();
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= config.learning_rate * gw[k];
        for (std::size_t k = 0; k < net.layers[l].bias.size(); ++k)
          net.layers[l].bias[k] -= config.learning_rate * grads[l].bias[k];
      }
    }
    const double mse = epoch_mse();
    if (!std::isfinite(mse))
      throw TrainingDiverged("mlp_train: loss became non-finite at epoch " + std::to_string(epoch + 1) +
                                 " (lr " + format_double(config.learning_rate) + ")",
                             epoch + 1);
    model.loss_trace.push_back(mse);
    if (mse <= best - config.min_improvement) {
      best = mse;
      best_epoch = epoch;
    } else if (epoch - best_epoch >= config.patience) {
      break;
    }
  }
  return model;
}

RegressionMetrics evaluate_regression(std::span<const double> predictions, std::span<const double> targets) {
  if (targets.empty()) throw std::invalid_argument("evaluate_regression: empty test set");
  if (predictions.size() != targets.size())
    throw std::invalid_argument("evaluate_regression: prediction/target count mismatch");
  const double n = static_cast<double>(targets.size());
  double se = 0.0, ae = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double e = predictions[i] - targets[i];
    se += e * e;
    ae += std::abs(e);
    mean += targets[i];
  }
  mean /= n;
  double ss_tot = 0.0;
  for (double t : targets) ss_tot += (t - mean) * (t - mean);
  RegressionMetrics m;
  m.rmse = std::sqrt(se / n);
  m.mae = ae / n;
  if (ss_tot > 0.0) m.r2 = 1.0 - se / ss_tot;
  return m;
}

RegressionMetrics evaluate_regression(const MlpModel& model, const Matrix& x, std::span<const double> targets) {
  return evaluate_regression(mlp_predict(model, x), targets);
}

void write_mlp(std::ostream& out, const MlpModel& m) {
  out << "mlp " << m.network.layers.size() << ' ' << format_double(m.target_min) << ' '
      << format_double(m.target_span) << '\n';
  prep::write_standardizer(out, m.input_scaler);
  for (const auto& l : m.network.layers) {
    detail::write_matrix(out, "weights", l.weights);
    detail::write_vector(out, "bias", l.bias);
  }
  detail::write_vector(out, "loss_trace", m.loss_trace);
}

MlpModel read_mlp(std::istream& in) {
  detail::expect_token(in, "mlp");
  MlpModel m;
  const auto layers = detail::read_value<std::size_t>(in, "layer count");
  m.target_min = detail::read_value<double>(in, "target min");
  m.target_span = detail::read_value<double>(in, "target span");
  m.input_scaler = prep::read_standardizer(in);
  std::size_t expected_in = m.input_scaler.dim();
  for (std::size_t i = 0; i < layers; ++i) {
    Layer l;
    l.weights = detail::read_matrix(in, "weights");
    l.bias = detail::read_vector(in, "bias");
    if (l.weights.cols() != expected_in || l.bias.size() != l.weights.rows())
      throw std::runtime_error("model file: mlp layer shapes do not chain");
    expected_in = l.weights.rows();
    m.network.layers.push_back(std::move(l));
  }
  if (expected_in != 1) throw std::runtime_error("model file: mlp output must be scalar");
  m.loss_trace = detail::read_vector(in, "loss_trace");
  return m;
}

}  // namespace enose::mlp
